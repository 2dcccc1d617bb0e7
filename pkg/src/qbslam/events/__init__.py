from qbslam.events.bus import EventBus
from qbslam.events.models import FrameEncodedEvent, LoopClosureEvent

__all__ = ['EventBus', 'FrameEncodedEvent', 'LoopClosureEvent']
