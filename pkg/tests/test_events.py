import math

import pytest

from qbslam.events import EventBus, FrameEncodedEvent, LoopClosureEvent


def frame_event(k=0, error=1.0, gate_open=True):
    return FrameEncodedEvent(
        k=k, timestamp=k / 10.0, error=error, s2_raw=None, s2_filtered=1.0, gate_open=gate_open, learned=True
    )


class TestEventModels:
    def test_frame_event_validation(self):
        with pytest.raises(ValueError, match='negative'):
            frame_event(k=-1)
        with pytest.raises(ValueError, match='finite'):
            frame_event(error=math.inf)
        with pytest.raises(ValueError):
            frame_event(error=-0.5)

    def test_frame_event_repr(self):
        assert repr(frame_event(k=3, gate_open=False)) == 'FrameEncodedEvent(k=3, e=1, s2=1, gate=closed)'

    def test_loop_closure_cannot_link_to_itself(self):
        with pytest.raises(ValueError):
            LoopClosureEvent(experience_id=4, template_id=0, matched_experience_id=4, similarity=0.95, timestamp=1.0)


class TestEventBus:
    def test_publish_reaches_subscribers_of_that_type_only(self):
        bus = EventBus()
        frames, loops = [], []
        bus.subscribe(FrameEncodedEvent, frames.append)
        bus.subscribe(LoopClosureEvent, loops.append)

        event = frame_event()
        bus.publish(event)

        assert frames == [event]
        assert loops == []

    def test_handlers_run_in_registration_order(self):
        bus = EventBus()
        calls = []
        bus.subscribe(FrameEncodedEvent, lambda e: calls.append('first'))
        bus.subscribe(FrameEncodedEvent, lambda e: calls.append('second'))
        bus.publish(frame_event())
        assert calls == ['first', 'second']

    def test_failing_handler_does_not_stop_the_others(self, caplog):
        bus = EventBus()
        received = []

        def broken(event):
            raise RuntimeError('boom')

        bus.subscribe(FrameEncodedEvent, broken)
        bus.subscribe(FrameEncodedEvent, received.append)
        caplog.set_level('ERROR', logger='qbslam.EventBus')

        bus.publish(frame_event())

        assert len(received) == 1
        assert bus.failures == 1
        assert any('broken' in record.getMessage() for record in caplog.records)

    def test_unsubscribe(self):
        bus = EventBus()
        received = []
        bus.subscribe(FrameEncodedEvent, received.append)

        assert bus.unsubscribe(FrameEncodedEvent, received.append) is True
        assert bus.unsubscribe(FrameEncodedEvent, received.append) is False
        bus.publish(frame_event())

        assert received == []
        assert bus.get_subscriber_count(FrameEncodedEvent) == 0

    def test_clear_all_subscriptions(self):
        bus = EventBus()
        bus.subscribe(FrameEncodedEvent, print)
        bus.subscribe(LoopClosureEvent, print)
        bus.clear_all_subscriptions()
        assert bus.get_subscriber_count(FrameEncodedEvent) == 0
        assert bus.get_subscriber_count(LoopClosureEvent) == 0

    def test_scoped_subscription(self):
        bus = EventBus()
        received = []

        with bus.subscribed(LoopClosureEvent, received.append):
            assert bus.get_subscriber_count(LoopClosureEvent) == 1
            bus.publish(LoopClosureEvent(experience_id=5, template_id=0, matched_experience_id=1, similarity=0.97, timestamp=2.0))

        bus.publish(LoopClosureEvent(experience_id=6, template_id=0, matched_experience_id=1, similarity=0.97, timestamp=2.1))
        assert [event.experience_id for event in received] == [5]
        assert bus.get_subscriber_count(LoopClosureEvent) == 0

    def test_scoped_subscription_is_released_on_error(self):
        bus = EventBus()
        with pytest.raises(RuntimeError), bus.subscribed(FrameEncodedEvent, print):
            raise RuntimeError('stop')
        assert bus.get_subscriber_count(FrameEncodedEvent) == 0
