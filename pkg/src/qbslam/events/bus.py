"""
Per-pipeline event bus.

Encoding and localisation publish one event per frame or loop closure; telemetry
collectors subscribe for the duration of a pass. Dispatch is synchronous and keyed
on the exact event class.
"""

from collections import defaultdict
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from threading import Lock
from typing import TypeVar

from qbslam.events.models import FrameEncodedEvent, LoopClosureEvent
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('EventBus')

PipelineEvent = FrameEncodedEvent | LoopClosureEvent
E = TypeVar('E', FrameEncodedEvent, LoopClosureEvent)
Handler = Callable[[E], None]


class EventBus:
    """
    Thread-safe dispatcher from pipeline event classes to their handlers.

    A handler that raises is logged and counted in :attr:`failures`; the remaining
    handlers still receive the event.
    """

    def __init__(self) -> None:
        self._handlers: dict[type, list[Callable]] = defaultdict(list)
        self._lock = Lock()
        self.failures = 0

    def subscribe(self, event_type: type[E], handler: Handler) -> None:
        """
        Register ``handler`` for events of exactly ``event_type``.

        Example:
            bus.subscribe(FrameEncodedEvent, telemetry.handle_frame)
        """
        with self._lock:
            self._handlers[event_type].append(handler)

    def unsubscribe(self, event_type: type[E], handler: Handler) -> bool:
        """Drop the first registration of ``handler``; False if it was not registered."""
        with self._lock:
            registered = self._handlers[event_type]
            if handler not in registered:
                return False
            registered.remove(handler)
            return True

    @contextmanager
    def subscribed(self, event_type: type[E], handler: Handler) -> Iterator[None]:
        """Keep ``handler`` registered for the body of a ``with`` block only."""
        self.subscribe(event_type, handler)
        try:
            yield
        finally:
            self.unsubscribe(event_type, handler)

    def publish(self, event: PipelineEvent) -> None:
        """Call every handler of ``type(event)`` in registration order."""
        with self._lock:
            handlers = tuple(self._handlers[type(event)])

        for handler in handlers:
            try:
                handler(event)
            except Exception:  # noqa: BLE001
                self.failures += 1
                logger.exception(f'Handler {getattr(handler, "__qualname__", handler)!r} failed on {event!r}')

    def get_subscriber_count(self, event_type: type[E]) -> int:
        with self._lock:
            return len(self._handlers[event_type])

    def clear_all_subscriptions(self) -> None:
        with self._lock:
            self._handlers.clear()
