"""Single-producer fan-out with per-consumer drop-oldest buffering.

The capture loop publishes each sealed frame once; every stream
connection holds its own small deque. A slow consumer loses its oldest
queued frames instead of backpressuring the producer, so one stalled
client can never slow the loop or the other clients.
"""

from __future__ import annotations

import threading
from collections import deque
from typing import Any, Optional


class Subscription:
    def __init__(self, hub: "Broadcast", depth: int):
        self._hub = hub
        self._items: deque = deque(maxlen=depth)
        self._cond = threading.Condition()
        self.closed = False

    def _push(self, item: Any) -> None:
        with self._cond:
            self._items.append(item)  # deque drops the oldest when full
            self._cond.notify()

    def _close(self) -> None:
        with self._cond:
            self.closed = True
            self._cond.notify()

    def get(self, timeout: Optional[float] = None) -> Optional[Any]:
        """Next item in arrival order; None when closed or timed out."""
        with self._cond:
            if not self._items:
                self._cond.wait(timeout)
            if self._items:
                return self._items.popleft()
            return None

    def cancel(self) -> None:
        self._hub.unsubscribe(self)


class Broadcast:
    def __init__(self, depth: int = 4):
        self._depth = depth
        self._lock = threading.Lock()
        self._subs: list[Subscription] = []
        self._closed = False

    def subscribe(self) -> Subscription:
        sub = Subscription(self, self._depth)
        with self._lock:
            if self._closed:
                sub._close()
            else:
                self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            try:
                self._subs.remove(sub)
            except ValueError:
                pass
        sub._close()

    def publish(self, item: Any) -> None:
        with self._lock:
            subs = list(self._subs)
        for sub in subs:
            sub._push(item)

    def close(self) -> None:
        """Wake every consumer; get() returns None from here on."""
        with self._lock:
            self._closed = True
            subs = list(self._subs)
            self._subs.clear()
        for sub in subs:
            sub._close()
