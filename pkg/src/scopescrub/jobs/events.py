"""In-process progress event fan-out with full-history replay.

Every event for a job is kept; a late subscriber first receives the whole
history in emission order, then live events. Queues are unbounded because
event volume per job is small (a few hundred at most).
"""

import queue
import threading

from scopescrub.jobs.models import ProgressEvent


class EventBus:
    def __init__(self):
        self._lock = threading.Lock()
        self._history = {}
        self._subscribers = {}

    def emit(self, job_id, event: ProgressEvent):
        with self._lock:
            self._history.setdefault(job_id, []).append(event)
            for q in self._subscribers.get(job_id, []):
                q.put(event)

    def subscribe(self, job_id):
        """Returns a Queue preloaded with history; unsubscribe when done."""
        q = queue.Queue()
        with self._lock:
            for event in self._history.get(job_id, []):
                q.put(event)
            self._subscribers.setdefault(job_id, []).append(q)
        return q

    def unsubscribe(self, job_id, q):
        with self._lock:
            subs = self._subscribers.get(job_id, [])
            if q in subs:
                subs.remove(q)

    def history(self, job_id):
        with self._lock:
            return list(self._history.get(job_id, []))
