"""Worker pool for independent training repetitions."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Dict, Generic, List, Optional, Sequence, TypeVar

from ..logger import write_system_log

JobT = TypeVar("JobT")
ResultT = TypeVar("ResultT")


@dataclass
class JobFailure:
    index: int
    error: BaseException


class RepetitionPool(Generic[JobT, ResultT]):
    """Run jobs on worker threads; results come back in job order regardless of scheduling."""

    def __init__(self, process: Callable[[JobT], ResultT], workers: int = 1) -> None:
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.process = process
        self.workers = workers
        self.worker_states: Dict[int, str] = {}
        self._lock = threading.Lock()
        self._next_index = 0

    def _claim(self, total: int) -> Optional[int]:
        with self._lock:
            if self._next_index >= total:
                return None
            index = self._next_index
            self._next_index += 1
            return index

    def _worker_loop(
        self,
        worker_id: int,
        jobs: Sequence[JobT],
        results: List[Optional[ResultT]],
        failures: List[JobFailure],
    ) -> None:
        try:
            while True:
                index = self._claim(len(jobs))
                if index is None:
                    break
                self.worker_states[worker_id] = f"running:{index}"
                try:
                    results[index] = self.process(jobs[index])
                except Exception as exc:  # re-raised by map() in job order
                    with self._lock:
                        failures.append(JobFailure(index, exc))
                finally:
                    self.worker_states[worker_id] = "idle"
        finally:
            with self._lock:
                self.worker_states.pop(worker_id, None)

    def map(self, jobs: Sequence[JobT]) -> List[ResultT]:
        results: List[Optional[ResultT]] = [None] * len(jobs)
        failures: List[JobFailure] = []
        self._next_index = 0
        if self.workers == 1 or len(jobs) <= 1:
            self._worker_loop(1, jobs, results, failures)
        else:
            threads = []
            for worker_id in range(1, min(self.workers, len(jobs)) + 1):
                thread = threading.Thread(
                    target=self._worker_loop,
                    args=(worker_id, jobs, results, failures),
                    name=f"RepetitionWorker-{worker_id:03d}",
                    daemon=True,
                )
                threads.append(thread)
                thread.start()
            write_system_log(f"Repetition pool started {len(threads)} workers for {len(jobs)} jobs")
            for thread in threads:
                thread.join()
        if failures:
            first = min(failures, key=lambda failure: failure.index)
            raise first.error
        return results  # type: ignore[return-value]


__all__ = ["JobFailure", "RepetitionPool"]
