"""
Thread-pool execution of ensemble members.

Members are independent callables keyed by their index. Each member gets its
own seed derived from the master seed and its index, so results do not depend
on scheduling; results are returned in index order.
"""
import logging
import threading
import time
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from kmdlab.config import get_settings
from kmdlab.core.state import SweepState
from kmdlab.utils.metrics import MEMBER_DURATION, MEMBERS_IN_FLIGHT, MEMBERS_TOTAL

logger = logging.getLogger(__name__)

MemberFn = Callable[[int, int], Any]


def derive_seed(master_seed: int, index: int) -> int:
    """Per-member seed from (master seed, member index)."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


class EnsembleRunner:
    """
    Run ensemble members on a thread pool, or serially in the calling thread.

    numpy and LAPACK release the GIL for the heavy kernels, so threads give
    real parallelism for the fits.
    """

    def __init__(self, max_workers: Optional[int] = None, serial: bool = False):
        """
        Initialize the runner.

        Args:
            max_workers: Worker threads (defaults to settings WORKERS)
            serial: Evaluate members in the calling thread
        """
        self.max_workers = max_workers or get_settings().WORKERS
        self.serial = serial
        self.executor: Optional[ThreadPoolExecutor] = None
        self.active_members: Dict[int, Future] = {}
        self._lock = threading.RLock()
        self._started = False

    def start(self):
        """Create the thread pool (no-op in serial mode)."""
        with self._lock:
            if self._started:
                logger.warning("Ensemble runner already started")
                return
            if not self.serial:
                self.executor = ThreadPoolExecutor(
                    max_workers=self.max_workers,
                    thread_name_prefix="kmdlab-worker-"
                )
            self._started = True
            logger.debug(
                f"Ensemble runner started ({'serial' if self.serial else f'{self.max_workers} workers'})"
            )

    def shutdown(self, wait: bool = True):
        """Shut the pool down, cancelling pending members unless waiting."""
        with self._lock:
            if not self._started:
                return
            if self.executor:
                if not wait:
                    for index, future in self.active_members.items():
                        if not future.done():
                            future.cancel()
                            logger.debug(f"Cancelled member {index}")
                self.executor.shutdown(wait=wait, cancel_futures=not wait)
            self.executor = None
            self.active_members.clear()
            self._started = False

    def __enter__(self) -> "EnsembleRunner":
        self.start()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.shutdown(wait=exc_type is None)

    def _run_member(
        self,
        fn: MemberFn,
        index: int,
        seed: int,
        state: Optional[SweepState],
    ) -> Tuple[Any, Optional[BaseException]]:
        if state:
            state.member_running(index)
        MEMBERS_IN_FLIGHT.inc()
        started = time.perf_counter()
        try:
            result = fn(index, seed)
        except Exception as e:
            duration = time.perf_counter() - started
            logger.error(f"Member {index} (seed {seed}) failed: {e}", exc_info=True)
            MEMBERS_TOTAL.labels(status="failed").inc()
            if state:
                state.member_failed(index, str(e), duration)
            return None, e
        finally:
            MEMBERS_IN_FLIGHT.dec()

        duration = time.perf_counter() - started
        MEMBER_DURATION.observe(duration)
        MEMBERS_TOTAL.labels(status="completed").inc()
        if state:
            state.member_completed(index, duration)
        return result, None

    def _cleanup_member(self, index: int):
        with self._lock:
            self.active_members.pop(index, None)

    def run(
        self,
        fn: MemberFn,
        ensemble_size: int,
        master_seed: int,
        state: Optional[SweepState] = None,
    ) -> List[Tuple[Any, Optional[BaseException]]]:
        """
        Evaluate ``fn(index, seed)`` for every member.

        Returns:
            (result, error) per member in index order; error is None on success
        """
        if not self._started:
            raise RuntimeError("Ensemble runner not started")

        seeds = [derive_seed(master_seed, i) for i in range(ensemble_size)]
        if state:
            for i, seed in enumerate(seeds):
                state.register_member(i, seed)

        if self.serial:
            return [self._run_member(fn, i, seeds[i], state) for i in range(ensemble_size)]

        futures: List[Future] = []
        with self._lock:
            for i, seed in enumerate(seeds):
                future = self.executor.submit(self._run_member, fn, i, seed, state)
                self.active_members[i] = future
                future.add_done_callback(lambda f, idx=i: self._cleanup_member(idx))
                futures.append(future)
        logger.debug(f"Submitted {ensemble_size} members to {self.max_workers} workers")

        return [f.result() for f in futures]

    def get_stats(self) -> Dict[str, Any]:
        """Runner statistics."""
        with self._lock:
            return {
                'started': self._started,
                'serial': self.serial,
                'max_workers': self.max_workers,
                'active_members': len(self.active_members),
            }
