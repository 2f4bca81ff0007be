"""
Run state tracking for sweeps.

Worker threads report member outcomes here while the sweep is running.
"""
import threading
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from kmdlab.models.enums import RunStatus


class MemberOutcome:
    """Outcome of one ensemble member."""

    __slots__ = ("index", "seed", "status", "duration_sec", "error_message")

    def __init__(self, index: int, seed: int):
        self.index = index
        self.seed = seed
        self.status = RunStatus.QUEUED
        self.duration_sec: Optional[float] = None
        self.error_message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'index': self.index,
            'seed': self.seed,
            'status': self.status.value,
            'duration_sec': self.duration_sec,
            'error_message': self.error_message,
        }


class SweepState:
    """
    Thread-safe record of one sweep run.

    Tracks overall status, timestamps, per-member outcomes and a bounded log.
    """

    MAX_LOGS = 500

    def __init__(self, run_id: str, ensemble_size: int, master_seed: int):
        self.run_id = run_id
        self.ensemble_size = ensemble_size
        self.master_seed = master_seed
        self.status = RunStatus.QUEUED
        self.created_at = datetime.now(timezone.utc)
        self.updated_at = self.created_at
        self.started_at: Optional[datetime] = None
        self.completed_at: Optional[datetime] = None
        self.error_message: Optional[str] = None

        self.members: Dict[int, MemberOutcome] = {}
        self.logs: List[Dict[str, Any]] = []
        self._lock = threading.RLock()

    def _touch(self):
        self.updated_at = datetime.now(timezone.utc)

    def add_log(self, message: str, level: str = "INFO"):
        """Add a log entry, keeping the newest MAX_LOGS."""
        with self._lock:
            self.logs.append({
                'timestamp': datetime.now(timezone.utc).isoformat(),
                'level': level,
                'message': message
            })
            if len(self.logs) > self.MAX_LOGS:
                del self.logs[:len(self.logs) - self.MAX_LOGS]
            self._touch()

    def register_member(self, index: int, seed: int) -> MemberOutcome:
        with self._lock:
            outcome = MemberOutcome(index, seed)
            self.members[index] = outcome
            self._touch()
            return outcome

    def member_running(self, index: int):
        with self._lock:
            self.members[index].status = RunStatus.RUNNING
            self._touch()

    def member_completed(self, index: int, duration_sec: float):
        with self._lock:
            member = self.members[index]
            member.status = RunStatus.COMPLETED
            member.duration_sec = duration_sec
            self._touch()

    def member_failed(self, index: int, error_message: str, duration_sec: Optional[float] = None):
        with self._lock:
            member = self.members[index]
            member.status = RunStatus.FAILED
            member.error_message = error_message
            member.duration_sec = duration_sec
            self._touch()
        self.add_log(f"Member {index} failed: {error_message}", "ERROR")

    def set_running(self):
        """Mark the run as running."""
        with self._lock:
            self.status = RunStatus.RUNNING
            self.started_at = datetime.now(timezone.utc)
            self._touch()

    def set_completed(self):
        """Mark the run as completed."""
        with self._lock:
            self.status = RunStatus.COMPLETED
            self.completed_at = datetime.now(timezone.utc)
            self._touch()

    def set_failed(self, error_message: str):
        """Mark the run as failed."""
        with self._lock:
            self.status = RunStatus.FAILED
            self.error_message = error_message
            self.completed_at = datetime.now(timezone.utc)
            self._touch()

    def count(self, status: RunStatus) -> int:
        with self._lock:
            return sum(1 for m in self.members.values() if m.status is status)

    @property
    def completed_count(self) -> int:
        return self.count(RunStatus.COMPLETED)

    @property
    def failed_count(self) -> int:
        return self.count(RunStatus.FAILED)

    @property
    def duration_sec(self) -> Optional[float]:
        if self.started_at and self.completed_at:
            return (self.completed_at - self.started_at).total_seconds()
        return None

    def to_dict(self) -> Dict[str, Any]:
        """Snapshot of the run for logging and CLI summaries."""
        with self._lock:
            return {
                'run_id': self.run_id,
                'status': self.status.value,
                'ensemble_size': self.ensemble_size,
                'master_seed': self.master_seed,
                'created_at': self.created_at.isoformat(),
                'started_at': self.started_at.isoformat() if self.started_at else None,
                'completed_at': self.completed_at.isoformat() if self.completed_at else None,
                'duration_sec': self.duration_sec,
                'completed': self.completed_count,
                'failed': self.failed_count,
                'error_message': self.error_message,
                'members': [self.members[i].to_dict() for i in sorted(self.members)],
                'logs': self.logs[-100:],
            }
