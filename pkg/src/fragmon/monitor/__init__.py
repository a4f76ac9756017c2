"""Runtime fragment collection."""

from .fragments import (ConditionSetMismatch, Fragment, FragmentFormatError, FragmentMeta,
                        FragmentSet, read_fragments, write_fragments)
from .policy import Length, RecordingPolicy
from .runtime import (MonitorResult, OverheadStats, collect, evaluate_signature,
                      run_monitored)

__all__ = [
    "ConditionSetMismatch", "Fragment", "FragmentFormatError", "FragmentMeta", "FragmentSet",
    "read_fragments", "write_fragments", "Length", "RecordingPolicy", "MonitorResult",
    "OverheadStats", "collect", "evaluate_signature", "run_monitored",
]
