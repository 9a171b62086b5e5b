"""Bookkeeping for auxiliary memory.

Structures are counted in scalar entries, not bytes, so reports are
deterministic and comparable across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class QuadraticAllocationError(RuntimeError):
    pass


@dataclass
class MemoryTracker:
    """Live/peak counter for named auxiliary structures.

    With ``forbid_quadratic`` set, registering any single structure of
    ``n_objects**2`` entries or more raises ``QuadraticAllocationError``.
    """

    n_objects: int
    forbid_quadratic: bool = False
    live: dict[str, int] = field(default_factory=dict)
    peak: int = 0
    peak_snapshot: dict[str, int] = field(default_factory=dict)
    largest: int = 0

    def alloc(self, name: str, entries: int) -> None:
        entries = int(entries)
        if self.forbid_quadratic and self.n_objects > 1 and entries >= self.n_objects ** 2:
            raise QuadraticAllocationError(
                f"{name}: {entries} entries is quadratic in N={self.n_objects}"
            )
        self.live[name] = entries
        self.largest = max(self.largest, entries)
        total = self.current
        if total > self.peak:
            self.peak = total
            self.peak_snapshot = dict(self.live)

    def free(self, *names: str) -> None:
        for name in names:
            self.live.pop(name, None)

    @property
    def current(self) -> int:
        return sum(self.live.values())

    def report(self) -> dict:
        return {
            "peak_aux_entries": self.peak,
            "n_objects": self.n_objects,
            "peak_per_object": self.peak / self.n_objects if self.n_objects else 0.0,
            "largest_structure": self.largest,
            "peak_breakdown": dict(sorted(self.peak_snapshot.items())),
        }


class _NullTracker:
    def alloc(self, name, entries):
        pass

    def free(self, *names):
        pass


NULL_TRACKER = _NullTracker()
