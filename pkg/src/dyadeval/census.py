"""Core dyad types: the 64-cell census and its marginal count families.

A dyad is an ordered ego-alter pair annotated with six bits:

    x  ego participated in the intervention
    y  alter participated
    p  ego had the behavior at the pre-intervention time
    q  alter had the behavior at the pre-intervention time
    r  ego had the behavior at the post-intervention time
    s  alter had the behavior at the post-intervention time

Cells are numbered 0..63 with x as the most significant bit, then
y, p, q, r, s.  Dyads are kept directed as observed; callers that want
undirected ties emit both orientations at ingestion time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InputError

__all__ = [
    "CellIndex",
    "DyadRecord",
    "DyadTable",
    "MarginalSet",
    "classify_dyad",
    "build_table",
    "marginals",
    "all_cells",
]

_BITS = ("x", "y", "p", "q", "r", "s")


def _check_bit(name: str, value: int) -> int:
    if value not in (0, 1):
        raise ValueError(f"{name} must be 0 or 1, got {value!r}")
    return int(value)


class CellIndex(NamedTuple):
    """One of the 64 dyad types, identified by its six bits."""

    x: int
    y: int
    p: int
    q: int
    r: int
    s: int

    @property
    def code(self) -> int:
        """Integer 0..63 with bit order (x, y, p, q, r, s), x most significant."""
        x, y, p, q, r, s = self
        return x << 5 | y << 4 | p << 3 | q << 2 | r << 1 | s

    @classmethod
    def from_code(cls, code: int) -> "CellIndex":
        if not 0 <= code <= 63:
            raise ValueError(f"cell code must be in 0..63, got {code}")
        return cls(
            (code >> 5) & 1,
            (code >> 4) & 1,
            (code >> 3) & 1,
            (code >> 2) & 1,
            (code >> 1) & 1,
            code & 1,
        )

    def validate(self) -> "CellIndex":
        for name, value in zip(_BITS, self):
            _check_bit(name, value)
        return self


def all_cells() -> list[CellIndex]:
    """The 64 cells in code order."""
    return [CellIndex.from_code(c) for c in range(64)]


@dataclass(frozen=True)
class DyadRecord:
    """One observed ego-alter pair with participation and before/after behavior bits."""

    ego_id: str
    alter_id: str
    x: int
    y: int
    p: int
    q: int
    r: int
    s: int
    item_id: str = ""

    def __post_init__(self) -> None:
        if self.ego_id == self.alter_id:
            raise ValueError(f"self-dyad not allowed: ego_id == alter_id == {self.ego_id!r}")
        for name in _BITS:
            _check_bit(name, getattr(self, name))

    @property
    def cell(self) -> CellIndex:
        return CellIndex(self.x, self.y, self.p, self.q, self.r, self.s)

    def invert_behavior(self) -> "DyadRecord":
        """Recode all four behavior bits (p, q, r, s -> 1 - bit).

        Flips the polarity of the behavior coding so that 0->1 transitions
        become 1->0 and vice versa; participation bits are untouched.
        """
        return replace(self, p=1 - self.p, q=1 - self.q, r=1 - self.r, s=1 - self.s)


def classify_dyad(record: DyadRecord) -> CellIndex:
    """Map a record to the unique cell whose coordinates equal its six bits."""
    return record.cell


# Permutation of cell codes under behavior-bit inversion, fixed at import.
_INVERT_PERM = np.array(
    [CellIndex.from_code(c)._replace(
        p=1 - (c >> 3 & 1), q=1 - (c >> 2 & 1), r=1 - (c >> 1 & 1), s=1 - (c & 1)
    ).code for c in range(64)],
    dtype=np.intp,
)


@dataclass(frozen=True)
class DyadTable:
    """The 64-cell dyad census: non-negative integer counts indexed by cell code."""

    counts: np.ndarray
    item_id: str | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts)
        if arr.shape != (64,):
            raise ValueError(f"counts must have shape (64,), got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.floor(arr)):
                raise ValueError("counts must be integers")
        arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise ValueError("counts must be non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @classmethod
    def zeros(cls, item_id: str | None = None) -> "DyadTable":
        return cls(np.zeros(64, dtype=np.int64), item_id=item_id)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def count(self, cell: CellIndex) -> int:
        return int(self.counts[cell.code])

    def by_bits(self) -> np.ndarray:
        """The counts as a read-only (2,2,2,2,2,2) view with axes (x,y,p,q,r,s)."""
        return self.counts.reshape((2,) * 6)

    def invert_behavior(self) -> "DyadTable":
        """Census of the same dyads with behavior bits recoded (p,q,r,s -> 1 - bit)."""
        out = np.zeros(64, dtype=np.int64)
        out[_INVERT_PERM] = self.counts
        return DyadTable(out, item_id=self.item_id)

    def __add__(self, other: "DyadTable") -> "DyadTable":
        if not isinstance(other, DyadTable):
            return NotImplemented
        return DyadTable(self.counts + other.counts, item_id=self.item_id)


def build_table(records: Sequence[DyadRecord] | Iterable[DyadRecord],
                item: str | None = None) -> DyadTable:
    """Tally records into a 64-cell census.

    All records must share one ``item_id``; when ``item`` is given it must
    equal that shared value.  Mixed items are rejected because a census mixes
    answers to different questions into meaningless counts.
    """
    records = list(records)
    items = {rec.item_id for rec in records}
    if len(items) > 1:
        raise InputError(
            f"records mix {len(items)} item_id values ({sorted(items)!r}); "
            "build one census per item"
        )
    if item is not None and items and items != {item}:
        raise InputError(f"records carry item_id {items.pop()!r}, expected {item!r}")
    counts = np.bincount(
        np.fromiter((rec.cell.code for rec in records), dtype=np.intp, count=len(records)),
        minlength=64,
    ).astype(np.int64)
    return DyadTable(counts, item_id=item if item is not None else (items.pop() if items else None))


@dataclass(frozen=True)
class MarginalSet:
    """All marginal aggregations of a census.

    Arrays are bit-indexed:

        n0[p, q]              dyads with pre-state (p, q), any participation
        n1[r, s]              dyads with post-state (r, s)
        n_pqrs[p, q, r, s]    pre/post joint counts pooled over participation
        n0_group[x, y, p, q]  pre-state counts within one participation quadrant
        n1_group[x, y, r, s]  post-state counts within one participation quadrant
    """

    n0: np.ndarray
    n1: np.ndarray
    n_pqrs: np.ndarray
    n0_group: np.ndarray
    n1_group: np.ndarray
    total: int = field(default=0)

    def __post_init__(self) -> None:
        for name, shape in (("n0", (2, 2)), ("n1", (2, 2)),
                            ("n_pqrs", (2, 2, 2, 2)), ("n0_group", (2, 2, 2, 2)),
                            ("n1_group", (2, 2, 2, 2))):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            arr.flags.writeable = False


def marginals(table: DyadTable) -> MarginalSet:
    """Compute every marginal family of a census in one pass."""
    c = table.by_bits()
    return MarginalSet(
        n0=c.sum(axis=(0, 1, 4, 5)),
        n1=c.sum(axis=(0, 1, 2, 3)),
        n_pqrs=c.sum(axis=(0, 1)),
        n0_group=c.sum(axis=(4, 5)),
        n1_group=c.sum(axis=(2, 3)),
        total=table.total,
    )
