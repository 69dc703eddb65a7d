"""Pooled behavior-transition null model.

The null hypothesis is that participation makes no difference: all four
(x, y) participation quadrants share one transition distribution from
pre-state (p, q) to post-state (r, s).  Fitting pools the quadrants into a
4x4 row-stochastic matrix; sampling redraws every group's post-states from
that matrix while keeping participation and pre-states fixed at their
observed masses.

Randomness contract: sampling uses numpy's PCG64 generator.  A seed fully
determines the sample; groups are always drawn in lexicographic
(x, y, p, q) order from a single stream, so identical seeds reproduce
identical samples bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .census import DyadTable, MarginalSet, marginals
from .errors import InputError, UndefinedRowError

__all__ = ["NullModel", "NullSample", "fit", "sample", "group_event_probability",
           "PQ_ORDER", "RS_ORDER"]

# Row/column order of the 4x4 transition-matrix view.
PQ_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))
RS_ORDER = PQ_ORDER

_ROW_SUM_TOL = 1e-12

SeedLike = "int | np.random.SeedSequence | np.random.Generator"


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class NullModel:
    """Transition matrix plus the 16 group masses it will be applied to.

    ``p0[p, q, r, s]`` is the probability that a dyad in pre-state (p, q)
    lands in post-state (r, s).  Rows with no observed pre-state mass are
    undefined: ``row_defined[p, q]`` is False and the row holds zeros.
    ``masses[x, y, p, q]`` is the number of dyads of participation type
    (x, y) in pre-state (p, q).

    Fitted models also carry the integer tallies behind the matrix
    (``row_counts[p, q, r, s]`` transitions over ``row_totals[p, q]`` dyads),
    which lets the exact engine resolve ties between an observed value and
    the null mean in exact rational arithmetic.  Hand-built models may omit
    them.
    """

    p0: np.ndarray
    masses: np.ndarray
    row_defined: np.ndarray
    row_counts: np.ndarray | None = None
    row_totals: np.ndarray | None = None

    def __post_init__(self) -> None:
        p0 = np.asarray(self.p0, dtype=float)
        masses = np.asarray(self.masses)
        row_defined = np.asarray(self.row_defined, dtype=bool)
        if p0.shape != (2, 2, 2, 2):
            raise ValueError(f"p0 must have shape (2,2,2,2), got {p0.shape}")
        if masses.shape != (2, 2, 2, 2):
            raise ValueError(f"masses must have shape (2,2,2,2), got {masses.shape}")
        if row_defined.shape != (2, 2):
            raise ValueError(f"row_defined must have shape (2,2), got {row_defined.shape}")
        if np.any(masses < 0):
            raise ValueError("masses must be non-negative")
        if np.any((p0 < 0) | (p0 > 1)):
            raise ValueError("transition probabilities must lie in [0, 1]")
        for p in (0, 1):
            for q in (0, 1):
                row_sum = p0[p, q].sum()
                if row_defined[p, q]:
                    if abs(row_sum - 1.0) > _ROW_SUM_TOL:
                        raise ValueError(
                            f"defined row (p={p}, q={q}) sums to {row_sum!r}, not 1"
                        )
                elif row_sum != 0.0:
                    raise ValueError(f"undefined row (p={p}, q={q}) must carry no mass")
        masses = masses.astype(np.int64)
        for arr in (p0, masses, row_defined):
            arr.flags.writeable = False
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "row_defined", row_defined)
        if (self.row_counts is None) != (self.row_totals is None):
            raise ValueError("row_counts and row_totals must be given together")
        if self.row_counts is not None:
            counts = np.asarray(self.row_counts).astype(np.int64)
            totals = np.asarray(self.row_totals).astype(np.int64)
            if counts.shape != (2, 2, 2, 2) or totals.shape != (2, 2):
                raise ValueError("row_counts must be (2,2,2,2) and row_totals (2,2)")
            if np.any(counts < 0) or np.any(totals < 0):
                raise ValueError("integer tallies must be non-negative")
            if np.any(counts.sum(axis=(2, 3)) != totals):
                raise ValueError("row_counts must sum to row_totals per row")
            counts.flags.writeable = False
            totals.flags.writeable = False
            object.__setattr__(self, "row_counts", counts)
            object.__setattr__(self, "row_totals", totals)

    @property
    def total(self) -> int:
        return int(self.masses.sum())

    def matrix(self) -> np.ndarray:
        """The transition matrix as 4x4, rows (p,q) and columns (r,s) in
        order (0,0), (0,1), (1,0), (1,1).  Undefined rows are NaN."""
        out = np.full((4, 4), np.nan)
        for i, (p, q) in enumerate(PQ_ORDER):
            if self.row_defined[p, q]:
                out[i] = [self.p0[p, q, r, s] for (r, s) in RS_ORDER]
        return out

    def require_row(self, p: int, q: int) -> np.ndarray:
        if not self.row_defined[p, q]:
            raise UndefinedRowError(
                f"transition row (p={p}, q={q}) is undefined: no dyads observed "
                "in that pre-state"
            )
        return self.p0[p, q]


@dataclass(frozen=True)
class NullSample:
    """One census drawn under the null model.

    Participation and pre-states keep their observed masses; only the
    post-state split within each (x, y, p, q) group is random.
    """

    table: DyadTable


def fit(table: DyadTable) -> NullModel:
    """Estimate the pooled transition matrix and group masses from a census.

    Rows (p, q) with no observed dyads are left undefined rather than being
    filled with fabricated probabilities; a model fit from a table with
    total 0 has all rows undefined and is rejected by the inference entry
    points.
    """
    marg = marginals(table)
    return fit_from_marginals(marg)


def fit_from_marginals(marg: MarginalSet) -> NullModel:
    p0 = np.zeros((2, 2, 2, 2))
    row_defined = np.zeros((2, 2), dtype=bool)
    for p in (0, 1):
        for q in (0, 1):
            n_row = marg.n0[p, q]
            if n_row > 0:
                row_defined[p, q] = True
                p0[p, q] = marg.n_pqrs[p, q] / float(n_row)
    return NullModel(p0=p0, masses=marg.n0_group.copy(), row_defined=row_defined,
                     row_counts=marg.n_pqrs.copy(), row_totals=marg.n0.copy())


def sample(model: NullModel, seed) -> NullSample:
    """Draw one null census: a multinomial per (x, y, p, q) group.

    Deterministic given ``seed``; see the module docstring for the stream
    layout.  Raises ``UndefinedRowError`` if any group with positive mass
    sits on an undefined transition row (possible only for hand-built
    models).
    """
    rng = _as_generator(seed)
    counts = np.zeros((2, 2, 2, 2, 2, 2), dtype=np.int64)
    for x in (0, 1):
        for y in (0, 1):
            for p in (0, 1):
                for q in (0, 1):
                    mass = int(model.masses[x, y, p, q])
                    if mass == 0:
                        continue
                    row = model.require_row(p, q)
                    counts[x, y, p, q] = rng.multinomial(mass, row.ravel()).reshape(2, 2)
    return NullSample(DyadTable(counts.reshape(64)))


def group_event_probability(model: NullModel, p: int, q: int,
                            outcome_set: Iterable[tuple[int, int]]) -> float:
    """Probability that a dyad in pre-state (p, q) lands in one of the given
    (r, s) outcomes."""
    row = model.require_row(p, q)
    outcomes = set(outcome_set)
    for r, s in outcomes:
        if r not in (0, 1) or s not in (0, 1):
            raise InputError(f"invalid (r, s) outcome ({r}, {s})")
    return float(sum(row[r, s] for r, s in outcomes))
