"""The eight sociological measures M1-M8 as declarative cell-set differences.

Each measure is the difference of two sums of census cells.  The positive
and negative cell-sets of every measure live in disjoint participation
quadrants, which is what makes the two sums independent under the null
model and licenses the exact inference engine.

Polarity note: M1, M3, M5 and M7 count transitions with the behavior
present before and absent after (pre-bit 1, post-bit 0); M2, M4, M6 and M8
fix the pre-bit at 0 instead.  This matches an intervention that suppresses
a behavior coded 1.  If your data codes the promoted behavior as 1, recode
with ``invert_behavior`` at ingestion so the transition 1 -> 0 is the one
the intervention is expected to cause.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .census import CellIndex, DyadTable

__all__ = ["MeasureId", "MeasureSpec", "MeasureValue", "spec_for", "evaluate", "MEASURE_LABELS"]


class MeasureId(Enum):
    M1 = "M1"
    M2 = "M2"
    M3 = "M3"
    M4 = "M4"
    M5 = "M5"
    M6 = "M6"
    M7 = "M7"
    M8 = "M8"

    @property
    def label(self) -> str:
        return MEASURE_LABELS[self]

    def __str__(self) -> str:
        return self.value


MEASURE_LABELS: dict[MeasureId, str] = {
    MeasureId.M1: "Direct Treatment Success in a Social Context",
    MeasureId.M2: "Direct Prevention in a Social Context",
    MeasureId.M3: "Social Effect of Treatment",
    MeasureId.M4: "Social Effect of Prevention",
    MeasureId.M5: "Reinforcement of Change",
    MeasureId.M6: "Reinforcement of Prevention",
    MeasureId.M7: "Diffusion of Change",
    MeasureId.M8: "Diffusion of Prevention",
}

# Fixed coordinates of each measure's positive and negative cell-sets.
# Unlisted coordinates range over {0, 1}.
_FIXED_COORDS: dict[MeasureId, tuple[dict[str, int], dict[str, int]]] = {
    MeasureId.M1: ({"x": 1, "p": 1, "r": 0}, {"x": 0, "p": 1, "r": 0}),
    MeasureId.M2: ({"x": 1, "p": 0, "r": 0}, {"x": 0, "p": 0, "r": 0}),
    MeasureId.M3: ({"x": 1, "q": 1, "s": 0}, {"x": 0, "q": 1, "s": 0}),
    MeasureId.M4: ({"x": 1, "q": 0, "s": 0}, {"x": 0, "q": 0, "s": 0}),
    MeasureId.M5: ({"x": 1, "y": 1, "p": 1, "r": 0}, {"x": 1, "y": 0, "p": 1, "r": 0}),
    MeasureId.M6: ({"x": 1, "y": 1, "p": 0, "r": 0}, {"x": 1, "y": 0, "p": 0, "r": 0}),
    MeasureId.M7: ({"x": 1, "y": 0, "q": 1, "s": 0}, {"x": 0, "y": 0, "q": 1, "s": 0}),
    MeasureId.M8: ({"x": 1, "y": 0, "q": 0, "s": 0}, {"x": 0, "y": 0, "q": 0, "s": 0}),
}


def cells_matching(**fixed: int) -> frozenset[CellIndex]:
    """All cells whose named coordinates equal the given bits."""
    names = ("x", "y", "p", "q", "r", "s")
    unknown = set(fixed) - set(names)
    if unknown:
        raise ValueError(f"unknown coordinates: {sorted(unknown)}")
    free = [n for n in names if n not in fixed]
    cells = set()
    for bits in itertools.product((0, 1), repeat=len(free)):
        coords = dict(fixed)
        coords.update(zip(free, bits))
        cells.add(CellIndex(**coords).validate())
    return frozenset(cells)


@dataclass(frozen=True)
class MeasureSpec:
    """A difference-of-sums statistic over census cells.

    ``positive_cells`` and ``negative_cells`` must be disjoint and must
    occupy disjoint (x, y) participation quadrants; the latter guarantees
    the two sums are driven by disjoint dyad groups.
    """

    positive_cells: frozenset[CellIndex]
    negative_cells: frozenset[CellIndex]

    def __post_init__(self) -> None:
        pos = frozenset(c if isinstance(c, CellIndex) else CellIndex(*c) for c in self.positive_cells)
        neg = frozenset(c if isinstance(c, CellIndex) else CellIndex(*c) for c in self.negative_cells)
        object.__setattr__(self, "positive_cells", pos)
        object.__setattr__(self, "negative_cells", neg)
        if pos & neg:
            raise ValueError("positive and negative cell-sets overlap")
        pos_quadrants = {(c.x, c.y) for c in pos}
        neg_quadrants = {(c.x, c.y) for c in neg}
        shared = pos_quadrants & neg_quadrants
        if shared:
            raise ValueError(
                f"positive and negative cell-sets share participation quadrants {sorted(shared)}; "
                "the two sums would not be independent under the null model"
            )

    def transform_invert_behavior(self) -> "MeasureSpec":
        """The same contrast with all behavior bits of every cell flipped."""
        flip = lambda c: CellIndex(c.x, c.y, 1 - c.p, 1 - c.q, 1 - c.r, 1 - c.s)
        return MeasureSpec(
            frozenset(flip(c) for c in self.positive_cells),
            frozenset(flip(c) for c in self.negative_cells),
        )

    def grouped(self) -> tuple[dict[tuple[int, int, int, int], frozenset[tuple[int, int]]],
                               dict[tuple[int, int, int, int], frozenset[tuple[int, int]]]]:
        """Cells of each side grouped by (x, y, p, q), as (r, s) outcome sets.

        Under the null model each (x, y, p, q) group is an independent
        multinomial over the four (r, s) outcomes, so a side's sum is the
        number of group trials landing in that group's outcome set.
        """
        def group(cells: frozenset[CellIndex]):
            out: dict[tuple[int, int, int, int], set[tuple[int, int]]] = {}
            for c in cells:
                out.setdefault((c.x, c.y, c.p, c.q), set()).add((c.r, c.s))
            return {g: frozenset(v) for g, v in out.items()}

        return group(self.positive_cells), group(self.negative_cells)


@dataclass(frozen=True)
class MeasureValue:
    """Observed value of a measure: positive sum minus negative sum."""

    value: int
    positive_sum: int
    negative_sum: int

    def __post_init__(self) -> None:
        if self.value != self.positive_sum - self.negative_sum:
            raise ValueError("value must equal positive_sum - negative_sum")


def spec_for(measure: MeasureId) -> MeasureSpec:
    """The cell-sets of one of the eight built-in measures."""
    pos_fixed, neg_fixed = _FIXED_COORDS[measure]
    return MeasureSpec(cells_matching(**pos_fixed), cells_matching(**neg_fixed))


def evaluate(table: DyadTable, measure: MeasureId | MeasureSpec) -> MeasureValue:
    """Evaluate a measure on a census."""
    spec = spec_for(measure) if isinstance(measure, MeasureId) else measure
    pos = int(sum(table.counts[c.code] for c in spec.positive_cells))
    neg = int(sum(table.counts[c.code] for c in spec.negative_cells))
    return MeasureValue(value=pos - neg, positive_sum=pos, negative_sum=neg)
