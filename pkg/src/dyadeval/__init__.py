"""Evaluate community-level behavioral interventions on dyadic network data.

Pipeline: observed ego-alter dyads are tallied into a 64-cell census
(participation and before/after behavior bits of both ends), eight
difference-of-sums measures are evaluated on it, and each measure's
significance is assessed against a pooled behavior-transition null model
by bootstrap simulation and by exact Poisson-Binomial convolution.
"""

from ._version import __version__
from .census import (CellIndex, DyadRecord, DyadTable, MarginalSet, all_cells,
                     build_table, classify_dyad, marginals)
from .errors import (DyadevalError, InputError, NumericalIntegrityError,
                     UndefinedRowError)
from .inference import (DiscreteDistribution, InferenceConfig, TestResult,
                        TrialGroup, bootstrap_test, difference_distribution,
                        exact_test, method_disagreement, pb_pmf, run_all)
from .measures import (MEASURE_LABELS, MeasureId, MeasureSpec, MeasureValue,
                       cells_matching, evaluate, spec_for)
from .null_model import (NullModel, NullSample, fit, group_event_probability,
                         sample)
from .sim import (EdgeModel, SimNetwork, SimParams, assign_initial_states,
                  generate_network, probabilities_to_counts, simulate,
                  simulate_dyad_table, to_dyad_records, transition)

__all__ = [
    "__version__",
    "CellIndex", "DyadRecord", "DyadTable", "MarginalSet", "all_cells",
    "build_table", "classify_dyad", "marginals",
    "DyadevalError", "InputError", "NumericalIntegrityError", "UndefinedRowError",
    "MeasureId", "MeasureSpec", "MeasureValue", "MEASURE_LABELS",
    "cells_matching", "evaluate", "spec_for",
    "NullModel", "NullSample", "fit", "group_event_probability", "sample",
    "DiscreteDistribution", "InferenceConfig", "TestResult", "TrialGroup",
    "bootstrap_test", "difference_distribution", "exact_test",
    "method_disagreement", "pb_pmf", "run_all",
    "EdgeModel", "SimNetwork", "SimParams", "assign_initial_states",
    "generate_network", "probabilities_to_counts", "simulate",
    "simulate_dyad_table", "to_dyad_records", "transition",
]
