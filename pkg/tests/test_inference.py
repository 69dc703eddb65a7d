import numpy as np
import pytest

from dyadeval import (DiscreteDistribution, DyadTable, InferenceConfig,
                      InputError, MeasureId, NumericalIntegrityError,
                      TrialGroup, bootstrap_test, difference_distribution,
                      evaluate, exact_test, fit, method_disagreement, pb_pmf,
                      run_all, simulate_dyad_table)
from dyadeval import NullModel, SimParams, sample
from dyadeval.inference import (_measure_values, _sample_group_outcomes,
                                _side_trial_groups)
from dyadeval.measures import spec_for

from oracles import (cell_code, difference_pmf_by_double_loop,
                     enumeration_cost, null_distribution_by_enumeration,
                     pb_pmf_by_subsets, tail_probability_from_distribution)


def table_from(cells_counts):
    counts = np.zeros(64, dtype=np.int64)
    for bits, n in cells_counts.items():
        counts[cell_code(*bits)] = n
    return DyadTable(counts)


def small_random_table(rng, max_total=12):
    n = int(rng.integers(1, max_total + 1))
    counts = np.bincount(rng.integers(0, 64, size=n), minlength=64)
    return DyadTable(counts.astype(np.int64))


# ---------------------------------------------------------------- pb_pmf

def test_pb_single_bernoulli():
    dist = pb_pmf([TrialGroup(1, 0.3)])
    assert dist.support_min == 0
    assert dist.pmf.tolist() == pytest.approx([0.7, 0.3], abs=1e-15)


def test_pb_fair_binomial():
    dist = pb_pmf([TrialGroup(2, 0.5)])
    assert dist.pmf.tolist() == pytest.approx([0.25, 0.5, 0.25], abs=1e-15)


def test_pb_empty_is_point_mass():
    dist = pb_pmf([])
    assert dist.support_min == 0
    assert dist.pmf.tolist() == [1.0]


def test_pb_matches_subset_enumeration():
    rng = np.random.default_rng(17)
    for _ in range(30):
        k = int(rng.integers(1, 5))
        counts = rng.multinomial(int(rng.integers(1, 16)), np.full(k, 1 / k))
        groups = [TrialGroup(int(c), float(rng.random())) for c in counts]
        dist = pb_pmf(groups)
        probs = [g.success_prob for g in groups for _ in range(g.count)]
        oracle = pb_pmf_by_subsets(probs)
        assert len(dist.pmf) == len(oracle)
        assert max(abs(a - b) for a, b in zip(dist.pmf, oracle)) <= 1e-12


def test_pb_group_order_invariance():
    groups = [TrialGroup(5, 0.2), TrialGroup(3, 0.9), TrialGroup(7, 0.41)]
    a = pb_pmf(groups)
    b = pb_pmf(groups[::-1])
    assert np.max(np.abs(a.pmf - b.pmf)) <= 1e-12


def test_pb_mean_identity_and_normalization():
    rng = np.random.default_rng(29)
    groups = [TrialGroup(int(rng.integers(0, 400)), float(rng.random()))
              for _ in range(4)]
    dist = pb_pmf(groups)
    assert abs(dist.pmf.sum() - 1.0) <= 1e-9
    assert dist.mean() == pytest.approx(
        sum(g.count * g.success_prob for g in groups), abs=1e-9)


def test_pb_normalization_at_large_scale():
    # one large group plus a multi-group mix totaling 10^5 trials
    assert abs(pb_pmf([TrialGroup(100_000, 0.37)]).pmf.sum() - 1.0) <= 1e-9
    mix = [TrialGroup(5000, 0.1), TrialGroup(5000, 0.62),
           TrialGroup(5000, 0.97), TrialGroup(5000, 0.5)]
    assert abs(pb_pmf(mix).pmf.sum() - 1.0) <= 1e-9


def test_trial_group_validation():
    with pytest.raises(ValueError):
        TrialGroup(-1, 0.5)
    with pytest.raises(ValueError):
        TrialGroup(1, 1.5)


# ------------------------------------------- difference_distribution

def test_difference_point_masses():
    x = DiscreteDistribution(3, np.array([1.0]))
    y = DiscreteDistribution(1, np.array([1.0]))
    d = difference_distribution(x, y)
    assert d.support_min == 2
    assert d.pmf.tolist() == [1.0]


def test_difference_fair_bernoullis():
    x = pb_pmf([TrialGroup(1, 0.5)])
    d = difference_distribution(x, x)
    assert d.support_min == -1
    assert d.pmf.tolist() == pytest.approx([0.25, 0.5, 0.25], abs=1e-15)


def test_difference_matches_double_loop():
    rng = np.random.default_rng(31)
    for _ in range(20):
        fx = rng.random(int(rng.integers(1, 9)))
        fx /= fx.sum()
        fy = rng.random(int(rng.integers(1, 9)))
        fy /= fy.sum()
        x_min, y_min = int(rng.integers(-5, 5)), int(rng.integers(-5, 5))
        d = difference_distribution(DiscreteDistribution(x_min, fx),
                                    DiscreteDistribution(y_min, fy))
        oracle, z_min = difference_pmf_by_double_loop(fx, x_min, fy, y_min)
        assert d.support_min == z_min
        assert max(abs(a - b) for a, b in zip(d.pmf, oracle)) <= 1e-12


def test_difference_expectation_identity():
    rng = np.random.default_rng(37)
    fx = rng.random(12)
    fx /= fx.sum()
    fy = rng.random(7)
    fy /= fy.sum()
    x = DiscreteDistribution(2, fx)
    y = DiscreteDistribution(-3, fy)
    d = difference_distribution(x, y)
    assert d.mean() == pytest.approx(x.mean() - y.mean(), abs=1e-9)


# --------------------------------------------- DiscreteDistribution

def test_distribution_validation():
    with pytest.raises(NumericalIntegrityError):
        DiscreteDistribution(0, np.array([0.5, -0.1, 0.6]))
    with pytest.raises(NumericalIntegrityError):
        DiscreteDistribution(0, np.array([0.5, 0.4]))  # sums to 0.9


def test_distribution_tails():
    d = DiscreteDistribution(-1, np.array([0.25, 0.5, 0.25]))
    assert d.tail_ge(-1) == 1.0
    assert d.tail_ge(1) == pytest.approx(0.25)
    assert d.tail_ge(2) == 0.0
    assert d.tail_le(1) == 1.0
    assert d.tail_le(-1) == pytest.approx(0.25)
    assert d.tail_le(-2) == 0.0


def test_distribution_clamps_tiny_entries():
    pmf = np.array([1.0, 1e-310])
    d = DiscreteDistribution(0, pmf)
    assert d.pmf[1] == 0.0


# ----------------------------------------------------- exact_test

def test_exact_degenerate_null_is_p_one():
    # every row deterministic: stay exactly where you started
    cells = {(x, y, p, q, p, q): 2 for x in (0, 1) for y in (0, 1)
             for p in (0, 1) for q in (0, 1)}
    table = table_from(cells)
    for measure in MeasureId:
        res = exact_test(table, measure)
        assert res.p_value == 1.0
        assert res.direction == "none"
        assert not res.significant


def test_exact_empty_table_rejected():
    with pytest.raises(InputError):
        exact_test(DyadTable(np.zeros(64, dtype=np.int64)), MeasureId.M1)


def test_exact_matches_enumeration_on_small_tables():
    rng = np.random.default_rng(101)
    checked = 0
    while checked < 40:
        table = small_random_table(rng)
        for measure in MeasureId:
            if enumeration_cost(table.counts, measure.value) > 100_000:
                continue
            res = exact_test(table, measure)
            dist = null_distribution_by_enumeration(table.counts, measure.value)
            p_oracle, dir_oracle = tail_probability_from_distribution(
                dist, evaluate(table, measure).value)
            assert abs(res.p_value - p_oracle) <= 1e-12
            assert res.direction == dir_oracle
            checked += 1
    assert checked >= 40


def test_exact_null_mean_matches_distribution_mean():
    table = simulate_dyad_table()
    model = fit(table)
    for measure in MeasureId:
        spec = spec_for(measure)
        res = exact_test(table, measure)
        pos_side, neg_side = spec.grouped()
        pos = pb_pmf(_side_trial_groups(model, pos_side))
        neg = pb_pmf(_side_trial_groups(model, neg_side))
        assert res.null_mean == pytest.approx(
            difference_distribution(pos, neg).mean(), abs=1e-9)


def test_exact_test_with_explicit_model():
    base = simulate_dyad_table()
    model = fit(base)
    drawn = sample(model, 5).table
    explicit = exact_test(drawn, MeasureId.M2, model=model)
    refit = exact_test(drawn, MeasureId.M2)
    assert explicit.observed == refit.observed
    # the explicit model's null mean is locked to the generating table
    assert explicit.null_mean == pytest.approx(
        exact_test(base, MeasureId.M2).null_mean, abs=1e-12)


def test_exact_test_handbuilt_model_without_tallies():
    # a model carrying only float probabilities still resolves the
    # observed == mean tie (via tolerance) instead of picking a side
    p0 = np.zeros((2, 2, 2, 2))
    for p in (0, 1):
        for q in (0, 1):
            p0[p, q, p, q] = 1.0
    masses = np.zeros((2, 2, 2, 2), dtype=np.int64)
    masses[0, 0, 0, 0] = 6
    model = NullModel(p0=p0, masses=masses,
                      row_defined=np.ones((2, 2), dtype=bool))
    assert model.row_counts is None
    table = table_from({(0, 0, 0, 0, 0, 0): 6})
    res = exact_test(table, MeasureId.M2, model=model)
    assert res.direction == "none"
    assert res.p_value == 1.0


# -------------------------------------------------- bootstrap_test

def test_bootstrap_degenerate_table():
    cells = {(x, y, p, q, p, q): 3 for x in (0, 1) for y in (0, 1)
             for p in (0, 1) for q in (0, 1)}
    res = bootstrap_test(table_from(cells), MeasureId.M1, trials=50, seed=0)
    assert res.p_value == 1.0
    assert res.direction == "none"
    assert res.trials == 50


def test_bootstrap_validation():
    table = simulate_dyad_table()
    with pytest.raises(InputError):
        bootstrap_test(table, MeasureId.M1, trials=0, seed=0)
    with pytest.raises(InputError):
        bootstrap_test(DyadTable(np.zeros(64, dtype=np.int64)), MeasureId.M1,
                       trials=10, seed=0)


def test_bootstrap_deterministic():
    table = simulate_dyad_table()
    a = bootstrap_test(table, MeasureId.M4, trials=500, seed=42)
    b = bootstrap_test(table, MeasureId.M4, trials=500, seed=42)
    assert a == b


def test_bootstrap_addone_correction():
    table = simulate_dyad_table(SimParams(seed=3))
    res = bootstrap_test(table, MeasureId.M1, trials=1000, seed=1)
    # strongly significant: raw tail 0, add-one = 1/(B+1)
    assert res.p_value == 0.0
    assert res.p_value_addone == pytest.approx(1 / 1001)


def test_bootstrap_two_sided_doubles():
    table = simulate_dyad_table()
    one = bootstrap_test(table, MeasureId.M3, trials=2000, seed=9)
    two = bootstrap_test(table, MeasureId.M3, trials=2000, seed=9, two_sided=True)
    assert two.p_value == pytest.approx(min(1.0, 2 * one.p_value))


def test_bootstrap_within_mc_error_of_enumeration():
    # two nonzero measure groups, 11 dyads, row mass split across quadrants
    # so the observed value sits off the null mean
    cells = {(1, 0, 1, 0, 0, 0): 3, (1, 0, 1, 0, 1, 1): 3, (0, 0, 1, 0, 1, 1): 5}
    table = table_from(cells)
    trials = 20_000
    res = bootstrap_test(table, MeasureId.M1, trials=trials, seed=5)
    dist = null_distribution_by_enumeration(table.counts, "M1")
    p_exact, direction = tail_probability_from_distribution(
        dist, evaluate(table, MeasureId.M1).value)
    se = np.sqrt(p_exact * (1 - p_exact) / trials)
    assert res.direction == direction
    assert abs(res.p_value - p_exact) <= 3 * se


def test_bootstrap_vectorized_path_equals_per_census_evaluation():
    # rebuild full censuses from the sampled group outcomes and evaluate
    # them with the measures module; must equal the vectorized values
    table = simulate_dyad_table()
    model = fit(table)
    trials = 40
    outcomes = _sample_group_outcomes(model, trials, np.random.default_rng(8))
    for measure in (MeasureId.M1, MeasureId.M5, MeasureId.M8):
        values = _measure_values(spec_for(measure), outcomes, trials)
        for b in (0, 7, 39):
            counts = np.zeros(64, dtype=np.int64)
            for (x, y, p, q), arr in outcomes.items():
                for rs, (r, s) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
                    counts[cell_code(x, y, p, q, r, s)] = arr[b, rs]
            census = DyadTable(counts)
            assert evaluate(census, measure).value == values[b]


# ------------------------------------------------------- run_all

def test_run_all_ordering_and_methods():
    table = simulate_dyad_table()
    results = run_all(table, InferenceConfig(method="both", trials=300, seed=2))
    assert len(results) == 16
    assert [r.measure for r in results[::2]] == list(MeasureId)
    assert all(r.method == "bootstrap" for r in results[::2])
    assert all(r.method == "exact" for r in results[1::2])


def test_run_all_bootstrap_matches_single_tests():
    # shared sampling: run_all results equal standalone bootstrap_test
    table = simulate_dyad_table()
    results = run_all(table, InferenceConfig(method="bootstrap", trials=400, seed=77))
    for res in results:
        alone = bootstrap_test(table, res.measure, trials=400, seed=77)
        assert res == alone


def test_run_all_empty_measure_sides_on_sparse_table():
    # all mass in quadrant (x=0, y=1): M5-M8 touch only quadrants
    # (1,1), (1,0), (0,0), so both their sides are empty there
    cells = {(0, 1, 1, 0, 0, 0): 3, (0, 1, 0, 1, 1, 1): 2}
    table = table_from(cells)
    by_measure = {r.measure: r for r in
                  run_all(table, InferenceConfig(method="exact"))}
    for measure in (MeasureId.M5, MeasureId.M6, MeasureId.M7, MeasureId.M8):
        res = by_measure[measure]
        assert res.observed == 0
        assert res.p_value == 1.0
        assert res.direction == "none"


def test_run_all_degenerate_when_nothing_changes():
    frozen = table_from({(x, y, p, q, p, q): 4 for x in (0, 1) for y in (0, 1)
                         for p in (0, 1) for q in (0, 1)})
    for res in run_all(frozen, InferenceConfig(method="both", trials=100, seed=0)):
        assert res.p_value == 1.0


def test_method_disagreement_reporting():
    table = simulate_dyad_table()
    results = run_all(table, InferenceConfig(method="both", trials=5000, seed=3))
    gaps = method_disagreement(results)
    assert set(gaps) == set(MeasureId)
    assert all(0 <= v <= 1 for v in gaps.values())


def test_inference_config_validation():
    with pytest.raises(InputError):
        InferenceConfig(method="banana")
    with pytest.raises(InputError):
        InferenceConfig(method="bootstrap", trials=0)
    with pytest.raises(InputError):
        InferenceConfig(alpha=1.5)
