import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netfdr import rng
from netfdr.experiments import (
    CSV_HEADER,
    EXPERIMENTS,
    DataModel,
    TrialMetrics,
    estimate_metrics,
    experiment_spec,
    format_csv,
    generate_trial,
    gnuplot_script,
    run_experiment,
    trial_metrics,
)
from netfdr.messages import Decision


@pytest.mark.parametrize("n", [10, 30, 50, 100])
def test_false_null_counts_follow_the_pi1_rule(n):
    model = DataModel(N=10, n=n)
    assert model.num_false(1) == math.floor(3 * n / 10)
    assert model.num_false(10) == math.floor(12 * n / 100)
    data = generate_trial(model, 0)
    assert [int((~sv.null_mask).sum()) for sv in data] == [model.num_false(i) for i in range(1, 11)]


def test_fractional_pi1_is_not_hit_by_binary_rounding():
    # 0.3 * 30 is 8.999... in floating point
    assert DataModel(N=10, n=30).num_false(1) == 9


def test_global_null_model_is_all_symmetric_nulls():
    model = DataModel(N=4, n=200, mu=0.0).global_null()
    data = generate_trial(model, 3)
    assert all(sv.null_mask.all() for sv in data)
    pooled = np.concatenate([sv.values for sv in data])
    # sign balance of 800 symmetric draws, 4 sigma
    assert abs(np.mean(pooled > 0) - 0.5) < 4 * 0.5 / math.sqrt(pooled.size)


def test_false_nulls_are_shifted_by_node_mean():
    model = DataModel(N=2, n=2000, mu=3.0, pi1_top=0.5, pi1_drop=0.0)
    data = generate_trial(model, 0)
    for i, sv in enumerate(data, 1):
        alt = sv.values[~sv.null_mask]
        se = math.sqrt(model.sigma2_base(i) + 0.25) / math.sqrt(alt.size)
        # jittered mean has the base mean as its expectation
        assert abs(alt.mean() - model.mu_base(i)) < 5 * se + 5 * 0.5 / math.sqrt(3 * alt.size)


def test_false_null_positions_are_randomized():
    model = DataModel(N=1, n=50)
    masks = {tuple(generate_trial(model, t)[0].null_mask) for t in range(5)}
    assert len(masks) == 5


def test_aligned_model_nests_false_nulls_across_nodes():
    model = DataModel(N=5, n=40, aligned=True)
    data = generate_trial(model, 2)
    alts = [set(np.flatnonzero(~sv.null_mask)) for sv in data]
    assert all(b <= a for a, b in zip(alts, alts[1:]))


def test_model_validation():
    with pytest.raises(ValueError):
        DataModel(N=0, n=10)
    with pytest.raises(ValueError):
        DataModel(N=2, n=10, alpha=1.0)
    with pytest.raises(ValueError):
        DataModel(N=2, n=10, pi1_top=1.5)


def test_streams_are_reproducible_and_distinct():
    a = rng.uniform(rng.stream(1, 2, 3), 5)
    assert np.array_equal(a, rng.uniform(rng.stream(1, 2, 3), 5))
    assert not np.array_equal(a, rng.uniform(rng.stream(1, 2, 4), 5))
    assert not np.array_equal(a, rng.uniform(rng.stream(1, 3, 3), 5))
    z = rng.standard_normal(rng.stream(0, 0, 0), 10)
    assert np.all(np.isfinite(z))


# -- metrics -----------------------------------------------------------------


def _tm(fdp, tpp=0.0):
    return TrialMetrics(fdp, tpp, 0, 0)


def test_estimate_metrics_examples():
    fdr, fdr_se, power, _ = estimate_metrics([_tm(0.0), _tm(0.5)])
    assert fdr == 0.25
    assert fdr_se == pytest.approx(np.std([0, 0.5], ddof=1) / math.sqrt(2))
    assert estimate_metrics([_tm(0.0)] * 7)[:2] == (0.0, 0.0)
    with pytest.raises(ValueError):
        estimate_metrics([])


def test_estimate_metrics_bernoulli_mixture():
    g = np.random.default_rng(9)
    # fdp is 0 w.p. 0.6, else Uniform(0, 1): mean 0.2
    x = np.where(g.uniform(size=5000) < 0.6, 0.0, g.uniform(size=5000))
    fdr, se, _, _ = estimate_metrics([_tm(float(v)) for v in x])
    assert abs(fdr - 0.2) <= 3 * se


def test_trial_metrics_individual_and_global():
    from netfdr.experiments import StatVector

    data = [StatVector(np.zeros(4), np.array([False, False, True, True]))]
    d = Decision(per_node_rejections=[np.array([0, 2])])
    m = trial_metrics(d, data, "individual")
    assert (m.fdp, m.tpp, m.reject_count) == (0.5, 0.5, 2)
    empty = trial_metrics(Decision(per_node_rejections=[np.array([], dtype=int)]), data, "individual")
    assert (empty.fdp, empty.tpp) == (0.0, 0.0)
    g = trial_metrics(Decision(global_reject=True), data, "global")
    assert (g.fdp, g.tpp) == (0.0, 1.0)
    null = [StatVector(np.zeros(2), np.array([True, True]))]
    assert trial_metrics(Decision(global_reject=True), null, "global").fdp == 1.0


def test_trial_metrics_intersection_uses_union_of_alternatives():
    from netfdr.experiments import StatVector

    data = [
        StatVector(np.zeros(3), np.array([False, True, True])),
        StatVector(np.zeros(3), np.array([False, False, True])),
    ]
    rej = np.array([1, 2])
    m = trial_metrics(Decision(per_node_rejections=[rej, rej]), data, "intersection")
    assert (m.fdp, m.tpp) == (0.5, 0.5)


# -- experiment specs and runs -----------------------------------------------


def test_default_configurations():
    s = experiment_spec("exp1", "II")
    assert (s.grid_axis, s.n, s.mu, s.q, s.L) == ("N", 50, 2.5, 4, None)
    s = experiment_spec("exp2", "I")
    assert (s.q, s.L, s.alpha) == (16, 5, 0.2)
    s = experiment_spec("exp3", "II")
    assert (s.grid_axis, s.n, s.mu) == ("N", 30, 1.0)
    assert s.model_at(4).mu_base(2) == 1.0 + 2 / 4
    assert all(m in s.methods for m in EXPERIMENTS["exp3"]["methods"])


def test_budget_matched_L_per_grid_point():
    s = experiment_spec("exp1", "I")
    assert s.params_at(50).L == 12 and s.params_at(20).L == 6


@pytest.mark.parametrize(
    "kw",
    [dict(methods=("nope",)), dict(grid=()), dict(trials=0), dict(alpha=1.5), dict(grid=(0,))],
)
def test_invalid_specs_fail_before_running(kw):
    with pytest.raises(ValueError):
        experiment_spec("exp1", "I", **kw)


def test_unknown_experiment_and_custom():
    with pytest.raises(ValueError):
        experiment_spec("exp9", "I")
    with pytest.raises(ValueError):
        experiment_spec("custom", "I")
    s = experiment_spec("custom", "III", methods=("pooled_qbc",), grid=(1.0, 2.0))
    assert s.grid_axis == "mu"


def test_csv_schema_and_determinism():
    spec = experiment_spec("exp1", "I", trials=8, grid=(10, 20), seed=4)
    a = format_csv(run_experiment(spec))
    assert a == format_csv(run_experiment(spec))
    lines = a.splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 2 * 3
    row = lines[1].split(",")
    assert row[:6] == ["exp1", "I", "pooled_qbc", "n", "10", "8"]
    assert row[-1] == "30.00"


def test_parallel_run_matches_serial():
    spec = experiment_spec("exp3", "II", trials=5, grid=(2, 4), seed=1)
    assert format_csv(run_experiment(spec, jobs=2)) == format_csv(run_experiment(spec))


def test_global_methods_report_power_and_null_level():
    spec = experiment_spec("exp2", "I", trials=40, grid=(30,), seed=2)
    pts = {p.method: p for p in run_experiment(spec)}
    assert pts["global_sign_test"].power_hat > 0.9
    assert pts["wilcoxon_simes"].uplink_bits_per_node == 5
    for p in pts.values():
        assert 0 <= p.fdr_hat <= 1


def test_split_half_agreement():
    a = experiment_spec("exp1", "I", trials=150, grid=(30,), seed=11)
    b = experiment_spec("exp1", "I", trials=150, grid=(30,), seed=12)
    for pa, pb in zip(run_experiment(a), run_experiment(b)):
        se = math.hypot(pa.power_se, pb.power_se)
        assert abs(pa.power_hat - pb.power_hat) <= 3 * se + 1e-12
        se = math.hypot(pa.fdr_se, pb.fdr_se)
        assert abs(pa.fdr_hat - pb.fdr_hat) <= 3 * se + 1e-12


def test_power_monotone_in_signal_strength():
    spec = experiment_spec("exp1", "III", trials=100, seed=5, grid=(1.0, 2.0, 3.0, 4.0))
    pts = run_experiment(spec)
    for m in spec.methods:
        curve = [p for p in pts if p.method == m]
        for lo, hi in zip(curve, curve[1:]):
            assert hi.power_hat >= lo.power_hat - 3 * math.hypot(lo.power_se, hi.power_se)


def test_gnuplot_script_has_both_panels_and_alpha_line():
    spec = experiment_spec("exp1", "I", trials=2, grid=(10,))
    text = gnuplot_script("out.csv", run_experiment(spec), 0.2)
    assert "set multiplot layout 1,2" in text
    assert "first 0.2" in text
    assert text.count("plot \\") == 2
    assert "'pooled_qbc'" in text


@given(st.integers(1, 20), st.integers(1, 200))
def test_pi1_rule_stays_in_range(N, n):
    model = DataModel(N=N, n=n)
    counts = [model.num_false(i) for i in range(1, N + 1)]
    assert all(0 <= c <= n for c in counts)
    assert counts == sorted(counts, reverse=True)
