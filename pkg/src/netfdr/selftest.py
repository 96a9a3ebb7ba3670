"""Fast invariant suite behind ``netfdr selftest``.

Each check returns ``(ok, message)``; :func:`run_all` prints one line per
check and reports whether every check passed. The full pytest suite is more
thorough; this is what an installed copy can verify on its own.
"""

from __future__ import annotations

import math

import numpy as np

from . import compression, netsim, oracles, protocols, stats
from .experiments import experiment_spec, format_csv, run_experiment

CHECKS = []


def check(fn):
    CHECKS.append(fn)
    return fn


@check
def worked_examples():
    got = [
        stats.sign_test_pvalue(1, 5),
        stats.wilcoxon_statistic([1.2, -0.5, 2.0]),
        round(stats.wilcoxon_pvalue(5, 3), 4),
        stats.bc_select([5, 4, 3, 2, 1, -1], 0.25).threshold,
        stats.bh_select([0.01, 0.02, 0.5, 0.9], 0.1).tolist(),
        stats.simes_pvalue([0.01, 0.5, 0.9]),
        stats.quantize_pvalue(0.123, 10),
        compression.sample_budget_L(50, 4),
    ]
    want = [0.1875, (5.0, 3), 0.1425, 2.0, [0, 1], 0.03, 0.2, 12]
    ok = all(g == w or (isinstance(w, float) and math.isclose(g, w)) for g, w in zip(got, want))
    return ok, "worked examples of the stats and compression primitives"


@check
def oracle_agreement():
    rng = np.random.default_rng(20240611)
    bad = 0
    for _ in range(2000):
        m = int(rng.integers(1, 12))
        w = np.round(rng.normal(size=m) * 3, 1)
        alpha = float(rng.choice([0.1, 0.2, 0.3]))
        bad += stats.bc_select(w, alpha).rejected.tolist() != oracles.bc_rejected(w.tolist(), alpha)
        p = np.round(rng.uniform(size=m), 2)
        bad += stats.bh_select(p, alpha).tolist() != oracles.bh_rejected(p.tolist(), alpha)
        bad += not math.isclose(stats.simes_pvalue(p), oracles.simes(p.tolist()), abs_tol=1e-15)
        n = compression.normalize(w)
        L = int(rng.integers(2, 8))
        c = compression.sample_vr(n, L)
        bad += (c.v_hat.tolist(), c.r.tolist()) != oracles.sample_counts(n.tolist(), L)
    return bad == 0, f"fast kernels vs brute force on 2000 random instances ({bad} mismatches)"


@check
def quantized_pvalues_superuniform():
    rng = np.random.default_rng(7)
    u = rng.uniform(size=20000)
    worst = 0.0
    for k in (2, 16, 100):
        q = np.array([stats.quantize_pvalue(x, k) for x in u])
        for t in np.arange(1, k) / k:
            excess = (q <= t).mean() - t
            worst = max(worst, excess / math.sqrt(t * (1 - t) / u.size))
    return worst <= 3.0, f"P(Q <= t) <= t within 3 sigma (worst {worst:.2f} sigma)"


@check
def budget_parity():
    rows = []
    for n in range(10, 101, 10):
        L = compression.sample_budget_L(n, 4)
        s = netsim.charge("sampled-counts", m=n, L=L)
        qb = netsim.charge("signed-quantized-vector", m=n, q=4)
        rows.append(s <= qb and s >= 0.8 * qb)
    return all(rows), "sampled-BC uplink within [0.8, 1] of q-BC uplink for n = 10..100"


@check
def null_fdr_control():
    rng = np.random.default_rng(11)
    trials, alpha = 600, 0.2
    fails = []
    for name, params in [
        ("pooled_qbc", protocols.ProtocolParams(alpha, q=4)),
        ("sampled_bc", protocols.ProtocolParams(alpha, L=6)),
        ("global_sign_test", protocols.ProtocolParams(alpha)),
        ("sign_simes", protocols.ProtocolParams(alpha, k_levels=16)),
    ]:
        rej = 0
        for _ in range(trials):
            nodes = [rng.normal(size=20) for _ in range(3)]
            d, _ = protocols.run(name, nodes, params)
            rej += d.global_reject if d.global_reject is not None else d.num_rejections > 0
        rate = rej / trials
        if rate > alpha + 3 * math.sqrt(alpha * (1 - alpha) / trials):
            fails.append(f"{name}={rate:.3f}")
    return not fails, "null-only rejection rate <= alpha + 3 SE " + (" ".join(fails) or "(all methods)")


@check
def determinism():
    spec = experiment_spec("exp1", "I", trials=5, grid=(10, 20), seed=3)
    a, b = format_csv(run_experiment(spec)), format_csv(run_experiment(spec))
    return a == b, "identical config and seed give identical CSV text"


def run_all(out=print) -> bool:
    ok_all = True
    for fn in CHECKS:
        try:
            ok, msg = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, msg = False, f"raised {type(exc).__name__}: {exc}"
        ok_all &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'} {fn.__name__}: {msg}")
    return ok_all
