"""Synthetic data model, Monte Carlo driver and FDR/power estimation.

Node ``i`` (1-based) of ``N`` holds ``n`` independent Gaussian statistics,
``floor(pi1_i * n)`` of them false nulls with ``pi1_i = 0.3 - 0.2 (i-1)/N``.
Each statistic draws its own variance from ``Unif[1 + i/N - 0.25, 1 + i/N + 0.25]``;
false nulls draw their mean from ``Unif[mu + i/N - 0.5, mu + i/N + 0.5]`` and
true nulls have mean zero.

Power is reported as the mean true-positive proportion (TPP) per trial in
the individual and intersection settings, and as the rejection rate under
the alternative in the global setting. For global methods the ``fdr`` columns
hold the type-I error rate, estimated on separate global-null trials.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import rng as rng_mod
from .compression import sample_budget_L
from .protocols import PROTOCOLS, SETTINGS, ProtocolParams, run

__all__ = [
    "StatVector",
    "DataModel",
    "TrialMetrics",
    "CurvePoint",
    "ExperimentSpec",
    "EXPERIMENTS",
    "CSV_HEADER",
    "POWER_DEFINITION",
    "experiment_spec",
    "generate_trial",
    "trial_metrics",
    "estimate_metrics",
    "run_experiment",
    "write_csv",
    "format_csv",
    "gnuplot_script",
]

CSV_HEADER = (
    "experiment,simulation,method,grid_axis,grid_value,trials,"
    "fdr_hat,fdr_se,power_hat,power_se,uplink_bits_per_node"
)
POWER_DEFINITION = (
    "power = mean per-trial TPP (true positives / max(#false nulls, 1)); "
    "global methods: rejection rate under the alternative, fdr = type-I rate under the global null"
)


@dataclass(frozen=True)
class StatVector:
    values: np.ndarray
    null_mask: np.ndarray | None = None

    def __post_init__(self):
        if self.null_mask is not None and len(self.null_mask) != len(self.values):
            raise ValueError("null_mask must match values in length")

    def __len__(self):
        return len(self.values)


def _frac(x) -> Fraction:
    # via str so that 0.3 means 3/10 rather than its binary expansion
    return x if isinstance(x, Fraction) else Fraction(str(x))


@dataclass(frozen=True)
class DataModel:
    """Per-node Gaussian mixture used by every experiment.

    ``aligned=True`` places the false nulls of all nodes on one shared random
    index set (nested by node), as needed for intersection hypotheses.
    Setting ``pi1_top = pi1_drop = 0`` gives the global null.
    """

    N: int
    n: int
    mu: float = 2.5
    alpha: float = 0.2
    pi1_top: float = 0.3
    pi1_drop: float = 0.2
    mu_jitter: float = 0.5
    sigma2_jitter: float = 0.25
    seed: int = 0
    aligned: bool = False

    def __post_init__(self):
        if self.N < 1 or self.n < 1:
            raise ValueError("N and n must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 <= self.sigma2_jitter < 1.0:
            raise ValueError("sigma2_jitter must keep every variance positive")
        if self.num_false(1) > self.n or self.pi1(self.N) < 0:
            raise ValueError("pi1 rule must stay within [0, 1] at every node")

    def pi1(self, i: int) -> Fraction:
        return _frac(self.pi1_top) - _frac(self.pi1_drop) * Fraction(i - 1, self.N)

    def num_false(self, i: int) -> int:
        return math.floor(self.pi1(i) * self.n)

    def mu_base(self, i: int) -> float:
        return self.mu + i / self.N

    def sigma2_base(self, i: int) -> float:
        return 1.0 + i / self.N

    def global_null(self) -> "DataModel":
        return replace(self, pi1_top=0.0, pi1_drop=0.0)


def generate_trial(model: DataModel, trial: int = 0) -> list[StatVector]:
    """Draw one network's statistics from the ``(seed, trial, node)`` streams."""
    out = []
    shared_perm = None
    if model.aligned:
        shared_perm = rng_mod.stream(model.seed, trial, model.N).permutation(model.n)
    for i in range(1, model.N + 1):
        g = rng_mod.stream(model.seed, trial, i - 1)
        n = model.n
        sigma2 = model.sigma2_base(i) + model.sigma2_jitter * (2.0 * rng_mod.uniform(g, n) - 1.0)
        mu = model.mu_base(i) + model.mu_jitter * (2.0 * rng_mod.uniform(g, n) - 1.0)
        z = rng_mod.standard_normal(g, n)
        k = model.num_false(i)
        null = np.ones(n, dtype=bool)
        null[:k] = False
        mean = np.where(null, 0.0, mu)
        values = mean + np.sqrt(sigma2) * z
        perm = shared_perm if shared_perm is not None else g.permutation(n)
        # position perm[j] receives the j-th draw
        placed = np.empty(n)
        placed[perm] = values
        mask = np.empty(n, dtype=bool)
        mask[perm] = null
        out.append(StatVector(placed, mask))
    return out


@dataclass(frozen=True)
class TrialMetrics:
    fdp: float
    tpp: float
    reject_count: int
    bits: float


def trial_metrics(decision, data: Sequence[StatVector], setting: str, uplink_bits: float = 0.0) -> TrialMetrics:
    """False discovery and true positive proportions of one decision."""
    if setting == "global":
        is_null = all(bool(np.all(sv.null_mask)) for sv in data)
        r = int(bool(decision.global_reject))
        return TrialMetrics(float(r and is_null), float(r and not is_null), r, uplink_bits)
    if setting == "intersection":
        null = np.logical_and.reduce([sv.null_mask for sv in data])
        rej = decision.per_node_rejections[0]
        v = int(null[rej].sum())
        r = len(rej)
        n_false = int((~null).sum())
        return TrialMetrics(v / max(r, 1), (r - v) / max(n_false, 1), r, uplink_bits)
    v = r = n_false = 0
    for sv, rej in zip(data, decision.per_node_rejections):
        v += int(sv.null_mask[rej].sum())
        r += len(rej)
        n_false += int((~sv.null_mask).sum())
    return TrialMetrics(v / max(r, 1), (r - v) / max(n_false, 1), r, uplink_bits)


def _mean_se(x: Sequence[float]) -> tuple[float, float]:
    n = len(x)
    mean = math.fsum(x) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((xi - mean) ** 2 for xi in x) / (n - 1)
    return mean, math.sqrt(var / n)


def estimate_metrics(metrics: Sequence[TrialMetrics]) -> tuple[float, float, float, float]:
    """``(fdr_hat, fdr_se, power_hat, power_se)`` from per-trial metrics."""
    if len(metrics) == 0:
        raise ValueError("need at least one trial")
    fdr, fdr_se = _mean_se([m.fdp for m in metrics])
    power, power_se = _mean_se([m.tpp for m in metrics])
    return fdr, fdr_se, power, power_se


@dataclass(frozen=True)
class CurvePoint:
    experiment: str
    simulation: str
    method: str
    grid_axis: str
    grid_value: float
    trials: int
    fdr_hat: float
    fdr_se: float
    power_hat: float
    power_se: float
    uplink_bits_per_node: float

    def csv_row(self) -> str:
        return (
            f"{self.experiment},{self.simulation},{self.method},{self.grid_axis},{_fmt_grid(self.grid_value)},"
            f"{self.trials},{self.fdr_hat:.6f},{self.fdr_se:.6f},{self.power_hat:.6f},{self.power_se:.6f},"
            f"{self.uplink_bits_per_node:.2f}"
        )


def _fmt_grid(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


# ---------------------------------------------------------------------------
# experiment specifications

_AXES = {"I": "n", "II": "N", "III": "mu"}

_GRID_N = tuple(range(10, 101, 10))
_GRID_NODES = tuple(range(2, 21, 2))

EXPERIMENTS = {
    "exp1": {
        "methods": ("pooled_qbc", "sampled_bc", "pooled_bc"),
        "base": dict(N=10, n=50, mu=2.5, q=4, L=None, k=None),
        "grids": {"I": _GRID_N, "II": _GRID_NODES, "III": (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)},
    },
    "exp2": {
        "methods": (
            "global_pooled_qbc",
            "global_wilcoxon",
            "global_sign_test",
            "global_sampled_bc",
            "wilcoxon_simes",
            "sign_simes",
        ),
        "base": dict(N=10, n=10, mu=1.5, q=16, L=5, k=16),
        "grids": {"I": (10, 20, 30, 40, 50), "II": (0.5, 1.0, 1.5, 2.0, 2.5, 3.0), "III": _GRID_NODES},
        # Simulation II varies mu and III varies N for this experiment
        "axes": {"I": "n", "II": "mu", "III": "N"},
    },
    "exp3": {
        "methods": ("averaged_bc", "sign_bh_simplified"),
        "base": dict(N=10, n=30, mu=1.0, q=16, L=None, k=None),
        "grids": {"I": _GRID_N, "II": _GRID_NODES, "III": (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)},
    },
}


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully resolved experiment: one grid axis, its values and the methods.

    ``L=None`` means "budget-matched": ``sample_budget_L(n, q)`` at each
    grid point. ``k=None`` means the p-value quantizer uses ``q`` levels.
    """

    experiment: str
    simulation: str
    grid_axis: str
    grid: tuple
    methods: tuple[str, ...]
    N: int = 10
    n: int = 50
    mu: float = 2.5
    q: int = 4
    L: int | None = None
    k: int | None = None
    alpha: float = 0.2
    trials: int = 10000
    seed: int = 0
    censor: bool = False

    def __post_init__(self):
        if self.grid_axis not in ("n", "N", "mu"):
            raise ValueError(f"grid axis must be n, N or mu, got {self.grid_axis!r}")
        if not self.grid:
            raise ValueError("grid must not be empty")
        unknown = [m for m in self.methods if m not in PROTOCOLS]
        if unknown or not self.methods:
            raise ValueError(f"unknown methods {unknown}; choose from {sorted(PROTOCOLS)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for value in self.grid:
            self.model_at(value)
            self.params_at(value)

    def point(self, value) -> dict:
        p = dict(N=self.N, n=self.n, mu=self.mu)
        p[self.grid_axis] = value if self.grid_axis == "mu" else int(value)
        return p

    def model_at(self, value, aligned: bool = False) -> DataModel:
        p = self.point(value)
        return DataModel(N=p["N"], n=p["n"], mu=float(p["mu"]), alpha=self.alpha, seed=self.seed, aligned=aligned)

    def params_at(self, value) -> ProtocolParams:
        n = self.point(value)["n"]
        L = self.L
        if L is None and any(m in ("sampled_bc", "global_sampled_bc") for m in self.methods):
            L = sample_budget_L(n, self.q)
            if L < 2:
                raise ValueError(f"budget-matched L = {L} < 2 at n = {n}; set L explicitly")
        k = self.k if self.k is not None else self.q
        return ProtocolParams(self.alpha, q=self.q, L=L, k_levels=k, censor=self.censor)


def experiment_spec(experiment: str, simulation: str = "I", **overrides) -> ExperimentSpec:
    """Build the default configuration of an experiment, then apply overrides.

    ``experiment="custom"`` starts from the exp1 base values and requires
    ``methods``; the grid axis follows the simulation (I: n, II: N, III: mu)
    unless ``grid_axis`` is given.
    """
    simulation = simulation.upper()
    if simulation not in _AXES:
        raise ValueError(f"simulation must be one of I, II, III, got {simulation!r}")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if experiment == "custom":
        table = dict(EXPERIMENTS["exp1"], methods=())
        axis = overrides.pop("grid_axis", _AXES[simulation])
        grid = EXPERIMENTS["exp1"]["grids"][{"n": "I", "N": "II", "mu": "III"}[axis]]
    elif experiment in EXPERIMENTS:
        table = EXPERIMENTS[experiment]
        axis = table.get("axes", _AXES)[simulation]
        grid = table["grids"][simulation]
        if "grid_axis" in overrides and overrides.pop("grid_axis") != axis:
            raise ValueError(f"{experiment} simulation {simulation} varies {axis}")
    else:
        raise ValueError(f"unknown experiment {experiment!r}")
    fields = dict(table["base"])
    fields.update(overrides)
    fields.setdefault("methods", table["methods"])
    fields.setdefault("grid", grid)
    fields["methods"] = tuple(fields["methods"])
    fields["grid"] = tuple(fields["grid"])
    return ExperimentSpec(experiment=experiment, simulation=simulation, grid_axis=axis, **fields)


# ---------------------------------------------------------------------------
# Monte Carlo driver


def _run_point(spec: ExperimentSpec, value) -> list[CurvePoint]:
    params = spec.params_at(value)
    settings = {m: SETTINGS[m] for m in spec.methods}
    fdp = {m: [] for m in spec.methods}
    tpp = {m: [] for m in spec.methods}
    bits = {m: [] for m in spec.methods}

    models = {}
    if any(s != "intersection" for s in settings.values()):
        models["independent"] = spec.model_at(value)
    if "intersection" in settings.values():
        models["aligned"] = spec.model_at(value, aligned=True)
    if "global" in settings.values():
        models["null"] = spec.model_at(value).global_null()

    for t in range(spec.trials):
        data = {key: None for key in models}
        for m in spec.methods:
            s = settings[m]
            key = "aligned" if s == "intersection" else "independent"
            if data[key] is None:
                data[key] = generate_trial(models[key], t)
            decision, transcript = run(m, [sv.values for sv in data[key]], params)
            up = math.fsum(transcript.uplink_bits_per_node) / len(transcript.uplink_bits_per_node)
            met = trial_metrics(decision, data[key], s, up)
            tpp[m].append(met.tpp)
            bits[m].append(up)
            if s == "global":
                if data["null"] is None:
                    data["null"] = generate_trial(models["null"], t)
                null_decision, _ = run(m, [sv.values for sv in data["null"]], params)
                fdp[m].append(trial_metrics(null_decision, data["null"], s).fdp)
            else:
                fdp[m].append(met.fdp)

    points = []
    for m in spec.methods:
        fdr, fdr_se = _mean_se(fdp[m])
        power, power_se = _mean_se(tpp[m])
        points.append(
            CurvePoint(
                spec.experiment,
                spec.simulation,
                m,
                spec.grid_axis,
                float(value),
                spec.trials,
                fdr,
                fdr_se,
                power,
                power_se,
                math.fsum(bits[m]) / len(bits[m]),
            )
        )
    return points


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> list[CurvePoint]:
    """Run every (grid value, method) pair; deterministic given ``spec``.

    Rows are ordered by grid value, then by method, independent of ``jobs``.
    """
    if jobs > 1 and len(spec.grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_point, [spec] * len(spec.grid), spec.grid))
    else:
        chunks = [_run_point(spec, v) for v in spec.grid]
    return [p for chunk in chunks for p in chunk]


# ---------------------------------------------------------------------------
# output


def format_csv(points: Iterable[CurvePoint]) -> str:
    return CSV_HEADER + "\n" + "".join(p.csv_row() + "\n" for p in points)


def write_csv(points: Iterable[CurvePoint], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(points))


_AXIS_LABEL = {"n": "number of statistics per node n", "N": "number of nodes N", "mu": "signal strength mu"}


def gnuplot_script(csv_name: str, points: Sequence[CurvePoint], alpha: float, output: str | None = None) -> str:
    """Standalone gnuplot script: FDR panel with a line at ``alpha``, power panel."""
    methods = list(dict.fromkeys(p.method for p in points))
    axis = points[0].grid_axis if points else "n"
    title = f"{points[0].experiment} simulation {points[0].simulation}" if points else ""
    output = output or csv_name.rsplit(".", 1)[0] + ".png"

    def plot(col: int) -> str:
        lines = [
            f"    '{csv_name}' using (strcol(3) eq '{m}' ? $5 : 1/0):{col} with linespoints title '{m.replace('_', ' ')}'"
            for m in methods
        ]
        return "plot \\\n" + ", \\\n".join(lines)

    return "\n".join(
        [
            "# generated by netfdr; columns: " + CSV_HEADER,
            "# " + POWER_DEFINITION,
            "# sign_bh_simplified is a simplified sign-test + BH baseline",
            "set datafile separator ','",
            "set terminal pngcairo size 1200,450",
            f"set output '{output}'",
            f"set multiplot layout 1,2 title '{title}'",
            f"set xlabel '{_AXIS_LABEL[axis]}'",
            "set ylabel 'FDR'",
            "set yrange [0:*]",
            f"set arrow 1 from graph 0, first {alpha} to graph 1, first {alpha} nohead dashtype 2",
            plot(7),
            "unset arrow 1",
            "set ylabel 'power'",
            "set yrange [0:1]",
            plot(9),
            "unset multiplot",
            "",
        ]
    )
