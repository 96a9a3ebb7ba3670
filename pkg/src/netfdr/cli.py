"""Command-line front end.

Subcommands::

    netfdr run      --experiment exp1 --simulation I --trials 2000 -o out.csv
    netfdr once     --protocol sampled_bc --alpha 0.5 --L 3 --input stats.txt
    netfdr budget   --n 50 --q 4
    netfdr selftest

``run`` also accepts ``--config FILE`` with flat ``key = value`` lines
(a TOML-compatible subset); explicit flags win over file values. Without
``-o`` the CSV goes to ``$NETFDR_OUTPUT_DIR`` (default: the working
directory). A gnuplot script with the same stem is written next to it.
"""

from __future__ import annotations

import argparse
import ast
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import compression, netsim, protocols
from .experiments import POWER_DEFINITION, experiment_spec, format_csv, gnuplot_script, run_experiment

OUTPUT_DIR_ENV = "NETFDR_OUTPUT_DIR"

_RUN_KEYS = ("experiment", "simulation", "N", "n", "mu", "q", "L", "k", "alpha", "trials", "seed",
             "methods", "grid", "censor", "jobs", "output")


class ConfigError(ValueError):
    pass


def _csv_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _number(text: str):
    try:
        v = ast.literal_eval(text)
    except (ValueError, SyntaxError):
        raise ConfigError(f"not a number: {text!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"not a number: {text!r}")
    return v


def read_config(path) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _RUN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            v = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            v = value
        out[key] = ",".join(str(x) for x in v) if isinstance(v, (list, tuple)) else str(v)
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netfdr", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo experiment and write a CSV")
    run.add_argument("--config", help="key = value configuration file")
    run.add_argument("--experiment", choices=["exp1", "exp2", "exp3", "custom"])
    run.add_argument("--simulation", choices=["I", "II", "III"])
    for flag in ("N", "n", "q", "L", "k", "trials", "seed", "jobs"):
        run.add_argument(f"--{flag}", dest=flag)
    run.add_argument("--mu")
    run.add_argument("--alpha")
    run.add_argument("--methods", help="comma-separated method identifiers")
    run.add_argument("--grid", help="comma-separated grid values")
    run.add_argument("--censor", action="store_const", const="true", help="1-bit uplink for large p-values")
    run.add_argument("-o", "--output")

    once = sub.add_parser("once", help="one protocol round on statistics from a file")
    once.add_argument("--protocol", required=True, choices=sorted(protocols.PROTOCOLS))
    once.add_argument("--input", required=True, help="one node per line, comma-separated reals")
    once.add_argument("--alpha", type=float, default=0.2)
    once.add_argument("--q", type=int, default=4)
    once.add_argument("--L", type=int, default=None)
    once.add_argument("--k", type=int, default=16)
    once.add_argument("--censor", action="store_true")

    budget = sub.add_parser("budget", help="print uplink bit costs and the budget-matched L")
    budget.add_argument("--n", type=int, default=50)
    budget.add_argument("--q", type=int, default=4)
    budget.add_argument("--k", type=int, default=16)

    sub.add_parser("selftest", help="run the built-in invariant suite")
    return parser


# ---------------------------------------------------------------------------
# run


def resolve_run_config(args: argparse.Namespace) -> dict:
    """Merge config-file values under explicit flags and convert types."""
    raw = read_config(args.config) if args.config else {}
    for key in _RUN_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    cfg = {"experiment": raw.pop("experiment", "exp1"), "simulation": raw.pop("simulation", "I")}
    for key in ("N", "n", "q", "L", "k", "trials", "seed", "jobs"):
        if key in raw:
            v = _number(str(raw.pop(key)))
            if not float(v).is_integer():
                raise ConfigError(f"{key} must be an integer, got {v}")
            cfg[key] = int(v)
    for key in ("mu", "alpha"):
        if key in raw:
            cfg[key] = float(_number(str(raw.pop(key))))
    if "methods" in raw:
        cfg["methods"] = tuple(_csv_list(str(raw.pop("methods"))))
    if "grid" in raw:
        cfg["grid"] = tuple(_number(x) for x in _csv_list(str(raw.pop("grid"))))
    if "censor" in raw:
        cfg["censor"] = str(raw.pop("censor")).lower() in ("1", "true", "yes")
    cfg["output"] = raw.pop("output", None)
    return cfg


def _default_output(cfg: dict) -> Path:
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    return base / f"{cfg['experiment']}_sim{cfg['simulation']}.csv"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def cmd_run(args) -> int:
    cfg = resolve_run_config(args)
    output = Path(cfg.pop("output") or _default_output(cfg))
    jobs = cfg.pop("jobs", 1)
    experiment = cfg.pop("experiment")
    simulation = cfg.pop("simulation")
    # validated for every grid point before any trial runs
    spec = experiment_spec(experiment, simulation, **cfg)
    points = run_experiment(spec, jobs=max(1, jobs))
    if output.suffix != ".csv":
        plot_path = output.with_name(output.name + ".gp")
    else:
        plot_path = output.with_suffix(".gp")
    _atomic_write(output, format_csv(points))
    _atomic_write(plot_path, gnuplot_script(output.name, points, spec.alpha))
    print(f"wrote {len(points)} rows to {output} and plot script {plot_path}", file=sys.stderr)
    print(f"note: {POWER_DEFINITION}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# once


def read_stats_file(path) -> list[np.ndarray]:
    nodes = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            nodes.append(np.array([float(x) for x in _csv_list(line)]))
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: expected comma-separated reals") from None
    if not nodes:
        raise ConfigError(f"{path}: no statistics found")
    return nodes


def _fmt_set(idx) -> str:
    return "{" + ",".join(str(int(i)) for i in idx) + "}"


def describe(decision, name: str) -> str:
    """One-line human summary of a decision."""
    d = decision.detail
    setting = protocols.SETTINGS[name]
    if setting == "global":
        stat = next((f"{k}={d[k]:.6g}" for k in ("pvalue", "simes", "min_fdp_hat", "threshold") if k in d), "")
        return f"global: {'reject' if decision.global_reject else 'accept'}" + (f" ({stat})" if stat else "")
    if "K" in d:
        head = f"K={d['K']}"
    elif math.isinf(d.get("threshold", math.inf)):
        head = "T=inf"
    else:
        head = f"T={d['threshold']:.6g}"
    rej = decision.per_node_rejections
    if setting == "intersection":
        body = _fmt_set(rej[0]) if len(rej[0]) else "none"
    elif not any(len(r) for r in rej):
        body = "none"
    else:
        body = " ".join(f"node{i}:{_fmt_set(r)}" for i, r in enumerate(rej))
    return f"{head}, rejected: {body}"


def cmd_once(args) -> int:
    nodes = read_stats_file(args.input)
    L = args.L
    if L is None:
        L = max(2, compression.sample_budget_L(max(2, min(len(x) for x in nodes)), args.q))
    params = protocols.ProtocolParams(args.alpha, q=args.q, L=L, k_levels=args.k, censor=args.censor)
    decision, transcript = protocols.run(args.protocol, nodes, params)
    print(describe(decision, args.protocol))
    print("transcript (sender,kind,bits):")
    sys.stdout.write(transcript.to_log())
    print(f"uplink_bits={sum(transcript.uplink_bits_per_node)} downlink_bits={transcript.downlink_bits} "
          f"total_bits={transcript.total_bits}")
    return 0


# ---------------------------------------------------------------------------
# budget


def cmd_budget(args) -> int:
    n, q = args.n, args.q
    L = compression.sample_budget_L(n, q)
    print(f"L={L}")
    print(f"q-BC uplink: {netsim.charge('signed-quantized-vector', m=n, q=q)} bits")
    print(f"sampled-BC uplink: {netsim.charge('sampled-counts', m=n, L=L)} bits" if L >= 2
          else "sampled-BC uplink: n/a (L < 2)")
    print(f"sign-counts uplink: {netsim.charge('sign-counts', m=n)} bits")
    print(f"quantized p-value uplink (k={args.k}): {netsim.charge('quantized-pvalue', k=args.k)} bits")
    print()
    print("n,L,qbc_bits,sampled_bits")
    for m in range(10, 101, 10):
        Lm = compression.sample_budget_L(m, q)
        s = netsim.charge("sampled-counts", m=m, L=Lm) if Lm >= 2 else ""
        print(f"{m},{Lm},{netsim.charge('signed-quantized-vector', m=m, q=q)},{s}")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_all

    return 0 if run_all() else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {"run": cmd_run, "once": cmd_once, "budget": cmd_budget, "selftest": cmd_selftest}[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"netfdr {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
