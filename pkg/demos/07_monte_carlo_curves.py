"""A small Monte Carlo sweep, written as CSV plus a gnuplot script.

The full-size run is ``netfdr run --experiment exp1 --simulation I``; this
uses few trials so it finishes in seconds.
"""

import sys
from pathlib import Path

from netfdr.experiments import experiment_spec, format_csv, gnuplot_script, run_experiment

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_exp1.csv")
spec = experiment_spec("exp1", "I", trials=100, grid=(20, 50, 100), seed=7)
points = run_experiment(spec)
out.write_text(format_csv(points))
out.with_suffix(".gp").write_text(gnuplot_script(out.name, points, spec.alpha))
for p in points:
    print(f"n={p.grid_value:g} {p.method:11s} FDR {p.fdr_hat:.3f}+-{p.fdr_se:.3f} "
          f"power {p.power_hat:.3f}+-{p.power_se:.3f}")
print("wrote", out, "and", out.with_suffix(".gp"))
