"""The five building blocks: sign test, Wilcoxon, BC, BH and Simes.

Each is a pure function; this script evaluates them on small inputs whose
answers can be checked by hand.
"""

import numpy as np

from netfdr import stats

# Sign test: 1 negative out of 5 -> P(Bin(5, 1/2) <= 1) = 6/32
print("sign test p-value:", stats.sign_test_pvalue(1, 5))

# Wilcoxon: ranks of |x| are (2, 1, 3); the positive entries carry 2 + 3
W, n = stats.wilcoxon_statistic([1.2, -0.5, 2.0])
print(f"Wilcoxon W={W}, n={n}, one-sided p={stats.wilcoxon_pvalue(W, n):.4f}")

# BC selection: the negative tail estimates the false discoveries
res = stats.bc_select([5, 4, 3, 2, 1, -1], alpha=0.25)
print(f"BC threshold={res.threshold}, rejected={res.rejected.tolist()}, FDP-hat={res.fdp_hat_at_threshold}")

# BH step-up on p-values
print("BH rejections:", stats.bh_select([0.01, 0.02, 0.5, 0.9], alpha=0.1).tolist())

# Simes combines p-values into one global-null p-value
print("Simes:", stats.simes_pvalue([0.01, 0.5, 0.9]))

# Quantizing a p-value upward keeps it valid: Q >= P
u = np.random.default_rng(0).uniform(size=5)
print("p:", np.round(u, 3).tolist(), "-> k=4:", [stats.quantize_pvalue(x, 4) for x in u])
