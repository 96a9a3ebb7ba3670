"""What a node actually sends: quantized magnitudes or sampled tail counts."""

import numpy as np

from netfdr import compression, netsim

w = np.array([2.0, -4.0, 1.0, 0.3, -0.1])
n = compression.normalize(w)
print("normalized:", n.tolist())

qv = compression.signed_quantize(w, q=4)
print("signed levels at q=4:", qv.values.tolist())
print("  cost:", netsim.charge("signed-quantized-vector", m=w.size, q=4), "bits")

c = compression.sample_vr(n, L=3)
print(f"grid {c.grid.tolist()}: #(< -t) = {c.v_hat.tolist()}, #(> t) = {c.r.tolist()}")
print("  cost:", netsim.charge("sampled-counts", m=w.size, L=3), "bits")

# the sampling grid can be sized so both uplinks cost about the same
for m in (20, 50, 100):
    L = compression.sample_budget_L(m, 4)
    print(f"m={m}: L={L}, sampled {netsim.charge('sampled-counts', m=m, L=L)} bits"
          f" vs quantized {netsim.charge('signed-quantized-vector', m=m, q=4)} bits")
