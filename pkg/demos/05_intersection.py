"""All nodes test the same variables; a variable is non-null if any node sees signal.

Averaging the quantized statistics pools evidence before selection. The
sign+BH baseline is a simplified comparator that only uses signs.
"""

from netfdr import protocols
from netfdr.experiments import DataModel, generate_trial, trial_metrics

model = DataModel(N=10, n=30, mu=1.0, seed=5, aligned=True)
for name, params in [("averaged_bc", protocols.ProtocolParams(0.2, q=16)),
                     ("sign_bh_simplified", protocols.ProtocolParams(0.2))]:
    fdp = tpp = 0.0
    for t in range(200):
        data = generate_trial(model, t)
        d, _ = protocols.run(name, [sv.values for sv in data], params)
        m = trial_metrics(d, data, "intersection")
        fdp += m.fdp
        tpp += m.tpp
    print(f"{name:19s} FDR~{fdp / 200:.3f} power~{tpp / 200:.3f}")
