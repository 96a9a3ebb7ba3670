"""Per-hypothesis decisions with network-wide FDR control.

Ten nodes each hold 50 statistics from the simulation model. The three
individual-decision protocols differ only in what crosses the uplink.
"""

from netfdr import protocols
from netfdr.compression import sample_budget_L
from netfdr.experiments import DataModel, generate_trial, trial_metrics

model = DataModel(N=10, n=50, mu=2.5, seed=1)
data = generate_trial(model, trial=0)
nodes = [sv.values for sv in data]
L = sample_budget_L(50, 4)

runs = {
    "pooled_qbc": protocols.ProtocolParams(0.2, q=4),
    "sampled_bc": protocols.ProtocolParams(0.2, L=L),
    "pooled_bc": protocols.ProtocolParams(0.2),
}
for name, params in runs.items():
    decision, transcript = protocols.run(name, nodes, params)
    m = trial_metrics(decision, data, "individual")
    print(f"{name:11s} rejections={m.reject_count:3d} FDP={m.fdp:.3f} TPP={m.tpp:.3f} "
          f"uplink/node={transcript.uplink_bits_per_node[0]} bits")
