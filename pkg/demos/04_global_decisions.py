"""Testing the global null (no signal anywhere) with six fusion rules."""

from netfdr import protocols
from netfdr.experiments import DataModel, generate_trial

params = protocols.ProtocolParams(0.2, q=16, L=5, k_levels=16)
alt = DataModel(N=10, n=10, mu=1.5, seed=3)
null = alt.global_null()

names = ["global_pooled_qbc", "global_wilcoxon", "global_sign_test",
         "global_sampled_bc", "wilcoxon_simes", "sign_simes"]
trials = 300
print(f"{'method':18s} {'power':>6s} {'type-I':>6s} {'bits/node':>9s}")
for name in names:
    rates = []
    for model in (alt, null):
        hits = 0
        for t in range(trials):
            nodes = [sv.values for sv in generate_trial(model, t)]
            decision, tr = protocols.run(name, nodes, params)
            hits += decision.global_reject
        rates.append(hits / trials)
    print(f"{name:18s} {rates[0]:6.3f} {rates[1]:6.3f} {tr.uplink_bits_per_node[0]:9d}")

# with censoring, nodes whose p-value is clearly large send a single bit
nodes = [sv.values for sv in generate_trial(null, trial=0)]
_, tr = protocols.run("sign_simes", nodes, protocols.ProtocolParams(0.2, k_levels=16, censor=True))
print("censored sign+Simes uplink:", tr.uplink_bits_per_node)
