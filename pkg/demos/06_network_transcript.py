"""Every message in a round is logged with its exact fixed-width bit cost."""

import numpy as np

from netfdr import netsim, protocols

nodes = [np.array([0.5, -1.0, 0.25, 0.9]), np.array([3.0, 2.0, -0.5])]
topology = netsim.StarTopology.from_inputs(nodes)
decision, transcript = netsim.run_round(
    topology, protocols.get_protocol("sampled_bc"), nodes, protocols.ProtocolParams(0.5, L=3)
)
print("decision detail:", decision.detail)
print(transcript.to_log(), end="")
print("total bits:", transcript.total_bits)
assert netsim.Transcript.from_log(transcript.to_log()).total_bits == transcript.total_bits
