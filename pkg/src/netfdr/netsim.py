"""In-process star network with exact fixed-width bit accounting.

Every uplink payload and the single downlink broadcast are logged in a
:class:`Transcript`. Costs follow fixed-width binary codes:

=========================  ==========================================
payload                    bits
=========================  ==========================================
signed-quantized-vector    ``m * (ceil(log2 q) + 1)``
sampled-counts             ``2 * L * ceil(log2(m + 1))``
quantized-pvalue           ``ceil(log2(k + 1))``
censored-pvalue            ``1`` if above alpha, else
                           ``1 + ceil(log2(floor(k * alpha) + 1))``
sign-counts                ``2 * ceil(log2(m + 1))``
raw-vector                 ``64 * m``
=========================  ==========================================

Broadcasts: a quantized threshold costs ``ceil(log2(q + 1))`` bits (q levels
plus "infinite"), a raw threshold 64 bits, a grid index ``ceil(log2 L)``
bits, a rejection set one bit per hypothesis and a global decision 1 bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .compression import ceil_log2
from .messages import CenterBroadcast, Decision, NodePayload

__all__ = [
    "StarTopology",
    "Transcript",
    "charge",
    "charge_broadcast",
    "run_round",
]

FLOAT_BITS = 64


@dataclass(frozen=True)
class StarTopology:
    num_nodes: int
    per_node_m: tuple[int, ...]

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValueError("a star network needs at least one leaf node")
        if len(self.per_node_m) != self.num_nodes:
            raise ValueError("per_node_m must list one size per node")
        if any(m < 1 for m in self.per_node_m):
            raise ValueError("every node must hold at least one statistic")

    @classmethod
    def from_inputs(cls, inputs: Sequence) -> "StarTopology":
        sizes = tuple(int(np.asarray(x).size) for x in inputs)
        return cls(len(sizes), sizes)


@dataclass
class Transcript:
    uplink_bits_per_node: list[int]
    downlink_bits: int = 0
    messages: list[tuple[str, str, int]] = field(default_factory=list)

    @property
    def total_bits(self) -> int:
        return sum(self.uplink_bits_per_node) + self.downlink_bits

    def to_log(self) -> str:
        """Line-oriented ``sender,kind,bits`` log, one line per message."""
        return "".join(f"{s},{k},{b}\n" for s, k, b in self.messages)

    @classmethod
    def from_log(cls, text: str) -> "Transcript":
        messages = []
        for line in text.splitlines():
            if not line.strip():
                continue
            sender, kind, bits = line.rsplit(",", 2)
            messages.append((sender, kind, int(bits)))
        nodes = [s for s, _, _ in messages if s.startswith("node")]
        uplink = [0] * (max((int(s[4:]) for s in nodes), default=-1) + 1)
        downlink = 0
        for sender, _, bits in messages:
            if sender == "center":
                downlink += bits
            else:
                uplink[int(sender[4:])] += bits
        return cls(uplink, downlink, messages)


def _need(name, value):
    if value is None:
        raise ValueError(f"{name} is required for this payload kind")
    value = int(value)
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return value


def charge(kind: str, *, m=None, q=None, L=None, k=None, alpha=None, above=None) -> int:
    """Bit cost of one uplink payload under the fixed-width coding rules."""
    if kind == "signed-quantized-vector":
        return _need("m", m) * (ceil_log2(_need("q", q)) + 1)
    if kind == "sampled-counts":
        L = _need("L", L)
        if L < 2:
            raise ValueError("L must be >= 2")
        return 2 * L * ceil_log2(_need("m", m) + 1)
    if kind == "quantized-pvalue":
        return ceil_log2(_need("k", k) + 1)
    if kind == "censored-pvalue":
        if above is None or alpha is None:
            raise ValueError("censored-pvalue needs alpha and the above flag")
        if above:
            return 1
        return 1 + ceil_log2(math.floor(_need("k", k) * alpha) + 1)
    if kind == "sign-counts":
        return 2 * ceil_log2(_need("m", m) + 1)
    if kind == "raw-vector":
        return FLOAT_BITS * _need("m", m)
    raise ValueError(f"unknown payload kind {kind!r}")


def charge_broadcast(kind: str, *, q=None, L=None, m=None) -> int:
    """Bit cost of the downlink broadcast."""
    if kind == "threshold":
        return FLOAT_BITS if q is None else ceil_log2(_need("q", q) + 1)
    if kind == "threshold-index":
        return ceil_log2(_need("L", L))
    if kind == "rejected-index-set":
        return _need("m", m)
    if kind == "global-decision":
        return 1
    raise ValueError(f"unknown broadcast kind {kind!r}")


def run_round(topology: StarTopology, protocol, inputs: Sequence, params) -> tuple[Decision, Transcript]:
    """Run one uplink / center / downlink round of ``protocol``.

    ``protocol`` provides ``encode(i, stats, params) -> NodePayload``,
    ``fuse(payloads, params) -> CenterBroadcast`` and
    ``local_decision(i, stats, payload, broadcast, params)``, plus a
    ``check(topology, params)`` and a ``setting`` attribute; see :class:`netfdr.protocols.Protocol`.
    """
    stats = [np.asarray(x, dtype=float).ravel() for x in inputs]
    if len(stats) != topology.num_nodes:
        raise ValueError(f"expected {topology.num_nodes} node inputs, got {len(stats)}")
    for i, (x, m) in enumerate(zip(stats, topology.per_node_m)):
        if x.size != m:
            raise ValueError(f"node {i} holds {x.size} statistics, topology says {m}")
        if not np.all(np.isfinite(x)):
            raise ValueError(f"node {i} has non-finite statistics")

    protocol.check(topology, params)

    transcript = Transcript([0] * topology.num_nodes)
    payloads: list[NodePayload] = []
    for i, x in enumerate(stats):
        payload = protocol.encode(i, x, params)
        payloads.append(payload)
        transcript.uplink_bits_per_node[i] += payload.bit_cost
        transcript.messages.append((f"node{i}", payload.kind, payload.bit_cost))

    broadcast: CenterBroadcast = protocol.fuse(payloads, params)
    transcript.downlink_bits += broadcast.bit_cost
    transcript.messages.append(("center", broadcast.kind, broadcast.bit_cost))

    detail = dict(broadcast.detail)
    if protocol.setting == "global":
        decision = Decision(global_reject=bool(broadcast.body), detail=detail)
    else:
        rejections = [
            np.asarray(protocol.local_decision(i, x, payloads[i], broadcast, params), dtype=np.int64)
            for i, x in enumerate(stats)
        ]
        decision = Decision(per_node_rejections=rejections, detail=detail)
    return replace(decision, total_bits=transcript.total_bits), transcript
