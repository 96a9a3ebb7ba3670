"""Node/center choreographies for the three network inference settings.

Individual decisions (a decision per hypothesis per node, global FDR
control):

* :func:`pooled_qbc`, quantized magnitudes pooled at the center;
* :func:`sampled_bc`, sampled tail counts pooled at the center;
* :func:`pooled_bc_baseline`, raw statistics pooled (unlimited budget).

Global decision (one test of the intersection of every hypothesis):
:func:`global_pooled_qbc`, :func:`global_wilcoxon`,
:func:`global_sign_test`, :func:`global_sampled_bc`,
:func:`wilcoxon_simes` and :func:`sign_simes`.

Intersection hypotheses (all nodes test the same ``m'`` variables):
:func:`averaged_bc` and the simplified :func:`sign_bh_baseline`.

Every public function runs a full round through :func:`netfdr.netsim.run_round`
so the returned :class:`Decision` carries its exact bit cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import compression, netsim, stats
from .compression import Quantizer
from .messages import CenterBroadcast, Decision, NodePayload

__all__ = [
    "Decision",
    "NodePayload",
    "CenterBroadcast",
    "ProtocolParams",
    "Protocol",
    "PROTOCOLS",
    "SETTINGS",
    "get_protocol",
    "run",
    "pooled_qbc",
    "sampled_bc",
    "pooled_bc_baseline",
    "averaged_bc",
    "sign_bh_baseline",
    "global_pooled_qbc",
    "global_wilcoxon",
    "global_sign_test",
    "global_sampled_bc",
    "wilcoxon_simes",
    "sign_simes",
]


@dataclass(frozen=True)
class ProtocolParams:
    """Tuning knobs shared by all protocols; each protocol reads what it needs.

    ``k_levels`` is either one p-value quantization level count per node or
    a single count used at every node. ``censor`` enables the reduced-cost
    p-value uplink where nodes whose quantized p-value exceeds ``alpha``
    send a 1-bit "above" symbol.
    """

    alpha: float
    q: int | None = None
    L: int | None = None
    k_levels: int | Sequence[int] | None = None
    censor: bool = False
    quantizer: Quantizer | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    def need_q(self) -> int:
        if self.q is None or int(self.q) < 1:
            raise ValueError("this protocol needs q >= 1")
        return int(self.q)

    def need_L(self) -> int:
        if self.L is None or int(self.L) < 2:
            raise ValueError("this protocol needs L >= 2")
        return int(self.L)

    def k_for(self, node: int, num_nodes: int | None = None) -> int:
        if self.k_levels is None:
            raise ValueError("this protocol needs k_levels")
        if np.ndim(self.k_levels) == 0:
            k = int(self.k_levels)
        else:
            levels = list(self.k_levels)
            if num_nodes is not None and len(levels) != num_nodes:
                raise ValueError(f"k_levels lists {len(levels)} entries for {num_nodes} nodes")
            k = int(levels[node])
        if k < 1:
            raise ValueError("p-value quantization needs k >= 1")
        return k


class Protocol:
    """Base class for a one-round star protocol.

    Subclasses implement :meth:`encode` (node side), :meth:`fuse` (center)
    and, outside the global setting, :meth:`local_decision`.
    """

    name = "protocol"
    setting = "individual"

    def check(self, topology: netsim.StarTopology, params: ProtocolParams) -> None:
        """Reject inputs the protocol cannot run on, before any message is sent."""

    def encode(self, node: int, stats_: np.ndarray, params: ProtocolParams) -> NodePayload:
        raise NotImplementedError

    def fuse(self, payloads: list[NodePayload], params: ProtocolParams) -> CenterBroadcast:
        raise NotImplementedError

    def local_decision(self, node, stats_, payload, broadcast, params) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"


# ---------------------------------------------------------------------------
# shared node encoders


def _quantized_payload(stats_: np.ndarray, params: ProtocolParams) -> NodePayload:
    q = params.need_q()
    body = compression.signed_quantize(stats_, q, params.quantizer)
    return NodePayload("signed-quantized-vector", body, netsim.charge("signed-quantized-vector", m=stats_.size, q=q))


def _counts_payload(stats_: np.ndarray, params: ProtocolParams) -> NodePayload:
    L = params.need_L()
    body = compression.sample_vr(compression.normalize(stats_), L)
    return NodePayload("sampled-counts", body, netsim.charge("sampled-counts", m=stats_.size, L=L))


def _pooled_fdp(payloads: list[NodePayload]) -> np.ndarray:
    v = sum(p.body.v_hat for p in payloads)
    r = sum(p.body.r for p in payloads)
    return (1 + v) / np.maximum(r, 1)


def _pooled_values(payloads: list[NodePayload]) -> np.ndarray:
    return np.concatenate([p.body.values for p in payloads])


# ---------------------------------------------------------------------------
# Setting I: individual decisions


class PooledQBC(Protocol):
    name = "pooled_qbc"

    def encode(self, node, stats_, params):
        return _quantized_payload(stats_, params)

    def fuse(self, payloads, params):
        res = stats.bc_select(_pooled_values(payloads), params.alpha)
        return CenterBroadcast(
            "threshold",
            res.threshold,
            netsim.charge_broadcast("threshold", q=params.need_q()),
            {"threshold": res.threshold, "fdp_hat": res.fdp_hat_at_threshold},
        )

    def local_decision(self, node, stats_, payload, broadcast, params):
        # compare on the transmitted scale, where the threshold was computed
        return np.flatnonzero(payload.body.values >= broadcast.body)


class PooledBCBaseline(Protocol):
    name = "pooled_bc"

    def encode(self, node, stats_, params):
        return NodePayload("raw-vector", stats_.copy(), netsim.charge("raw-vector", m=stats_.size))

    def fuse(self, payloads, params):
        res = stats.bc_select(np.concatenate([p.body for p in payloads]), params.alpha)
        return CenterBroadcast(
            "threshold",
            res.threshold,
            netsim.charge_broadcast("threshold"),
            {"threshold": res.threshold, "fdp_hat": res.fdp_hat_at_threshold},
        )

    def local_decision(self, node, stats_, payload, broadcast, params):
        return np.flatnonzero(stats_ >= broadcast.body)


class SampledBC(Protocol):
    name = "sampled_bc"

    def encode(self, node, stats_, params):
        return _counts_payload(stats_, params)

    def fuse(self, payloads, params):
        L = params.need_L()
        fdp = _pooled_fdp(payloads)
        ok = np.flatnonzero(fdp <= params.alpha)
        K = int(ok[0]) + 1 if ok.size else L
        return CenterBroadcast(
            "threshold-index",
            K,
            netsim.charge_broadcast("threshold-index", L=L),
            {"K": K, "threshold": float(compression.sample_grid(L)[K - 1]), "fdp_hat": fdp.tolist()},
        )

    def local_decision(self, node, stats_, payload, broadcast, params):
        t = compression.sample_grid(params.need_L())[broadcast.body - 1]
        return np.flatnonzero(compression.normalize(stats_) > t)


# ---------------------------------------------------------------------------
# Setting III: intersection hypotheses


class _Intersection(Protocol):
    setting = "intersection"

    def check(self, topology, params):
        if len(set(topology.per_node_m)) != 1:
            raise ValueError(
                f"all nodes must hold the same number of statistics, got {sorted(set(topology.per_node_m))}"
            )

    def local_decision(self, node, stats_, payload, broadcast, params):
        return broadcast.body


class AveragedBC(_Intersection):
    name = "averaged_bc"

    def encode(self, node, stats_, params):
        return _quantized_payload(stats_, params)

    def fuse(self, payloads, params):
        m = len(payloads[0].body)
        w_bar = np.mean([p.body.values for p in payloads], axis=0)
        res = stats.bc_select(w_bar, params.alpha)
        return CenterBroadcast(
            "rejected-index-set",
            res.rejected,
            netsim.charge_broadcast("rejected-index-set", m=m),
            {"threshold": res.threshold, "fdp_hat": res.fdp_hat_at_threshold},
        )


class SignBHBaseline(_Intersection):
    """Simplified baseline: per-variable sign test across nodes, then BH.

    Nodes send only their sign vectors (the 1-level quantizer); magnitude
    ordering used by richer sign-communication schemes is deliberately
    ignored.
    """

    name = "sign_bh_simplified"

    def encode(self, node, stats_, params):
        body = compression.signed_quantize(stats_, 1)
        return NodePayload("signed-quantized-vector", body, netsim.charge("signed-quantized-vector", m=stats_.size, q=1))

    def fuse(self, payloads, params):
        m = len(payloads[0].body)
        signs = np.array([p.body.signs for p in payloads])
        negatives = (signs < 0).sum(axis=0)
        nonzero = (signs != 0).sum(axis=0)
        pvals = np.array([
            stats.sign_test_pvalue(x, n) if n > 0 else 1.0 for x, n in zip(negatives, nonzero)
        ])
        rejected = stats.bh_select(pvals, params.alpha)
        return CenterBroadcast(
            "rejected-index-set",
            rejected,
            netsim.charge_broadcast("rejected-index-set", m=m),
            {"pvalues": pvals.tolist()},
        )


# ---------------------------------------------------------------------------
# Setting II: global decisions


def _global(reject: bool, **detail) -> CenterBroadcast:
    return CenterBroadcast("global-decision", bool(reject), netsim.charge_broadcast("global-decision"), detail)


class GlobalPooledQBC(PooledQBC):
    name = "global_pooled_qbc"
    setting = "global"

    def fuse(self, payloads, params):
        res = stats.bc_select(_pooled_values(payloads), params.alpha)
        return _global(math.isfinite(res.threshold), threshold=res.threshold)


class GlobalWilcoxon(PooledQBC):
    name = "global_wilcoxon"
    setting = "global"

    def fuse(self, payloads, params):
        p = _wilcoxon_local_p(_pooled_values(payloads))
        return _global(p <= params.alpha, pvalue=p)


class GlobalSignTest(Protocol):
    name = "global_sign_test"
    setting = "global"

    def encode(self, node, stats_, params):
        nonzero = int(np.count_nonzero(stats_))
        negatives = int(np.count_nonzero(stats_ < 0))
        return NodePayload("sign-counts", (nonzero, negatives), netsim.charge("sign-counts", m=stats_.size))

    def fuse(self, payloads, params):
        n_tot = sum(p.body[0] for p in payloads)
        x_tot = sum(p.body[1] for p in payloads)
        p = stats.sign_test_pvalue(x_tot, n_tot) if n_tot > 0 else 1.0
        return _global(p <= params.alpha, pvalue=p, n=n_tot, negatives=x_tot)


class GlobalSampledBC(SampledBC):
    name = "global_sampled_bc"
    setting = "global"

    def fuse(self, payloads, params):
        fdp = _pooled_fdp(payloads)
        return _global(float(fdp.min()) <= params.alpha, min_fdp_hat=float(fdp.min()))


def _wilcoxon_local_p(x: np.ndarray) -> float:
    if not np.any(x != 0):
        return 1.0
    W, n = stats.wilcoxon_statistic(x)
    return stats.wilcoxon_pvalue(W, n)


def _sign_local_p(x: np.ndarray) -> float:
    n = int(np.count_nonzero(x))
    if n == 0:
        return 1.0
    return stats.sign_test_pvalue(int(np.count_nonzero(x < 0)), n)


class _LocalPSimes(Protocol):
    setting = "global"
    local_test = staticmethod(_wilcoxon_local_p)

    def check(self, topology, params):
        params.k_for(0, topology.num_nodes)

    def encode(self, node, stats_, params):
        k = params.k_for(node)
        qp = stats.quantize_pvalue(self.local_test(stats_), k)
        if params.censor:
            above = qp > params.alpha
            return NodePayload(
                "censored-pvalue",
                None if above else qp,
                netsim.charge("censored-pvalue", k=k, alpha=params.alpha, above=above),
            )
        return NodePayload("quantized-pvalue", qp, netsim.charge("quantized-pvalue", k=k))

    def fuse(self, payloads, params):
        # a censored "above" symbol is read as Q = 1
        q = [1.0 if p.body is None else p.body for p in payloads]
        s = stats.simes_pvalue(q)
        return _global(s <= params.alpha, simes=s, quantized_pvalues=q)


class WilcoxonSimes(_LocalPSimes):
    name = "wilcoxon_simes"
    local_test = staticmethod(_wilcoxon_local_p)


class SignSimes(_LocalPSimes):
    name = "sign_simes"
    local_test = staticmethod(_sign_local_p)


# ---------------------------------------------------------------------------
# registry and functional entry points

PROTOCOLS: dict[str, Protocol] = {
    p.name: p
    for p in (
        PooledQBC(),
        SampledBC(),
        PooledBCBaseline(),
        AveragedBC(),
        SignBHBaseline(),
        GlobalPooledQBC(),
        GlobalWilcoxon(),
        GlobalSignTest(),
        GlobalSampledBC(),
        WilcoxonSimes(),
        SignSimes(),
    )
}
SETTINGS = {name: p.setting for name, p in PROTOCOLS.items()}


def get_protocol(name: str) -> Protocol:
    try:
        return PROTOCOLS[name]
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; choose from {sorted(PROTOCOLS)}") from None


def run(name: str, nodes: Sequence, params: ProtocolParams) -> tuple[Decision, netsim.Transcript]:
    """Run protocol ``name`` on per-node statistics; returns decision and transcript."""
    return netsim.run_round(netsim.StarTopology.from_inputs(nodes), get_protocol(name), nodes, params)


def pooled_qbc(nodes, alpha: float, q: int, quantizer: Quantizer | None = None) -> Decision:
    """Pooled q-BC: nodes send signed quantized normalized magnitudes."""
    return run("pooled_qbc", nodes, ProtocolParams(alpha, q=q, quantizer=quantizer))[0]


def sampled_bc(nodes, alpha: float, L: int) -> Decision:
    """Sampled BC: nodes send tail counts on an ``L``-point threshold grid."""
    return run("sampled_bc", nodes, ProtocolParams(alpha, L=L))[0]


def pooled_bc_baseline(nodes, alpha: float) -> Decision:
    """Centralized BC on the raw pooled statistics."""
    return run("pooled_bc", nodes, ProtocolParams(alpha))[0]


def averaged_bc(nodes, alpha: float, q: int, quantizer: Quantizer | None = None) -> Decision:
    """BC on the coordinate-wise average of the nodes' signed quantized vectors."""
    return run("averaged_bc", nodes, ProtocolParams(alpha, q=q, quantizer=quantizer))[0]


def sign_bh_baseline(nodes, alpha: float) -> Decision:
    """Simplified baseline: cross-node sign test per variable, then BH."""
    return run("sign_bh_simplified", nodes, ProtocolParams(alpha))[0]


def global_pooled_qbc(nodes, alpha: float, q: int) -> Decision:
    return run("global_pooled_qbc", nodes, ProtocolParams(alpha, q=q))[0]


def global_wilcoxon(nodes, alpha: float, q: int) -> Decision:
    return run("global_wilcoxon", nodes, ProtocolParams(alpha, q=q))[0]


def global_sign_test(nodes, alpha: float) -> Decision:
    return run("global_sign_test", nodes, ProtocolParams(alpha))[0]


def global_sampled_bc(nodes, alpha: float, L: int) -> Decision:
    return run("global_sampled_bc", nodes, ProtocolParams(alpha, L=L))[0]


def wilcoxon_simes(nodes, alpha: float, k_levels, censor: bool = False) -> Decision:
    """Local Wilcoxon p-values, quantized to ``k`` levels, fused by Simes."""
    return run("wilcoxon_simes", nodes, ProtocolParams(alpha, k_levels=k_levels, censor=censor))[0]


def sign_simes(nodes, alpha: float, k_levels, censor: bool = False) -> Decision:
    """Local sign-test p-values, quantized to ``k`` levels, fused by Simes."""
    return run("sign_simes", nodes, ProtocolParams(alpha, k_levels=k_levels, censor=censor))[0]
