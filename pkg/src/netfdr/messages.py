"""Message envelopes exchanged over the star network and the final decision."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["PAYLOAD_KINDS", "BROADCAST_KINDS", "NodePayload", "CenterBroadcast", "Decision"]

PAYLOAD_KINDS = (
    "signed-quantized-vector",
    "sampled-counts",
    "quantized-pvalue",
    "censored-pvalue",
    "sign-counts",
    "raw-vector",
)
BROADCAST_KINDS = ("threshold", "threshold-index", "rejected-index-set", "global-decision")


@dataclass(frozen=True)
class NodePayload:
    """One uplink message; ``bit_cost`` comes from :func:`netfdr.netsim.charge`."""

    kind: str
    body: Any
    bit_cost: int

    def __post_init__(self):
        if self.kind not in PAYLOAD_KINDS:
            raise ValueError(f"unknown payload kind {self.kind!r}")


@dataclass(frozen=True)
class CenterBroadcast:
    """The single downlink message.

    ``detail`` holds center-side diagnostics (p-values, FDP estimates) that
    are reported but never transmitted or charged.
    """

    kind: str
    body: Any
    bit_cost: int
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in BROADCAST_KINDS:
            raise ValueError(f"unknown broadcast kind {self.kind!r}")


@dataclass(frozen=True)
class Decision:
    """Outcome of one protocol round.

    Individual and intersection settings populate ``per_node_rejections``
    (one sorted index array per node); the global setting populates
    ``global_reject``.
    """

    per_node_rejections: list[np.ndarray] | None = None
    global_reject: bool | None = None
    total_bits: int = 0
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.per_node_rejections is None) == (self.global_reject is None):
            raise ValueError("exactly one of per_node_rejections / global_reject must be set")

    @property
    def num_rejections(self) -> int:
        if self.per_node_rejections is None:
            return int(bool(self.global_reject))
        return sum(len(r) for r in self.per_node_rejections)
