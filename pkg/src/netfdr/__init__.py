"""Communication-efficient distribution-free multiple testing over star networks."""

from . import compression, experiments, netsim, protocols, stats
from .messages import CenterBroadcast, Decision, NodePayload
from .protocols import ProtocolParams

__version__ = "0.1.0"

__all__ = [
    "compression",
    "experiments",
    "netsim",
    "protocols",
    "stats",
    "CenterBroadcast",
    "Decision",
    "NodePayload",
    "ProtocolParams",
]
