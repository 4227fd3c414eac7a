from .attack import CollectiveGaussianAttack, canonical, extremal_counterpart, from_channel
from .channel import GaussianChannel, classify, decompose, invariants, validate
from .keyrate import RateReport, rate, rate_from_triplet

__all__ = [
    "CollectiveGaussianAttack",
    "GaussianChannel",
    "RateReport",
    "canonical",
    "classify",
    "decompose",
    "extremal_counterpart",
    "from_channel",
    "invariants",
    "rate",
    "rate_from_triplet",
    "validate",
]
