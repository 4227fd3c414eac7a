"""Collective Gaussian attacks G = {L(τ, r), |w⟩, U_A, U_B}.

An attack is a canonical form (through its invariants) dressed by Eve's
input unitary U_A = (M_A, d_A) and output unitary U_B = (M_B, d_B).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ChannelInvariants,
    ClassLabel,
    GaussianChannel,
    canonical_form,
    decompose,
    dress,
)
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DomainError, SizeError
from .gaussian import GaussianUnitary
from .keyrate import total_noise
from .symplectic import I2, is_symplectic, random_symplectic

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThetaParams:
    theta: float
    theta_a: float
    theta_b: float


def _symplectic_2x2(m: np.ndarray, name: str) -> np.ndarray:
    arr = np.array(m, dtype=float)
    if arr.shape != (2, 2):
        raise SizeError(f"{name} must be 2x2, got {arr.shape}")
    scale = max(1.0, float(np.max(np.abs(arr)))) ** 2
    if not is_symplectic(arr, DEFAULT_TOLERANCES.symp * scale):
        raise DomainError(f"{name} is not symplectic (det = {np.linalg.det(arr):.12g})")
    arr.setflags(write=False)
    return arr


def _vector2(v: np.ndarray, name: str) -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.shape != (2,):
        raise SizeError(f"{name} must be a 2-vector, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CollectiveGaussianAttack:
    class_label: ClassLabel
    invariants: ChannelInvariants
    ma: np.ndarray = field(default_factory=lambda: I2.copy())
    da: np.ndarray = field(default_factory=lambda: np.zeros(2))
    mb: np.ndarray = field(default_factory=lambda: I2.copy())
    db: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self) -> None:
        object.__setattr__(self, "ma", _symplectic_2x2(self.ma, "M_A"))
        object.__setattr__(self, "mb", _symplectic_2x2(self.mb, "M_B"))
        object.__setattr__(self, "da", _vector2(self.da, "d_A"))
        object.__setattr__(self, "db", _vector2(self.db, "d_B"))

    def thetas(self) -> ThetaParams:
        """θ-parameters from the rows a₁, a₂ of M_A and the columns b₁, b₂ of M_B."""
        a_gram = self.ma @ self.ma.T
        b_gram = self.mb.T @ self.mb
        return ThetaParams(
            theta=float(np.trace(a_gram @ b_gram)),
            theta_a=float(np.trace(a_gram)),
            theta_b=float(np.trace(b_gram)),
        )

    @property
    def ua(self) -> GaussianUnitary:
        return GaussianUnitary(self.ma, self.da)

    @property
    def ub(self) -> GaussianUnitary:
        return GaussianUnitary(self.mb, self.db)


def thetas(atk: CollectiveGaussianAttack) -> ThetaParams:
    return atk.thetas()


def infer_label(tau: float, nbar: float, *, tol: Tolerances = DEFAULT_TOLERANCES) -> ClassLabel:
    """Canonical class of a (τ, n̄) pair when no label is given.

    τ = 0 maps to A1 and τ = 1 to B2 (n̄ > 0) or B2Id; the rank-one
    classes A2 and B1 need an explicit label.
    """
    if abs(tau) <= tol.tau:
        return "A1"
    if abs(tau - 1.0) <= tol.tau:
        return "B2" if nbar > tol.tau else "B2Id"
    if tau < 0:
        return "D"
    return "CAtt" if tau < 1 else "CAmp"


def canonical(
    tau: float,
    nbar: float,
    *,
    label: str | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> CollectiveGaussianAttack:
    """The canonical attack {L(τ, r), |w⟩, I, I}."""
    cf = canonical_form(label or infer_label(tau, nbar, tol=tol), tau, nbar, tol=tol)
    return CollectiveGaussianAttack(class_label=cf.class_label, invariants=cf.invariants)


def dressed(
    tau: float,
    nbar: float,
    ma: np.ndarray,
    mb: np.ndarray,
    da: np.ndarray | None = None,
    db: np.ndarray | None = None,
    *,
    label: str | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> CollectiveGaussianAttack:
    base = canonical(tau, nbar, label=label, tol=tol)
    return CollectiveGaussianAttack(
        class_label=base.class_label,
        invariants=base.invariants,
        ma=ma,
        da=np.zeros(2) if da is None else da,
        mb=mb,
        db=np.zeros(2) if db is None else db,
    )


def to_channel(atk: CollectiveGaussianAttack) -> GaussianChannel:
    """The channel U_B ∘ C ∘ U_A realized by the attack."""
    inv = atk.invariants
    cf = canonical_form(atk.class_label, inv.tau, inv.nbar)
    return dress(cf.to_channel(), atk.ua, atk.ub)


def from_channel(
    ch: GaussianChannel, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> CollectiveGaussianAttack:
    ua, cf, ub = decompose(ch, tol=tol)
    return CollectiveGaussianAttack(
        class_label=cf.class_label,
        invariants=cf.invariants,
        ma=ua.s,
        da=ua.d,
        mb=ub.s,
        db=ub.d,
    )


def triplet(
    atk: CollectiveGaussianAttack, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[float, float, float | None]:
    """The rate-relevant triplet {τ, w, η}; η is undefined for τ ≤ 0 and τ = 1."""
    inv = atk.invariants
    if inv.tau <= 0 or abs(inv.tau - 1.0) <= tol.tau:
        return inv.tau, inv.w, None
    return inv.tau, inv.w, total_noise(atk, tol=tol)


def random_attack(
    rng: np.random.Generator,
    tau: float,
    nbar: float,
    max_squeeze_db: float = 20.0,
    *,
    label: str | None = None,
) -> CollectiveGaussianAttack:
    """Canonical (τ, n̄) attack dressed by random symplectics and displacements."""
    ma = random_symplectic(rng, max_squeeze_db)
    mb = random_symplectic(rng, max_squeeze_db)
    return dressed(tau, nbar, ma, mb, rng.normal(size=2), rng.normal(size=2), label=label)


def extremal_counterpart(
    atk: CollectiveGaussianAttack, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> CollectiveGaussianAttack:
    """Canonical attack with the same (τ, η) and w′ = (τη − τ − 1)/|1 − τ|."""
    tau, w, eta = triplet(atk, tol=tol)
    if eta is None:
        raise DomainError(f"extremal counterpart needs 0 < tau != 1, got tau={tau}")
    k = abs(1.0 - tau)
    w_prime = (tau * eta - tau - 1.0) / k
    slack = tol.eta * max(1.0, w, tau * eta / k)
    if w_prime < w - slack:
        raise DomainError(f"unphysical attack: w'={w_prime:.12g} is below w={w:.12g}")
    w_prime = max(w_prime, w)
    LOG.debug("extremal counterpart: tau=%.6g eta=%.6g w=%.6g -> w'=%.6g", tau, eta, w, w_prime)
    return canonical(tau, (w_prime - 1.0) / 2.0, tol=tol)
