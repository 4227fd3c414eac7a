"""Asymptotic key-rate bounds for the coherent-state heterodyne protocol.

All logarithms are base 2; the ``e`` inside the bounds is Euler's number.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np
from scipy.special import xlogy

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DomainError, UnsupportedRegimeError

if TYPE_CHECKING:
    from .attack import CollectiveGaussianAttack
    from .channel import GaussianChannel

LOG = logging.getLogger(__name__)

Regime = Literal["direct", "reverse", "zero"]

_LN2 = math.log(2.0)
_G_SLACK = 1e-12


def g(x: float | np.ndarray) -> float | np.ndarray:
    """Entropy of a thermal state with variance ``x``, in bits.

    ``g(x) = ((x+1)/2)·log((x+1)/2) − ((x−1)/2)·log((x−1)/2)`` with
    ``0·log 0 = 0``, so ``g(1) = 0``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 1.0 - _G_SLACK) or np.any(np.isnan(arr)):
        raise DomainError(f"g(x) needs x >= 1, got {x}")
    arr = np.maximum(arr, 1.0)
    plus = (arr + 1.0) / 2.0
    minus = (arr - 1.0) / 2.0
    value = (xlogy(plus, plus) - xlogy(minus, minus)) / _LN2
    return float(value) if value.ndim == 0 else value


def _check_tau(tau: float, tol: Tolerances) -> None:
    if tau <= 0:
        raise DomainError(f"the bounds need tau > 0, got {tau}")
    if abs(tau - 1.0) <= tol.tau:
        raise DomainError("the bounds exclude tau = 1")


def eta_canonical(tau: float, w: float, *, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Total noise of the canonical attack: 1 + 1/τ + |1−τ|·w/τ."""
    _check_tau(tau, tol)
    if w < 1.0:
        raise DomainError(f"w must be >= 1, got {w}")
    return 1.0 + 1.0 / tau + abs(1.0 - tau) * w / tau


def eta_from_thetas(
    tau: float,
    w: float,
    theta: float,
    theta_a: float,
    theta_b: float,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    _check_tau(tau, tol)
    k = abs(1.0 - tau) * w
    radicand = 1.0 + tau**2 + k**2 + tau * theta + k * (tau * theta_a + theta_b)
    return math.sqrt(radicand) / tau


def total_noise(atk: CollectiveGaussianAttack, *, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Total noise η of an attack, from its invariants and θ-parameters."""
    th = atk.thetas()
    inv = atk.invariants
    return eta_from_thetas(inv.tau, inv.w, th.theta, th.theta_a, th.theta_b, tol=tol)


def total_noise_det(ch: GaussianChannel) -> float:
    """Determinant form of the total noise: √det(T·Tᵀ + N + I) / det T."""
    tau = float(np.linalg.det(ch.t))
    if tau <= 0:
        raise DomainError(f"determinant form needs det T > 0, got {tau}")
    sigma = ch.t @ ch.t.T + ch.n + np.eye(2)
    return math.sqrt(float(np.linalg.det(sigma))) / tau


def asymptotic_mi(mu: float, eta: float) -> float:
    """High-modulation mutual information log₂(μ/η)."""
    if mu <= 0 or eta <= 0:
        raise DomainError("asymptotic MI needs mu > 0 and eta > 0")
    return math.log2(mu / eta)


def _check_triplet(tau: float, w: float, eta: float, tol: Tolerances) -> None:
    floor = eta_canonical(tau, w, tol=tol)
    if eta < floor - tol.eta * max(1.0, floor):
        raise DomainError(
            f"unphysical triplet: eta={eta:.12g} is below eta_c(tau, w)={floor:.12g}"
        )


def b_inf_alpha(tau: float, w: float, eta: float, *, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Direct-reconciliation bound B∞(α), in bits (may be negative)."""
    _check_triplet(tau, w, eta, tol)
    k = abs(1.0 - tau)
    return (
        math.log2(2.0 / (math.e * k * eta))
        - g(w)
        + g(max(1.0, tau + k * w))
    )


def b_inf_beta(tau: float, w: float, eta: float, *, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Reverse-reconciliation bound B∞(β), in bits (may be negative)."""
    _check_triplet(tau, w, eta, tol)
    k = abs(1.0 - tau)
    return math.log2(2.0 / (math.e * k * tau * eta)) - g(w)


@dataclass(frozen=True)
class RateReport:
    tau: float
    w: float
    eta: float | None
    b_alpha: float | None
    b_beta: float | None
    b_inf: float
    regime: Regime

    FIELDS = ("tau", "w", "eta", "b_alpha", "b_beta", "b_inf", "regime")

    def to_row(self) -> dict[str, float | str | None]:
        return {name: getattr(self, name) for name in self.FIELDS}


def _zero_report(tau: float, w: float) -> RateReport:
    return RateReport(tau=tau, w=w, eta=None, b_alpha=None, b_beta=None, b_inf=0.0, regime="zero")


def rate_from_triplet(
    tau: float, w: float, eta: float | None, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> RateReport:
    """Apply B∞ = max{0, B∞(α), B∞(β)} to the triplet {τ, w, η}.

    The bound vanishes for τ ≤ 0 whatever η is; τ = 1 is unsupported.
    """
    if abs(tau - 1.0) <= tol.tau:
        raise UnsupportedRegimeError("key-rate bounds are not defined at tau = 1")
    if tau <= 0:
        return _zero_report(tau, w)
    if eta is None:
        raise DomainError("eta is required for tau > 0")
    b_alpha = b_inf_alpha(tau, w, eta, tol=tol)
    b_beta = b_inf_beta(tau, w, eta, tol=tol)
    best = max(b_alpha, b_beta)
    if best <= 0:
        regime: Regime = "zero"
    elif b_alpha >= b_beta:
        regime = "direct"
    else:
        regime = "reverse"
    return RateReport(
        tau=tau,
        w=w,
        eta=eta,
        b_alpha=b_alpha,
        b_beta=b_beta,
        b_inf=max(0.0, best),
        regime=regime,
    )


def rate(atk: CollectiveGaussianAttack, *, tol: Tolerances = DEFAULT_TOLERANCES) -> RateReport:
    inv = atk.invariants
    if abs(inv.tau - 1.0) <= tol.tau:
        raise UnsupportedRegimeError("key-rate bounds are not defined at tau = 1")
    if inv.tau <= 0:
        return _zero_report(inv.tau, inv.w)
    return rate_from_triplet(inv.tau, inv.w, total_noise(atk, tol=tol), tol=tol)
