"""One-mode Gaussian channels G(T, N, d) and their canonical forms.

A channel acts as x̄ → T·x̄ + d, V → T·V·Tᵀ + N. Up to input/output Gaussian
unitaries it equals one of eight canonical forms C(τ, r, n̄), labelled
A1, A2, B1, B2, B2Id, CAtt, CAmp and D.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DecompositionError, InvalidChannelError, ParameterError, SizeError
from .gaussian import GaussianState, GaussianUnitary
from .symplectic import I2, Z

LOG = logging.getLogger(__name__)

ClassLabel = Literal["A1", "A2", "B1", "B2", "B2Id", "CAtt", "CAmp", "D"]
CLASS_LABELS: tuple[ClassLabel, ...] = ("A1", "A2", "B1", "B2", "B2Id", "CAtt", "CAmp", "D")

_RANK_BY_CLASS: dict[str, int] = {
    "A1": 0,
    "A2": 1,
    "B1": 1,
    "B2": 2,
    "B2Id": 0,
    "CAtt": 2,
    "CAmp": 2,
    "D": 2,
}


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    t: np.ndarray
    n: np.ndarray
    d: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self) -> None:
        t = np.array(self.t, dtype=float)
        n = np.array(self.n, dtype=float)
        d = np.array(self.d, dtype=float)
        if t.shape != (2, 2) or n.shape != (2, 2) or d.shape != (2,):
            raise SizeError(
                f"one-mode channel needs 2x2 T, 2x2 N and a 2-vector d, got "
                f"{t.shape}, {n.shape}, {d.shape}"
            )
        for arr in (t, n, d):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d", d)

    @property
    def tau(self) -> float:
        return float(np.linalg.det(self.t))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class ChannelInvariants:
    tau: float
    r: int
    nbar: float
    w: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", 2.0 * self.nbar + 1.0)


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    class_label: ClassLabel
    invariants: ChannelInvariants
    tc: np.ndarray
    nc: np.ndarray

    def to_channel(self) -> GaussianChannel:
        return GaussianChannel(self.tc, self.nc, np.zeros(2))


def _scale(m: np.ndarray) -> float:
    return max(1.0, float(np.sum(m * m)))


def validate(ch: GaussianChannel, *, tol: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    """Check N = Nᵀ ⪰ 0 and det N ≥ (det T − 1)²."""
    violations: list[str] = []
    slack = tol.cpt * _scale(ch.n)
    if np.max(np.abs(ch.n - ch.n.T)) > slack:
        violations.append("N is not symmetric")
    lowest = float(np.linalg.eigvalsh((ch.n + ch.n.T) / 2)[0])
    if lowest < -slack:
        violations.append(f"N is not positive semidefinite (eigenvalue {lowest:.6g})")
    det_n = float(np.linalg.det(ch.n))
    bound = (ch.tau - 1.0) ** 2
    if det_n < bound - tol.cpt * max(_scale(ch.n), _scale(ch.t)):
        violations.append(f"det N = {det_n:.6g} is below (det T - 1)^2 = {bound:.6g}")
    return ValidationReport(ok=not violations, violations=violations)


def require_valid(ch: GaussianChannel, *, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    report = validate(ch, tol=tol)
    if not report.ok:
        raise InvalidChannelError(report)


def apply(ch: GaussianChannel, state: GaussianState) -> GaussianState:
    if state.n_modes != 1:
        raise SizeError(f"one-mode channel applied to a {state.n_modes}-mode state")
    return GaussianState(ch.t @ state.mean + ch.d, ch.t @ state.cov @ ch.t.T + ch.n)


def _rank(m: np.ndarray, tol: float) -> int:
    """Singular values above ``tol`` relative to the largest (floored at 1)."""
    sv = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(sv > tol * max(1.0, float(sv[0]))))


def _is_unit_tau(tau: float, t: np.ndarray, tol: Tolerances) -> bool:
    return abs(tau - 1.0) <= tol.tau * _scale(t)


def classify(ch: GaussianChannel, *, tol: Tolerances = DEFAULT_TOLERANCES) -> ClassLabel:
    require_valid(ch, tol=tol)
    rank_t = _rank(ch.t, tol.rank)
    if rank_t == 0:
        return "A1"
    if rank_t == 1:
        return "A2"
    tau = ch.tau
    if _is_unit_tau(tau, ch.t, tol):
        rank_n = _rank(ch.n, tol.rank)
        return ("B2Id", "B1", "B2")[rank_n]
    if tau < 0:
        return "D"
    return "CAtt" if tau < 1 else "CAmp"


def _nbar_for(label: ClassLabel, tau: float, det_n: float) -> float:
    root = math.sqrt(max(det_n, 0.0))
    if label in ("A1", "A2"):
        nbar = (root - 1.0) / 2.0
    elif label == "B2":
        nbar = root
    elif label in ("B1", "B2Id"):
        nbar = 0.0
    else:
        nbar = (root / abs(1.0 - tau) - 1.0) / 2.0
    if nbar < 0:
        LOG.debug("clamping nbar=%.3e to 0 for class %s", nbar, label)
        nbar = 0.0
    return nbar


def invariants(ch: GaussianChannel, *, tol: Tolerances = DEFAULT_TOLERANCES) -> ChannelInvariants:
    """The symplectic invariants {τ, r, n̄} (and w = 2n̄ + 1)."""
    label = classify(ch, tol=tol)
    if label in ("A1", "A2"):
        tau = 0.0
    elif label.startswith("B"):
        tau = 1.0
    else:
        tau = ch.tau
    r = _rank(ch.t, tol.rank) * _rank(ch.n, tol.rank) // 2
    return ChannelInvariants(tau=tau, r=r, nbar=_nbar_for(label, tau, float(np.linalg.det(ch.n))))


def canonical_form(
    label: str, tau: float, nbar: float, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> CanonicalForm:
    """(T_c, N_c) of the classification table for ``label`` at (τ, n̄)."""
    if label not in CLASS_LABELS:
        raise ParameterError(f"unknown class label {label!r}")
    if nbar < 0:
        raise ParameterError(f"nbar must be non-negative, got {nbar}")
    w = 2.0 * nbar + 1.0
    zero_tau = abs(tau) <= tol.tau
    unit_tau = abs(tau - 1.0) <= tol.tau
    zero_nbar = abs(nbar) <= tol.tau

    def require(condition: bool, what: str) -> None:
        if not condition:
            raise ParameterError(f"class {label} requires {what}; got tau={tau}, nbar={nbar}")

    if label == "A1":
        require(zero_tau, "tau = 0")
        tau, tc, nc = 0.0, np.zeros((2, 2)), w * I2
    elif label == "A2":
        require(zero_tau, "tau = 0")
        tau, tc, nc = 0.0, (I2 + Z) / 2, w * I2
    elif label == "B1":
        require(unit_tau and zero_nbar, "tau = 1 and nbar = 0")
        tau, nbar, tc, nc = 1.0, 0.0, I2.copy(), (I2 - Z) / 2
    elif label == "B2":
        require(unit_tau and not zero_nbar, "tau = 1 and nbar > 0")
        tau, tc, nc = 1.0, I2.copy(), nbar * I2
    elif label == "B2Id":
        require(unit_tau and zero_nbar, "tau = 1 and nbar = 0")
        tau, nbar, tc, nc = 1.0, 0.0, I2.copy(), np.zeros((2, 2))
    elif label == "CAtt":
        require(0 < tau < 1 and not unit_tau, "0 < tau < 1")
        tc, nc = math.sqrt(tau) * I2, (1.0 - tau) * w * I2
    elif label == "CAmp":
        require(tau > 1 and not unit_tau, "tau > 1")
        tc, nc = math.sqrt(tau) * I2, (tau - 1.0) * w * I2
    else:
        require(tau < 0, "tau < 0")
        tc, nc = math.sqrt(-tau) * Z, (1.0 - tau) * w * I2
    inv = ChannelInvariants(tau=tau, r=_RANK_BY_CLASS[label], nbar=nbar)
    return CanonicalForm(label, inv, tc, nc)  # type: ignore[arg-type]


def _unit_factor(n: np.ndarray, tol: Tolerances, label: str) -> np.ndarray:
    """Symmetric M with det M = 1 and N = √det N · M·Mᵀ."""
    evals, evecs = np.linalg.eigh((n + n.T) / 2)
    if evals[0] <= tol.rank * evals[1]:
        raise DecompositionError(
            f"class {label} needs a full-rank N; smallest eigenvalue {evals[0]:.3e}",
            float(evals[0]),
        )
    nu = math.sqrt(evals[0] * evals[1])
    return evecs @ np.diag(np.sqrt(evals / nu)) @ evecs.T


def _complete_row(a1: np.ndarray) -> np.ndarray:
    """Minimal-norm a2 with det [a1; a2] = 1."""
    return np.array([-a1[1], a1[0]]) / float(a1 @ a1)


def _normalized(m: np.ndarray) -> np.ndarray:
    # det m ≈ 1 up to tolerance; rescale onto Sp(2)
    return m / math.sqrt(float(np.linalg.det(m)))


def decompose(
    ch: GaussianChannel, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[GaussianUnitary, CanonicalForm, GaussianUnitary]:
    """Split ``ch`` into U_B ∘ C ∘ U_A with gauge d_A = 0, d_B = d."""
    label = classify(ch, tol=tol)
    inv = invariants(ch, tol=tol)
    cf = canonical_form(label, inv.tau, inv.nbar, tol=tol)
    t, n = ch.t, ch.n

    if label == "A1":
        ma, mb = I2.copy(), _unit_factor(n, tol, label)
    elif label == "A2":
        mb0 = _unit_factor(n, tol, label)
        k = np.linalg.solve(mb0, t)
        u, _, _ = np.linalg.svd(k)
        ux, uy = u[:, 0]
        # output rotation gauge: bring the range of M_B⁻¹·T onto the q axis
        rot = np.array([[ux, -uy], [uy, ux]])
        mb = mb0 @ rot
        a1 = (rot.T @ k)[0]
        ma = np.vstack([a1, _complete_row(a1)])
    elif label == "B1":
        evals, evecs = np.linalg.eigh((n + n.T) / 2)
        v = math.sqrt(evals[1]) * evecs[:, 1]
        b1 = np.array([v[1], -v[0]]) / float(v @ v)
        mb = np.column_stack([b1, v])
        ma = _normalized(np.linalg.solve(mb, t))
    elif label == "B2":
        mb = _unit_factor(n, tol, label)
        ma = _normalized(np.linalg.solve(mb, t))
    elif label == "B2Id":
        ma, mb = _normalized(t), I2.copy()
    else:
        mb = _unit_factor(n, tol, label)
        ma = np.linalg.solve(cf.tc, np.linalg.solve(mb, t))

    LOG.debug("decomposed %s channel: tau=%.6g nbar=%.6g", label, inv.tau, inv.nbar)
    return GaussianUnitary(ma, np.zeros(2)), cf, GaussianUnitary(mb, ch.d)


def recompose(ua: GaussianUnitary, cf: CanonicalForm, ub: GaussianUnitary) -> GaussianChannel:
    """The channel U_B ∘ C ∘ U_A."""
    return dress(cf.to_channel(), ua, ub)


def dress(ch: GaussianChannel, ua: GaussianUnitary, ub: GaussianUnitary) -> GaussianChannel:
    """The channel U_B ∘ ch ∘ U_A for one-mode unitaries."""
    if ua.s.shape != (2, 2) or ub.s.shape != (2, 2):
        raise SizeError("dressing a one-mode channel needs one-mode unitaries")
    t = ub.s @ ch.t @ ua.s
    n = ub.s @ ch.n @ ub.s.T
    d = ub.s @ (ch.t @ ua.d + ch.d) + ub.d
    return GaussianChannel(t, n, d)


def compose(
    first: GaussianChannel, second: GaussianChannel, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> GaussianChannel:
    """The channel that applies ``first`` and then ``second``."""
    require_valid(first, tol=tol)
    require_valid(second, tol=tol)
    t = second.t @ first.t
    n = second.t @ first.n @ second.t.T + second.n
    d = second.t @ first.d + second.d
    return GaussianChannel(t, (n + n.T) / 2, d)


def identity_channel() -> GaussianChannel:
    return GaussianChannel(I2.copy(), np.zeros((2, 2)), np.zeros(2))


def attenuator(tau: float, nbar: float = 0.0) -> GaussianChannel:
    """Thermal-loss channel with transmissivity ``tau`` (the entangling cloner)."""
    return canonical_form("CAtt", tau, nbar).to_channel()


def amplifier(gain: float, nbar: float = 0.0) -> GaussianChannel:
    return canonical_form("CAmp", gain, nbar).to_channel()

