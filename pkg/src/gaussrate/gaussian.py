from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .config import DEFAULT_TOLERANCES
from .errors import DomainError, SizeError
from .keyrate import g
from .symplectic import MAX_MODES, is_symplectic, omega, symplectic_eigenvalues, tmsv_cov

LOG = logging.getLogger(__name__)


def _as_vector(x: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


def _as_matrix(x: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Displacement vector and covariance matrix of up to three modes.

    Construction checks symmetry and the uncertainty principle
    ``V + iΩ ⪰ 0``, so every state the toolkit hands out is physical.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = _as_vector(self.mean)
        cov = _as_matrix(self.cov)
        if mean.ndim != 1 or mean.size % 2 or not 2 <= mean.size <= 2 * MAX_MODES:
            raise SizeError(f"mean must have length 2n with n in [1, {MAX_MODES}]")
        if cov.shape != (mean.size, mean.size):
            raise SizeError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        scale = max(1.0, float(np.max(np.abs(cov))))
        tol = DEFAULT_TOLERANCES.symp * scale
        if np.max(np.abs(cov - cov.T)) > tol:
            raise DomainError("covariance matrix is not symmetric")
        lowest = np.linalg.eigvalsh(cov + 1j * omega(mean.size // 2))[0]
        if lowest < -tol:
            raise DomainError(f"covariance violates the uncertainty principle ({lowest:.3e})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2


@dataclass(frozen=True, eq=False)
class GaussianUnitary:
    s: np.ndarray
    d: np.ndarray

    def __post_init__(self) -> None:
        s = _as_matrix(self.s)
        d = _as_vector(self.d)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] != d.size:
            raise SizeError(f"symplectic shape {s.shape} does not match displacement {d.size}")
        if not is_symplectic(s, DEFAULT_TOLERANCES.symp * max(1.0, float(np.max(np.abs(s))) ** 2)):
            raise DomainError("Gaussian unitary needs a symplectic matrix")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls, n_modes: int = 1) -> GaussianUnitary:
        return cls(np.eye(2 * n_modes), np.zeros(2 * n_modes))

    def compose(self, then: GaussianUnitary) -> GaussianUnitary:
        """The unitary that applies ``self`` first and ``then`` second."""
        return GaussianUnitary(then.s @ self.s, then.s @ self.d + then.d)


def coherent_state(mean: Sequence[float] | np.ndarray) -> GaussianState:
    mean = np.asarray(mean, dtype=float)
    if mean.shape != (2,):
        raise SizeError("a coherent state has a 2-vector mean")
    return GaussianState(mean, np.eye(2))


def vacuum(n_modes: int = 1) -> GaussianState:
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def thermal_state(w: float) -> GaussianState:
    if w < 1.0:
        raise DomainError(f"thermal variance must be >= 1, got {w}")
    return GaussianState(np.zeros(2), w * np.eye(2))


def tmsv_state(w: float) -> GaussianState:
    return GaussianState(np.zeros(4), tmsv_cov(w))


def apply_unitary(state: GaussianState, u: GaussianUnitary) -> GaussianState:
    if u.s.shape[0] != state.mean.size:
        raise SizeError(
            f"unitary on {u.s.shape[0] // 2} modes applied to a {state.n_modes}-mode state"
        )
    return GaussianState(u.s @ state.mean + u.d, u.s @ state.cov @ u.s.T)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    if a.n_modes + b.n_modes > MAX_MODES:
        raise SizeError(f"tensor product exceeds {MAX_MODES} modes")
    return GaussianState(np.concatenate([a.mean, b.mean]), block_diag(a.cov, b.cov))


def partial_trace(state: GaussianState, keep: Sequence[int]) -> GaussianState:
    """Reduce ``state`` to the modes listed in ``keep`` (0-based, in that order)."""
    keep = list(keep)
    if not keep:
        raise SizeError("partial trace must keep at least one mode")
    if len(set(keep)) != len(keep) or any(not 0 <= m < state.n_modes for m in keep):
        raise SizeError(f"invalid modes {keep} for a {state.n_modes}-mode state")
    idx = [i for m in keep for i in (2 * m, 2 * m + 1)]
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def von_neumann_entropy(state: GaussianState) -> float:
    """S(ρ) = Σ_k g(ν_k) over the symplectic eigenvalues, in bits."""
    nus = symplectic_eigenvalues(state.cov)
    # pure states sit at ν = 1 up to round-off, which grows with ‖V‖
    slack = DEFAULT_TOLERANCES.symp * max(1.0, float(np.max(np.abs(state.cov))))
    nus = np.where(np.abs(nus - 1.0) <= slack, 1.0, nus)
    return float(sum(g(float(nu)) for nu in nus))
