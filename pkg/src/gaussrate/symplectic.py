"""Fixed-size real linear algebra for symplectic forms.

Conventions: vacuum variance 1, quadratures interleaved as (q1, p1, q2, p2, ...),
and the one-mode form Ω = [[0, 1], [-1, 0]].
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .config import DEFAULT_TOLERANCES
from .errors import DilationError, DomainError, SizeError

LOG = logging.getLogger(__name__)

MAX_MODES = 3

I2 = np.eye(2)
Z = np.diag([1.0, -1.0])
OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def omega(n_modes: int) -> np.ndarray:
    if not 1 <= n_modes <= MAX_MODES:
        raise SizeError(f"n_modes must be in [1, {MAX_MODES}], got {n_modes}")
    return block_diag(*([OMEGA1] * n_modes))


def _n_modes_of(s: np.ndarray) -> int:
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise SizeError(f"expected a square matrix, got shape {s.shape}")
    if s.shape[0] % 2:
        raise SizeError(f"expected an even dimension, got {s.shape[0]}")
    return s.shape[0] // 2


def symplectic_residual(s: np.ndarray) -> float:
    s = np.asarray(s, dtype=float)
    om = omega(_n_modes_of(s))
    return float(np.max(np.abs(s @ om @ s.T - om)))


def is_symplectic(s: np.ndarray, tol: float = DEFAULT_TOLERANCES.symp) -> bool:
    """True iff ``‖S·Ω·Sᵀ − Ω‖_max ≤ tol``."""
    return symplectic_residual(s) <= tol


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class EulerAngles:
    phi: float
    lam: float
    psi: float

    def recompose(self) -> np.ndarray:
        return recompose(self)


def recompose(angles: EulerAngles) -> np.ndarray:
    """R(phi)·diag(lambda, 1/lambda)·R(psi)."""
    return rotation(angles.phi) @ np.diag([angles.lam, 1.0 / angles.lam]) @ rotation(angles.psi)


def _angle(r: np.ndarray) -> float:
    return math.atan2(r[1, 0], r[0, 0])


def euler_decompose(s: np.ndarray, tol: float = DEFAULT_TOLERANCES.symp) -> EulerAngles:
    """Euler (Bloch-Messiah) decomposition of a 2×2 symplectic matrix.

    Returns ``phi ∈ [0, π)``, ``lam ≥ 1`` (the largest singular value) and
    ``psi ∈ [0, 2π)``. A pure rotation (``lam == 1``) is reported with
    ``phi = 0`` and the whole angle in ``psi``.
    """
    s = np.asarray(s, dtype=float)
    if s.shape != (2, 2):
        raise SizeError(f"Euler decomposition needs a 2x2 matrix, got {s.shape}")
    if not is_symplectic(s, tol):
        raise DomainError("Euler decomposition needs a symplectic matrix")
    u, sv, vt = np.linalg.svd(s)
    if np.linalg.det(u) < 0:
        # det S = 1 forces det U = det V; flipping both keeps U·Σ·Vᵀ
        u = u @ Z
        vt = Z @ vt
    lam = float(sv[0])
    phi = _angle(u)
    psi = _angle(vt)
    if lam - 1.0 <= tol:
        return EulerAngles(0.0, 1.0, float(np.mod(phi + psi, 2 * math.pi)))
    if not 0.0 <= phi < math.pi:
        # R(phi + π)·Σ·R(psi + π) = R(phi)·Σ·R(psi)
        phi = float(np.mod(phi, math.pi))
        psi += math.pi
    return EulerAngles(phi, lam, float(np.mod(psi, 2 * math.pi)))


def random_symplectic(rng: np.random.Generator, max_squeeze_db: float) -> np.ndarray:
    """Sample R(phi)·diag(lambda, 1/lambda)·R(psi).

    ``phi`` and ``psi`` are uniform on [0, 2π) and the squeezing
    ``10·log10(lambda²)`` is uniform on [0, max_squeeze_db].
    """
    if max_squeeze_db < 0:
        raise DomainError("max_squeeze_db must be non-negative")
    phi = rng.uniform(0.0, 2 * math.pi)
    psi = rng.uniform(0.0, 2 * math.pi)
    db = rng.uniform(0.0, max_squeeze_db)
    lam = 10.0 ** (db / 20.0)
    return recompose(EulerAngles(phi, lam, psi))


def symplectic_eigenvalues(v: np.ndarray, tol: float = DEFAULT_TOLERANCES.symp) -> np.ndarray:
    """Williamson spectrum of a covariance matrix, in descending order.

    Computed as the positive eigenvalues of the Hermitian matrix
    ``i·V^{1/2}·Ω·V^{1/2}``, which shares its spectrum with ``iΩV``.
    """
    v = np.asarray(v, dtype=float)
    n = _n_modes_of(v)
    scale = max(1.0, float(np.max(np.abs(v))))
    if np.max(np.abs(v - v.T)) > tol * scale:
        raise DomainError("covariance matrix is not symmetric")
    evals, evecs = np.linalg.eigh((v + v.T) / 2)
    if evals[0] <= 0:
        raise DomainError("covariance matrix is not positive definite")
    root = evecs @ np.diag(np.sqrt(evals)) @ evecs.T
    spectrum = np.linalg.eigvalsh(1j * root @ omega(n) @ root)
    return np.sort(spectrum)[::-1][:n].copy()


def tmsv_cov(w: float) -> np.ndarray:
    """Covariance of the two-mode squeezed vacuum with local variance ``w``."""
    if w < 1.0:
        raise DomainError(f"TMSV variance must be >= 1, got {w}")
    c = math.sqrt(w * w - 1.0)
    return np.block([[w * I2, c * Z], [c * Z, w * I2]])


def beam_splitter(tau: float) -> np.ndarray:
    """Beam splitter with transmissivity ``tau``: out₁ = √τ·x₁ + √(1−τ)·x₂."""
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"beam-splitter transmissivity must be in [0, 1], got {tau}")
    t, r = math.sqrt(tau), math.sqrt(1.0 - tau)
    return np.block([[t * I2, r * I2], [-r * I2, t * I2]])


def two_mode_squeezer(gain: float) -> np.ndarray:
    """Two-mode squeezer with gain ``gain``: out₁ = √g·x₁ + √(g−1)·Z·x₂."""
    if gain < 1.0:
        raise DomainError(f"two-mode squeezer gain must be >= 1, got {gain}")
    a, b = math.sqrt(gain), math.sqrt(gain - 1.0)
    return np.block([[a * I2, b * Z], [b * Z, a * I2]])


def embed(s: np.ndarray, modes: Sequence[int], n_modes: int) -> np.ndarray:
    """Act with ``s`` on ``modes`` of an ``n_modes`` system, identity elsewhere."""
    s = np.asarray(s, dtype=float)
    if s.shape != (2 * len(modes), 2 * len(modes)):
        raise SizeError(f"matrix of shape {s.shape} does not fit modes {list(modes)}")
    if len(set(modes)) != len(modes) or any(not 0 <= m < n_modes for m in modes):
        raise SizeError(f"invalid mode indices {list(modes)} for {n_modes} modes")
    idx = [i for m in modes for i in (2 * m, 2 * m + 1)]
    out = np.eye(2 * n_modes)
    out[np.ix_(idx, idx)] = s
    return out


def symplectic_complete(
    rows: np.ndarray, tol: float = DEFAULT_TOLERANCES.completion
) -> np.ndarray:
    """Complete the two leading rows of a symplectic matrix.

    ``rows`` is a 2×2n block whose rows form a symplectic pair
    (``rows·Ω·rowsᵀ = Ω₁``). The remaining rows are built by symplectic
    Gram-Schmidt over the canonical basis, always taking the best-conditioned
    pair next.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] != 2 or rows.shape[1] % 2:
        raise SizeError(f"expected a 2x2n block of rows, got shape {rows.shape}")
    n = rows.shape[1] // 2
    om = omega(n)

    def form(x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ om @ y)

    lead = form(rows[0], rows[1])
    if abs(lead - 1.0) > tol:
        raise DilationError("leading rows are not a symplectic pair", abs(lead - 1.0))

    basis = [rows[0].copy(), rows[1].copy()]
    while len(basis) < 2 * n:
        projected = []
        for x in np.eye(2 * n):
            for u, v in zip(basis[::2], basis[1::2], strict=True):
                x = x - form(x, v) * u + form(x, u) * v
            projected.append(x)
        gram = np.array([[form(x, y) for y in projected] for x in projected])
        i, j = np.unravel_index(np.argmax(np.abs(gram)), gram.shape)
        if abs(gram[i, j]) < tol:
            raise DilationError("symplectic complement is degenerate", float(abs(gram[i, j])))
        basis.append(projected[i])
        basis.append(projected[j] / gram[i, j])

    full = np.vstack(basis)
    residual = symplectic_residual(full)
    LOG.debug("symplectic completion of %d modes: residual %.3e", n, residual)
    if residual > tol:
        raise DilationError("symplectic completion missed its tolerance", residual)
    return full
