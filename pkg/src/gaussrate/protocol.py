"""Monte-Carlo simulation of the coherent-state heterodyne protocol.

Alice draws a Gaussian displacement x_A with variance μ per quadrature and
sends the coherent state |x_A⟩ through the channel; Bob heterodynes the
output. The joint moments of (x_A, y) give the channel tomography, the
empirical mutual information and a key-rate estimate.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .attack import CollectiveGaussianAttack, to_channel
from .channel import GaussianChannel, apply, invariants, require_valid
from .config import DEFAULT_TOLERANCES, SimulationSettings, Tolerances
from .errors import DomainError, NumericalError, ParameterError, SizeError
from .gaussian import GaussianState, coherent_state
from .keyrate import RateReport, eta_canonical, rate_from_triplet, total_noise_det

LOG = logging.getLogger(__name__)

MIN_SAMPLES = 100
SEED_LIMIT = 2**64
# |τ̂ − 1| within this many standard errors counts as the excluded τ = 1 regime
TAU_ONE_SIGMAS = 5.0
# ŵ − 1 within this many standard errors is read as w = 1
W_ONE_SIGMAS = 5.0


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    channel: GaussianChannel
    mu: float
    n_samples: int
    seed: int
    attack: CollectiveGaussianAttack | None = None

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if self.n_samples < MIN_SAMPLES:
            raise ParameterError(f"n_samples must be at least {MIN_SAMPLES}, got {self.n_samples}")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ParameterError(f"seed must be a non-negative 64-bit integer, got {self.seed}")

    @classmethod
    def for_attack(
        cls, atk: CollectiveGaussianAttack, mu: float, n_samples: int, seed: int
    ) -> ProtocolConfig:
        return cls(to_channel(atk), mu, n_samples, seed, attack=atk)


@dataclass(frozen=True, eq=False)
class MomentSummary:
    """Streaming first and second moments of the rows (q_A, p_A, q_B, p_B)."""

    count: int = 0
    mean: np.ndarray = field(default_factory=lambda: np.zeros(4))
    comoment: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))

    @classmethod
    def from_batch(cls, batch: np.ndarray) -> MomentSummary:
        batch = np.asarray(batch, dtype=float)
        if batch.ndim != 2 or batch.shape[1] != 4:
            raise SizeError(f"moment batches are (n, 4) arrays, got {batch.shape}")
        if batch.shape[0] == 0:
            return cls()
        mean = batch.mean(axis=0)
        dev = batch - mean
        return cls(batch.shape[0], mean, dev.T @ dev)

    def update(self, batch: np.ndarray) -> MomentSummary:
        return self.merge(MomentSummary.from_batch(batch))

    def merge(self, other: MomentSummary) -> MomentSummary:
        """Pairwise combination of two summaries (Chan et al.)."""
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        comoment = (
            self.comoment + other.comoment + np.outer(delta, delta) * (self.count * other.count / n)
        )
        return MomentSummary(n, mean, comoment)

    @property
    def covariance(self) -> np.ndarray:
        if self.count < 2:
            raise DomainError("covariance needs at least two samples")
        return self.comoment / (self.count - 1)


@dataclass(frozen=True, eq=False)
class Tomography:
    t_hat: np.ndarray
    n_hat: np.ndarray
    d_hat: np.ndarray


@dataclass(frozen=True, eq=False)
class SimulationRecord:
    n_samples: int
    mu: float
    seed: int
    moments: MomentSummary
    t_hat: np.ndarray
    n_hat: np.ndarray
    d_hat: np.ndarray
    t_se: np.ndarray
    w_se: float
    mi_empirical: float
    mi_analytic: float
    rate_from_tomography: RateReport | None
    rate_true: RateReport | None
    samples: tuple[np.ndarray, np.ndarray] | None = None


def modulate(rng: np.random.Generator, mu: float, size: int | None = None) -> np.ndarray:
    """Alice's displacement(s): zero mean, variance ``mu`` per quadrature."""
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    shape = (2,) if size is None else (size, 2)
    return rng.normal(0.0, math.sqrt(mu), size=shape)


def heterodyne(
    rng: np.random.Generator, state: GaussianState, size: int | None = None
) -> np.ndarray:
    """Heterodyne outcome(s): Gaussian with the state's mean and covariance V + I."""
    if state.n_modes != 1:
        raise SizeError(f"heterodyne measures one mode, got {state.n_modes}")
    return rng.multivariate_normal(state.mean, state.cov + np.eye(2), size=size, method="cholesky")


def _chunk_samples(
    ch: GaussianChannel, mu: float, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    # the channel output of |x_A⟩ is the output of |0⟩ displaced by T·x_A
    x_a = modulate(rng, mu, n)
    vacuum_out = apply(ch, coherent_state([0.0, 0.0]))
    return x_a, x_a @ ch.t.T + heterodyne(rng, vacuum_out, size=n)


def _require_design_rank(sxx: np.ndarray, rank_tol: float) -> None:
    sv = np.linalg.svd(sxx, compute_uv=False)
    if sv[-1] <= rank_tol * sv[0]:
        raise NumericalError("modulation covariance is singular", float(sv[-1]))


def _regression(summary: MomentSummary) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Σ_xx, T̂, residual covariance of y given x_A)."""
    cov = summary.covariance
    sxx, syx, syy = cov[:2, :2], cov[2:, :2], cov[2:, 2:]
    t_hat = np.linalg.solve(sxx, syx.T).T
    return sxx, t_hat, syy - t_hat @ sxx @ t_hat.T


def tomography(
    summary: MomentSummary,
    *,
    input_noise: bool = True,
    detection_noise: bool = True,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Tomography:
    """Least-squares estimate of (T, N, d) from the joint moments of (x_A, y).

    ``input_noise`` subtracts the coherent-state vacuum unit T̂·T̂ᵀ and
    ``detection_noise`` the heterodyne unit I from the residual covariance.
    """
    if summary.count < MIN_SAMPLES:
        raise DomainError(f"tomography needs at least {MIN_SAMPLES} samples, got {summary.count}")
    _require_design_rank(summary.covariance[:2, :2], tol.rank)
    _, t_hat, residual = _regression(summary)
    n_hat = residual
    if input_noise:
        n_hat = n_hat - t_hat @ t_hat.T
    if detection_noise:
        n_hat = n_hat - np.eye(2)
    d_hat = summary.mean[2:] - t_hat @ summary.mean[:2]
    return Tomography(t_hat=t_hat, n_hat=(n_hat + n_hat.T) / 2, d_hat=d_hat)


def standard_errors(summary: MomentSummary) -> np.ndarray:
    """Entrywise standard errors of T̂ under the Gaussian regression model."""
    sxx, _, residual = _regression(summary)
    dof = max(summary.count - 3, 1)
    variances = np.outer(np.diag(residual), np.diag(np.linalg.inv(sxx))) / dof
    return np.sqrt(np.maximum(variances, 0.0))


def empirical_mi(summary: MomentSummary) -> float:
    """Gaussian plug-in estimate ½·log₂(det Σ_x · det Σ_y / det Σ), in bits."""
    cov = summary.covariance
    det_x = np.linalg.det(cov[:2, :2])
    det_y = np.linalg.det(cov[2:, 2:])
    det_joint = np.linalg.det(cov)
    if det_joint <= 0:
        raise NumericalError("joint sample covariance is singular", float(det_joint))
    return 0.5 * math.log2(det_x * det_y / det_joint)


def finite_mu_mi(ch: GaussianChannel, mu: float) -> float:
    """Mutual information between x_A and y at modulation ``mu``, in bits."""
    if mu < 0:
        raise DomainError(f"mu must be non-negative, got {mu}")
    tt = ch.t @ ch.t.T
    sigma = tt + ch.n + np.eye(2)
    return 0.5 * math.log2(np.linalg.det(mu * tt + sigma) / np.linalg.det(sigma))


def _require_invertible(t_hat: np.ndarray, tol: Tolerances) -> None:
    sv = np.linalg.svd(t_hat, compute_uv=False)
    if sv[-1] <= tol.rank * max(1.0, float(sv[0])):
        raise DomainError("t_hat is singular; class A channels cannot be inverted")


def postprocess_direct(
    y: np.ndarray, t_hat: np.ndarray, d_hat: np.ndarray, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """Bob's estimate of Alice's variable: α̂ = T̂⁻¹·(y − d̂)."""
    _require_invertible(t_hat, tol)
    y = np.asarray(y, dtype=float)
    return np.linalg.solve(t_hat, (y - d_hat).T).T


def postprocess_reverse(x_a: np.ndarray, t_hat: np.ndarray, d_hat: np.ndarray) -> np.ndarray:
    """Alice's estimate of Bob's variable: β̂ = T̂·x_A + d̂."""
    return np.asarray(x_a, dtype=float) @ t_hat.T + d_hat


def _psd_part(n: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(n)
    if evals[0] < 0:
        LOG.warning("projecting N_hat onto the PSD cone (eigenvalue %.3e)", evals[0])
    return evecs @ np.diag(np.maximum(evals, 0.0)) @ evecs.T


def _tau_standard_error(t_hat: np.ndarray, t_se: np.ndarray) -> float:
    # delta method: ∂det T/∂T = adj(T)ᵀ
    grad = np.array([[t_hat[1, 1], -t_hat[1, 0]], [-t_hat[0, 1], t_hat[0, 0]]])
    return float(np.sqrt(np.sum((grad * t_se) ** 2)))


def thermal_standard_error(summary: MomentSummary, tomo: Tomography, t_se: np.ndarray) -> float:
    """Delta-method standard error of ŵ = √det N̂ / |1 − τ̂|.

    Zero when det N̂ ≤ 0 or τ̂ = 1.
    """
    n = tomo.n_hat
    det_n = float(np.linalg.det(n))
    tau = float(np.linalg.det(tomo.t_hat))
    k = abs(1.0 - tau)
    if det_n <= 0 or k == 0:
        return 0.0
    _, _, residual = _regression(summary)
    # ∂det N/∂N = adj N, and sample covariances have
    # Cov(R_ij, R_kl) = (R_ik·R_jl + R_il·R_jk)/n
    gr = np.array([[n[1, 1], -n[0, 1]], [-n[1, 0], n[0, 0]]]) @ residual
    var_det = 2.0 * float(np.trace(gr @ gr)) / summary.count
    rel_var = var_det / (2.0 * det_n) ** 2 + (_tau_standard_error(tomo.t_hat, t_se) / k) ** 2
    return math.sqrt(det_n) / k * math.sqrt(rel_var)


def rate_from_tomography(
    tomo: Tomography,
    t_se: np.ndarray,
    *,
    w_se: float = 0.0,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RateReport | None:
    """Key-rate estimate from the estimated channel; ``None`` when τ̂ is compatible with 1.

    ŵ within ``W_ONE_SIGMAS`` standard errors ``w_se`` of 1 is read as w = 1.
    """
    tau = float(np.linalg.det(tomo.t_hat))
    tau_se = _tau_standard_error(tomo.t_hat, t_se)
    if abs(tau - 1.0) <= max(TAU_ONE_SIGMAS * tau_se, tol.tau):
        LOG.warning(
            "estimated tau=%.6g is within %.0f standard errors of 1; no rate reported",
            tau,
            TAU_ONE_SIGMAS,
        )
        return None
    n_plus = _psd_part(tomo.n_hat)
    w = math.sqrt(max(float(np.linalg.det(n_plus)), 0.0)) / abs(1.0 - tau)
    if w - 1.0 <= W_ONE_SIGMAS * w_se:
        if w > 1.0:
            LOG.debug("estimated w=%.6g is within %.0f standard errors of 1", w, W_ONE_SIGMAS)
        w = 1.0
    if tau <= 0:
        return rate_from_triplet(tau, w, None, tol=tol)
    eta_det = total_noise_det(GaussianChannel(tomo.t_hat, n_plus, tomo.d_hat))
    eta = max(eta_det, eta_canonical(tau, w, tol=tol))
    return rate_from_triplet(tau, w, eta, tol=tol)


def true_rate(ch: GaussianChannel, *, tol: Tolerances = DEFAULT_TOLERANCES) -> RateReport | None:
    """Key rate of the simulated channel itself; ``None`` at τ = 1."""
    inv = invariants(ch, tol=tol)
    if abs(inv.tau - 1.0) <= tol.tau:
        return None
    if inv.tau <= 0:
        return rate_from_triplet(inv.tau, inv.w, None, tol=tol)
    return rate_from_triplet(inv.tau, inv.w, total_noise_det(ch), tol=tol)


def _chunk_sizes(n_samples: int, chunk_size: int) -> list[int]:
    full, rest = divmod(n_samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _progress(chunks: Iterable, total: int, enabled: bool) -> Iterable:
    use_progress = enabled
    try:
        from tqdm.auto import tqdm
    except Exception:  # pragma: no cover - import guard
        use_progress = False
    if not use_progress:
        return chunks
    return tqdm(chunks, total=total, unit="chunk", desc="Simulate", dynamic_ncols=True, leave=False)


def run_simulation(
    cfg: ProtocolConfig,
    settings: SimulationSettings | None = None,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SimulationRecord:
    """Simulate ``cfg.n_samples`` protocol rounds and analyse them.

    Chunk k draws from ``default_rng(SeedSequence(seed, spawn_key=(k,)))`` and
    summaries merge in chunk order, so the record depends only on ``cfg`` and
    the chunk size.
    """
    settings = settings or SimulationSettings(progress=False)
    ch = cfg.channel
    require_valid(ch, tol=tol)
    sizes = _chunk_sizes(cfg.n_samples, settings.chunk_size)
    keep_samples = cfg.n_samples <= settings.sample_cap
    LOG.info(
        "simulating %d rounds in %d chunks (mu=%g, seed=%d, workers=%d)",
        cfg.n_samples,
        len(sizes),
        cfg.mu,
        cfg.seed,
        settings.workers,
    )

    def run_chunk(k: int) -> tuple[MomentSummary, np.ndarray | None]:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(k,)))
        x_a, y = _chunk_samples(ch, cfg.mu, sizes[k], rng)
        batch = np.hstack([x_a, y])
        return MomentSummary.from_batch(batch), batch if keep_samples else None

    def results() -> Iterator[tuple[MomentSummary, np.ndarray | None]]:
        if settings.workers > 1:
            with ThreadPoolExecutor(max_workers=settings.workers) as pool:
                yield from pool.map(run_chunk, range(len(sizes)))
        else:
            yield from map(run_chunk, range(len(sizes)))

    summary = MomentSummary()
    kept: list[np.ndarray] = []
    for k, (part, batch) in enumerate(_progress(results(), len(sizes), settings.progress)):
        summary = summary.merge(part)
        if batch is not None:
            kept.append(batch)
        LOG.debug("chunk %d merged: %d rounds so far", k, summary.count)

    tomo = tomography(summary, tol=tol)
    joint = np.vstack(kept) if kept else None
    t_se = standard_errors(summary)
    w_se = thermal_standard_error(summary, tomo, t_se)
    record = SimulationRecord(
        n_samples=cfg.n_samples,
        mu=cfg.mu,
        seed=cfg.seed,
        moments=summary,
        t_hat=tomo.t_hat,
        n_hat=tomo.n_hat,
        d_hat=tomo.d_hat,
        t_se=t_se,
        w_se=w_se,
        mi_empirical=empirical_mi(summary),
        mi_analytic=finite_mu_mi(ch, cfg.mu),
        rate_from_tomography=rate_from_tomography(tomo, t_se, w_se=w_se, tol=tol),
        rate_true=true_rate(ch, tol=tol),
        samples=None if joint is None else (joint[:, :2], joint[:, 2:]),
    )
    LOG.info(
        "simulation done: mi_empirical=%.6f mi_analytic=%.6f",
        record.mi_empirical,
        record.mi_analytic,
    )
    return record
