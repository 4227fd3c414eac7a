from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass, replace

LOG = logging.getLogger(__name__)

TOL_ENV = "GAUSSRATE_TOL"
RANK_TOL_ENV = "GAUSSRATE_RANK_TOL"


@dataclass(frozen=True)
class Tolerances:
    symp: float = 1e-9  # S·Ω·Sᵀ = Ω residual
    recomp: float = 1e-9  # Euler recomposition
    rank: float = 1e-7  # singular values relative to the largest
    cpt: float = 1e-9  # det N ≥ (det T − 1)² slack
    tau: float = 1e-9  # equality tests on det T
    completion: float = 1e-10  # symplectic completion residual
    eta: float = 1e-9  # η ≥ η_c slack


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class SimulationSettings:
    chunk_size: int = 100_000
    workers: int = 1
    sample_cap: int = 100_000
    progress: bool = True


def _env_float(env: Mapping[str, str], key: str) -> float | None:
    raw = env.get(key)
    if raw is None or not raw.strip():
        return None
    try:
        value = float(raw)
    except ValueError:
        LOG.warning("Invalid %s=%r; using defaults", key, raw)
        return None
    if not value > 0:
        LOG.warning("Invalid %s=%r; tolerances must be positive", key, raw)
        return None
    return value


def _env_int(env: Mapping[str, str], key: str, default: int) -> int:
    raw = env.get(key)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        LOG.warning("Invalid %s=%r; using %d", key, raw, default)
        return default
    if value < 1:
        LOG.warning("Invalid %s=%r; using %d", key, raw, default)
        return default
    return value


def with_general_tolerance(base: Tolerances, tol: float) -> Tolerances:
    """Return ``base`` with every general-purpose tolerance set to ``tol``.

    The rank and completion tolerances are structural and keep their values.
    """
    return replace(base, symp=tol, recomp=tol, cpt=tol, tau=tol, eta=tol)


def load_tolerances(env: Mapping[str, str] | None = None) -> Tolerances:
    env = os.environ if env is None else env
    tol = DEFAULT_TOLERANCES
    general = _env_float(env, TOL_ENV)
    if general is not None:
        tol = with_general_tolerance(tol, general)
    rank = _env_float(env, RANK_TOL_ENV)
    if rank is not None:
        tol = replace(tol, rank=rank)
    return tol


def load_simulation_settings(env: Mapping[str, str] | None = None) -> SimulationSettings:
    env = os.environ if env is None else env
    base = SimulationSettings()
    return SimulationSettings(
        chunk_size=_env_int(env, "GAUSSRATE_CHUNK_SIZE", base.chunk_size),
        workers=_env_int(env, "GAUSSRATE_WORKERS", base.workers),
        sample_cap=_env_int(env, "GAUSSRATE_SAMPLE_CAP", base.sample_cap),
        progress=base.progress,
    )
