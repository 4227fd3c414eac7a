"""Stinespring dilations {L(τ, r), |w⟩} of the canonical forms.

Mode order inside L is (signal, E1, E2). The environment is a pure
two-mode state on (E1, E2): a TMSV of variance w, or two vacua.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channel import CanonicalForm, ChannelInvariants, ClassLabel, GaussianChannel, canonical_form
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DilationError, SizeError
from .gaussian import GaussianState, GaussianUnitary, apply_unitary, partial_trace, tensor
from .symplectic import (
    I2,
    Z,
    beam_splitter,
    embed,
    random_symplectic,
    symplectic_complete,
    symplectic_eigenvalues,
    symplectic_residual,
    tmsv_cov,
    two_mode_squeezer,
)

LOG = logging.getLogger(__name__)

SIGNAL = 0
ENVIRONMENT = (1, 2)


@dataclass(frozen=True, eq=False)
class StinespringDilation:
    l: np.ndarray  # noqa: E741
    env_cov: np.ndarray
    class_label: ClassLabel
    invariants: ChannelInvariants

    @property
    def canonical(self) -> CanonicalForm:
        inv = self.invariants
        return canonical_form(self.class_label, inv.tau, inv.nbar)


@dataclass(frozen=True)
class DilationResiduals:
    symplectic: float
    purity: float
    reduction: float

    def ok(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return (
            self.symplectic <= tol.symp
            and self.purity <= tol.symp
            and self.reduction <= 10 * tol.recomp
        )


def _conjugate_amplifier(tau: float) -> np.ndarray:
    kappa = -tau
    a, b = math.sqrt(kappa), math.sqrt(1.0 + kappa)
    return np.block([[a * Z, b * I2], [b * I2, a * Z]])


def _a2_rows(w: float) -> np.ndarray:
    # q_out = q_s + q_E1 + mu·q_E2, p_out = p_E1; mu cancels the TMSV correlations in N
    mu = -2.0 * math.sqrt(w * w - 1.0) / w
    return np.array(
        [
            [1.0, 0.0, 1.0, 0.0, mu, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        ]
    )


_B1_ROWS = np.array(
    [
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
    ]
)


def _b2_cloner(nbar: float) -> np.ndarray:
    """Attenuator τ₁ = 2/(n̄+2) on (signal, E1), then an amplifier 1/τ₁ on (signal, E2)."""
    tau1 = 2.0 / (nbar + 2.0)
    att = embed(beam_splitter(tau1), (SIGNAL, 1), 3)
    amp = embed(two_mode_squeezer(1.0 / tau1), (SIGNAL, 2), 3)
    return amp @ att


def dilate(
    label: str, tau: float, nbar: float, *, tol: Tolerances = DEFAULT_TOLERANCES
) -> StinespringDilation:
    """Build L(τ, r) and the environment state for a canonical form."""
    cf = canonical_form(label, tau, nbar, tol=tol)
    inv = cf.invariants
    thermal = tmsv_cov(inv.w)
    vacua = np.eye(4)

    if cf.class_label in ("A1", "CAtt"):
        l, env = embed(beam_splitter(inv.tau), (SIGNAL, 1), 3), thermal
    elif cf.class_label == "CAmp":
        l, env = embed(two_mode_squeezer(inv.tau), (SIGNAL, 1), 3), thermal
    elif cf.class_label == "D":
        l, env = embed(_conjugate_amplifier(inv.tau), (SIGNAL, 1), 3), thermal
    elif cf.class_label == "A2":
        l, env = symplectic_complete(_a2_rows(inv.w), tol.completion), thermal
    elif cf.class_label == "B1":
        l, env = symplectic_complete(_B1_ROWS, tol.completion), vacua
    elif cf.class_label == "B2":
        l, env = _b2_cloner(inv.nbar), vacua
    else:
        l, env = np.eye(6), vacua

    residual = symplectic_residual(l)
    LOG.debug("dilation %s(tau=%.6g, nbar=%.6g): residual %.3e", label, inv.tau, inv.nbar, residual)
    if residual > tol.symp * max(1.0, float(np.max(np.abs(l)))) ** 2:
        raise DilationError(f"dilation of class {label} is not symplectic", residual)
    return StinespringDilation(l=l, env_cov=env, class_label=cf.class_label, invariants=inv)


def reduced_channel(dil: StinespringDilation) -> GaussianChannel:
    """Trace out the environment: T_c = A and N_c = B·V_E·Bᵀ."""
    a = dil.l[:2, :2]
    b = dil.l[:2, 2:]
    n = b @ dil.env_cov @ b.T
    return GaussianChannel(a, (n + n.T) / 2, np.zeros(2))


def full_output(dil: StinespringDilation, state: GaussianState) -> GaussianState:
    """The joint (signal, Ẽ1, Ẽ2) state after L."""
    if state.n_modes != 1:
        raise SizeError(f"dilations act on one signal mode, got {state.n_modes}")
    joint = tensor(state, GaussianState(np.zeros(4), dil.env_cov))
    return apply_unitary(joint, GaussianUnitary(dil.l, np.zeros(6)))


def environment_output(dil: StinespringDilation, state: GaussianState) -> GaussianState:
    return partial_trace(full_output(dil, state), ENVIRONMENT)


def _random_input_cov(rng: np.random.Generator) -> np.ndarray:
    s = random_symplectic(rng, 10.0)
    return rng.uniform(1.0, 5.0) * s @ s.T


def verify(
    dil: StinespringDilation, rng: np.random.Generator, trials: int = 16
) -> DilationResiduals:
    """Measure the three contract residuals: symplecticity, purity, reduction."""
    purity = float(np.max(np.abs(symplectic_eigenvalues(dil.env_cov) - 1.0)))
    cf = dil.canonical
    reduction = 0.0
    for _ in range(trials):
        v = _random_input_cov(rng)
        out = dil.l @ np.block([[v, np.zeros((2, 4))], [np.zeros((4, 2)), dil.env_cov]]) @ dil.l.T
        expected = cf.tc @ v @ cf.tc.T + cf.nc
        scale = max(1.0, float(np.max(np.abs(expected))))
        reduction = max(reduction, float(np.max(np.abs(out[:2, :2] - expected))) / scale)
    return DilationResiduals(
        symplectic=symplectic_residual(dil.l), purity=purity, reduction=reduction
    )
