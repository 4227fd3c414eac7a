"""Parameter sweeps of the key-rate bounds over τ, w, η or μ."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Literal

import numpy as np

from .attack import canonical, to_channel
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DomainError, ParameterError, UnsupportedRegimeError
from .keyrate import RateReport, eta_canonical, rate_from_triplet
from .protocol import finite_mu_mi

LOG = logging.getLogger(__name__)

Variable = Literal["tau", "w", "eta", "mu"]
VARIABLES: tuple[Variable, ...] = ("tau", "w", "eta", "mu")
BRACKET_WIDTH = 1e-6
BOUNDS = ("b_alpha", "b_beta")


@dataclass(frozen=True)
class SweepSpec:
    variable: Variable
    start: float
    stop: float
    steps: int
    tau: float = 0.9
    w: float = 1.0
    eta: float | None = None
    mu: float | None = None

    def __post_init__(self) -> None:
        if self.variable not in VARIABLES:
            raise ParameterError(f"sweep variable must be one of {VARIABLES}, got {self.variable}")
        if self.steps < 2:
            raise ParameterError(f"a sweep needs at least 2 steps, got {self.steps}")
        if self.variable == "mu" and min(self.start, self.stop) <= 0:
            raise ParameterError("a mu sweep needs a positive range")

    @property
    def fieldnames(self) -> list[str]:
        names = [self.variable, "b_alpha", "b_beta", "b_inf", "eta", "regime", "row"]
        if self.reports_mi:
            names.insert(5, "mi")
        return names

    @property
    def reports_mi(self) -> bool:
        return self.variable == "mu" or self.mu is not None

    def at(self, value: float) -> SweepSpec:
        """The fixed parameters with the swept variable set to ``value``."""
        return replace(self, **{self.variable: value})

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass
class SweepResult:
    rows: list[dict[str, Any]]
    failures: int


def _report_at(spec: SweepSpec, value: float, tol: Tolerances) -> RateReport:
    point = spec.at(value)
    eta = point.eta
    if eta is None and point.tau > 0:
        eta = eta_canonical(point.tau, point.w, tol=tol)
    return rate_from_triplet(point.tau, point.w, eta, tol=tol)


def _row(spec: SweepSpec, value: float, kind: str, tol: Tolerances) -> dict[str, Any]:
    row: dict[str, Any] = {spec.variable: value, "row": kind}
    report = _report_at(spec, value, tol)
    row.update(
        b_alpha=report.b_alpha,
        b_beta=report.b_beta,
        b_inf=report.b_inf,
        eta=report.eta,
        regime=report.regime,
    )
    if spec.reports_mi:
        point = spec.at(value)
        ch = to_channel(canonical(point.tau, (point.w - 1.0) / 2.0, tol=tol))
        row["mi"] = finite_mu_mi(ch, point.mu)
    return row


def _failed_row(spec: SweepSpec, value: float) -> dict[str, Any]:
    row: dict[str, Any] = {name: math.nan for name in spec.fieldnames}
    row.update({spec.variable: value, "regime": "", "row": "grid"})
    return row


def _bound(spec: SweepSpec, value: float, name: str, tol: Tolerances) -> float:
    return float(getattr(_report_at(spec, value, tol), name))


def _bracket(
    spec: SweepSpec, lo: float, hi: float, name: str, tol: Tolerances
) -> tuple[float, float]:
    """Shrink [lo, hi] around the sign change of bound ``name`` to BRACKET_WIDTH."""
    f_lo = _bound(spec, lo, name, tol)
    while abs(hi - lo) > BRACKET_WIDTH:
        mid = 0.5 * (lo + hi)
        f_mid = _bound(spec, mid, name, tol)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return lo, hi


def _finite(x: Any) -> bool:
    return isinstance(x, float) and math.isfinite(x)


def run_sweep(spec: SweepSpec, *, tol: Tolerances = DEFAULT_TOLERANCES) -> SweepResult:
    """Evaluate the bounds on the grid and add bisection rows around zero crossings."""
    grid_rows: list[dict[str, Any]] = []
    failures = 0
    for value in spec.grid().tolist():
        try:
            grid_rows.append(_row(spec, value, "grid", tol))
        except (DomainError, UnsupportedRegimeError) as e:
            failures += 1
            LOG.debug("sweep %s=%.6g outside the domain: %s", spec.variable, value, e)
            grid_rows.append(_failed_row(spec, value))
    if failures:
        LOG.warning("%d of %d sweep points fell outside the domain", failures, spec.steps)

    rows: list[dict[str, Any]] = []
    for left, right in zip(grid_rows, grid_rows[1:], strict=False):
        rows.append(left)
        inserted: list[dict[str, Any]] = []
        for name in BOUNDS:
            a, b = left.get(name), right.get(name)
            if not (_finite(a) and _finite(b)) or (a > 0) == (b > 0):
                continue
            try:
                lo, hi = _bracket(spec, left[spec.variable], right[spec.variable], name, tol)
            except (DomainError, UnsupportedRegimeError) as e:
                LOG.warning("could not bracket the %s zero crossing: %s", name, e)
                continue
            LOG.debug("%s crosses zero in [%.9g, %.9g]", name, min(lo, hi), max(lo, hi))
            inserted += [_row(spec, lo, "bracket", tol), _row(spec, hi, "bracket", tol)]
        descending = spec.stop < spec.start
        inserted.sort(key=lambda r: r[spec.variable], reverse=descending)
        rows.extend(inserted)
    rows.append(grid_rows[-1])
    return SweepResult(rows=rows, failures=failures)
