"""JSON/YAML documents for channels, attacks and simulation configs.

Parsers turn plain mappings into toolkit objects; the ``*_to_dict``
functions go the other way, with floats at 12 significant digits.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Mapping
from typing import Any

import numpy as np

from .attack import CollectiveGaussianAttack, dressed, triplet
from .channel import (
    CanonicalForm,
    ChannelInvariants,
    GaussianChannel,
    ValidationReport,
)
from .dilation import DilationResiduals, StinespringDilation
from .errors import InputError
from .gaussian import GaussianUnitary
from .keyrate import RateReport
from .protocol import MomentSummary, ProtocolConfig, SimulationRecord

LOG = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


def load_document(path: str) -> dict[str, Any]:
    """Read a JSON document, or YAML when the file ends with .yaml/.yml."""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e
    if path.lower().endswith((".yaml", ".yml")):
        import yaml  # type: ignore

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise InputError(f"{path} is not valid YAML: {e}") from e
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})") from e
    if not isinstance(data, dict):
        raise InputError(f"{path} must hold a mapping at the top level")
    return data


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise InputError(f"{name} must be a number, got {value!r}")
    return float(value)


def _array(data: Mapping[str, Any], key: str, shape: tuple[int, ...], default=None) -> np.ndarray:
    if key not in data or data[key] is None:
        if default is None:
            raise InputError(f"missing field {key!r}")
        return np.array(default, dtype=float)
    try:
        arr = np.array(data[key], dtype=float)
    except (TypeError, ValueError) as e:
        raise InputError(f"field {key!r} is not numeric: {data[key]!r}") from e
    if arr.shape != shape:
        raise InputError(f"field {key!r} must have shape {shape}, got {arr.shape}")
    return arr


def parse_channel(data: Mapping[str, Any]) -> GaussianChannel:
    return GaussianChannel(
        _array(data, "T", (2, 2)),
        _array(data, "N", (2, 2)),
        _array(data, "d", (2,), default=[0.0, 0.0]),
    )


def parse_attack(data: Mapping[str, Any]) -> CollectiveGaussianAttack:
    for key in ("tau", "nbar"):
        if key not in data:
            raise InputError(f"missing field {key!r}")
    label = data.get("class")
    if label is not None and not isinstance(label, str):
        raise InputError(f"field 'class' must be a string, got {label!r}")
    return dressed(
        _number(data["tau"], "tau"),
        _number(data["nbar"], "nbar"),
        _array(data, "MA", (2, 2), default=np.eye(2)),
        _array(data, "MB", (2, 2), default=np.eye(2)),
        _array(data, "dA", (2,), default=[0.0, 0.0]),
        _array(data, "dB", (2,), default=[0.0, 0.0]),
        label=label,
    )


def parse_channel_or_attack(
    data: Mapping[str, Any],
) -> tuple[GaussianChannel | None, CollectiveGaussianAttack | None]:
    """Recognize a bare channel ({"T", "N"}), a bare attack ({"tau", "nbar"}) or a wrapper."""
    if "channel" in data:
        return parse_channel(_section(data, "channel")), None
    if "attack" in data:
        return None, parse_attack(_section(data, "attack"))
    if "T" in data:
        return parse_channel(data), None
    if "tau" in data:
        return None, parse_attack(data)
    raise InputError("document is neither a channel (T, N, d) nor an attack (tau, nbar, ...)")


def _section(data: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    section = data[key]
    if not isinstance(section, Mapping):
        raise InputError(f"field {key!r} must be a mapping")
    return section


def parse_config(data: Mapping[str, Any]) -> ProtocolConfig:
    if "channel" not in data and "attack" not in data:
        raise InputError("simulation config needs a 'channel' or an 'attack'")
    for key in ("mu", "n_samples", "seed"):
        if key not in data:
            raise InputError(f"missing field {key!r}")
    for key in ("n_samples", "seed"):
        if isinstance(data[key], bool) or not isinstance(data[key], int):
            raise InputError(f"{key} must be an integer, got {data[key]!r}")
    mu = _number(data["mu"], "mu")
    ch, atk = parse_channel_or_attack(data)
    if atk is not None:
        return ProtocolConfig.for_attack(atk, mu, data["n_samples"], data["seed"])
    return ProtocolConfig(ch, mu, data["n_samples"], data["seed"])


def _num(x: float | None) -> float | None:
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def _mat(m: np.ndarray) -> list:
    return [[_num(v) for v in row] for row in np.asarray(m)]


def _vec(v: np.ndarray) -> list:
    return [_num(x) for x in np.asarray(v)]


def table_to_dicts(rows: list[Mapping[str, Any]], fieldnames: list[str]) -> list[dict[str, Any]]:
    """Sweep-style rows as JSON objects; NaN cells become null."""
    return [
        {k: _num(r.get(k)) if isinstance(r.get(k), float) else r.get(k) for k in fieldnames}
        for r in rows
    ]


def channel_to_dict(ch: GaussianChannel) -> dict[str, Any]:
    return {"T": _mat(ch.t), "N": _mat(ch.n), "d": _vec(ch.d)}


def attack_to_dict(atk: CollectiveGaussianAttack) -> dict[str, Any]:
    inv = atk.invariants
    return {
        "class": atk.class_label,
        "tau": _num(inv.tau),
        "nbar": _num(inv.nbar),
        "MA": _mat(atk.ma),
        "MB": _mat(atk.mb),
        "dA": _vec(atk.da),
        "dB": _vec(atk.db),
    }


def invariants_to_dict(inv: ChannelInvariants) -> dict[str, Any]:
    return {"tau": _num(inv.tau), "r": inv.r, "nbar": _num(inv.nbar), "w": _num(inv.w)}


def validation_to_dict(report: ValidationReport) -> dict[str, Any]:
    return {"ok": report.ok, "violations": list(report.violations)}


def rate_report_to_dict(report: RateReport) -> dict[str, Any]:
    row = report.to_row()
    return {k: v if isinstance(v, str) else _num(v) for k, v in row.items()}


def attack_summary(atk: CollectiveGaussianAttack) -> dict[str, Any]:
    """Attack record plus its θ-parameters and triplet {τ, w, η}."""
    th = atk.thetas()
    tau, w, eta = triplet(atk)
    return {
        "attack": attack_to_dict(atk),
        "thetas": {
            "theta": _num(th.theta),
            "theta_a": _num(th.theta_a),
            "theta_b": _num(th.theta_b),
        },
        "triplet": {"tau": _num(tau), "w": _num(w), "eta": _num(eta)},
    }


def decomposition_to_dict(
    ua: GaussianUnitary, cf: CanonicalForm, ub: GaussianUnitary
) -> dict[str, Any]:
    return {
        "class": cf.class_label,
        "invariants": invariants_to_dict(cf.invariants),
        "Tc": _mat(cf.tc),
        "Nc": _mat(cf.nc),
        "MA": _mat(ua.s),
        "dA": _vec(ua.d),
        "MB": _mat(ub.s),
        "dB": _vec(ub.d),
    }


def dilation_to_dict(
    dil: StinespringDilation, residuals: DilationResiduals | None = None
) -> dict[str, Any]:
    out: dict[str, Any] = {
        "class": dil.class_label,
        "invariants": invariants_to_dict(dil.invariants),
        "L_shape": list(dil.l.shape),
        "env_w": _num(dil.env_cov[0, 0]),
        "L": _mat(dil.l),
    }
    if residuals is not None:
        out["residuals"] = {
            "symplectic": _num(residuals.symplectic),
            "purity": _num(residuals.purity),
            "reduction": _num(residuals.reduction),
        }
    return out


def moments_to_dict(summary: MomentSummary) -> dict[str, Any]:
    return {
        "count": summary.count,
        "mean": _vec(summary.mean),
        "covariance": _mat(summary.covariance),
    }


def record_to_dict(record: SimulationRecord) -> dict[str, Any]:
    return {
        "n_samples": record.n_samples,
        "mu": _num(record.mu),
        "seed": record.seed,
        "moments": moments_to_dict(record.moments),
        "t_hat": _mat(record.t_hat),
        "t_se": _mat(record.t_se),
        "w_se": _num(record.w_se),
        "n_hat": _mat(record.n_hat),
        "d_hat": _vec(record.d_hat),
        "mi_empirical": _num(record.mi_empirical),
        "mi_analytic": _num(record.mi_analytic),
        "rate_from_tomography": (
            None
            if record.rate_from_tomography is None
            else rate_report_to_dict(record.rate_from_tomography)
        ),
        "rate_true": None if record.rate_true is None else rate_report_to_dict(record.rate_true),
    }


def dumps(payload: Mapping[str, Any] | list) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
