from __future__ import annotations

import csv
import io
import logging
import math
import os
from collections.abc import Iterable, Mapping
from typing import Any

import click
import numpy as np

from .schema import SIGNIFICANT_DIGITS, dumps

LOG = logging.getLogger(__name__)

SAMPLE_FIELDS = ["qa", "pa", "qb", "pb"]


def ensure_parent_dir(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _emit(path: str | None, text: str) -> None:
    if path is None:
        click.echo(text, nl=False)
        return
    ensure_parent_dir(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    LOG.debug("wrote %s", path)


def write_json(path: str | None, payload: Mapping[str, Any] | list) -> None:
    """Write ``payload`` as sorted, indented JSON; stdout when ``path`` is None."""
    _emit(path, dumps(payload) + "\n")


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float | np.floating):
        if math.isnan(value):
            return "nan"
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    return value


def write_csv(path: str | None, rows: Iterable[Mapping[str, Any]], fieldnames: list[str]) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k)) for k in fieldnames})
    _emit(path, buf.getvalue())


def write_samples_csv(path: str, x_a: np.ndarray, y: np.ndarray) -> None:
    """Raw protocol rounds, one (q_A, p_A, q_B, p_B) row each."""
    rows = (dict(zip(SAMPLE_FIELDS, row, strict=True)) for row in np.hstack([x_a, y]).tolist())
    write_csv(path, rows, SAMPLE_FIELDS)
