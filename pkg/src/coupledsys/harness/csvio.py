"""CSV emission with stable columns and bit-exact float formatting.

Schemas::

    spectrum.csv      theta, re, im, abs_phi, source
    cesaro.csv        n, norm, error
    rates.csv         abscissa, value
    rates_orbit.csv   abscissa, <one column per orbit measurement>
    trajectory.csv    step_or_time, k, comp, re, im   (+ trajectory.tails.csv)
    summary.csv       metric, value, threshold, pass
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..errors import PoleEvaluation
from ..spectral import SpectrumSample


def fmt(value) -> str:
    """``repr`` for floats (exact round trip), ``str`` for ints and text."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_spectrum(path, samples: list[SpectrumSample], phi) -> Path:
    rows = []
    for s in samples:
        try:
            mag = float(abs(phi(s.lam)))
        except PoleEvaluation:
            mag = math.nan
        rows.append((s.theta, s.lam.real, s.lam.imag, mag, s.source.value))
    return write_rows(path, ["theta", "re", "im", "abs_phi", "source"], rows)


def write_cesaro(path, report) -> Path:
    rows = [(n, norm, err) for (n, err), (_, norm) in zip(report.errors, report.norms)]
    return write_rows(path, ["n", "norm", "error"], rows)


def write_rates(path, samples) -> Path:
    return write_rows(path, ["abscissa", "value"], samples)


def write_orbit_rates(path, columns: dict) -> Path:
    """``columns`` maps a measurement name to ``(abscissa, value)`` samples on a common ladder."""
    names = list(columns)
    if not names:
        return write_rows(path, ["abscissa"], [])
    xs = [x for x, _ in columns[names[0]]]
    rows = []
    for i, x in enumerate(xs):
        rows.append([x] + [columns[n][i][1] for n in names])
    return write_rows(path, ["abscissa"] + names, rows)


class Summary:
    """Accumulates ``metric, value, threshold, pass`` rows."""

    def __init__(self):
        self.rows = []

    def check(self, metric: str, value, threshold: str, ok: bool):
        self.rows.append((metric, value, threshold, bool(ok)))
        return ok

    def info(self, metric: str, value):
        self.rows.append((metric, value, "", True))

    @property
    def passed(self) -> bool:
        return all(r[3] for r in self.rows)

    def write(self, path) -> Path:
        return write_rows(path, ["metric", "value", "threshold", "pass"], self.rows)
