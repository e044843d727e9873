"""Log-log least-squares fits of decay rates and the measurement ladders."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit

MIN_SAMPLES = 8
MIN_WINDOW = 5


@dataclass(frozen=True)
class RateFit:
    """Fit of ``log value = slope·log abscissa + intercept``.

    ``regime`` is ``"power"`` for an ordinary fit, ``"zero"`` when every
    value vanished identically and ``"geometric"`` when the values fell to
    zero or faster than any power law inside the ladder.
    """

    slope: float
    intercept: float
    residual: float
    window: tuple[float, float]
    points: int = 0
    regime: str = "power"


def rate_fit(samples, window_fraction: float = 0.5, min_decades: float = 2.0) -> RateFit:
    """Fit a power law to the final ``window_fraction`` of ``samples``.

    ``samples`` is a sequence of ``(abscissa, value)`` pairs with ascending
    positive abscissae and positive values spanning at least two decades.
    """
    x, y = _unpack(samples)
    if len(x) < MIN_SAMPLES:
        raise DegenerateFit(f"need at least {MIN_SAMPLES} samples, got {len(x)}")
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    if np.any(np.diff(x) <= 0) or x[0] <= 0:
        raise ValueError("abscissae must be positive and strictly ascending")
    if np.any(y <= 0):
        raise ValueError("values must be positive")
    if math.log10(x[-1] / x[0]) < min_decades - 1e-12:
        raise DegenerateFit(f"abscissae span less than {min_decades:g} decades")
    count = max(MIN_WINDOW, int(math.ceil(window_fraction * len(x))))
    if count > len(x):
        raise DegenerateFit("fit window too small")
    lx, ly = np.log(x[-count:]), np.log(y[-count:])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid ** 2))),
        window=(float(x[-count]), float(x[-1])),
        points=count,
    )


def decay_fit(samples, window_fraction: float = 0.5, zero_tol: float = 0.0, min_decades: float = 2.0) -> RateFit:
    """Like :func:`rate_fit` but tolerant of vanishing values.

    All-zero series give a ``"zero"`` regime with slope 0; series that
    reach zero or steepen beyond slope -10 are flagged ``"geometric"``.
    """
    x, y = _unpack(samples)
    scale = float(np.max(np.abs(y))) if len(y) else 0.0
    if scale <= zero_tol:
        return RateFit(0.0, -math.inf, 0.0, (float(x[0]), float(x[-1])), len(x), "zero")
    positive = y > 0
    if not np.all(positive):
        keep = np.nonzero(positive)[0]
        last = keep[-1] if len(keep) else -1
        return RateFit(-math.inf, math.nan, math.nan, (float(x[0]), float(x[last])), len(keep), "geometric")
    fit = rate_fit(list(zip(x, y)), window_fraction, min_decades)
    if fit.slope < -10:
        return RateFit(fit.slope, fit.intercept, fit.residual, fit.window, fit.points, "geometric")
    return fit


def _unpack(samples):
    arr = np.asarray(list(samples), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be (abscissa, value) pairs")
    return arr[:, 0], arr[:, 1]


def dyadic_ladder(n_max: int, n_min: int = 1, per_octave: int = 2) -> list[int]:
    """Integers ``round(2^(j/per_octave))`` in ``[n_min, n_max]``, deduplicated."""
    top = int(math.floor(per_octave * math.log2(n_max) + 1e-9))
    vals = sorted({int(round(2 ** (j / per_octave))) for j in range(top + 1)})
    return [v for v in vals if n_min <= v <= n_max]


def geometric_ladder(lo: float, hi: float, count: int = 17, integer: bool = True):
    """``count`` log-spaced points from ``lo`` to ``hi`` inclusive."""
    pts = np.geomspace(lo, hi, count)
    if integer:
        return sorted({int(round(p)) for p in pts})
    return [float(p) for p in pts]
