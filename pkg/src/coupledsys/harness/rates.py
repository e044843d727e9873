"""Decay-rate measurements: per orbit and at the operator-norm level.

Single orbits may decay faster than the operator norm, so the two are
measured and reported separately.
"""

from __future__ import annotations

import math

import numpy as np

from ..characteristic import CoupledSystem
from ..errors import ParameterOutOfRange
from ..fitting import RateFit, decay_fit, dyadic_ladder, geometric_ladder, rate_fit
from ..flow import derivative_norm, evolve_continuous, symbol_flow_norm
from ..lattice import LatticeState, evolve, lp_norm, power_apply, step
from ..spectral import symbol_difference_norm

__all__ = [
    "RateFit",
    "rate_fit",
    "difference_samples",
    "difference_rate",
    "state_error_samples",
    "state_error_rate",
    "operator_samples_discrete",
    "operator_rate_discrete",
    "operator_samples_continuous",
    "operator_rate_continuous",
    "continuous_orbit_samples",
    "derivative_samples",
    "derivative_rate",
]

LADDER_POINTS = 17
ORBIT_T_MIN = 1.0
STEP_LIMIT = 4096


def _require(system, discrete):
    if system.is_discrete != discrete:
        kind = "discrete" if discrete else "continuous"
        raise ParameterOutOfRange(f"this rate needs a {kind} system")


def _orbit_states(x0, system, wanted):
    """States at the step counts in ``wanted``.

    Counts up to :data:`STEP_LIMIT` come from exact stepping; larger ones
    from :func:`power_apply`, which costs O(n log n) instead of O(n²).
    """
    wanted = sorted(set(wanted))
    short = [n for n in wanted if n <= STEP_LIMIT]
    kept = {}
    if short:
        evolve(x0, system, short[-1], observer=lambda j, st: kept.__setitem__(j, st), observe_at=set(short))
    for n in wanted:
        if n > STEP_LIMIT:
            kept[n] = power_apply(x0, system, n)
    return kept


def difference_samples(system: CoupledSystem, x0: LatticeState, n_max: int) -> list:
    """``(n, ‖x(n+1) - x(n)‖_p)`` on the half-octave ladder ``n ≤ n_max``."""
    _require(system, True)
    ladder = dyadic_ladder(n_max)
    kept = _orbit_states(x0, system, ladder)
    return [(n, lp_norm(step(kept[n], system) - kept[n])) for n in ladder]


def difference_rate(system: CoupledSystem, x0: LatticeState, n_max: int) -> RateFit:
    """Orbit exponent of ``‖x(n+1) - x(n)‖``; may be steeper than -1/2."""
    return decay_fit(difference_samples(system, x0, n_max), 0.5, min_decades=1.0)


def state_error_samples(system: CoupledSystem, x0: LatticeState, n_max: int, limit) -> list:
    """``(n, ‖x(n) - z‖_p)`` where ``z`` is the constant sequence with entry ``limit``."""
    _require(system, True)
    ref = LatticeState.constant(limit, x0.p)
    ladder = dyadic_ladder(n_max)
    kept = _orbit_states(x0, system, ladder)
    return [(n, lp_norm(kept[n] - ref)) for n in ladder]


def state_error_rate(system: CoupledSystem, x0: LatticeState, n_max: int, limit) -> RateFit:
    return decay_fit(state_error_samples(system, x0, n_max, limit), 0.5, min_decades=1.0)


def operator_samples_discrete(system: CoupledSystem, frequencies: int, n_max: int) -> list:
    """``(n, ‖T^n(I - T)‖₂)`` on the N-periodic truncation, ``n`` log-spaced in ``[n_max/100, n_max]``."""
    _require(system, True)
    if n_max < 100:
        raise ParameterOutOfRange("n_max must be at least 100 for a two-decade ladder")
    ladder = geometric_ladder(n_max // 100, n_max, LADDER_POINTS)
    return [(n, symbol_difference_norm(system, frequencies, n)) for n in ladder]


def operator_rate_discrete(system: CoupledSystem, frequencies: int, n_max: int) -> RateFit:
    """Exponent of ``‖T^n(I - T)‖``; -1/2 for special-form systems."""
    return decay_fit(operator_samples_discrete(system, frequencies, n_max), 1.0)


def operator_samples_continuous(system: CoupledSystem, frequencies: int, t_max: float) -> list:
    """``(t, ‖A·e^{tA}‖₂)`` on the N-periodic truncation, ``t`` log-spaced in ``[t_max/100, t_max]``."""
    _require(system, False)
    if not t_max >= 16:
        raise ParameterOutOfRange("t_max must be at least 16")
    ladder = geometric_ladder(t_max / 100, t_max, LADDER_POINTS, integer=False)
    return [(t, symbol_flow_norm(system, frequencies, t)) for t in ladder]


def operator_rate_continuous(system: CoupledSystem, frequencies: int, t_max: float) -> RateFit:
    """Exponent of ``‖A·e^{tA}‖``; -1/2 for the platoon."""
    return decay_fit(operator_samples_continuous(system, frequencies, t_max), 1.0)


def continuous_orbit_samples(system: CoupledSystem, x0: LatticeState, t_max: float, limit=None, method="rk") -> dict:
    """One integration, ``t`` log-spaced in ``[1, t_max]``.

    Returns ``{"derivative": [(t, ‖ẋ(t)‖_p)], "state_error": [(t, ‖x(t) - z‖_p)]}``,
    the second only when ``limit`` (the entry of ``z``) is given.
    """
    _require(system, False)
    if t_max <= ORBIT_T_MIN:
        raise ParameterOutOfRange("t_max must exceed 1")
    count = max(9, int(math.ceil(4 * math.log10(t_max))) + 1)
    times = geometric_ladder(ORBIT_T_MIN, t_max, count, integer=False)
    traj = evolve_continuous(x0, system, times, method)
    pairs = list(zip(traj.times[1:], traj.states[1:]))
    out = {"derivative": [(t, derivative_norm(st, system)) for t, st in pairs]}
    if limit is not None:
        ref = LatticeState.constant(limit, x0.p)
        out["state_error"] = [(t, lp_norm(st - ref)) for t, st in pairs]
    return out


def derivative_samples(system: CoupledSystem, x0: LatticeState, t_max: float, method="rk") -> list:
    """``(t, ‖ẋ(t)‖_p)`` along one orbit, ``t`` log-spaced in ``[1, t_max]``."""
    return continuous_orbit_samples(system, x0, t_max, None, method)["derivative"]


def derivative_rate(system: CoupledSystem, x0: LatticeState, t_max: float, method="rk") -> RateFit:
    return decay_fit(derivative_samples(system, x0, t_max, method), 0.5, min_decades=1.0)


def as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(samples, dtype=float)
    return arr[:, 0], arr[:, 1]
