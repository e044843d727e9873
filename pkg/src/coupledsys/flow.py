"""Continuous-time evolution ``ẋ_k = A0·x_k + A1·x_{k-1}``.

Information travels only to the right, so the solution on a window is
determined by the window, the left tail and nothing further right.  The
window is extended rightward by ``d(t)`` indices, where ``d`` is the first
integer with ``(C·t)^d/d! · ‖x0‖_∞ < tol`` and ``C = ‖A1‖₂``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .algebra import apply_blocks, matrix_exp, norm2
from .characteristic import CoupledSystem, discretize
from .errors import ParameterOutOfRange, ToleranceNotMet, WindowOverflow
from .lattice import WINDOW_CAP, LatticeState, evolve, lp_norm
from .parallel import map_chunks
from .spectral import _require_pow2, unit_frequencies

CASCADE_TOL = 1e-12
RK_RTOL = 1e-10


class FlowMethod(enum.Enum):
    EXPM_CASCADE = "expm"
    ADAPTIVE_RK = "rk"


@dataclass(frozen=True)
class FlowTrajectory:
    times: tuple
    states: tuple
    method: FlowMethod

    def __post_init__(self):
        if self.times[0] != 0 or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must start at 0 and increase strictly")

    def at(self, t: float) -> LatticeState:
        return self.states[self.times.index(t)]


def _require_continuous(system):
    if system.is_discrete:
        raise ParameterOutOfRange("this operation needs a continuous-time system")


def cascade_extension(system: CoupledSystem, x0: LatticeState, t: float, tol: float = CASCADE_TOL) -> int:
    """Rightward window extension ``d(t)`` from the factorial cascade bound."""
    c = norm2(system.sub)
    scale = x0.max_abs()
    if c * t == 0 or scale == 0:
        return 0
    log_target = math.log(tol / scale)
    log_ct = math.log(c * t)
    d = int(math.ceil(c * t))
    while d * log_ct - math.lgamma(d + 1) >= log_target:
        d += 1
    return d


def _cascade_blocks(system: CoupledSystem, t: float, depth: int) -> list[np.ndarray]:
    """Blocks ``E_0..E_depth`` of the first block column of ``e^{tA}``."""
    m = system.m
    size = (depth + 1) * m
    big = np.zeros((size, size), dtype=complex)
    for j in range(depth + 1):
        big[j * m:(j + 1) * m, j * m:(j + 1) * m] = system.diag
        if j:
            big[j * m:(j + 1) * m, (j - 1) * m:j * m] = system.sub
    e = matrix_exp(big, t)
    return [e[j * m:(j + 1) * m, :m] for j in range(depth + 1)]


def _tail_flow(system, vec, t):
    return matrix_exp(system.diag + system.sub, t) @ vec


def _expm_state(x0: LatticeState, system: CoupledSystem, t: float, cap: int) -> LatticeState:
    if t == 0:
        return x0
    d = cascade_extension(system, x0, t)
    width = x0.width + d
    if width > cap:
        raise WindowOverflow(f"window would exceed {cap} entries")
    blocks = _cascade_blocks(system, t, d)
    ext = x0.padded(x0.lo - d, x0.hi + d)
    out = np.zeros((width, x0.m), dtype=complex)
    for j, block in enumerate(blocks):
        out += apply_blocks(block, ext[d - j: d - j + width])
    return LatticeState(
        x0.lo, out, _tail_flow(system, x0.left_tail, t), _tail_flow(system, x0.right_tail, t), x0.p
    )


def _rk_states(x0: LatticeState, system: CoupledSystem, times, cap: int) -> list[LatticeState]:
    t_end = times[-1]
    d = cascade_extension(system, x0, t_end)
    width = x0.width + d
    if width > cap:
        raise WindowOverflow(f"window would exceed {cap} entries")
    m = x0.m
    a0, a1 = system.diag, system.sub
    full = a0 + a1
    window0 = x0.padded(x0.lo, x0.hi + d)
    y0 = np.concatenate([x0.left_tail, window0.ravel(), x0.right_tail])

    def rhs(_t, y):
        left = y[:m]
        win = y[m:m + width * m].reshape(width, m)
        prev = np.concatenate([left[None, :], win[:-1]])
        dwin = win @ a0.T + prev @ a1.T
        return np.concatenate([full @ left, dwin.ravel(), full @ y[-m:]])

    scale = max(x0.max_abs(), 1e-300)
    sol = solve_ivp(
        rhs, (0.0, t_end), y0, method="DOP853", t_eval=list(times),
        rtol=RK_RTOL, atol=1e-13 * scale,
    )
    if not sol.success:
        raise ToleranceNotMet(f"adaptive integration failed: {sol.message}")
    states = []
    for i in range(len(times)):
        y = sol.y[:, i]
        states.append(
            LatticeState(x0.lo, y[m:m + width * m].reshape(width, m), y[:m], y[-m:], x0.p)
        )
    return states


def evolve_continuous(
    x0: LatticeState,
    system: CoupledSystem,
    t_grid,
    method: FlowMethod | str = FlowMethod.EXPM_CASCADE,
    cap: int = WINDOW_CAP,
) -> FlowTrajectory:
    """Solve ``ẋ = Ax`` at the times in ``t_grid`` (0 is prepended if absent).

    ``EXPM_CASCADE`` exponentiates the finite block-bidiagonal window
    operator; ``ADAPTIVE_RK`` integrates the same finite system with an
    embedded Runge–Kutta pair at relative tolerance 1e-10.
    """
    _require_continuous(system)
    if x0.m != system.m:
        raise ValueError("state and system dimensions differ")
    method = FlowMethod(method)
    times = [float(t) for t in t_grid]
    if not times or times[0] != 0.0:
        times = [0.0] + times
    if any(b <= a for a, b in zip(times, times[1:])) or not all(map(math.isfinite, times)):
        raise ValueError("t_grid must be finite and strictly increasing")
    if method is FlowMethod.EXPM_CASCADE:
        states = [_expm_state(x0, system, t, cap) for t in times]
    else:
        states = [x0] + _rk_states(x0, system, times[1:], cap) if len(times) > 1 else [x0]
    return FlowTrajectory(tuple(times), tuple(states), method)


def generator_apply(state: LatticeState, system: CoupledSystem) -> LatticeState:
    """``(Ax)_k = A0·x_k + A1·x_{k-1}`` on window plus tails; window grows by one."""
    cur = np.concatenate([state.values, state.right_tail[None, :]])
    prev = np.concatenate([state.left_tail[None, :], state.values])
    vals = apply_blocks(system.diag, cur) + apply_blocks(system.sub, prev)
    full = system.diag + system.sub
    return LatticeState(state.lo, vals, full @ state.left_tail, full @ state.right_tail, state.p)


def derivative_norm(state: LatticeState, system: CoupledSystem) -> float:
    """``‖ẋ‖ = ‖Ax‖`` in the state's norm."""
    _require_continuous(system)
    return lp_norm(generator_apply(state, system))


def symbol_flow_norm(system: CoupledSystem, frequencies: int, t: float) -> float:
    """Exact l² norm of ``A·e^{tA}`` on the N-periodic truncation."""
    _require_continuous(system)
    _require_pow2(frequencies)

    def chunk(th):
        sym = system.symbol(np.exp(1j * th))
        return np.linalg.norm(sym @ matrix_exp(sym, t), ord=2, axis=(-2, -1))

    return float(np.max(map_chunks(chunk, unit_frequencies(frequencies))))


def euler_approximation(x0: LatticeState, system: CoupledSystem, eps: float, t: float) -> LatticeState:
    """``(I + εA)^{⌈t/ε⌉}·x0``, the explicit Euler approximation of ``x(t)``."""
    steps = int(math.ceil(t / eps - 1e-12))
    return evolve(x0, discretize(system, eps), steps)


def write_trajectory_csv(path, times, states, time_label: str = "t") -> tuple[Path, Path]:
    """Write ``time_label,k,comp,re,im`` rows plus a ``.tails.csv`` sidecar.

    The sidecar has columns ``time_label,side,comp,re,im`` with ``side`` in
    ``{left, right}``; those values hold for every index outside the
    window recorded at that time.  Floats are written with ``repr`` so the
    files round-trip exactly.
    """
    path = Path(path)
    side = path.with_suffix(".tails.csv")
    with open(path, "w", newline="") as fh, open(side, "w", newline="") as sh:
        w = csv.writer(fh, lineterminator="\n")
        s = csv.writer(sh, lineterminator="\n")
        w.writerow([time_label, "k", "comp", "re", "im"])
        s.writerow([time_label, "side", "comp", "re", "im"])
        for t, st in zip(times, states):
            stamp = repr(t) if isinstance(t, float) else str(t)
            for i, vec in enumerate(st.values):
                for c, z in enumerate(vec):
                    w.writerow([stamp, st.lo + i, c, repr(float(z.real)), repr(float(z.imag))])
            for name, vec in (("left", st.left_tail), ("right", st.right_tail)):
                for c, z in enumerate(vec):
                    s.writerow([stamp, name, c, repr(float(z.real)), repr(float(z.imag))])
    return path, side


def export_csv(trajectory: FlowTrajectory, path) -> tuple[Path, Path]:
    """Export a trajectory with :func:`write_trajectory_csv`."""
    return write_trajectory_csv(path, trajectory.times, trajectory.states, "t")
