"""Exact evolution of eventually constant bi-infinite sequences.

A :class:`LatticeState` stores explicit vectors for indices ``lo..hi`` and
one constant vector for each tail.  This class is closed under the
discrete dynamics, so :func:`step` is exact for the bi-infinite system.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Collection, Optional

import numpy as np
from scipy.signal import fftconvolve

from .algebra import apply_blocks, max_norm, resolvent
from .characteristic import CoupledSystem
from .errors import (
    DegenerateDerivative,
    NotInRange,
    NotInSpace,
    ParameterOutOfRange,
    WindowOverflow,
)
from .fitting import RateFit, decay_fit, dyadic_ladder

WINDOW_CAP = 10 ** 6
RANGE_TOL = 1e-9
FORMAT_TAG = "# coupledsys lattice-state v1"


def parse_p(p) -> float:
    """Norm exponent from ``1``, ``2``, ``"inf"`` and the like."""
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity", "∞") else float(p)
    p = float(p)
    if not p >= 1:
        raise ParameterOutOfRange(f"norm exponent must be >= 1, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class LatticeState:
    """Window ``values[0..W-1]`` at indices ``lo..lo+W-1`` plus constant tails.

    With ``tails_constant=False`` the tails are not meaningful (used for
    geometric eigen-sequences); operations that need them refuse the state.
    """

    lo: int
    values: np.ndarray
    left_tail: np.ndarray
    right_tail: np.ndarray
    p: float = math.inf
    tails_constant: bool = field(default=True)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] == 0:
            raise ValueError("values must be a non-empty (W, m) array")
        m = vals.shape[1]
        left = np.array(self.left_tail, dtype=complex).reshape(m)
        right = np.array(self.right_tail, dtype=complex).reshape(m)
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise ValueError("state entries must be finite")
        p = parse_p(self.p)
        if p < math.inf and (np.any(left != 0) or np.any(right != 0)):
            raise NotInSpace(f"a nonzero constant tail is not in l^{p:g}")
        for a in (vals, left, right):
            a.flags.writeable = False
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "left_tail", left)
        object.__setattr__(self, "right_tail", right)
        object.__setattr__(self, "p", p)

    # -- constructors -------------------------------------------------------

    @classmethod
    def delta(cls, m: int = 1, p=math.inf, k: int = 0, vector=None) -> "LatticeState":
        vec = np.zeros(m, dtype=complex) if vector is None else np.asarray(vector, dtype=complex)
        if vector is None:
            vec[0] = 1.0
        zero = np.zeros(len(vec), dtype=complex)
        return cls(k, vec[None, :], zero, zero, p)

    @classmethod
    def constant(cls, entry, p=math.inf) -> "LatticeState":
        entry = np.atleast_1d(np.asarray(entry, dtype=complex))
        return cls(0, entry[None, :], entry, entry, p)

    @classmethod
    def zeros(cls, m: int, p=math.inf) -> "LatticeState":
        return cls.constant(np.zeros(m), p)

    @classmethod
    def from_window(cls, values, lo: int = 0, left_tail=None, right_tail=None, p=math.inf):
        vals = np.array(values, dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        m = vals.shape[1]
        left = np.zeros(m) if left_tail is None else left_tail
        right = np.zeros(m) if right_tail is None else right_tail
        return cls(lo, vals, left, right, p)

    # -- basic properties ---------------------------------------------------

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def hi(self) -> int:
        return self.lo + self.values.shape[0] - 1

    @property
    def width(self) -> int:
        return self.values.shape[0]

    def at(self, k: int) -> np.ndarray:
        if k < self.lo:
            return self.left_tail
        if k > self.hi:
            return self.right_tail
        return self.values[k - self.lo]

    def padded(self, lo: int, hi: int) -> np.ndarray:
        """Entries for indices ``lo..hi`` as a ``(hi-lo+1, m)`` array."""
        out = np.empty((hi - lo + 1, self.m), dtype=complex)
        a, b = max(lo, self.lo), min(hi, self.hi)
        out[: max(0, min(self.lo, hi + 1) - lo)] = self.left_tail
        if a <= b:
            out[a - lo: b - lo + 1] = self.values[a - self.lo: b - self.lo + 1]
        start = max(self.hi + 1, lo)
        if start <= hi:
            out[start - lo:] = self.right_tail
        return out

    def repad(self, lo: int, hi: int) -> "LatticeState":
        """Same sequence with the window moved to ``lo..hi`` (must contain the old one)."""
        if lo > self.lo or hi < self.hi:
            raise ValueError("repad may only enlarge the window")
        return LatticeState(lo, self.padded(lo, hi), self.left_tail, self.right_tail, self.p, self.tails_constant)

    def canonical(self) -> "LatticeState":
        """Trim window entries equal to the adjacent tail (keeps one entry)."""
        vals = self.values
        i, j = 0, len(vals)
        while j - i > 1 and np.array_equal(vals[i], self.left_tail):
            i += 1
        while j - i > 1 and np.array_equal(vals[j - 1], self.right_tail):
            j -= 1
        return LatticeState(self.lo + i, vals[i:j], self.left_tail, self.right_tail, self.p, self.tails_constant)

    def with_p(self, p) -> "LatticeState":
        return LatticeState(self.lo, self.values, self.left_tail, self.right_tail, p, self.tails_constant)

    def _combine(self, other: "LatticeState", op) -> "LatticeState":
        if self.m != other.m:
            raise ValueError("dimension mismatch")
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        return LatticeState(
            lo,
            op(self.padded(lo, hi), other.padded(lo, hi)),
            op(self.left_tail, other.left_tail),
            op(self.right_tail, other.right_tail),
            self.p,
            self.tails_constant and other.tails_constant,
        )

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        return LatticeState(
            self.lo, self.values * scalar, self.left_tail * scalar, self.right_tail * scalar, self.p, self.tails_constant
        )

    __rmul__ = __mul__

    def max_abs(self) -> float:
        """Largest entry modulus over window and tails."""
        return max(max_norm(self.values), max_norm(self.left_tail), max_norm(self.right_tail))

    def __repr__(self):
        return f"LatticeState(lo={self.lo}, hi={self.hi}, m={self.m}, p={self.p:g})"


def _require_constant_tails(state):
    if not state.tails_constant:
        raise ValueError("operation needs a state with constant tails")


# ---------------------------------------------------------------------------
# Dynamics
# ---------------------------------------------------------------------------

def step(state: LatticeState, system: CoupledSystem, cap: int = WINDOW_CAP) -> LatticeState:
    """One application of ``(Tx)_k = T0·x_k + T1·x_{k-1}``; window grows by one on the right."""
    if not system.is_discrete:
        raise ParameterOutOfRange("step needs a discrete-time system")
    if state.m != system.m:
        raise ValueError(f"state dimension {state.m} != system dimension {system.m}")
    _require_constant_tails(state)
    if state.width + 1 > cap:
        raise WindowOverflow(f"window would exceed {cap} entries")
    t0, t1 = system.diag, system.sub
    cur = np.concatenate([state.values, state.right_tail[None, :]])
    prev = np.concatenate([state.left_tail[None, :], state.values])
    new = apply_blocks(t0, cur) + apply_blocks(t1, prev)
    left = apply_blocks(t0, state.left_tail[None, :]) + apply_blocks(t1, state.left_tail[None, :])
    right = apply_blocks(t0, state.right_tail[None, :]) + apply_blocks(t1, state.right_tail[None, :])
    return LatticeState(state.lo, new, left[0], right[0], state.p)


def evolve(
    state: LatticeState,
    system: CoupledSystem,
    n: int,
    observer: Optional[Callable[[int, LatticeState], None]] = None,
    observe_at: Optional[Collection[int]] = None,
    cap: int = WINDOW_CAP,
) -> LatticeState:
    """Apply :func:`step` ``n`` times.

    ``observer(j, state)`` is called for ``j = 0..n`` (or only for ``j`` in
    ``observe_at`` when given).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    wanted = None if observe_at is None else set(observe_at)
    if observer is not None and (wanted is None or 0 in wanted):
        observer(0, state)
    for j in range(1, n + 1):
        state = step(state, system, cap)
        if observer is not None and (wanted is None or j in wanted):
            observer(j, state)
    return state


def power_apply(state: LatticeState, system: CoupledSystem, n: int, cap: int = WINDOW_CAP) -> LatticeState:
    """``T^n·x`` in O(n log n) through the block coefficients of ``(T0 + z·T1)^n``.

    The coefficients come from an inverse DFT of symbol powers and are
    convolved with the data by FFT, so the result matches ``n`` calls of
    :func:`step` to rounding (about 1e-13 relative) rather than bit for bit.
    The window becomes ``lo..hi+n`` as with stepping.
    """
    if not system.is_discrete:
        raise ParameterOutOfRange("power_apply needs a discrete-time system")
    _require_constant_tails(state)
    if n < 0:
        raise ValueError("n must be non-negative")
    if state.width + n > cap:
        raise WindowOverflow(f"window would exceed {cap} entries")
    if n == 0:
        return state
    size = 1 << int(math.ceil(math.log2(n + 1)))
    z = np.exp(2j * np.pi * np.arange(size) / size)
    powers = np.linalg.matrix_power(system.symbol(z), n)
    # with z_j = e^{+2πij/L} the forward DFT recovers the coefficient of z^j
    coeffs = np.fft.fft(powers, axis=0)[: n + 1] / size
    a = state.left_tail
    dev = state.padded(state.lo - n, state.hi + n) - a
    width = state.width + n
    out = np.zeros((width, state.m), dtype=complex)
    for r in range(state.m):
        for s in range(state.m):
            out[:, r] += fftconvolve(coeffs[:, r, s], dev[:, s], mode="valid")
    full = np.linalg.matrix_power(system.diag + system.sub, n)
    left = full @ a
    return LatticeState(state.lo, out + left, left, full @ state.right_tail, state.p)


def lp_norm(state: LatticeState) -> float:
    """``(Σ_k ‖x_k‖^p)^{1/p}`` or ``sup_k ‖x_k‖`` with Euclidean entry norms."""
    _require_constant_tails(state)
    p = state.p
    entry = np.sqrt(np.sum(state.values.real ** 2 + state.values.imag ** 2, axis=1))
    if p == math.inf:
        return float(max(entry.max(), np.linalg.norm(state.left_tail), np.linalg.norm(state.right_tail)))
    if np.any(state.left_tail != 0) or np.any(state.right_tail != 0):
        raise NotInSpace("nonzero tails have infinite l^p norm")
    if p == 1:
        return math.fsum(entry)
    if p == 2:
        sq = state.values.real ** 2 + state.values.imag ** 2
        return math.sqrt(math.fsum(sq.ravel()))
    return math.fsum(entry ** p) ** (1.0 / p)


def shift(state: LatticeState) -> LatticeState:
    """Right shift ``(Sx)_k = x_{k-1}``."""
    return LatticeState(state.lo + 1, state.values, state.left_tail, state.right_tail, state.p, state.tails_constant)


def coupling_matrix(system: CoupledSystem) -> np.ndarray:
    """``T1·R(1,T0)`` for discrete systems, ``A1·A0^{-1}`` for continuous ones."""
    if system.is_discrete:
        return system.sub @ resolvent(system.diag, 1.0)
    return system.sub @ (-resolvent(system.diag, 0.0))


def m_operator(state: LatticeState, system: CoupledSystem) -> LatticeState:
    """Blockwise application of :func:`coupling_matrix` to every entry."""
    _require_constant_tails(state)
    mat = coupling_matrix(system)
    return LatticeState(
        state.lo,
        apply_blocks(mat, state.values),
        apply_blocks(mat, state.left_tail[None, :])[0],
        apply_blocks(mat, state.right_tail[None, :])[0],
        state.p,
    )


def cesaro_average(x0: LatticeState, system: CoupledSystem, n: int) -> LatticeState:
    """``(1/n)·Σ_{k=1..n} S^k·M·x0`` via running sums; window ``lo+1..hi+n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    u = m_operator(x0, system)
    a = u.left_tail
    ext = u.padded(u.lo, u.hi + n - 1) - a
    prefix = np.concatenate([np.zeros((1, u.m), dtype=complex), np.cumsum(ext, axis=0)])
    j = np.arange(u.lo + 1, u.hi + n + 1)
    sums = prefix[j - u.lo] - prefix[np.maximum(j - n - u.lo, 0)]
    return LatticeState(u.lo + 1, a + sums / n, a, u.right_tail, u.p)


def limit_candidate(system: CoupledSystem, y0) -> np.ndarray:
    """``L·y0``: the unique ``w ∈ Ran(R·T1)`` with ``T1·R·w = y0``.

    Here ``R = R(1, T0)`` for discrete systems; for continuous systems the
    roles are played by ``A0^{-1}`` and ``A1·A0^{-1}``.
    """
    y0 = np.asarray(y0, dtype=complex).reshape(system.m)
    phi = system.char_fn
    point = 1.0 if system.is_discrete else 0.0
    if abs(phi.deriv()(point)) <= 1e-12:
        raise DegenerateDerivative(f"φ'({point:g}) vanishes")
    scale = max(np.linalg.norm(y0), 1.0)
    # membership in Ran(T1)
    u, s, _ = np.linalg.svd(system.sub)
    rank = int(np.sum(s > 1e-10 * s[0])) if s[0] > 0 else 0
    basis_t1 = u[:, :rank]
    if np.linalg.norm(y0 - basis_t1 @ (basis_t1.conj().T @ y0)) > RANGE_TOL * scale:
        raise NotInRange("y0 is not in the range of the coupling block")
    if not np.any(y0):
        return np.zeros(system.m, dtype=complex)
    res = resolvent(system.diag, 1.0) if system.is_discrete else -resolvent(system.diag, 0.0)
    back = res @ system.sub
    ub, sb, _ = np.linalg.svd(back)
    rb = int(np.sum(sb > 1e-10 * sb[0]))
    basis = ub[:, :rb]
    forward = system.sub @ res @ basis
    coef, *_ = np.linalg.lstsq(forward, y0, rcond=None)
    w = basis @ coef
    if np.linalg.norm(system.sub @ res @ w - y0) > RANGE_TOL * scale:
        raise NotInRange("y0 is not reached from Ran(R·T1)")
    return w


@dataclass(frozen=True)
class CesaroReport:
    """Outcome of :func:`convergence_test`.

    ``errors`` and ``norms`` are ``(n, value)`` pairs: the distance of the
    n-th average from the limit constant, and the norm of the average.
    """

    cesaro_limit: Optional[np.ndarray]
    cesaro_rate: RateFit
    predicted_z: Optional[LatticeState]
    errors: list
    norms: list
    tails_agree: bool


def convergence_test(x0: LatticeState, system: CoupledSystem, n_max: int) -> CesaroReport:
    """Cesàro test along a half-octave ladder ``n ≤ n_max``.

    For eventually constant data the averages keep the tails of ``M·x0``
    for every n, so the only possible sup-norm limit is their common value;
    for finite p it is zero.  The limit is reported when the tails agree
    and the distance to that constant decays.
    """
    if n_max < 16:
        raise ValueError("n_max must be at least 16")
    u = m_operator(x0, system)
    a, b = u.left_tail, u.right_tail
    tol = 1e-12 * max(np.linalg.norm(a), np.linalg.norm(b), 1.0)
    agree = bool(np.linalg.norm(a - b) <= tol)
    target = a if agree else 0.5 * (a + b)
    if x0.p < math.inf:
        target = np.zeros(x0.m, dtype=complex)
    ref = LatticeState.constant(target, x0.p)
    errors, norms = [], []
    for n in dyadic_ladder(n_max):
        avg = cesaro_average(x0, system, n)
        errors.append((n, lp_norm(avg - ref)))
        norms.append((n, lp_norm(avg)))
    # n_max may be as small as 16, so only one decade is demanded here
    fit = decay_fit(errors, 0.5, min_decades=1.0)
    converged = agree and (fit.regime in ("zero", "geometric") or fit.slope <= -0.1)
    limit = target if converged else None
    z = None
    if limit is not None:
        z = LatticeState.constant(limit_candidate(system, limit), x0.p)
    return CesaroReport(limit, fit, z, errors, norms, agree)


# ---------------------------------------------------------------------------
# Text serialization
# ---------------------------------------------------------------------------

def _fmt_vec(v) -> str:
    return " ".join(f"{repr(float(z.real))} {repr(float(z.imag))}" for z in v)


def _parse_vec(tokens, m):
    if len(tokens) != 2 * m:
        raise ValueError(f"expected {2 * m} numbers, got {len(tokens)}")
    f = [float(t) for t in tokens]
    return np.array([complex(f[2 * i], f[2 * i + 1]) for i in range(m)])


def dumps(state: LatticeState) -> str:
    """Serialize to the line-oriented text format (round-trip exact)."""
    _require_constant_tails(state)
    p = "inf" if state.p == math.inf else repr(state.p)
    lines = [
        FORMAT_TAG,
        f"m {state.m}",
        f"p {p}",
        f"lo {state.lo}",
        f"hi {state.hi}",
        f"left_tail {_fmt_vec(state.left_tail)}",
        f"right_tail {_fmt_vec(state.right_tail)}",
    ]
    for i, v in enumerate(state.values):
        lines.append(f"{state.lo + i} {_fmt_vec(v)}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> LatticeState:
    header = {}
    rows = {}
    for line in io.StringIO(text):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, *rest = line.split()
        if key in ("m", "p", "lo", "hi", "left_tail", "right_tail"):
            header[key] = rest
        else:
            rows[int(key)] = rest
    m = int(header["m"][0])
    lo, hi = int(header["lo"][0]), int(header["hi"][0])
    if sorted(rows) != list(range(lo, hi + 1)):
        raise ValueError("window rows do not cover lo..hi")
    values = np.array([_parse_vec(rows[k], m) for k in range(lo, hi + 1)])
    return LatticeState(
        lo,
        values,
        _parse_vec(header["left_tail"], m),
        _parse_vec(header["right_tail"], m),
        parse_p(header["p"][0]),
    )


def save(state: LatticeState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(state))


def load(path) -> LatticeState:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
