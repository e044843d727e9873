"""Spectra, resolvent bounds and symbol norms of coupled systems.

The bi-infinite operator is block-Toeplitz with symbol ``diag + z·sub``.
On an N-periodic (block-circulant) truncation the DFT block-diagonalises
it, so the exact l² norm of any polynomial in the operator is the largest
spectral norm of the same polynomial in the symbol over ``z = e^{2πij/N}``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .algebra import norm2, resolvent
from .characteristic import CoupledSystem, TimeKind
from .errors import (
    FitAmbiguous,
    NotEigenvalue,
    NotOnLevelSet,
    NumericalError,
    OnSpectrum,
    ParameterOutOfRange,
)
from .fitting import RateFit, rate_fit
from .lattice import LatticeState
from .parallel import map_chunks

LEVEL_TOL = 1e-8


class SampleSource(enum.Enum):
    PHI_LEVEL_SET = "phi_level_set"
    SYMBOL_EIGENVALUE = "symbol_eigenvalue"


@dataclass(frozen=True)
class SpectrumSample:
    lam: complex
    source: SampleSource
    theta: float


@dataclass(frozen=True)
class GrowthEstimate:
    """Even exponent ``n_T`` with ``1 - |φ(e^{iθ})| ≍ |θ|^{n_T}`` and its fit."""

    n_t: int
    fit: RateFit


def unit_frequencies(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def spectrum_curve(system: CoupledSystem, grid_size: int = 512) -> list[SpectrumSample]:
    """Symbol eigenvalues on a uniform θ grid, plus exact circle points.

    Circle points (the set where ``|φ| = 1``) are added only for
    special-form systems and are checked against ``|φ(λ)| = 1``.
    """
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8")
    phi = system.char_fn
    thetas = unit_frequencies(grid_size)

    def eig_chunk(th):
        return np.linalg.eigvals(system.symbol(np.exp(1j * th)))

    eigs = map_chunks(eig_chunk, thetas)
    form = system.special_form()
    samples = []
    for j, th in enumerate(thetas):
        for lam in eigs[j]:
            samples.append(SpectrumSample(complex(lam), SampleSource.SYMBOL_EIGENVALUE, float(th)))
        if form is not None:
            lam = form.centre + form.param * np.exp(1j * th)
            if abs(abs(phi(lam)) - 1) > LEVEL_TOL:
                raise NumericalError(f"circle point {lam} has |φ| = {abs(phi(lam))}")
            samples.append(SpectrumSample(complex(lam), SampleSource.PHI_LEVEL_SET, float(th)))
    return samples


def circle_deviation(samples, centre: complex, radius: float, source=SampleSource.SYMBOL_EIGENVALUE) -> float:
    """Largest distance from the chosen samples to the circle ``|λ - centre| = radius``."""
    pts = np.array([s.lam for s in samples if s.source is source])
    if len(pts) == 0:
        return 0.0
    return float(np.max(np.abs(np.abs(pts - centre) - radius)))


def angular_gap(samples, centre: complex, source=SampleSource.SYMBOL_EIGENVALUE) -> float:
    """Largest angular gap (radians) between samples seen from ``centre``."""
    pts = np.array([s.lam for s in samples if s.source is source])
    ang = np.sort(np.mod(np.angle(pts - centre), 2 * np.pi))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    return float(np.max(gaps))


def resolvent_norm_bounds(system: CoupledSystem, lam: complex) -> tuple[float, float]:
    """Two-sided bound on ``‖R(λ, T)‖`` away from ``|φ| = 1``.

    With ``r = ‖R0·T1·R0‖ / |1 - |φ(λ)||`` and ``R0 = R(λ, T0)`` the norm
    lies in ``[r - ‖R0‖, r + ‖R0‖]``.
    """
    r0 = resolvent(system.diag, lam)
    mag = abs(system.char_fn(lam))
    gap = abs(1 - mag)
    if gap <= 1e-10:
        raise OnSpectrum(f"|φ({lam})| = 1 to within 1e-10")
    r = norm2(r0 @ system.sub @ r0) / gap
    n0 = norm2(r0)
    return max(r - n0, 0.0), r + n0


def growth_parameter(system: CoupledSystem) -> GrowthEstimate:
    """Estimate ``n_T`` from ``1 - |φ|`` on a dyadic θ ladder ``2^-8..2^-20``.

    Discrete systems are probed at ``e^{iθ}`` near 1, continuous ones at
    ``iθ`` near 0.
    """
    phi = system.char_fn
    base = 1.0 if system.is_discrete else 0.0
    if abs(abs(phi(base)) - 1) > 1e-9:
        raise NotOnLevelSet(f"|φ({base:g})| = {abs(phi(base))} != 1")
    thetas = np.array([2.0 ** -j for j in range(20, 7, -1)])
    pts = np.exp(1j * thetas) if system.is_discrete else 1j * thetas
    gaps = 1 - np.abs(phi(pts))
    if np.any(gaps <= 0):
        raise FitAmbiguous("1 - |φ| is not positive along the probe ladder")
    fit = rate_fit(list(zip(thetas, gaps)), window_fraction=1.0)
    n_t = 2 * int(round(fit.slope / 2))
    if abs(fit.slope - n_t) > 0.25 or n_t < 2:
        raise FitAmbiguous(f"slope {fit.slope:.3f} is not near an even integer >= 2")
    if n_t > 2 * system.m:
        raise FitAmbiguous(f"n_T = {n_t} exceeds 2m = {2 * system.m}")
    return GrowthEstimate(n_t, fit)


def eigen_sequence(system: CoupledSystem, lam: complex, window=(-10, 10)) -> LatticeState:
    """Eigenvector ``x_k = φ(λ)^k·x_0`` of T on l^∞ for ``|φ(λ)| = 1``.

    ``x_0 = R(λ, T0)·T1·w`` with ``w`` the unit vector maximising ``‖x_0‖``.
    The returned state is marked as having non-constant tails.
    """
    phi = system.char_fn
    try:
        r0 = resolvent(system.diag, lam)
    except NumericalError as exc:
        raise NotEigenvalue(f"λ={lam} lies in σ(T0)") from exc
    val = phi(lam)
    if abs(abs(val) - 1) > 1e-9:
        raise NotEigenvalue(f"|φ({lam})| = {abs(val)} != 1")
    op = r0 @ system.sub
    _, _, vh = np.linalg.svd(op)
    x0 = op @ vh[0].conj()
    lo, hi = window
    ks = np.arange(lo, hi + 1)
    values = (val ** ks)[:, None] * x0[None, :]
    zero = np.zeros(system.m)
    return LatticeState(lo, values, zero, zero, math.inf, tails_constant=False)


def eigen_residual(state: LatticeState, system: CoupledSystem, lam: complex) -> float:
    """``max_k ‖(Tx)_k - λx_k‖`` over interior indices, relative to ``max_k ‖x_k‖``."""
    x = state.values
    tx = x[1:] @ system.diag.T + x[:-1] @ system.sub.T
    res = np.linalg.norm(tx - lam * x[1:], axis=1)
    return float(np.max(res) / np.max(np.linalg.norm(x, axis=1)))


def _require_discrete(system):
    if not system.is_discrete:
        raise ParameterOutOfRange("this operation needs a discrete system")


def _require_pow2(n):
    if n < 2 or n & (n - 1):
        raise ParameterOutOfRange(f"frequency count must be a power of two >= 2, got {n}")


def _batch_norm2(mats: np.ndarray) -> np.ndarray:
    return np.linalg.norm(mats, ord=2, axis=(-2, -1))


def symbol_power_norm(system: CoupledSystem, frequencies: int, n: int) -> float:
    """Exact l² norm of ``T^n`` on the N-periodic truncation."""
    _require_discrete(system)
    _require_pow2(frequencies)
    if n < 0:
        raise ValueError("n must be non-negative")

    def chunk(th):
        sym = system.symbol(np.exp(1j * th))
        return _batch_norm2(np.linalg.matrix_power(sym, n))

    return float(np.max(map_chunks(chunk, unit_frequencies(frequencies))))


def symbol_power_norms(system: CoupledSystem, frequencies: int, n_max: int) -> np.ndarray:
    """``symbol_power_norm`` for every ``n = 0..n_max`` by repeated multiplication."""
    _require_discrete(system)
    _require_pow2(frequencies)

    def chunk(th):
        sym = system.symbol(np.exp(1j * th))
        power = np.broadcast_to(np.eye(system.m, dtype=complex), sym.shape).copy()
        out = np.empty((n_max + 1, len(th)))
        for n in range(n_max + 1):
            out[n] = _batch_norm2(power)
            power = power @ sym
        return out.T

    per_freq = map_chunks(chunk, unit_frequencies(frequencies))
    return per_freq.max(axis=0)


def symbol_difference_norm(system: CoupledSystem, frequencies: int, n: int) -> float:
    """Exact l² norm of ``T^n·(I - T)`` on the N-periodic truncation."""
    _require_discrete(system)
    _require_pow2(frequencies)
    ident = np.eye(system.m)

    def chunk(th):
        sym = system.symbol(np.exp(1j * th))
        return _batch_norm2(np.linalg.matrix_power(sym, n) @ (ident - sym))

    return float(np.max(map_chunks(chunk, unit_frequencies(frequencies))))
