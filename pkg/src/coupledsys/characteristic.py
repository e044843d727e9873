"""Characteristic functions of nearest-neighbour coupled systems.

A coupled system is the pair (diag, sub) acting on sequences by
``(Tx)_k = diag·x_k + sub·x_{k-1}``.  Its characteristic function φ is the
scalar rational function with ``sub·R(λ, diag)·sub = φ(λ)·sub``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    Polynomial,
    RationalFunction,
    adjugate_resolvent,
    complex_matrix,
    max_norm,
    norm2,
    resolvent,
)
from .errors import (
    NoCharacteristicFunction,
    ParameterOutOfRange,
    PoleEvaluation,
    SpectrumHit,
)

RANK_TOL = 1e-10
CHAR_TOL = 1e-8
FORM_TOL = 1e-9


class TimeKind(enum.Enum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


@dataclass(frozen=True, eq=False)
class CoupledSystem:
    """Diagonal block, subdiagonal block and time kind.

    The characteristic function is computed once at construction.  If it
    does not exist, accessing :attr:`char_fn` re-raises the construction
    error.
    """

    diag: np.ndarray
    sub: np.ndarray
    kind: TimeKind = TimeKind.DISCRETE
    name: str = ""
    _char: object = field(init=False, repr=False)

    def __post_init__(self):
        diag = complex_matrix(self.diag)
        sub = complex_matrix(self.sub)
        if diag.shape != sub.shape:
            raise ValueError(f"block shapes differ: {diag.shape} vs {sub.shape}")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "kind", TimeKind(self.kind))
        try:
            char = characteristic_function(diag, sub)
        except NoCharacteristicFunction as exc:
            char = exc
        object.__setattr__(self, "_char", char)

    @property
    def m(self) -> int:
        return self.diag.shape[0]

    @property
    def char_fn(self) -> RationalFunction:
        if isinstance(self._char, Exception):
            raise self._char
        return self._char

    @property
    def has_char_fn(self) -> bool:
        return not isinstance(self._char, Exception)

    @property
    def is_discrete(self) -> bool:
        return self.kind is TimeKind.DISCRETE

    def symbol(self, z) -> np.ndarray:
        """``diag + z·sub`` for a scalar or an array of ``z`` values."""
        z = np.asarray(z, dtype=complex)
        return self.diag + z[..., None, None] * self.sub

    def special_form(self):
        """Detected special form of φ, or ``None``."""
        if not self.has_char_fn:
            return None
        return special_form_detect(self.char_fn, self.kind)


@dataclass(frozen=True)
class SpecialForm:
    """φ(λ) = α^k/(λ-1+α)^k (discrete) or ζ^k/(λ+ζ)^k (continuous).

    ``param`` holds α or ζ accordingly.
    """

    param: float
    k: int
    kind: TimeKind

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("pole order must be positive")
        if self.kind is TimeKind.DISCRETE and not 0 < self.param < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.param}")
        if self.kind is TimeKind.CONTINUOUS and not self.param > 0:
            raise ValueError(f"zeta must be positive, got {self.param}")

    @property
    def alpha(self) -> float:
        return self.param

    @property
    def zeta(self) -> float:
        return self.param

    @property
    def centre(self) -> float:
        """Centre of the spectral circle (radius ``param``)."""
        return 1.0 - self.param if self.kind is TimeKind.DISCRETE else -self.param

    def as_function(self) -> RationalFunction:
        root = self.centre
        return RationalFunction(
            Polynomial([self.param ** self.k]), Polynomial.from_roots([root] * self.k)
        )


def rank_one_factors(sub: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    """Numerical rank of ``sub`` and its leading singular pair ``sub ≈ u·v*``."""
    u, s, vh = np.linalg.svd(sub)
    if s[0] == 0.0:
        return 0, u[:, 0] * 0, vh[0].conj() * 0
    rank = int(np.sum(s > RANK_TOL * s[0]))
    return rank, u[:, 0] * s[0], vh[0].conj()


def characteristic_function(diag, sub) -> RationalFunction:
    """Build φ with ``sub·R(λ, diag)·sub = φ(λ)·sub``.

    For rank-one ``sub = u·v*`` this is ``v*·adj(λ-diag)·u / det(λ-diag)``.
    Higher rank falls back to the column of ``sub`` with largest norm and
    accepts the candidate only if the identity holds at sample points.
    """
    diag = complex_matrix(diag)
    sub = complex_matrix(sub)
    rank, u, v = rank_one_factors(sub)
    if rank == 0:
        return RationalFunction.zero()
    charpoly, blocks = adjugate_resolvent(diag)
    if rank == 1:
        coeffs = [v.conj() @ b @ u for b in blocks]
    else:
        j = int(np.argmax(np.linalg.norm(sub, axis=0)))
        col = sub[:, j]
        weight = col.conj() @ col
        coeffs = [col.conj() @ sub @ b @ col / weight for b in blocks]
    coeffs = np.array(coeffs, dtype=complex)
    scale = np.max(np.abs(coeffs))
    coeffs[np.abs(coeffs) <= 1e-13 * scale] = 0.0
    phi = RationalFunction(Polynomial(coeffs), charpoly)
    residual = _identity_residual(diag, sub, phi, 16, seed=12345)
    if residual > CHAR_TOL:
        raise NoCharacteristicFunction(
            f"sub·R(λ,diag)·sub = φ(λ)·sub fails (residual {residual:.2e})"
        )
    return phi


def _sample_points(diag, phi, count, seed):
    rng = np.random.default_rng(seed)
    eig = np.linalg.eigvals(diag)
    centre = np.mean(eig)
    spread = float(np.max(np.abs(eig - centre)))
    s = max(norm2(diag), 1.0)
    inner, outer = spread + 0.25 * s, spread + 2.0 * s
    avoid = list(eig) + [c for c, _ in phi.poles()]
    points = []
    while len(points) < count:
        r = rng.uniform(inner, outer)
        lam = centre + r * np.exp(2j * np.pi * rng.uniform())
        if min(abs(lam - a) for a in avoid) > 1e-3:
            points.append(lam)
    return points


def _identity_residual(diag, sub, phi, count, seed):
    scale = max_norm(sub)
    if scale == 0.0:
        return 0.0
    worst = 0.0
    for lam in _sample_points(diag, phi, count, seed):
        try:
            lhs = sub @ resolvent(diag, lam) @ sub
            rhs = phi(lam) * sub
        except (SpectrumHit, PoleEvaluation):
            continue
        worst = max(worst, max_norm(lhs - rhs) / scale)
    return worst


def verify_characteristic(system: CoupledSystem, sample_count: int = 100, seed: int = 0) -> float:
    """Worst relative residual of the defining identity over random samples."""
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    return _identity_residual(system.diag, system.sub, system.char_fn, sample_count, seed)


def special_form_detect(f: RationalFunction, kind: TimeKind | str) -> SpecialForm | None:
    """Recognise ``α^k/(λ-1+α)^k`` or ``ζ^k/(λ+ζ)^k``; ``None`` otherwise."""
    kind = TimeKind(kind)
    den, num = f.denominator, f.numerator
    k = den.degree
    if k < 1 or num.degree != 0:
        return None
    root = -den.coeffs[k - 1] / k
    if not den.allclose(Polynomial.from_roots([root] * k), FORM_TOL):
        return None
    if abs(root.imag) > FORM_TOL:
        return None
    r = root.real
    param = 1.0 - r if kind is TimeKind.DISCRETE else -r
    if kind is TimeKind.DISCRETE and not 0 < param < 1:
        return None
    if kind is TimeKind.CONTINUOUS and not param > 0:
        return None
    expected = param ** k
    if abs(num.coeffs[0] - expected) > FORM_TOL * abs(expected):
        return None
    return SpecialForm(param=float(param), k=k, kind=kind)


def dungey_transform(system: CoupledSystem, beta: float) -> CoupledSystem:
    """``Q = (T - β)/(1 - β)``, blockwise.

    For a special-form system with parameter α this requires
    ``0 < β < 1 - α``; φ_Q is then the special form with ``γ = α/(1-β)``.
    """
    if not system.is_discrete:
        raise ParameterOutOfRange("the Dungey transform applies to discrete systems")
    form = system.special_form()
    upper = 1.0 - form.alpha if form is not None else 1.0
    if not 0 < beta < upper:
        raise ParameterOutOfRange(f"beta={beta} outside (0, {upper})")
    ident = np.eye(system.m)
    return CoupledSystem(
        (system.diag - beta * ident) / (1 - beta),
        system.sub / (1 - beta),
        TimeKind.DISCRETE,
        name=f"{system.name}|dungey(beta={beta})" if system.name else "",
    )


def discretize(system: CoupledSystem, eps: float) -> CoupledSystem:
    """Explicit Euler operator ``T_ε = I + ε·A`` of a continuous system."""
    if system.is_discrete:
        raise ParameterOutOfRange("discretize expects a continuous system")
    form = system.special_form()
    upper = 1.0 / form.zeta if form is not None else np.inf
    if not 0 < eps < upper:
        raise ParameterOutOfRange(f"eps={eps} outside (0, {upper})")
    return CoupledSystem(
        np.eye(system.m) + eps * system.diag,
        eps * system.sub,
        TimeKind.DISCRETE,
        name=f"{system.name}|euler(eps={eps})" if system.name else "",
    )
