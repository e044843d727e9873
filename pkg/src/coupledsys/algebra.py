"""Small dense complex linear algebra, polynomials and rational functions.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; use
:func:`complex_matrix` to validate and freeze one.  Polynomials store
coefficients in ascending order of degree.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import OverflowRisk, PoleEvaluation, SpectrumHit

EPS = np.finfo(float).eps
POLE_TOL = 1e-14
PIVOT_TOL = 1e-14
EXP_LOG_LIMIT = 700.0


def complex_matrix(entries) -> np.ndarray:
    """Return a read-only square complex matrix, checking shape and finiteness."""
    a = np.array(entries, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    a.flags.writeable = False
    return a


def norm2(a: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(a, ord=2))


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def apply_blocks(mat: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Apply ``mat`` to every row of ``vectors`` (shape ``(n, m)``).

    Written as explicit elementwise multiply-adds so that each output row
    depends only on its input row, bit for bit, whatever ``n`` is.
    """
    out = vectors[:, 0:1] * mat[:, 0][None, :]
    for j in range(1, mat.shape[1]):
        out = out + vectors[:, j:j + 1] * mat[:, j][None, :]
    return out


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

def _trim(coeffs: np.ndarray) -> np.ndarray:
    nz = np.nonzero(coeffs)[0]
    if len(nz) == 0:
        return np.zeros(1, dtype=complex)
    return coeffs[: nz[-1] + 1]


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Complex polynomial, coefficients in ascending degree, trailing zeros trimmed."""

    coeffs: np.ndarray

    def __init__(self, coeffs: Sequence[complex] | np.ndarray):
        c = np.atleast_1d(np.array(coeffs, dtype=complex))
        if c.ndim != 1:
            raise ValueError("polynomial coefficients must be one-dimensional")
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        c = _trim(c).copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0) -> "Polynomial":
        p = cls([lead])
        for r in roots:
            p = p * cls([-r, 1.0])
        return p

    @property
    def degree(self) -> int:
        return -1 if self.is_zero else len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, x):
        acc = np.zeros_like(np.asarray(x, dtype=complex)) + self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * x + c
        return acc if np.ndim(acc) else complex(acc)

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(n, dtype=complex)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        return Polynomial(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = _as_poly(other)
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = self.coeffs.copy()
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Polynomial([0]), Polynomial(rem)
        quot = np.zeros(dq + 1, dtype=complex)
        lead = other.coeffs[-1]
        for i in range(dq, -1, -1):
            q = rem[i + len(other.coeffs) - 1] / lead
            quot[i] = q
            rem[i: i + len(other.coeffs)] -= q * other.coeffs
        return Polynomial(quot), Polynomial(rem[: max(len(other.coeffs) - 1, 1)])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def deriv(self) -> "Polynomial":
        if len(self.coeffs) == 1:
            return Polynomial([0])
        return Polynomial(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def compose_affine(self, a: complex, b: complex) -> "Polynomial":
        """Return ``λ ↦ p(a·λ + b)``."""
        inner = Polynomial([b, a])
        acc = Polynomial([self.coeffs[-1]])
        for c in self.coeffs[-2::-1]:
            acc = acc * inner + c
        return acc

    def roots(self) -> np.ndarray:
        if self.degree <= 0:
            return np.zeros(0, dtype=complex)
        return np.roots(self.coeffs[::-1]).astype(complex)

    def allclose(self, other, rtol: float = 1e-10) -> bool:
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, dtype=complex)
        b = np.zeros(n, dtype=complex)
        a[: len(self.coeffs)] = self.coeffs
        b[: len(other.coeffs)] = other.coeffs
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), np.finfo(float).tiny)
        return bool(np.max(np.abs(a - b)) <= rtol * scale)

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"


def _as_poly(x) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial([x])


def _to_poly(x) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial(np.atleast_1d(x))


def cluster_roots(poly: Polynomial, rtol: float = 1e-9) -> list[tuple[complex, int]]:
    """Roots of ``poly`` as ``(centre, multiplicity)`` pairs.

    Double-precision root finding splits a root of multiplicity k into a
    ring of radius about eps**(1/k).  Roots are merged by single linkage at
    increasing radii; the coarsest grouping whose reconstruction
    ``lead·Π(λ-c)^k`` still matches the coefficients to ``rtol`` wins.
    """
    roots = poly.roots()
    if len(roots) == 0:
        return []
    scale = max(1.0, float(np.max(np.abs(roots))))
    best = [(complex(r), 1) for r in roots]
    for radius in (1e-9, 1e-7, 1e-5, 1e-4, 1e-3, 1e-2):
        groups = _single_linkage(roots, radius * scale)
        if len(groups) == len(best) and radius > 1e-9:
            continue
        cand = [(complex(np.mean(roots[g])), len(g)) for g in groups]
        rebuilt = Polynomial.from_roots(
            [c for c, k in cand for _ in range(k)], lead=poly.lead
        )
        if rebuilt.allclose(poly, rtol):
            best = cand
    return best


def _single_linkage(points: np.ndarray, radius: float) -> list[list[int]]:
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) <= radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _deflate(poly: Polynomial, root: complex) -> Polynomial:
    """Synthetic division by ``(λ - root)``, discarding the remainder."""
    desc = poly.coeffs[::-1]
    out = np.empty(len(desc) - 1, dtype=complex)
    acc = 0j
    for i in range(len(desc) - 1):
        acc = acc * root + desc[i]
        out[i] = acc
    return Polynomial(out[::-1])


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RationalFunction:
    """Ratio of polynomials kept in reduced form with a monic denominator."""

    numerator: Polynomial
    denominator: Polynomial

    def __init__(self, numerator, denominator=1.0, reduce: bool = True):
        num = _to_poly(numerator)
        den = _to_poly(denominator)
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if reduce:
            num, den = _reduce(num, den)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def zero(cls) -> "RationalFunction":
        return cls(Polynomial([0]), Polynomial([1]))

    @property
    def is_zero(self) -> bool:
        return self.numerator.is_zero

    def __call__(self, lam):
        return rational_eval(self, lam)

    def poles(self) -> list[tuple[complex, int]]:
        return cluster_roots(self.denominator)

    def deriv(self) -> "RationalFunction":
        n, d = self.numerator, self.denominator
        return RationalFunction(n.deriv() * d - n * d.deriv(), d * d)

    def compose_affine(self, a: complex, b: complex) -> "RationalFunction":
        """Return ``λ ↦ f(a·λ + b)``."""
        return RationalFunction(
            self.numerator.compose_affine(a, b), self.denominator.compose_affine(a, b)
        )

    def __add__(self, other):
        other = _as_rational(other)
        return RationalFunction(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.numerator, self.denominator, reduce=False)

    def __sub__(self, other):
        return self + (-_as_rational(other))

    def __mul__(self, other):
        other = _as_rational(other)
        return RationalFunction(
            self.numerator * other.numerator, self.denominator * other.denominator
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rational(other)
        return RationalFunction(
            self.numerator * other.denominator, self.denominator * other.numerator
        )

    def allclose(self, other, rtol: float = 1e-10) -> bool:
        other = _as_rational(other)
        return self.numerator.allclose(other.numerator, rtol) and self.denominator.allclose(
            other.denominator, rtol
        )

    def __repr__(self):
        return f"RationalFunction({self.numerator!r} / {self.denominator!r})"


def _as_rational(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    return RationalFunction(_as_poly(x), Polynomial([1]))


def _reduce(num: Polynomial, den: Polynomial, match_rtol: float = 1e-8):
    lead = den.lead
    if num.is_zero:
        return Polynomial([0]), Polynomial([1])
    num = Polynomial(num.coeffs / lead)
    den = Polynomial(den.coeffs / lead)
    if num.degree < 1 or den.degree < 1:
        return num, den
    den_roots = cluster_roots(den)
    num_roots = [list(c) for c in cluster_roots(num)]
    for dc, dk in den_roots:
        for entry in num_roots:
            nc, nk = entry
            if nk == 0 or abs(nc - dc) > match_rtol * max(1.0, abs(dc)):
                continue
            shared = min(nk, dk)
            centre = 0.5 * (nc + dc)
            for _ in range(shared):
                num = _deflate(num, centre)
                den = _deflate(den, centre)
            entry[1] -= shared
            dk -= shared
            if dk == 0:
                break
    lead = den.lead
    return Polynomial(num.coeffs / lead), Polynomial(den.coeffs / lead)


def rational_eval(f: RationalFunction, lam):
    """Evaluate ``f`` at ``lam`` (scalar or array) by Horner's rule."""
    den = f.denominator(lam)
    absl = np.abs(lam)
    den_scale = Polynomial(np.abs(f.denominator.coeffs))(absl)
    if np.any(np.abs(den) < POLE_TOL * np.abs(den_scale)):
        raise PoleEvaluation(f"evaluation at a pole of {f!r}: λ={lam}")
    return f.numerator(lam) / den


# ---------------------------------------------------------------------------
# Resolvents and exponentials
# ---------------------------------------------------------------------------

def resolvent(mat: np.ndarray, lam: complex) -> np.ndarray:
    """``(λI - M)^{-1}`` by partial-pivoted LU; :class:`SpectrumHit` if singular."""
    m = mat.shape[0]
    a = lam * np.eye(m) - mat
    scale = max_norm(a)
    if scale == 0.0:
        raise SpectrumHit(f"λ={lam} lies in the spectrum")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL * scale:
        raise SpectrumHit(f"λ={lam} lies in the spectrum to working precision")
    return scipy.linalg.lu_solve((lu, piv), np.eye(m, dtype=complex), check_finite=False)


def adjugate_resolvent(mat: np.ndarray) -> tuple[Polynomial, list[np.ndarray]]:
    """Characteristic polynomial and adjugate coefficients via Faddeev–LeVerrier.

    Returns ``(det(λI-M), [B_0, ..., B_{m-1}])`` with
    ``adj(λI-M) = Σ_j B_j λ^j``.
    """
    m = mat.shape[0]
    ident = np.eye(m, dtype=complex)
    c = np.zeros(m + 1, dtype=complex)
    c[m] = 1.0
    mk = np.zeros((m, m), dtype=complex)
    blocks = []
    for k in range(1, m + 1):
        mk = mat @ mk + c[m - k + 1] * ident
        blocks.append(mk)
        c[m - k] = -np.trace(mat @ mk) / k
    # blocks[k-1] multiplies λ^{m-k}
    return Polynomial(c), blocks[::-1]


def matrix_exp(mat: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``e^{tM}`` by scaling and squaring with a Padé core.

    Accepts a stack of matrices of shape ``(..., m, m)``.  Raises
    :class:`OverflowRisk` when ``t`` times the spectral abscissa exceeds
    700, i.e. when the exponential itself would leave double range.
    """
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    a = np.asarray(mat, dtype=complex) * t
    abscissa = np.max(np.linalg.eigvals(a).real)
    if abscissa > EXP_LOG_LIMIT:
        raise OverflowRisk(f"spectral abscissa of tM is {abscissa:.1f} > {EXP_LOG_LIMIT}")
    out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise OverflowRisk("matrix exponential overflowed")
    return out
