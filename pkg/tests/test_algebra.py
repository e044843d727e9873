import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupledsys.algebra import (
    Polynomial,
    RationalFunction,
    adjugate_resolvent,
    cluster_roots,
    complex_matrix,
    matrix_exp,
    resolvent,
)
from coupledsys.errors import OverflowRisk, PoleEvaluation, SpectrumHit

coef = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
coeffs = st.lists(coef, min_size=1, max_size=6)
points = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def test_polynomial_trims_and_degree():
    p = Polynomial([1, 2, 0, 0])
    assert p.degree == 1
    assert Polynomial([0, 0]).is_zero
    assert Polynomial([0]).degree <= 0


@given(coeffs, coeffs, points)
def test_polynomial_arithmetic_matches_evaluation(a, b, x):
    p, q = Polynomial(a), Polynomial(b)
    scale = 1 + abs(p(x)) * abs(q(x)) + abs(p(x)) + abs(q(x))
    assert abs((p + q)(x) - (p(x) + q(x))) <= 1e-9 * scale
    assert abs((p - q)(x) - (p(x) - q(x))) <= 1e-9 * scale
    assert abs((p * q)(x) - p(x) * q(x)) <= 1e-9 * scale


@given(coeffs, st.lists(coef, min_size=2, max_size=4).filter(lambda c: abs(c[-1]) > 0.5))
def test_divmod_reconstructs(a, b):
    p, d = Polynomial(a), Polynomial(b)
    q, r = divmod(p, d)
    assert r.degree < d.degree or r.is_zero
    assert (q * d + r).allclose(p, 1e-9)


def test_derivative_and_affine_composition():
    p = Polynomial([1, -3, 0, 2])  # 1 - 3x + 2x^3
    assert p.deriv().allclose(Polynomial([-3, 0, 6]))
    comp = p.compose_affine(2.0, -1.0)
    for x in (0.3, -1.2, 2 + 1j):
        assert abs(comp(x) - p(2 * x - 1)) <= 1e-12


def test_from_roots_and_roots():
    p = Polynomial.from_roots([1.0, 2.0, -0.5j])
    assert np.allclose(sorted(p.roots(), key=lambda z: (z.real, z.imag)),
                       sorted([1.0, 2.0, -0.5j], key=lambda z: (z.real, z.imag)))


def test_cluster_roots_recovers_multiplicity():
    p = Polynomial.from_roots([0.5, 0.5, 0.5, -1.0])
    clusters = sorted(cluster_roots(p), key=lambda c: c[0].real)
    assert [m for _, m in clusters] == [1, 3]
    assert abs(clusters[1][0] - 0.5) < 1e-6


def test_rational_reduction_cancels_common_roots():
    num = Polynomial.from_roots([0.3, 2.0])
    den = Polynomial.from_roots([0.3, -1.0, -1.0])
    f = RationalFunction(num * 4.0, den * 2.0)
    assert f.denominator.degree == 2
    assert abs(f.denominator.lead - 1) < 1e-14
    for x in (0.1, 3.0, 1j):
        assert abs(f(x) - 2 * (x - 2.0) / (x + 1.0) ** 2) < 1e-12


def test_rational_arithmetic_and_derivative():
    f = RationalFunction(Polynomial([1.0]), Polynomial([-0.5, 1.0]))  # 1/(x - 0.5)
    g = RationalFunction(Polynomial([0.0, 2.0]), Polynomial([1.0, 0.0, 1.0]))  # 2x/(1 + x^2)
    x = 0.7 + 0.2j
    assert abs((f + g)(x) - (f(x) + g(x))) < 1e-12
    assert abs((f * g)(x) - f(x) * g(x)) < 1e-12
    assert abs((f / g)(x) - f(x) / g(x)) < 1e-12
    assert abs(f.deriv()(x) + 1 / (x - 0.5) ** 2) < 1e-12
    assert abs(f.compose_affine(2.0, 0.5)(x) - f(2 * x + 0.5)) < 1e-12


def test_pole_evaluation_raises():
    f = RationalFunction(Polynomial([1.0]), Polynomial.from_roots([0.25]))
    with pytest.raises(PoleEvaluation):
        f(0.25)
    assert f.poles()[0][1] == 1


def test_resolvent_matches_inverse_and_detects_spectrum():
    m = complex_matrix([[0.5, 1.0], [0.0, 0.5]])
    lam = 1.3 - 0.2j
    assert np.allclose(resolvent(m, lam) @ (lam * np.eye(2) - m), np.eye(2), atol=1e-14)
    with pytest.raises(SpectrumHit):
        resolvent(m, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000), points)
def test_faddeev_leverrier_identity(m, seed, lam):
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    charpoly, blocks = adjugate_resolvent(mat)
    assert np.allclose(charpoly.coeffs[::-1], np.poly(mat), atol=1e-9)
    adj = sum(b * lam ** j for j, b in enumerate(blocks))
    lhs = (lam * np.eye(m) - mat) @ adj
    scale = 1 + np.abs(charpoly(lam))
    assert np.max(np.abs(lhs - charpoly(lam) * np.eye(m))) <= 1e-8 * scale * (1 + np.abs(lam)) ** m


def test_matrix_exp_against_taylor_series():
    mat = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, -3.0, -3.0]])
    t = 2.5
    with mpmath.workdps(40):
        exact = mpmath.expm(mpmath.matrix(mat.tolist()) * t, method="taylor")
        ref = np.array([[float(exact[i, j]) for j in range(3)] for i in range(3)])
    assert np.max(np.abs(matrix_exp(mat, t) - ref)) <= 1e-12


def test_matrix_exp_batched_and_overflow_guard():
    mats = np.stack([np.diag([-1.0, -2.0]), np.diag([0.5, 0.0])])
    out = matrix_exp(mats, 2.0)
    assert np.allclose(out[0], np.diag(np.exp([-2.0, -4.0])))
    assert np.allclose(out[1], np.diag(np.exp([1.0, 0.0])))
    with pytest.raises(OverflowRisk):
        matrix_exp(np.array([[1.0]]), 800.0)
    # large t is fine when the exponential decays
    assert matrix_exp(np.array([[-1.0]]), 1e4)[0, 0] == 0.0


def test_complex_matrix_validation():
    with pytest.raises(ValueError):
        complex_matrix([[1.0, 2.0]])
    with pytest.raises(ValueError):
        complex_matrix([[np.nan]])
