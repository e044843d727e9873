import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupledsys.algebra import Polynomial, RationalFunction
from coupledsys.characteristic import (
    CoupledSystem,
    SpecialForm,
    TimeKind,
    characteristic_function,
    discretize,
    dungey_transform,
    special_form_detect,
    verify_characteristic,
)
from coupledsys.errors import NoCharacteristicFunction, ParameterOutOfRange
from coupledsys.models import platoon, rendezvous, scalar_flow, second_order


def mp_phi(system, lam):
    """φ(λ) from ``T1·(λ - T0)^{-1}·T1`` in 30-digit arithmetic."""
    with mpmath.workdps(30):
        t0 = mpmath.matrix(system.diag.tolist())
        t1 = mpmath.matrix(system.sub.tolist())
        prod = t1 * (lam * mpmath.eye(system.m) - t0) ** -1 * t1
        i, j = np.unravel_index(np.argmax(np.abs(system.sub)), system.sub.shape)
        return complex(prod[int(i), int(j)] / t1[int(i), int(j)])


@pytest.mark.parametrize("system", [rendezvous(0.4), second_order(0.25), platoon(1.0), scalar_flow(2.0)],
                         ids=lambda s: s.name)
def test_phi_matches_high_precision_oracle(system):
    rng = np.random.default_rng(3)
    for _ in range(10):
        lam = complex(*rng.uniform(-3, 3, 2))
        assert abs(system.char_fn(lam) - mp_phi(system, lam)) <= 1e-12 * (1 + abs(mp_phi(system, lam)))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99))
def test_rendezvous_phi_closed_form(alpha):
    s = rendezvous(alpha)
    expected = RationalFunction(Polynomial([alpha]), Polynomial([alpha - 1, 1]))
    assert s.char_fn.allclose(expected, 1e-12)
    form = s.special_form()
    assert form.k == 1 and abs(form.alpha - alpha) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99))
def test_second_order_special_form(alpha0):
    form = second_order(alpha0).special_form()
    assert form is not None and form.k == 2
    assert abs(form.alpha - np.sqrt(alpha0)) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 5.0))
def test_platoon_special_form(zeta):
    form = platoon(zeta).special_form()
    assert form is not None and form.k == 3
    assert abs(form.zeta - zeta) <= 1e-9 * zeta


def test_zero_coupling_gives_zero_function():
    s = CoupledSystem([[0.5, 0], [0, 0.2]], np.zeros((2, 2)))
    assert s.char_fn.is_zero
    assert s.special_form() is None
    assert verify_characteristic(s) == 0.0


def test_rank_two_scalar_diagonal_has_phi():
    s = CoupledSystem(0.3 * np.eye(2), np.eye(2))
    assert s.char_fn.allclose(RationalFunction(Polynomial([1.0]), Polynomial([-0.3, 1.0])), 1e-12)


def test_rank_two_without_phi_is_reported():
    s = CoupledSystem(np.diag([1.0, 2.0]), np.eye(2))
    assert not s.has_char_fn
    with pytest.raises(NoCharacteristicFunction):
        s.char_fn
    with pytest.raises(NoCharacteristicFunction):
        characteristic_function(np.diag([1.0, 2.0]), np.eye(2))


def test_verify_characteristic_is_tiny_for_models():
    for s in (rendezvous(0.4), second_order(0.25), platoon(1.0)):
        assert verify_characteristic(s, sample_count=50, seed=11) <= 1e-10


def test_special_form_rejections():
    lam = Polynomial([0.0, 1.0])
    # two distinct poles
    f = RationalFunction(Polynomial([0.25]), Polynomial.from_roots([0.5, 0.6]))
    assert special_form_detect(f, TimeKind.DISCRETE) is None
    # wrong numerator
    g = RationalFunction(Polynomial([0.3]), Polynomial.from_roots([0.5, 0.5]))
    assert special_form_detect(g, "discrete") is None
    # non-constant numerator
    h = RationalFunction(lam, Polynomial.from_roots([0.5]))
    assert special_form_detect(h, "discrete") is None
    # continuous form read as discrete falls outside (0, 1)
    p = RationalFunction(Polynomial([8.0]), Polynomial.from_roots([-2.0] * 3))
    assert special_form_detect(p, "discrete") is None
    found = special_form_detect(p, "continuous")
    assert found.k == 3 and abs(found.param - 2.0) <= 1e-9


def test_special_form_as_function_roundtrip():
    form = SpecialForm(0.3, 2, TimeKind.DISCRETE)
    found = special_form_detect(form.as_function(), "discrete")
    assert found.k == 2 and found.kind is TimeKind.DISCRETE
    assert abs(found.param - 0.3) <= 1e-12
    assert form.centre == pytest.approx(0.7)


def test_dungey_transform_scales_alpha():
    base = second_order(0.25)
    q = dungey_transform(base, 0.2)
    form = q.special_form()
    assert form.k == 2 and abs(form.alpha - 0.5 / 0.8) <= 1e-9
    for lam in (0.3 + 0.1j, 2.0, -1j):
        assert abs(q.char_fn(lam) - base.char_fn(0.8 * lam + 0.2)) <= 1e-12


def test_dungey_transform_preconditions():
    with pytest.raises(ParameterOutOfRange):
        dungey_transform(second_order(0.25), 0.5)
    with pytest.raises(ParameterOutOfRange):
        dungey_transform(second_order(0.25), 0.0)
    with pytest.raises(ParameterOutOfRange):
        dungey_transform(platoon(1.0), 0.1)


def test_discretize_maps_phi():
    a = platoon(1.0)
    eps = 0.1
    t = discretize(a, eps)
    for lam in (0.5, 1.3 + 0.4j):
        assert abs(t.char_fn(lam) - a.char_fn((lam - 1) / eps)) <= 1e-10
    with pytest.raises(ParameterOutOfRange):
        discretize(a, 1.0)
    with pytest.raises(ParameterOutOfRange):
        discretize(rendezvous(0.5), 0.1)


def test_symbol_is_batched():
    s = second_order(0.25)
    z = np.exp(1j * np.linspace(0, 1, 5))
    sym = s.symbol(z)
    assert sym.shape == (5, 2, 2)
    assert np.allclose(sym[2], s.diag + z[2] * s.sub)


def test_block_shape_mismatch():
    with pytest.raises(ValueError):
        CoupledSystem(np.eye(2), np.eye(3))
