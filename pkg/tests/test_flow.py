import csv
import math

import mpmath
import numpy as np
import pytest
from scipy.linalg import expm

from coupledsys.characteristic import CoupledSystem, TimeKind
from coupledsys.errors import ParameterOutOfRange, WindowOverflow
from coupledsys.flow import (
    FlowMethod,
    cascade_extension,
    derivative_norm,
    evolve_continuous,
    export_csv,
    generator_apply,
    symbol_flow_norm,
)
from coupledsys.harness.config import parse_initial
from coupledsys.lattice import LatticeState
from coupledsys.models import platoon, rendezvous, scalar_flow


def test_decoupled_blocks_flow_independently():
    a0 = np.array([[-1.0, 2.0], [0.0, -0.5]])
    system = CoupledSystem(a0, np.zeros((2, 2)), TimeKind.CONTINUOUS)
    x0 = LatticeState.from_window([[1, 2], [3, -1]], left_tail=[0.5, 0.5], right_tail=[1, 0])
    for method in ("expm", "rk"):
        state = evolve_continuous(x0, system, [1.5], method).at(1.5)
        e = expm(1.5 * a0)
        for k in range(-2, 4):
            assert np.allclose(state.at(k), e @ x0.at(k), atol=1e-10)


def test_semigroup_property():
    system = platoon(1.0)
    x0 = parse_initial("perturbed(1, 2)", 3)
    one = evolve_continuous(x0, system, [1.0]).at(1.0)
    two_more = evolve_continuous(one, system, [2.0]).at(2.0)
    direct = evolve_continuous(x0, system, [3.0]).at(3.0)
    assert (two_more - direct).max_abs() <= 1e-11


@pytest.mark.parametrize("t", [0.5, 5.0, 40.0])
def test_cascade_window_holds_poisson_mass(t):
    system = scalar_flow(1.0)
    x0 = LatticeState.delta()
    d = cascade_extension(system, x0, t)
    assert d >= t
    state = evolve_continuous(x0, system, [t]).at(t)
    assert state.hi == d
    with mpmath.workdps(40):
        beyond = 1 - sum(mpmath.e ** -t * mpmath.mpf(t) ** k / mpmath.factorial(k) for k in range(d + 1))
        assert float(beyond) < 1e-12
        for k in range(0, d + 1, max(1, d // 20)):
            exact = float(mpmath.e ** -t * mpmath.mpf(t) ** k / mpmath.factorial(k))
            assert abs(state.at(k)[0] - exact) <= 1e-12


def test_extension_is_zero_for_zero_data():
    assert cascade_extension(scalar_flow(1.0), LatticeState.zeros(1), 10.0) == 0


def test_trajectory_times_and_methods():
    traj = evolve_continuous(LatticeState.delta(), scalar_flow(1.0), [1.0, 2.0], FlowMethod.ADAPTIVE_RK)
    assert traj.times == (0.0, 1.0, 2.0) and traj.method is FlowMethod.ADAPTIVE_RK
    with pytest.raises(ValueError):
        evolve_continuous(LatticeState.delta(), scalar_flow(1.0), [2.0, 1.0])
    with pytest.raises(ParameterOutOfRange):
        evolve_continuous(LatticeState.delta(), rendezvous(0.5), [1.0])
    with pytest.raises(WindowOverflow):
        evolve_continuous(LatticeState.delta(), scalar_flow(1.0), [100.0], cap=50)


@pytest.mark.parametrize("zeta", [0.5, 2.0])
def test_derivative_norm_of_delta(zeta):
    system = scalar_flow(zeta)
    assert derivative_norm(LatticeState.delta(), system) == pytest.approx(zeta)
    assert derivative_norm(LatticeState.delta(p=1), system) == pytest.approx(2 * zeta)


def test_generator_annihilates_equilibria():
    z = LatticeState.constant([2.0, -2.0 / 3, 0.0])
    assert generator_apply(z, platoon(1.0)).max_abs() <= 1e-15


def test_symbol_flow_norm_scalar_closed_form():
    zeta, size, t = 1.0, 256, 30.0
    worst = 0.0
    for j in range(size):
        s = zeta * (complex(math.cos(2 * math.pi * j / size), math.sin(2 * math.pi * j / size)) - 1)
        worst = max(worst, abs(s) * math.exp(t * s.real))
    assert symbol_flow_norm(scalar_flow(zeta), size, t) == pytest.approx(worst, rel=1e-12)


def test_symbol_flow_norm_decays_like_inverse_sqrt():
    system = scalar_flow(1.0)
    a = symbol_flow_norm(system, 4096, 100.0)
    b = symbol_flow_norm(system, 4096, 400.0)
    assert a / b == pytest.approx(2.0, rel=0.1)


def test_export_csv_roundtrips(tmp_path):
    x0 = parse_initial("perturbed(1, 4)", 3)
    traj = evolve_continuous(x0, platoon(1.0), [0.5, 1.0])
    main, side = export_csv(traj, tmp_path / "traj.csv")
    with open(main) as fh:
        rows = list(csv.DictReader(fh))
    with open(side) as fh:
        tails = list(csv.DictReader(fh))
    for t, state in zip(traj.times, traj.states):
        got = {(int(r["k"]), int(r["comp"])): complex(float(r["re"]), float(r["im"]))
               for r in rows if float(r["t"]) == t}
        for k in range(state.lo, state.hi + 1):
            for c in range(3):
                assert got[(k, c)] == state.at(k)[c]
        left = [complex(float(r["re"]), float(r["im"])) for r in tails if float(r["t"]) == t and r["side"] == "left"]
        assert np.array_equal(left, state.left_tail)
