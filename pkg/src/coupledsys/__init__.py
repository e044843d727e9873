"""Spectral theory and asymptotics of infinite nearest-neighbour coupled systems.

Discrete systems evolve by ``x_k(n+1) = T0·x_k(n) + T1·x_{k-1}(n)``,
continuous ones by ``ẋ_k = A0·x_k + A1·x_{k-1}``.
"""

from .algebra import Polynomial, RationalFunction, matrix_exp, resolvent
from .characteristic import (
    CoupledSystem,
    SpecialForm,
    TimeKind,
    characteristic_function,
    discretize,
    dungey_transform,
    special_form_detect,
    verify_characteristic,
)
from .errors import CoupledSystemError, NumericalError, PreconditionError
from .flow import (
    FlowMethod,
    FlowTrajectory,
    derivative_norm,
    evolve_continuous,
    symbol_flow_norm,
)
from .lattice import (
    LatticeState,
    cesaro_average,
    convergence_test,
    evolve,
    limit_candidate,
    lp_norm,
    step,
)
from .models import ModelSpec, platoon, rendezvous, scalar_flow, second_order
from .parallel import get_threads, set_threads
from .spectral import (
    eigen_sequence,
    growth_parameter,
    resolvent_norm_bounds,
    spectrum_curve,
    symbol_difference_norm,
    symbol_power_norm,
)

__version__ = "0.1.0"
