"""The three coupled systems treated in the examples, plus a scalar flow.

State interpretation (kinematic constants never enter the dynamics):

* rendezvous: ``x_k`` is the position of agent k.
* second order: ``x_k = (d - d_k, v_k)``, separation discrepancy and velocity.
* platoon: ``x_k = (y_k, v_k - v, a_k)``, separation discrepancy, velocity
  relative to the platoon target and acceleration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .characteristic import CoupledSystem, TimeKind
from .errors import ParameterOutOfRange

MODEL_NAMES = ("rendezvous", "second-order", "platoon", "scalar-flow")


def _open_unit(name, value):
    if not 0 < value < 1:
        raise ParameterOutOfRange(f"{name} must lie in (0, 1), got {value}")


def rendezvous(alpha: float) -> CoupledSystem:
    """``x_k(n+1) = (1-α)·x_k(n) + α·x_{k-1}(n)``; φ(λ) = α/(λ-1+α)."""
    _open_unit("alpha", alpha)
    return CoupledSystem([[1 - alpha]], [[alpha]], TimeKind.DISCRETE, name=f"rendezvous(alpha={alpha})")


def second_order(alpha0: float) -> CoupledSystem:
    """Position/velocity agents with critically tuned feedback.

    Uses ``α1 = 2·sqrt(α0)``, ``β0 = -α0`` and ``β1 = 1 - α1``, which gives
    φ(λ) = α0/(λ-1+sqrt(α0))², the special form with α = sqrt(α0), k = 2.
    """
    _open_unit("alpha0", alpha0)
    alpha1 = 2.0 * math.sqrt(alpha0)
    beta0, beta1 = -alpha0, 1.0 - alpha1
    return CoupledSystem(
        [[1.0, 1.0], [beta0, beta1]],
        [[0.0, -1.0], [0.0, 0.0]],
        TimeKind.DISCRETE,
        name=f"second-order(alpha0={alpha0})",
    )


def platoon(zeta: float) -> CoupledSystem:
    """Continuous platoon with triple pole: φ_A(λ) = ζ³/(λ+ζ)³."""
    if not zeta > 0:
        raise ParameterOutOfRange(f"zeta must be positive, got {zeta}")
    a0, a1, a2 = zeta ** 3, 3 * zeta ** 2, 3 * zeta
    return CoupledSystem(
        [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-a0, -a1, -a2]],
        [[0.0, -1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        TimeKind.CONTINUOUS,
        name=f"platoon(zeta={zeta})",
    )


def scalar_flow(zeta: float) -> CoupledSystem:
    """Continuous scalar analogue ``ẋ_k = ζ(x_{k-1} - x_k)``."""
    if not zeta > 0:
        raise ParameterOutOfRange(f"zeta must be positive, got {zeta}")
    return CoupledSystem([[-zeta]], [[zeta]], TimeKind.CONTINUOUS, name=f"scalar-flow(zeta={zeta})")


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ParameterOutOfRange(f"unknown model {self.name!r}; choose from {MODEL_NAMES}")

    @property
    def parameter(self) -> float:
        key = {"rendezvous": "alpha", "second-order": "alpha0"}.get(self.name, "zeta")
        return float(self.params[key])

    def build(self) -> CoupledSystem:
        builder = {
            "rendezvous": rendezvous,
            "second-order": second_order,
            "platoon": platoon,
            "scalar-flow": scalar_flow,
        }[self.name]
        return builder(self.parameter)

    def limit_direction(self) -> np.ndarray:
        """Entry of the limit profile per unit initial discrepancy c."""
        p = self.parameter
        if self.name == "second-order":
            return np.array([1.0, -math.sqrt(p) / 2])
        if self.name == "platoon":
            return np.array([1.0, -p / 3, 0.0])
        return np.array([1.0])
