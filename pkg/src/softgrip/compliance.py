"""Lumped-stiffness models for the lateral-compliance experiments.

Covers the dual-arm closed-chain pull, the payload with/without the lateral
degree of freedom, and the over-press tolerance of the poke-and-pinch grasp.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StiffnessModel",
    "ComplianceEnds",
    "ClosedChainScenario",
    "ApproachScenario",
    "PayloadParams",
    "PokeParams",
    "DEFAULT_STIFFNESS",
    "DEFAULT_PAYLOAD",
    "DEFAULT_POKE",
    "closed_chain_force",
    "effective_stiffness",
    "payload_envelope",
    "poke_tolerance",
]


@dataclass(frozen=True)
class StiffnessModel:
    """Tip-referred lateral stiffness of one gripper plus the rigid path."""

    k_lateral: float = 1.0  # N/mm
    k_structural: float = 9.0  # N/mm, rigid path when no lateral DOF
    deflection_limit: float = 15.0  # mm

    def __post_init__(self):
        if not (self.k_structural > self.k_lateral > 0.0):
            raise ValueError("require k_structural > k_lateral > 0")
        if not self.deflection_limit > 0.0:
            raise ValueError("deflection_limit must be positive")


class ComplianceEnds(enum.Enum):
    BOTH = "both"
    PULLING_ONLY = "pulling-only"
    RECEIVING_ONLY = "receiving-only"
    NEITHER = "neither"

    @property
    def n_compliant(self) -> int:
        return {"both": 2, "pulling-only": 1, "receiving-only": 1, "neither": 0}[
            self.value
        ]


@dataclass(frozen=True)
class ClosedChainScenario:
    displacement_error: float = 10.0  # mm, imposed relative displacement
    compliant_ends: ComplianceEnds = ComplianceEnds.BOTH

    def __post_init__(self):
        if self.displacement_error < 0.0:
            raise ValueError("displacement_error must be >= 0")


def effective_stiffness(ends: ComplianceEnds, model: StiffnessModel) -> float:
    """Series-spring stiffness: compliant ends in series with the rigid path."""
    compliance = ends.n_compliant / model.k_lateral + 1.0 / model.k_structural
    return 1.0 / compliance


def closed_chain_force(
    scenario: ClosedChainScenario,
    model: StiffnessModel = StiffnessModel(),
    n_samples: int = 51,
) -> np.ndarray:
    """Force-vs-displacement curve, rows of (displacement_mm, force_N)."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    k = effective_stiffness(scenario.compliant_ends, model)
    d = np.linspace(0.0, scenario.displacement_error, n_samples)
    return np.column_stack([d, k * d])


@dataclass(frozen=True)
class PayloadParams:
    """Phenomenological wrap-friction pull-out model.

    ``wrap_gain`` scales the friction envelope when the finger can deflect
    toward the load; defaults are frozen against the reported peak forces
    (about 103.5 N with the lateral DOF, 87% over the restrained case).
    """

    friction: float = 0.85
    normal_force: float = 65.0  # N, grasp squeeze
    base_wrap: float = 1.0  # contact wrap factor without deflection
    wrap_gain: float = 1.8733  # extra wrap with full lateral deflection

    def __post_init__(self):
        if self.wrap_gain < 1.0:
            raise ValueError("wrap_gain must be >= 1")


DEFAULT_STIFFNESS = StiffnessModel()
DEFAULT_PAYLOAD = PayloadParams()


def payload_envelope(
    lateral_dof_enabled: bool,
    model: StiffnessModel = DEFAULT_STIFFNESS,
    params: PayloadParams = DEFAULT_PAYLOAD,
) -> float:
    """Peak pull-out force (N); the compliant case wraps further and wins."""
    base = params.friction * params.normal_force * params.base_wrap
    if not lateral_dof_enabled:
        return base
    return base * params.wrap_gain


@dataclass(frozen=True)
class ApproachScenario:
    approach_angle: float  # degrees from the surface plane, (0, 90]
    vertical_error: float = 0.0  # mm of over-press beyond contact

    def __post_init__(self):
        if not (0.0 < self.approach_angle <= 90.0):
            raise ValueError("approach_angle must be in (0, 90] degrees")
        if self.vertical_error < 0.0:
            raise ValueError("vertical_error must be >= 0")


@dataclass(frozen=True)
class PokeParams:
    """Tolerance = deflection_limit * sin(a)cos(a) * scale + floor (mm)."""

    scale: float = 0.4
    floor: float = 1.0


DEFAULT_POKE = PokeParams()

APPROACH_ANGLE_GRID = (15.0, 30.0, 45.0, 60.0, 90.0)


def poke_tolerance(
    angle: float,
    model: StiffnessModel = DEFAULT_STIFFNESS,
    params: PokeParams = DEFAULT_POKE,
) -> float:
    """Maximum tolerated vertical over-press error (mm) at an approach angle.

    The lateral joint absorbs the sin*cos component of the over-press, so the
    tolerance peaks at 45 degrees; the floor keeps at least 1 mm everywhere.
    """
    if not (0.0 < angle <= 90.0):
        raise ValueError("approach angle must be in (0, 90] degrees")
    a = math.radians(angle)
    return model.deflection_limit * math.sin(a) * math.cos(a) * params.scale + params.floor
