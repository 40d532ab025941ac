"""Linear pressure-to-angle channel maps, their calibration, and pressure-space FK.

Channel layout per finger (kPa): p0 distal actuator, p1 left lateral,
p2 middle root actuator, p3 right lateral.  theta1 follows p0, theta2
follows p2 and the lateral angle follows the difference p1 - p3.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateDataError, InsufficientDataError, SaturationError
from .kinematics import (
    DEFAULT_GEOMETRY,
    DEFAULT_LIMITS,
    JointAngles,
    LinkGeometry,
    forward_kinematics,
)

__all__ = [
    "PressureVector",
    "LinearMap",
    "ChannelMaps",
    "CalibrationSample",
    "DEFAULT_MAPS",
    "DEFAULT_P_MAX",
    "DEFAULT_LATERAL_BIAS",
    "angles_from_pressures",
    "pressures_from_angles",
    "fit_linear_map",
    "fk_from_pressures",
]

DEFAULT_P_MAX = 60.0  # kPa, supply limit
DEFAULT_LATERAL_BIAS = 30.0  # kPa


@dataclass(frozen=True)
class PressureVector:
    p0: float = 0.0
    p1: float = 0.0
    p2: float = 0.0
    p3: float = 0.0

    def as_tuple(self) -> tuple:
        return (self.p0, self.p1, self.p2, self.p3)

    @property
    def lateral_difference(self) -> float:
        return self.p1 - self.p3

    def check_range(self, p_max: float = DEFAULT_P_MAX) -> None:
        for name, v in zip(("p0", "p1", "p2", "p3"), self.as_tuple()):
            if not (0.0 <= v <= p_max):
                raise SaturationError(
                    f"{name}={v:.6g} kPa outside supply range [0, {p_max:.6g}]"
                )


@dataclass(frozen=True)
class LinearMap:
    """angle = k * pressure + b (k in rad/kPa, b in rad)."""

    k: float
    b: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.k) or self.k == 0.0:
            raise ValueError("slope k must be finite and nonzero")

    def angle(self, pressure: float) -> float:
        return self.k * pressure + self.b

    def pressure(self, angle: float) -> float:
        return (angle - self.b) / self.k


@dataclass(frozen=True)
class ChannelMaps:
    """The three channel maps: distal (p0), root flexion (p2), lateral (p1-p3)."""

    distal: LinearMap
    root: LinearMap
    lateral: LinearMap


@dataclass(frozen=True)
class CalibrationSample:
    pressure: float  # kPa (difference for the lateral channel)
    angle: float  # rad

    def __post_init__(self):
        if not (np.isfinite(self.pressure) and np.isfinite(self.angle)):
            raise ValueError("calibration samples must be finite")


# Defaults keep the full 0-60 kPa supply inside the default joint limits.
DEFAULT_MAPS = ChannelMaps(
    distal=LinearMap(k=np.deg2rad(0.9), b=0.0),
    root=LinearMap(k=np.deg2rad(0.9), b=0.0),
    lateral=LinearMap(k=np.deg2rad(0.45), b=0.0),
)


def angles_from_pressures(
    p: PressureVector,
    maps: ChannelMaps = DEFAULT_MAPS,
    p_max: float = DEFAULT_P_MAX,
) -> JointAngles:
    """Component-wise affine map from the four-channel pressure vector."""
    p.check_range(p_max)
    return JointAngles(
        theta1=maps.distal.angle(p.p0),
        theta2=maps.root.angle(p.p2),
        phi=maps.lateral.angle(p.lateral_difference),
    )


def _channel_feasible_angles(m: LinearMap, p_lo: float, p_hi: float) -> tuple:
    a, b = m.angle(p_lo), m.angle(p_hi)
    return (min(a, b), max(a, b))


def pressures_from_angles(
    a: JointAngles,
    maps: ChannelMaps = DEFAULT_MAPS,
    lateral_bias: float = DEFAULT_LATERAL_BIAS,
    p_max: float = DEFAULT_P_MAX,
) -> PressureVector:
    """Invert the channel maps; the lateral difference is split symmetrically
    about ``lateral_bias``.  Raises :class:`SaturationError` with the feasible
    angle range when a channel would leave [0, p_max]."""
    p0 = maps.distal.pressure(a.theta1)
    p2 = maps.root.pressure(a.theta2)
    for name, val, m in (("theta1", p0, maps.distal), ("theta2", p2, maps.root)):
        if not (0.0 <= val <= p_max):
            lo, hi = _channel_feasible_angles(m, 0.0, p_max)
            raise SaturationError(
                f"{name} demands {val:.6g} kPa outside [0, {p_max:.6g}]; "
                f"feasible angle range [{lo:.6g}, {hi:.6g}] rad",
                feasible_range=(lo, hi),
            )
    delta = maps.lateral.pressure(a.phi)
    headroom = min(lateral_bias, p_max - lateral_bias)
    if abs(delta) / 2.0 > headroom:
        lo, hi = _channel_feasible_angles(m=maps.lateral, p_lo=-2.0 * headroom, p_hi=2.0 * headroom)
        raise SaturationError(
            f"phi demands a lateral split of {delta / 2.0:.6g} kPa beyond the "
            f"{headroom:.6g} kPa bias headroom; feasible angle range "
            f"[{lo:.6g}, {hi:.6g}] rad",
            feasible_range=(lo, hi),
        )
    return PressureVector(
        p0=p0,
        p1=lateral_bias + delta / 2.0,
        p2=p2,
        p3=lateral_bias - delta / 2.0,
    )


def fit_linear_map(samples: Iterable[CalibrationSample]) -> tuple:
    """Ordinary least squares fit of angle = k*pressure + b.

    Returns ``(LinearMap, rmse)`` with rmse in radians.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise InsufficientDataError(
            f"need at least 2 calibration samples, got {len(samples)}"
        )
    x = np.array([s.pressure for s in samples])
    y = np.array([s.angle for s in samples])
    if np.ptp(x) == 0.0:
        raise DegenerateDataError("all sample pressures identical; slope unidentifiable")
    A = np.column_stack([x, np.ones_like(x)])
    (k, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    residuals = y - (k * x + b)
    rmse = float(np.sqrt(np.mean(residuals**2)))
    return LinearMap(k=float(k), b=float(b)), rmse


def fk_from_pressures(
    p: PressureVector,
    maps: ChannelMaps = DEFAULT_MAPS,
    geom: LinkGeometry = DEFAULT_GEOMETRY,
    p_max: float = DEFAULT_P_MAX,
    limits=DEFAULT_LIMITS,
) -> np.ndarray:
    """Tip position straight from pressures: the affine maps composed with FK."""
    return forward_kinematics(angles_from_pressures(p, maps, p_max), geom, limits)
