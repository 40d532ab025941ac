"""Forward/inverse kinematics of one hybrid-gripper finger and workspace sampling.

The finger is a planar two-link chain (proximal link ``l2``, distal link
``l1``) whose whole plane is rotated about the base x-axis by the lateral
angle ``phi``.  Positions are in millimetres, angles in radians.
"""

from dataclasses import dataclass

import numpy as np

from .errors import LimitViolationError, OutOfWorkspaceError
from .transforms import apply, hom_from_xyz_rpy, rot_x, rot_z, hom, translate

__all__ = [
    "LinkGeometry",
    "JointAngles",
    "JointLimits",
    "DEFAULT_GEOMETRY",
    "DEFAULT_LIMITS",
    "forward_kinematics",
    "forward_chain",
    "inverse_kinematics",
    "workspace_sample",
]


@dataclass(frozen=True)
class LinkGeometry:
    """Link lengths plus the rigid base-to-proximal-joint offset.

    ``mirrored`` marks the second finger: its tip is the first finger's tip
    with the lateral (z) coordinate negated.
    """

    l1: float = 70.0  # distal link, mm
    l2: float = 44.0  # proximal link, mm
    base_xyz: tuple = (0.0, 0.0, 0.0)
    base_rpy: tuple = (0.0, 0.0, 0.0)
    mirrored: bool = False

    def __post_init__(self):
        if not (self.l1 > 0.0 and self.l2 > 0.0):
            raise ValueError("link lengths must be positive")

    @property
    def base_transform(self) -> np.ndarray:
        return hom_from_xyz_rpy(self.base_xyz, self.base_rpy)

    @property
    def reach(self) -> float:
        return self.l1 + self.l2


@dataclass(frozen=True)
class JointAngles:
    """Proximal flexion ``theta1``, distal relative angle ``theta2``, lateral ``phi``."""

    theta1: float = 0.0
    theta2: float = 0.0
    phi: float = 0.0

    def as_tuple(self) -> tuple:
        return (self.theta1, self.theta2, self.phi)


@dataclass(frozen=True)
class JointLimits:
    """Closed per-angle intervals; each must contain zero."""

    theta1: tuple = (0.0, np.pi / 2)
    theta2: tuple = (0.0, np.pi / 2)
    phi: tuple = (-np.pi / 2, np.pi / 2)

    def __post_init__(self):
        for name in ("theta1", "theta2", "phi"):
            lo, hi = getattr(self, name)
            if not (lo <= 0.0 <= hi):
                raise ValueError(f"{name} limits must contain 0, got [{lo}, {hi}]")

    def check(self, angles: JointAngles) -> None:
        for name in ("theta1", "theta2", "phi"):
            lo, hi = getattr(self, name)
            v = getattr(angles, name)
            if not (lo <= v <= hi):
                raise LimitViolationError(
                    f"{name}={v:.6g} rad outside limits [{lo:.6g}, {hi:.6g}]",
                    angle_name=name,
                )

    def contains(self, angles: JointAngles) -> bool:
        try:
            self.check(angles)
        except LimitViolationError:
            return False
        return True


DEFAULT_GEOMETRY = LinkGeometry()
DEFAULT_LIMITS = JointLimits()


def _planar_tip(angles: JointAngles, geom: LinkGeometry) -> np.ndarray:
    t1, t2 = angles.theta1, angles.theta2
    x = geom.l1 * np.cos(t1 - t2) + geom.l2 * np.cos(t1)
    y = geom.l1 * np.sin(t1 - t2) + geom.l2 * np.sin(t1)
    return np.array([x, y, 0.0])


def forward_kinematics(
    angles: JointAngles,
    geom: LinkGeometry = DEFAULT_GEOMETRY,
    limits: JointLimits = DEFAULT_LIMITS,
) -> np.ndarray:
    """Fingertip position in the finger base frame (mm).

    The planar two-link tip is rotated about the base x-axis by ``phi`` and
    offset by the base transform; a mirrored finger negates z at the end.
    """
    if limits is not None:
        limits.check(angles)
    tip = rot_x(angles.phi) @ _planar_tip(angles, geom)
    tip = apply(geom.base_transform, tip)
    if geom.mirrored:
        tip = tip * np.array([1.0, 1.0, -1.0])
    return tip


def forward_chain(
    angles: JointAngles,
    geom: LinkGeometry = DEFAULT_GEOMETRY,
    limits: JointLimits = DEFAULT_LIMITS,
) -> list:
    """Ordered 4x4 frames: base, proximal joint, distal joint, tip."""
    if limits is not None:
        limits.check(angles)
    base = geom.base_transform
    proximal = base @ hom(rot_x(angles.phi) @ rot_z(angles.theta1))
    distal = proximal @ translate(geom.l2) @ hom(rot_z(-angles.theta2))
    tip = distal @ translate(geom.l1)
    frames = [base, proximal, distal, tip]
    if geom.mirrored:
        M = np.diag([1.0, 1.0, -1.0, 1.0])
        frames = [M @ F @ M for F in frames]
    return frames


def _planar_solutions(x: float, yp: float, geom: LinkGeometry):
    """Both elbow branches of the de-rotated planar problem, theta2 >= 0 first."""
    d2 = x * x + yp * yp
    cos_t2 = (d2 - geom.l1**2 - geom.l2**2) / (2.0 * geom.l1 * geom.l2)
    cos_t2 = float(np.clip(cos_t2, -1.0, 1.0))
    t2 = float(np.arccos(cos_t2))  # >= 0
    out = []
    for theta2 in ([t2, -t2] if t2 != 0.0 else [0.0]):
        psi = -theta2  # relative rotation of the distal link
        theta1 = np.arctan2(yp, x) - np.arctan2(
            geom.l1 * np.sin(psi), geom.l2 + geom.l1 * np.cos(psi)
        )
        out.append((float(theta1), float(theta2)))
    return out


def _wrap_pi(a: float) -> float:
    return float(np.arctan2(np.sin(a), np.cos(a)))


def inverse_kinematics(
    target,
    geom: LinkGeometry = DEFAULT_GEOMETRY,
    limits: JointLimits = DEFAULT_LIMITS,
) -> JointAngles:
    """Geometric inverse kinematics.

    The lateral angle is recovered as atan2(z, y) (0 when y = z = 0), the
    remainder is a planar law-of-cosines problem.  Among feasible branches
    the one with theta2 >= 0 is preferred.  Raises
    :class:`OutOfWorkspaceError` for unreachable targets and
    :class:`LimitViolationError` when every branch violates the limits.
    """
    target = np.asarray(target, dtype=float)
    if geom.mirrored:
        target = target * np.array([1.0, 1.0, -1.0])
    # undo the base offset
    local = apply(np.linalg.inv(geom.base_transform), target)
    x, y, z = local

    d = float(np.hypot(np.hypot(y, z), x))
    outer = geom.l1 + geom.l2
    inner = abs(geom.l1 - geom.l2)
    tol = 1e-9 * max(1.0, outer)
    if d > outer + tol or d < inner - tol:
        nearest = max(d - outer, inner - d)
        raise OutOfWorkspaceError(
            f"target at distance {d:.6g} mm outside reachable annulus "
            f"[{inner:.6g}, {outer:.6g}] mm (nearest reachable {nearest:.6g} mm away)",
            nearest_distance=nearest,
        )

    r = float(np.hypot(y, z))
    phi0 = float(np.arctan2(z, y)) if r > 0.0 else 0.0
    candidates = []
    # primary de-rotation, and the antipodal representation (phi +/- pi, -r)
    for phi, yp in ((phi0, r), (_wrap_pi(phi0 + np.pi), -r)):
        for theta1, theta2 in _planar_solutions(x, yp, geom):
            candidates.append(JointAngles(theta1, theta2, phi))

    last_violation = None
    for cand in candidates:
        if limits is None or limits.contains(cand):
            return cand
        last_violation = cand
    raise LimitViolationError(
        "target reachable but every inverse-kinematics branch violates joint "
        f"limits (e.g. {last_violation})"
    )


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Evenly spaced inclusive grid with spacing <= step; symmetric intervals
    yield symmetric grids."""
    span = hi - lo
    if span == 0.0:
        return np.array([lo])
    n = int(np.ceil(span / step - 1e-12)) + 1
    return np.linspace(lo, hi, n)


def workspace_sample(
    limits: JointLimits = DEFAULT_LIMITS,
    geom: LinkGeometry = DEFAULT_GEOMETRY,
    resolution: float = 0.05,
) -> np.ndarray:
    """Grid-product point cloud of tip positions, one row per (x, y, z)."""
    if not (resolution > 0.0):
        raise ValueError("resolution must be positive")
    g1 = _grid(*limits.theta1, resolution)
    g2 = _grid(*limits.theta2, resolution)
    g3 = _grid(*limits.phi, resolution)
    points = np.empty((len(g1) * len(g2) * len(g3), 3))
    i = 0
    for t1 in g1:
        for t2 in g2:
            for p in g3:
                points[i] = forward_kinematics(JointAngles(t1, t2, p), geom, limits)
                i += 1
    return points
