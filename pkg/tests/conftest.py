"""Shared test oracles; kept independent of the library's own helpers."""

import numpy as np
import pytest

from softgrip.kinematics import JointAngles, LinkGeometry


def _rx(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1.0]])


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1.0]])


def _tx(d):
    T = np.eye(4)
    T[0, 3] = d
    return T


def chain_oracle_frames(angles: JointAngles, geom: LinkGeometry):
    """Homogeneous-transform-chain FK oracle: Rz(t1), translate l2, Rz(-t2),
    translate l1, the whole chain premultiplied by Rx(phi)."""
    base = np.eye(4)
    base[:3, 3] = geom.base_xyz
    cr, sr = np.cos(geom.base_rpy[0]), np.sin(geom.base_rpy[0])
    cp, sp = np.cos(geom.base_rpy[1]), np.sin(geom.base_rpy[1])
    cy, sy = np.cos(geom.base_rpy[2]), np.sin(geom.base_rpy[2])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1.0]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    base[:3, :3] = Rz @ Ry @ Rx

    proximal = base @ _rx(angles.phi) @ _rz(angles.theta1)
    distal = proximal @ _tx(geom.l2) @ _rz(-angles.theta2)
    tip = distal @ _tx(geom.l1)
    frames = [base, proximal, distal, tip]
    if geom.mirrored:
        M = np.diag([1.0, 1.0, -1.0, 1.0])
        frames = [M @ F @ M for F in frames]
    return frames


def chain_oracle_tip(angles: JointAngles, geom: LinkGeometry = LinkGeometry()):
    return chain_oracle_frames(angles, geom)[-1][:3, 3]


def random_angles(rng, limits):
    return JointAngles(
        theta1=rng.uniform(*limits.theta1),
        theta2=rng.uniform(*limits.theta2),
        phi=rng.uniform(*limits.phi),
    )


def render_towel(width, height, center, half_extents, angle_rad, blue=(20, 40, 200), bg=(190, 170, 150)):
    """Rasterise a rotated rectangle: a pixel is blue iff its center lies inside."""
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[:, :] = bg
    xs, ys = np.meshgrid(np.arange(width), np.arange(height))
    dx = xs - center[0]
    dy = ys - center[1]
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    u = dx * c + dy * s
    v = -dx * s + dy * c
    inside = (np.abs(u) <= half_extents[0]) & (np.abs(v) <= half_extents[1])
    img[inside] = blue
    return img


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
