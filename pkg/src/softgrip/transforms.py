"""Small homogeneous-transform helpers used across the toolkit."""

import numpy as np


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Fixed-axis roll-pitch-yaw rotation (URDF convention): Rz(yaw)Ry(pitch)Rx(roll)."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def matrix_to_rpy(R: np.ndarray) -> tuple:
    """Inverse of :func:`rpy_matrix`; pitch clamped away from the gimbal-lock poles."""
    pitch = -np.arcsin(np.clip(R[2, 0], -1.0, 1.0))
    if abs(np.cos(pitch)) < 1e-12:
        # roll and yaw are degenerate; fold everything into roll
        roll = np.arctan2(-R[1, 2], R[1, 1])
        yaw = 0.0
    else:
        roll = np.arctan2(R[2, 1], R[2, 2])
        yaw = np.arctan2(R[1, 0], R[0, 0])
    return float(roll), float(pitch), float(yaw)


def hom(R: np.ndarray = None, t=None) -> np.ndarray:
    """4x4 homogeneous transform from rotation ``R`` and translation ``t``."""
    T = np.eye(4)
    if R is not None:
        T[:3, :3] = R
    if t is not None:
        T[:3, 3] = t
    return T


def hom_from_xyz_rpy(xyz, rpy) -> np.ndarray:
    return hom(rpy_matrix(*rpy), xyz)


def translate(x: float, y: float = 0.0, z: float = 0.0) -> np.ndarray:
    return hom(t=(x, y, z))


def axis_angle_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a (not necessarily unit) axis."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        if angle != 0.0:
            raise ValueError("zero axis with nonzero angle")
        return np.eye(3)
    k = axis / n
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def apply(T: np.ndarray, p) -> np.ndarray:
    """Apply a 4x4 transform to a 3-vector point."""
    p = np.asarray(p, dtype=float)
    return T[:3, :3] @ p + T[:3, 3]
