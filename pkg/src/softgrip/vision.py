"""Five-step 2.5D grasp-point detection and poke-and-pinch planning.

Images are (height, width, 3) uint8 RGB arrays; masks are boolean arrays of
the same height/width.  Pixel coordinates are (x=column, y=row).
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from PIL import Image
from scipy import ndimage

from .compliance import DEFAULT_POKE, DEFAULT_STIFFNESS, PokeParams, StiffnessModel, poke_tolerance
from .errors import NoObjectError, ToleranceExceededError
from .kinematics import JointAngles
from .pneumatics import Mode, ModeCommand
from .transforms import hom_from_xyz_rpy

__all__ = [
    "HsvRange",
    "RotatedRect",
    "CameraModel",
    "Waypoint",
    "GraspPlan",
    "DEFAULT_HSV_RANGE",
    "load_image",
    "rgb_to_hsv",
    "extract_mask",
    "segment_roi",
    "detect_edges",
    "canny_edges",
    "convex_hull",
    "min_enclosing_rect",
    "grasp_midpoints",
    "image_to_world",
    "project_to_image",
    "plan_poke_and_pinch",
    "detect_grasp_points",
]


@dataclass(frozen=True)
class HsvRange:
    """Inclusive HSV bounds; H in [0, 180) halved-degree convention."""

    lower: tuple = (100, 100, 50)
    upper: tuple = (130, 255, 255)

    def __post_init__(self):
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("lower bound exceeds upper bound")


DEFAULT_HSV_RANGE = HsvRange()


def load_image(path) -> np.ndarray:
    """Read a PNG or PPM image into an RGB uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def rgb_to_hsv(img: np.ndarray) -> np.ndarray:
    """Vectorised RGB -> HSV with H in [0, 180), S and V in [0, 255]."""
    rgb = img.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    delta = v - rgb.min(axis=-1)
    s = np.where(v > 0.0, delta / np.where(v > 0.0, v, 1.0), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        hue = np.select(
            [delta == 0.0, v == r, v == g],
            [
                np.zeros_like(v),
                (60.0 * (g - b) / delta) % 360.0,
                60.0 * (b - r) / delta + 120.0,
            ],
            default=60.0 * (r - g) / delta + 240.0,
        )
    h = np.round(hue / 2.0) % 180.0
    out = np.empty(img.shape, dtype=np.float64)
    out[..., 0] = h
    out[..., 1] = np.round(s * 255.0)
    out[..., 2] = np.round(v * 255.0)
    return out


def extract_mask(img: np.ndarray, hsv_range: HsvRange = DEFAULT_HSV_RANGE) -> np.ndarray:
    """Boolean mask of pixels whose HSV lies inside the inclusive range."""
    hsv = rgb_to_hsv(img)
    lower = np.asarray(hsv_range.lower, dtype=np.float64)
    upper = np.asarray(hsv_range.upper, dtype=np.float64)
    return np.all((hsv >= lower) & (hsv <= upper), axis=-1)


def segment_roi(mask: np.ndarray) -> np.ndarray:
    """Largest 4-connected component of the mask.

    Ties are broken by the component containing the smallest pixel in
    row-major order.  Raises :class:`NoObjectError` on an empty mask.
    """
    if not mask.any():
        raise NoObjectError("mask contains no foreground pixels")
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    labels, n = ndimage.label(mask, structure=structure)
    sizes = ndimage.sum_labels(mask, labels, index=np.arange(1, n + 1))
    best = np.max(sizes)
    flat = labels.ravel()
    # first (row-major) pixel belonging to any maximal component
    candidates = np.isin(flat, 1 + np.flatnonzero(sizes == best))
    winner = flat[np.argmax(candidates)]
    return labels == winner


def detect_edges(roi: np.ndarray) -> np.ndarray:
    """Edge pixels of a binary ROI: the 8-connected morphological boundary.

    This equals the tuned default of the Canny path on noise-free binary
    input; :func:`canny_edges` is available for grayscale sources.
    """
    if not roi.any():
        raise NoObjectError("ROI is empty")
    padded = np.pad(roi, 1, mode="constant", constant_values=False)
    eroded = np.ones_like(roi, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            eroded &= padded[1 + dy : 1 + dy + roi.shape[0], 1 + dx : 1 + dx + roi.shape[1]]
    return roi & ~eroded


def canny_edges(
    gray: np.ndarray, sigma: float = 1.0, low: float = 0.1, high: float = 0.2
) -> np.ndarray:
    """Plain Canny: Gaussian smoothing, Sobel gradients, non-maximum
    suppression and double-threshold hysteresis.  Thresholds are fractions of
    the maximum gradient magnitude."""
    g = ndimage.gaussian_filter(gray.astype(np.float64), sigma)
    gx = ndimage.sobel(g, axis=1)
    gy = ndimage.sobel(g, axis=0)
    mag = np.hypot(gx, gy)
    if mag.max() == 0.0:
        return np.zeros_like(gray, dtype=bool)
    angle = np.arctan2(gy, gx)

    # quantise gradient direction to 0/45/90/135 degrees
    sector = (np.round(angle / (np.pi / 4.0)) % 4).astype(int)
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    padded = np.pad(mag, 1, mode="constant")
    nms = np.zeros_like(mag)
    for s, (dy, dx) in offsets.items():
        sel = sector == s
        fwd = padded[1 + dy : 1 + dy + mag.shape[0], 1 + dx : 1 + dx + mag.shape[1]]
        bwd = padded[1 - dy : 1 - dy + mag.shape[0], 1 - dx : 1 - dx + mag.shape[1]]
        keep = sel & (mag >= fwd) & (mag >= bwd)
        nms[keep] = mag[keep]

    strong = nms >= high * mag.max()
    weak = nms >= low * mag.max()
    # hysteresis: keep weak pixels 8-connected to strong ones
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3)))
    good = np.unique(labels[strong])
    return weak & np.isin(labels, good[good > 0])


def mask_to_points(mask: np.ndarray) -> np.ndarray:
    """(N, 2) array of (x, y) pixel coordinates of set mask bits."""
    ys, xs = np.nonzero(mask)
    return np.column_stack([xs, ys]).astype(np.float64)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, counter-clockwise, no duplicate endpoint."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    return hull


@dataclass(frozen=True)
class RotatedRect:
    """Min-area rectangle: center, half extents and orientation in [0, pi/2).

    The first half extent lies along (cos(angle), sin(angle)).
    """

    center: tuple
    half_extents: tuple
    angle: float

    @property
    def area(self) -> float:
        return 4.0 * self.half_extents[0] * self.half_extents[1]

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([c, s]), np.array([-s, c])


def _rect_at_angle(pts: np.ndarray, angle: float) -> RotatedRect:
    c, s = math.cos(angle), math.sin(angle)
    R = np.array([[c, s], [-s, c]])  # rotate by -angle
    rot = pts @ R.T
    lo = rot.min(axis=0)
    hi = rot.max(axis=0)
    center_rot = 0.5 * (lo + hi)
    center = R.T @ center_rot
    half = 0.5 * (hi - lo)
    return RotatedRect(center=tuple(center), half_extents=tuple(half), angle=angle)


def _normalise_rect(rect: RotatedRect) -> RotatedRect:
    angle = rect.angle % math.pi
    hx, hy = rect.half_extents
    if angle >= math.pi / 2.0:
        angle -= math.pi / 2.0
        hx, hy = hy, hx
    return RotatedRect(center=rect.center, half_extents=(hx, hy), angle=angle)


def min_enclosing_rect(points: np.ndarray, pixel_squares: bool = True) -> RotatedRect:
    """Minimum-area enclosing rectangle via rotating calipers on the hull.

    With ``pixel_squares`` each input point is treated as a unit pixel square
    (so a lone pixel yields half extents of 0.5).  Computation is done
    relative to the integer floor of the point set, which makes the result
    exactly translation-equivariant on pixel grids.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
        raise ValueError("need a non-empty (N, 2) point array")
    shift = np.floor(pts.min(axis=0))
    pts = pts - shift
    if pixel_squares:
        corners = np.array([[-0.5, -0.5], [0.5, -0.5], [-0.5, 0.5], [0.5, 0.5]])
        pts = (pts[:, None, :] + corners[None, :, :]).reshape(-1, 2)

    hull = convex_hull(pts)
    if len(hull) == 1:
        rect = RotatedRect(center=tuple(hull[0]), half_extents=(0.0, 0.0), angle=0.0)
    elif len(hull) == 2:
        d = hull[1] - hull[0]
        rect = RotatedRect(
            center=tuple(0.5 * (hull[0] + hull[1])),
            half_extents=(0.5 * float(np.hypot(*d)), 0.0),
            angle=float(np.arctan2(d[1], d[0])),
        )
    else:
        edges = np.diff(np.vstack([hull, hull[:1]]), axis=0)
        angles = np.unique(np.arctan2(edges[:, 1], edges[:, 0]) % (math.pi / 2.0))
        rect = min((_rect_at_angle(hull, a) for a in angles), key=lambda r: r.area)
    rect = _normalise_rect(rect)
    # snap the shift-local center to a 2^-26 px grid (sub-nanometre at desk
    # scale) so adding the integer shift back is exact and the result is
    # bit-identical under pixel translations of the input
    snap = 2.0**26
    center = np.round(np.asarray(rect.center) * snap) / snap + shift
    return RotatedRect(
        center=tuple(center),
        half_extents=rect.half_extents,
        angle=rect.angle,
    )


def grasp_midpoints(rect: RotatedRect, inset: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Midpoints of the two shorter sides, optionally inset toward the center.

    For a square rectangle the offset direction closest to the image x-axis
    is used.
    """
    ax1, ax2 = rect.axes()
    hx, hy = rect.half_extents
    if hx > hy:
        direction, half = ax1, hx
    elif hy > hx:
        direction, half = ax2, hy
    else:
        direction, half = (ax1, hx) if rect.angle <= math.pi / 4.0 else (ax2, hy)
    c = np.asarray(rect.center)
    off = (half - inset) * direction
    return c - off, c + off


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus the rigid camera-to-world transform.

    ``table_depth`` is the distance from camera to the table plane along the
    optical axis (mm); ``depth_sigma`` the expected depth error.
    """

    fx: float = 600.0
    fy: float = 600.0
    cx: float = 320.0
    cy: float = 240.0
    extrinsic_xyz: tuple = (0.0, 0.0, 0.0)
    extrinsic_rpy: tuple = (0.0, 0.0, 0.0)
    table_depth: float = 1000.0  # mm
    depth_sigma: float = 11.0  # mm

    def __post_init__(self):
        if not (self.fx > 0.0 and self.fy > 0.0):
            raise ValueError("focal lengths must be positive")
        if self.depth_sigma < 0.0:
            raise ValueError("depth_sigma must be >= 0")
        if not self.table_depth > 0.0:
            raise ValueError("table_depth must be positive")

    @property
    def camera_to_world(self) -> np.ndarray:
        return hom_from_xyz_rpy(self.extrinsic_xyz, self.extrinsic_rpy)


def image_to_world(pt, cam: CameraModel) -> np.ndarray:
    """Back-project a pixel at the table plane and map it into the world frame."""
    u, v = float(pt[0]), float(pt[1])
    d = cam.table_depth
    p_cam = np.array([(u - cam.cx) * d / cam.fx, (v - cam.cy) * d / cam.fy, d])
    T = cam.camera_to_world
    return T[:3, :3] @ p_cam + T[:3, 3]


def project_to_image(world_pt, cam: CameraModel) -> np.ndarray:
    """Pinhole projection of a world point back to pixel coordinates."""
    T = cam.camera_to_world
    p_cam = T[:3, :3].T @ (np.asarray(world_pt, dtype=float) - T[:3, 3])
    if p_cam[2] <= 0.0:
        raise ValueError("point is behind the camera")
    return np.array(
        [cam.fx * p_cam[0] / p_cam[2] + cam.cx, cam.fy * p_cam[1] / p_cam[2] + cam.cy]
    )


@dataclass(frozen=True)
class Waypoint:
    position: tuple  # mm, world frame
    approach_angle: float  # degrees from the surface plane


@dataclass(frozen=True)
class GraspPlan:
    grasp_point: tuple  # mm, world frame
    approach_angle: float  # degrees
    overpress_depth: float  # mm
    waypoints: tuple  # of Waypoint
    mode_schedule: tuple  # of ModeCommand

    def __post_init__(self):
        if not self.overpress_depth > 0.0:
            raise ValueError("overpress_depth must be positive")
        if not self.waypoints:
            raise ValueError("waypoints must be non-empty")
        if not self.mode_schedule or self.mode_schedule[-1].mode is not Mode.HOLDING:
            raise ValueError("mode schedule must end with Holding")


OPEN_ANGLES = JointAngles(0.0, 0.0, 0.0)
PINCH_ANGLES = JointAngles(0.5, 0.5, 0.0)


def plan_poke_and_pinch(
    world_point,
    approach_angle: float = 45.0,
    overpress: float = 25.0,
    cam_error_margin: float = 0.0,
    stiffness: StiffnessModel = DEFAULT_STIFFNESS,
    poke_params: PokeParams = DEFAULT_POKE,
    standoff: float = 80.0,
    open_angles: JointAngles = OPEN_ANGLES,
    pinch_angles: JointAngles = PINCH_ANGLES,
    allow_overpress_override: bool = False,
) -> GraspPlan:
    """Two-waypoint poke-and-pinch plan ending in Holding.

    The pre-grasp pose sits ``standoff`` mm away along the inclined approach;
    the target pose over-presses ``overpress`` mm beneath the detected
    surface point.  Raises :class:`ToleranceExceededError` when the expected
    camera error exceeds the compliance budget at this approach angle.
    """
    if not allow_overpress_override and not (20.0 <= overpress <= 30.0):
        raise ValueError("overpress must lie in [20, 30] mm unless overridden")
    tolerance = poke_tolerance(approach_angle, stiffness, poke_params)
    if cam_error_margin > tolerance:
        raise ToleranceExceededError(
            f"camera error margin {cam_error_margin:.3g} mm exceeds the "
            f"{tolerance:.3g} mm over-press tolerance at {approach_angle:g} deg"
        )
    point = np.asarray(world_point, dtype=float)
    a = math.radians(approach_angle)
    pre_grasp = point + standoff * np.array([math.cos(a), 0.0, math.sin(a)])
    target = point - np.array([0.0, 0.0, overpress])
    return GraspPlan(
        grasp_point=tuple(point),
        approach_angle=approach_angle,
        overpress_depth=overpress,
        waypoints=(
            Waypoint(tuple(pre_grasp), approach_angle),
            Waypoint(tuple(target), approach_angle),
        ),
        mode_schedule=(
            ModeCommand(Mode.ABAD, target_angles=open_angles),
            ModeCommand(Mode.ABAD, target_angles=pinch_angles),
            ModeCommand(Mode.HOLDING),
        ),
    )


def detect_grasp_points(
    img: np.ndarray,
    hsv_range: HsvRange = DEFAULT_HSV_RANGE,
    inset: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray, RotatedRect]:
    """Run mask -> largest component -> edges -> min rect -> midpoints.

    Returns the two pixel grasp points and the fitted rectangle.
    """
    mask = extract_mask(img, hsv_range)
    roi = segment_roi(mask)
    edges = detect_edges(roi)
    rect = min_enclosing_rect(mask_to_points(edges))
    p1, p2 = grasp_midpoints(rect, inset=inset)
    return p1, p2, rect
