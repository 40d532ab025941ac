"""Multi-sphere bellows approximation and robot-description (URDF) export.

Each bellows is discretised into ``n`` spheres: the bottom one rides the
lower link, the top one the upper link, and interior sphere ``i`` rotates by
the fraction (i-1)/(n-1) of the joint rotation.  The gripper is exported as
a URDF kinematic tree with the universal joint split into two stacked
revolute joints and the sphere chains baked in as visual elements.
"""

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import ConsistencyError, StructuralError
from .kinematics import JointAngles, JointLimits, LinkGeometry
from .transforms import hom, hom_from_xyz_rpy, matrix_to_rpy, rot_x, rot_z, translate

__all__ = [
    "Attachment",
    "SphereChain",
    "BellowsGeometry",
    "SphereVisual",
    "Joint",
    "Link",
    "GripperDescription",
    "DEFAULT_LARGE_BELLOWS",
    "DEFAULT_SMALL_BELLOWS",
    "discretize_bellows",
    "pose_chain",
    "build_description",
    "export_description",
    "write_description",
    "read_description",
    "description_fk",
]

# Half the printed bellows diameters; the small-vs-large swap in the source
# geometry table is kept as printed and is configurable.
LARGE_SPHERE_RADIUS = 15.25
SMALL_SPHERE_RADIUS = 18.78


@dataclass(frozen=True)
class Attachment:
    """Per-sphere attachment rule."""

    kind: str  # "lower", "upper" or "proportional"
    fraction: float  # rotation fraction in [0, 1]


@dataclass(frozen=True)
class BellowsGeometry:
    length: float  # mm along the undeformed axis
    radius: float  # sphere radius, mm
    mount: tuple = (5.0, -12.0, 0.0)  # bellows bottom in the lower-link frame


DEFAULT_LARGE_BELLOWS = BellowsGeometry(length=44.0, radius=LARGE_SPHERE_RADIUS)
DEFAULT_SMALL_BELLOWS = BellowsGeometry(length=39.0, radius=SMALL_SPHERE_RADIUS)


@dataclass(frozen=True)
class SphereChain:
    name: str
    joint: str  # name of the joint the bellows spans
    geometry: BellowsGeometry
    n: int = 5

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("a sphere chain needs at least 3 spheres")

    @property
    def fractions(self) -> tuple:
        return tuple(i / (self.n - 1) for i in range(self.n))

    @property
    def attachments(self) -> tuple:
        out = []
        for i, f in enumerate(self.fractions):
            if i == 0:
                out.append(Attachment("lower", 0.0))
            elif i == self.n - 1:
                out.append(Attachment("upper", 1.0))
            else:
                out.append(Attachment("proportional", f))
        return tuple(out)

    @property
    def radii(self) -> tuple:
        return (self.geometry.radius,) * self.n


def discretize_bellows(
    geometry: BellowsGeometry, joint: str, n: int = 5, name: Optional[str] = None
) -> SphereChain:
    """Split one bellows into an n-sphere chain spanning ``joint``."""
    if n < 3:
        raise ValueError("n must be >= 3")
    return SphereChain(name=name or f"{joint}_bellows", joint=joint, geometry=geometry, n=n)


def _rotation_between(lower_frame: np.ndarray, upper_frame: np.ndarray) -> np.ndarray:
    """Rotation vector of the relative rotation lower -> upper."""
    R_rel = lower_frame[:3, :3].T @ upper_frame[:3, :3]
    return Rotation.from_matrix(R_rel).as_rotvec()


def pose_chain(
    chain: SphereChain,
    joint_angle: float,
    lower_frame: np.ndarray,
    upper_frame: np.ndarray,
    tol: float = 1e-6,
) -> np.ndarray:
    """Sphere centers (n, 3) in the world frame.

    The relative rotation between the frames must match ``joint_angle`` in
    magnitude; each sphere sits at its proportional rotation fraction along
    the arc, endpoints coinciding with the link attachment points.
    """
    rotvec = _rotation_between(lower_frame, upper_frame)
    if abs(np.linalg.norm(rotvec) - abs(joint_angle)) > tol:
        raise ConsistencyError(
            f"frames imply a rotation of {np.linalg.norm(rotvec):.6g} rad, "
            f"not the commanded {joint_angle:.6g} rad"
        )
    mount = np.asarray(chain.geometry.mount)
    R_l = lower_frame[:3, :3]
    t_l = lower_frame[:3, 3]
    centers = np.empty((chain.n, 3))
    for i, f in enumerate(chain.fractions):
        Rf = Rotation.from_rotvec(f * rotvec).as_matrix()
        local = Rf @ (mount + np.array([f * chain.geometry.length, 0.0, 0.0]))
        centers[i] = R_l @ local + t_l
    return centers


@dataclass(frozen=True)
class SphereVisual:
    name: str
    link: str  # link whose frame the center is expressed in
    center: tuple  # xyz, mm
    radius: float


@dataclass(frozen=True)
class Link:
    name: str
    spheres: tuple = ()


@dataclass(frozen=True)
class Joint:
    name: str
    type: str  # "revolute" or "fixed"
    parent: str
    child: str
    origin_xyz: tuple = (0.0, 0.0, 0.0)
    origin_rpy: tuple = (0.0, 0.0, 0.0)
    axis: tuple = (0.0, 0.0, 1.0)
    limits: tuple = (0.0, 0.0)  # rad


@dataclass(frozen=True)
class GripperDescription:
    name: str
    links: tuple
    joints: tuple

    def validate(self) -> None:
        names = [l.name for l in self.links]
        if len(set(names)) != len(names):
            raise StructuralError("duplicate link names")
        parents = {}
        for j in self.joints:
            if j.parent not in names or j.child not in names:
                raise StructuralError(f"joint {j.name} references an unknown link")
            if j.child in parents:
                raise StructuralError(f"link {j.child} has two parents")
            parents[j.child] = j.parent
        roots = [n for n in names if n not in parents]
        if len(roots) != 1:
            raise StructuralError(f"tree must have exactly one root, found {roots}")
        # acyclicity: walking up from every link must terminate at the root
        for n in names:
            seen = set()
            while n in parents:
                if n in seen:
                    raise StructuralError("kinematic tree contains a cycle")
                seen.add(n)
                n = parents[n]


def _mirror_xyz(xyz) -> tuple:
    return (xyz[0], xyz[1], -xyz[2])


def _mirror_rpy(rpy) -> tuple:
    M = np.diag([1.0, 1.0, -1.0])
    R = hom_from_xyz_rpy((0, 0, 0), rpy)[:3, :3]
    return matrix_to_rpy(M @ R @ M)


def _finger_joints(
    prefix: str, geom: LinkGeometry, limits: JointLimits, mirrored: bool
) -> List[Joint]:
    xyz = _mirror_xyz(geom.base_xyz) if mirrored else tuple(geom.base_xyz)
    rpy = _mirror_rpy(geom.base_rpy) if mirrored else tuple(geom.base_rpy)
    lateral_axis = (-1.0, 0.0, 0.0) if mirrored else (1.0, 0.0, 0.0)
    return [
        Joint(
            name=f"{prefix}_lateral",
            type="revolute",
            parent="base",
            child=f"{prefix}_yoke",
            origin_xyz=xyz,
            origin_rpy=rpy,
            axis=lateral_axis,
            limits=tuple(limits.phi),
        ),
        Joint(
            name=f"{prefix}_root",
            type="revolute",
            parent=f"{prefix}_yoke",
            child=f"{prefix}_proximal",
            axis=(0.0, 0.0, 1.0),
            limits=tuple(limits.theta1),
        ),
        Joint(
            name=f"{prefix}_distal",
            type="revolute",
            parent=f"{prefix}_proximal",
            child=f"{prefix}_distal_link",
            origin_xyz=(geom.l2, 0.0, 0.0),
            axis=(0.0, 0.0, -1.0),
            limits=tuple(limits.theta2),
        ),
        Joint(
            name=f"{prefix}_tip",
            type="fixed",
            parent=f"{prefix}_distal_link",
            child=f"{prefix}_tip_link",
            origin_xyz=(geom.l1, 0.0, 0.0),
        ),
    ]


def _finger_chains(prefix: str, n: int, large: BellowsGeometry, small: BellowsGeometry):
    yoke_mount = large.mount
    left = BellowsGeometry(small.length, small.radius, (small.mount[0], small.mount[1], 12.0))
    right = BellowsGeometry(small.length, small.radius, (small.mount[0], small.mount[1], -12.0))
    return [
        discretize_bellows(large, f"{prefix}_distal", n, name=f"{prefix}_distal_bellows"),
        discretize_bellows(
            BellowsGeometry(large.length, large.radius, yoke_mount),
            f"{prefix}_root",
            n,
            name=f"{prefix}_root_middle_bellows",
        ),
        discretize_bellows(left, f"{prefix}_root", n, name=f"{prefix}_root_left_bellows"),
        discretize_bellows(right, f"{prefix}_root", n, name=f"{prefix}_root_right_bellows"),
    ]


def _finger_frames(geom: LinkGeometry, angles: JointAngles, mirrored: bool) -> dict:
    """Frames of one finger in gripper coordinates, keyed by link role."""
    base = geom.base_transform
    yoke = base @ hom(rot_x(angles.phi))
    proximal = yoke @ hom(rot_z(angles.theta1))
    distal = proximal @ translate(geom.l2) @ hom(rot_z(-angles.theta2))
    frames = {"base": base, "yoke": yoke, "proximal": proximal, "distal": distal}
    if mirrored:
        M = np.diag([1.0, 1.0, -1.0, 1.0])
        frames = {k: M @ F @ M for k, F in frames.items()}
    return frames


def build_description(
    geom: LinkGeometry = LinkGeometry(),
    limits: JointLimits = JointLimits(),
    angles_a: JointAngles = JointAngles(),
    angles_b: JointAngles = JointAngles(),
    sphere_count: int = 5,
    large_bellows: BellowsGeometry = DEFAULT_LARGE_BELLOWS,
    small_bellows: BellowsGeometry = DEFAULT_SMALL_BELLOWS,
    name: str = "hybrid_gripper",
) -> GripperDescription:
    """Assemble the full two-finger description with chains posed at ``angles``."""
    links = {"base": []}
    joints: List[Joint] = []
    for prefix, angles, mirrored in (("finger_a", angles_a, False), ("finger_b", angles_b, True)):
        joints.extend(_finger_joints(prefix, geom, limits, mirrored))
        for ln in (f"{prefix}_yoke", f"{prefix}_proximal", f"{prefix}_distal_link", f"{prefix}_tip_link"):
            links[ln] = []
        frames = _finger_frames(geom, angles, mirrored)
        # chain joint -> (lower frame, upper frame, rotation, host link + its frame)
        chain_frames = {
            f"{prefix}_distal": (
                frames["proximal"],
                frames["distal"],
                angles.theta2,
                f"{prefix}_proximal",
                frames["proximal"],
            ),
            f"{prefix}_root": (
                frames["base"],
                frames["proximal"],
                float(np.linalg.norm(_rotation_between(frames["base"], frames["proximal"]))),
                "base",
                np.eye(4),
            ),
        }
        for chain in _finger_chains(prefix, sphere_count, large_bellows, small_bellows):
            lower, upper, jangle, host, host_frame = chain_frames[chain.joint]
            centers = pose_chain(chain, jangle, lower, upper)
            inv = np.linalg.inv(host_frame)
            for i, c in enumerate(centers):
                local = inv[:3, :3] @ c + inv[:3, 3]
                links[host].append(
                    SphereVisual(
                        name=f"{chain.name}_{i}",
                        link=host,
                        center=tuple(float(v) for v in local),
                        radius=chain.radii[i],
                    )
                )
    description = GripperDescription(
        name=name,
        links=tuple(Link(n, tuple(s)) for n, s in links.items()),
        joints=tuple(joints),
    )
    description.validate()
    return description


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def write_description(description: GripperDescription) -> str:
    """Serialise to a deterministic URDF document (UTF-8 text)."""
    description.validate()
    robot = ET.Element("robot", name=description.name)
    for link in description.links:
        el = ET.SubElement(robot, "link", name=link.name)
        for s in link.spheres:
            vis = ET.SubElement(el, "visual", name=s.name)
            ET.SubElement(vis, "origin", xyz=_fmt(s.center), rpy="0.0 0.0 0.0")
            geo = ET.SubElement(vis, "geometry")
            ET.SubElement(geo, "sphere", radius=repr(float(s.radius)))
    for j in description.joints:
        el = ET.SubElement(robot, "joint", name=j.name, type=j.type)
        ET.SubElement(el, "parent", link=j.parent)
        ET.SubElement(el, "child", link=j.child)
        ET.SubElement(el, "origin", xyz=_fmt(j.origin_xyz), rpy=_fmt(j.origin_rpy))
        if j.type == "revolute":
            ET.SubElement(el, "axis", xyz=_fmt(j.axis))
            ET.SubElement(
                el,
                "limit",
                lower=repr(float(j.limits[0])),
                upper=repr(float(j.limits[1])),
                effort="0.0",
                velocity="0.0",
            )
    ET.indent(robot)
    return ET.tostring(robot, encoding="unicode", xml_declaration=True) + "\n"


def export_description(path, description: GripperDescription) -> None:
    text = write_description(description)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_description(source: str) -> GripperDescription:
    """Parse a document produced by :func:`write_description`."""
    robot = ET.fromstring(source)
    links = []
    for el in robot.findall("link"):
        spheres = []
        for vis in el.findall("visual"):
            origin = vis.find("origin")
            sphere = vis.find("geometry/sphere")
            spheres.append(
                SphereVisual(
                    name=vis.get("name"),
                    link=el.get("name"),
                    center=tuple(float(v) for v in origin.get("xyz").split()),
                    radius=float(sphere.get("radius")),
                )
            )
        links.append(Link(name=el.get("name"), spheres=tuple(spheres)))
    joints = []
    for el in robot.findall("joint"):
        axis_el = el.find("axis")
        limit_el = el.find("limit")
        origin = el.find("origin")
        joints.append(
            Joint(
                name=el.get("name"),
                type=el.get("type"),
                parent=el.find("parent").get("link"),
                child=el.find("child").get("link"),
                origin_xyz=tuple(float(v) for v in origin.get("xyz").split()),
                origin_rpy=tuple(float(v) for v in origin.get("rpy").split()),
                axis=tuple(float(v) for v in axis_el.get("xyz").split())
                if axis_el is not None
                else (0.0, 0.0, 1.0),
                limits=(float(limit_el.get("lower")), float(limit_el.get("upper")))
                if limit_el is not None
                else (0.0, 0.0),
            )
        )
    description = GripperDescription(
        name=robot.get("name"), links=tuple(links), joints=tuple(joints)
    )
    description.validate()
    return description


def description_fk(
    description: GripperDescription, link: str, joint_values: dict
) -> np.ndarray:
    """Generic FK over the description tree: compose origin transforms and
    axis rotations from the root down to ``link``.  Returns a 4x4 frame."""
    by_child = {j.child: j for j in description.joints}
    chain = []
    n = link
    while n in by_child:
        chain.append(by_child[n])
        n = by_child[n].parent
    T = np.eye(4)
    for j in reversed(chain):
        T = T @ hom_from_xyz_rpy(j.origin_xyz, j.origin_rpy)
        if j.type == "revolute":
            q = joint_values.get(j.name, 0.0)
            from .transforms import axis_angle_matrix

            T = T @ hom(axis_angle_matrix(j.axis, q))
    return T
