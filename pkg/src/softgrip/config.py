"""Toolkit configuration: one YAML file covering every module.

All angles in the file are degrees, pressures kPa, lengths mm; they are
converted to internal units (radians) on load.  Unknown keys are rejected.
"""

import math
from dataclasses import dataclass

import numpy as np
import yaml

from .compliance import PayloadParams, PokeParams, StiffnessModel
from .errors import ConfigError
from .export import BellowsGeometry, DEFAULT_LARGE_BELLOWS, DEFAULT_SMALL_BELLOWS
from .kinematics import JointAngles, JointLimits, LinkGeometry
from .pneumatics import ControllerConfig, HoldingParams, PlantParams
from .pressure import ChannelMaps, LinearMap
from .vision import CameraModel, HsvRange

__all__ = ["ToolkitConfig", "load_config", "DEFAULT_CONFIG"]


def _take(section: dict, where: str, known: dict) -> dict:
    """Overlay ``section`` onto defaults, rejecting unknown keys."""
    if section is None:
        return dict(known)
    if not isinstance(section, dict):
        raise ConfigError(f"section '{where}' must be a mapping")
    unknown = set(section) - set(known)
    if unknown:
        raise ConfigError(f"unknown keys in '{where}': {sorted(unknown)}")
    out = dict(known)
    out.update(section)
    return out


def _limits_from(section, where) -> JointLimits:
    vals = _take(
        section,
        where,
        {"theta1_deg": [0.0, 90.0], "theta2_deg": [0.0, 90.0], "phi_deg": [-90.0, 90.0]},
    )
    try:
        return JointLimits(
            theta1=tuple(np.deg2rad(vals["theta1_deg"])),
            theta2=tuple(np.deg2rad(vals["theta2_deg"])),
            phi=tuple(np.deg2rad(vals["phi_deg"])),
        )
    except ValueError as e:
        raise ConfigError(f"invalid joint limits: {e}") from e


def _map_from(vals: dict) -> LinearMap:
    return LinearMap(k=math.radians(vals["k_deg_per_kpa"]), b=math.radians(vals["b_deg"]))


@dataclass(frozen=True)
class TrackingConfig:
    high: float = 40.0
    low: float = 10.0
    start_interval: float = 1.3
    decrement: float = 0.08
    floor: float = 0.2


@dataclass(frozen=True)
class GraspConfig:
    approach_angle: float = 45.0
    overpress: float = 25.0
    standoff: float = 80.0
    inset_px: float = 15.0
    open_angles: JointAngles = JointAngles(0.0, 0.0, 0.0)
    pinch_angles: JointAngles = JointAngles(0.5, 0.5, 0.0)


@dataclass(frozen=True)
class ExportConfig:
    sphere_count: int = 5
    large_bellows: BellowsGeometry = DEFAULT_LARGE_BELLOWS
    small_bellows: BellowsGeometry = DEFAULT_SMALL_BELLOWS


@dataclass(frozen=True)
class ToolkitConfig:
    geometry: LinkGeometry = LinkGeometry()
    limits: JointLimits = JointLimits()
    maps: ChannelMaps = None
    p_max: float = 60.0
    lateral_bias: float = 30.0
    plant: PlantParams = PlantParams()
    controller: ControllerConfig = ControllerConfig()
    tracking: TrackingConfig = TrackingConfig()
    holding: HoldingParams = HoldingParams()
    stiffness: StiffnessModel = StiffnessModel()
    payload: PayloadParams = PayloadParams()
    poke: PokeParams = PokeParams()
    camera: CameraModel = CameraModel()
    hsv: HsvRange = HsvRange()
    grasp: GraspConfig = GraspConfig()
    export: ExportConfig = ExportConfig()

    def __post_init__(self):
        if self.maps is None:
            from .pressure import DEFAULT_MAPS

            object.__setattr__(self, "maps", DEFAULT_MAPS)


DEFAULT_CONFIG = ToolkitConfig()

_TOP_SECTIONS = {
    "geometry",
    "limits",
    "maps",
    "pressure",
    "plant",
    "controller",
    "tracking",
    "holding",
    "stiffness",
    "payload",
    "poke",
    "camera",
    "hsv",
    "grasp",
    "export",
}


def load_config(path=None) -> ToolkitConfig:
    """Load a YAML config file; missing path or sections fall back to defaults."""
    if path is None:
        return DEFAULT_CONFIG
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError:
        raise
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config file {path}: {e}") from e
    if raw is None:
        return DEFAULT_CONFIG
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(raw) - _TOP_SECTIONS
    if unknown:
        raise ConfigError(f"unknown top-level sections: {sorted(unknown)}")

    try:
        g = _take(
            raw.get("geometry"),
            "geometry",
            {
                "l1_mm": 70.0,
                "l2_mm": 44.0,
                "base_xyz_mm": [0.0, 0.0, 0.0],
                "base_rpy_deg": [0.0, 0.0, 0.0],
            },
        )
        geometry = LinkGeometry(
            l1=float(g["l1_mm"]),
            l2=float(g["l2_mm"]),
            base_xyz=tuple(float(v) for v in g["base_xyz_mm"]),
            base_rpy=tuple(math.radians(v) for v in g["base_rpy_deg"]),
        )
        limits = _limits_from(raw.get("limits"), "limits")

        m = _take(
            raw.get("maps"),
            "maps",
            {
                "distal": {"k_deg_per_kpa": 0.9, "b_deg": 0.0},
                "root": {"k_deg_per_kpa": 0.9, "b_deg": 0.0},
                "lateral": {"k_deg_per_kpa": 0.45, "b_deg": 0.0},
            },
        )
        maps = ChannelMaps(
            distal=_map_from(_take(m["distal"], "maps.distal", {"k_deg_per_kpa": 0.9, "b_deg": 0.0})),
            root=_map_from(_take(m["root"], "maps.root", {"k_deg_per_kpa": 0.9, "b_deg": 0.0})),
            lateral=_map_from(
                _take(m["lateral"], "maps.lateral", {"k_deg_per_kpa": 0.45, "b_deg": 0.0})
            ),
        )

        pr = _take(raw.get("pressure"), "pressure", {"p_max_kpa": 60.0, "lateral_bias_kpa": 30.0})
        pl = _take(
            raw.get("plant"),
            "plant",
            {
                "tank_pressure_max_kpa": 80.0,
                "tank_volume": 100.0,
                "chamber_volume": 1.0,
                "c_in": 50.0,
                "c_out": 50.0,
                "pump_rate": 2000.0,
            },
        )
        plant = PlantParams(
            tank_pressure_max=pl["tank_pressure_max_kpa"],
            tank_volume=pl["tank_volume"],
            chamber_volume=pl["chamber_volume"],
            c_in=pl["c_in"],
            c_out=pl["c_out"],
            pump_rate=pl["pump_rate"],
        )
        ct = _take(raw.get("controller"), "controller", {"deadband_kpa": 1.0, "control_period_s": 0.001})
        controller = ControllerConfig(deadband=ct["deadband_kpa"], control_period=ct["control_period_s"])
        tr = _take(
            raw.get("tracking"),
            "tracking",
            {"high_kpa": 40.0, "low_kpa": 10.0, "start_interval_s": 1.3, "decrement_s": 0.08, "floor_s": 0.2},
        )
        tracking = TrackingConfig(
            high=tr["high_kpa"],
            low=tr["low_kpa"],
            start_interval=tr["start_interval_s"],
            decrement=tr["decrement_s"],
            floor=tr["floor_s"],
        )
        ho = _take(
            raw.get("holding"),
            "holding",
            {"hold_pressure_kpa": 40.0, "volume": 1.0, "arm": 0.2, "joint_stiffness": 0.0},
        )
        holding = HoldingParams(
            hold_pressure=ho["hold_pressure_kpa"],
            volume=ho["volume"],
            arm=ho["arm"],
            joint_stiffness=ho["joint_stiffness"],
        )
        st = _take(
            raw.get("stiffness"),
            "stiffness",
            {"k_lateral_n_per_mm": 1.0, "k_structural_n_per_mm": 9.0, "deflection_limit_mm": 15.0},
        )
        stiffness = StiffnessModel(
            k_lateral=st["k_lateral_n_per_mm"],
            k_structural=st["k_structural_n_per_mm"],
            deflection_limit=st["deflection_limit_mm"],
        )
        pa = _take(
            raw.get("payload"),
            "payload",
            {"friction": 0.85, "normal_force_n": 65.0, "base_wrap": 1.0, "wrap_gain": 1.8733},
        )
        payload = PayloadParams(
            friction=pa["friction"],
            normal_force=pa["normal_force_n"],
            base_wrap=pa["base_wrap"],
            wrap_gain=pa["wrap_gain"],
        )
        po = _take(raw.get("poke"), "poke", {"scale": 0.4, "floor_mm": 1.0})
        poke = PokeParams(scale=po["scale"], floor=po["floor_mm"])
        ca = _take(
            raw.get("camera"),
            "camera",
            {
                "fx": 600.0,
                "fy": 600.0,
                "cx": 320.0,
                "cy": 240.0,
                "extrinsic_xyz_mm": [0.0, 0.0, 0.0],
                "extrinsic_rpy_deg": [0.0, 0.0, 0.0],
                "table_depth_mm": 1000.0,
                "depth_sigma_mm": 11.0,
            },
        )
        camera = CameraModel(
            fx=ca["fx"],
            fy=ca["fy"],
            cx=ca["cx"],
            cy=ca["cy"],
            extrinsic_xyz=tuple(float(v) for v in ca["extrinsic_xyz_mm"]),
            extrinsic_rpy=tuple(math.radians(v) for v in ca["extrinsic_rpy_deg"]),
            table_depth=ca["table_depth_mm"],
            depth_sigma=ca["depth_sigma_mm"],
        )
        hs = _take(raw.get("hsv"), "hsv", {"lower": [100, 100, 50], "upper": [130, 255, 255]})
        hsv = HsvRange(lower=tuple(hs["lower"]), upper=tuple(hs["upper"]))
        gr = _take(
            raw.get("grasp"),
            "grasp",
            {
                "approach_angle_deg": 45.0,
                "overpress_mm": 25.0,
                "standoff_mm": 80.0,
                "inset_px": 15.0,
                "open_angles_deg": [0.0, 0.0, 0.0],
                "pinch_angles_deg": [28.6, 28.6, 0.0],
            },
        )
        grasp = GraspConfig(
            approach_angle=gr["approach_angle_deg"],
            overpress=gr["overpress_mm"],
            standoff=gr["standoff_mm"],
            inset_px=gr["inset_px"],
            open_angles=JointAngles(*(math.radians(v) for v in gr["open_angles_deg"])),
            pinch_angles=JointAngles(*(math.radians(v) for v in gr["pinch_angles_deg"])),
        )
        ex = _take(
            raw.get("export"),
            "export",
            {
                "sphere_count": 5,
                "large_radius_mm": 15.25,
                "small_radius_mm": 18.78,
                "large_length_mm": 44.0,
                "small_length_mm": 39.0,
            },
        )
        export = ExportConfig(
            sphere_count=int(ex["sphere_count"]),
            large_bellows=BellowsGeometry(length=ex["large_length_mm"], radius=ex["large_radius_mm"]),
            small_bellows=BellowsGeometry(length=ex["small_length_mm"], radius=ex["small_radius_mm"]),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid config value: {e}") from e

    return ToolkitConfig(
        geometry=geometry,
        limits=limits,
        maps=maps,
        p_max=float(pr["p_max_kpa"]),
        lateral_bias=float(pr["lateral_bias_kpa"]),
        plant=plant,
        controller=controller,
        tracking=tracking,
        holding=holding,
        stiffness=stiffness,
        payload=payload,
        poke=poke,
        camera=camera,
        hsv=hsv,
        grasp=grasp,
        export=export,
    )
