"""Simulated pneumatic plant, bang-bang pressure loop, control modes and benchmarks.

The plant is an isothermal ideal-gas model: each chamber stores a gas
inventory ``n`` and shows pressure ``n / volume``.  Chambers are numbered
0-3 for finger A and 4-7 for finger B, with 0 and 4 the distal actuators,
1/3 (5/7) the lateral pair and 2 (6) the middle root actuator.
"""

import enum
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .pressure import (
    DEFAULT_LATERAL_BIAS,
    DEFAULT_MAPS,
    DEFAULT_P_MAX,
    ChannelMaps,
    pressures_from_angles,
)
from .kinematics import JointAngles

__all__ = [
    "ValveState",
    "Mode",
    "ModeCommand",
    "ModeAction",
    "PlantParams",
    "ControllerConfig",
    "PneumaticState",
    "step_plant",
    "bang_bang_controller",
    "apply_mode",
    "TrackingCycle",
    "TrackingResult",
    "make_group_schedule",
    "run_tracking_test",
    "HoldingParams",
    "holding_recovery_test",
]

N_CHAMBERS = 8


class ValveState(enum.Enum):
    INFLATE = "inflate"
    EXHAUST = "exhaust"
    CLOSED = "closed"
    LOCKED = "locked"


class Mode(enum.Enum):
    POWER = "power"
    ABAD = "abad"
    HOLDING = "holding"


@dataclass(frozen=True)
class PlantParams:
    """Flow/volume constants.

    Chosen so that a chamber time constant (volume / c_in = 20 ms) settles a
    full-range step well inside a 0.2 s reference cycle, which is what makes
    the 5 Hz tracking benchmark pass with the default controller.
    """

    tank_pressure_max: float = 80.0  # kPa
    tank_volume: float = 100.0  # volume units
    chamber_volume: float = 1.0  # volume units, fixed per bellows
    c_in: float = 50.0  # inflate flow coefficient, vol/s
    c_out: float = 50.0  # exhaust flow coefficient, vol/s
    pump_rate: float = 2000.0  # gas units/s into the tank

    def __post_init__(self):
        vals = (
            self.tank_pressure_max,
            self.tank_volume,
            self.chamber_volume,
            self.c_in,
            self.c_out,
            self.pump_rate,
        )
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise ValueError("plant parameters must be finite and positive")


@dataclass(frozen=True)
class ControllerConfig:
    deadband: float = 1.0  # kPa
    control_period: float = 0.001  # s

    def __post_init__(self):
        if self.deadband < 0.0:
            raise ValueError("deadband must be >= 0")
        if not self.control_period > 0.0:
            raise ValueError("control_period must be > 0")


@dataclass(frozen=True)
class PneumaticState:
    tank_pressure: float
    chamber_pressures: tuple  # 8 kPa values
    chamber_gas: tuple  # 8 inventories
    valve_states: tuple  # 8 ValveState
    pump_on: bool = True
    time: float = 0.0

    @classmethod
    def initial(cls, plant: PlantParams, pump_on: bool = True) -> "PneumaticState":
        return cls(
            tank_pressure=plant.tank_pressure_max,
            chamber_pressures=(0.0,) * N_CHAMBERS,
            chamber_gas=(0.0,) * N_CHAMBERS,
            valve_states=(ValveState.CLOSED,) * N_CHAMBERS,
            pump_on=pump_on,
            time=0.0,
        )

    def total_gas(self, plant: PlantParams) -> float:
        return self.tank_pressure * plant.tank_volume + sum(self.chamber_gas)

    def with_valves(self, valves: Sequence[ValveState]) -> "PneumaticState":
        valves = tuple(valves)
        if len(valves) != N_CHAMBERS:
            raise ValueError(f"expected {N_CHAMBERS} valve states")
        return replace(self, valve_states=valves)


def step_plant(state: PneumaticState, dt: float, plant: PlantParams) -> PneumaticState:
    """Advance the plant by one explicit step of length ``dt``.

    Inflation moves gas tank->chamber, capped at the equalising amount so
    chamber pressure never overshoots tank pressure; exhaust vents to
    atmosphere, capped at the chamber inventory.  Locked and closed chambers
    keep their gas bit-for-bit.
    """
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError("dt must be finite and positive")
    vt = plant.tank_volume
    vc = plant.chamber_volume
    tank_gas = state.tank_pressure * vt
    gas = list(state.chamber_gas)
    pressures = list(state.chamber_pressures)

    for i, valve in enumerate(state.valve_states):
        if valve is ValveState.INFLATE:
            pc = pressures[i]
            pt = tank_gas / vt
            dp = pt - pc
            flow = plant.c_in * dp * dt
            equalise = dp / (1.0 / vt + 1.0 / vc)
            moved = min(flow, equalise) if dp >= 0.0 else max(flow, equalise)
            tank_gas -= moved
            gas[i] += moved
            pressures[i] = gas[i] / vc
        elif valve is ValveState.EXHAUST:
            vented = min(plant.c_out * pressures[i] * dt, gas[i])
            gas[i] -= vented
            pressures[i] = gas[i] / vc

    if state.pump_on:
        tank_gas = min(tank_gas + plant.pump_rate * dt, plant.tank_pressure_max * vt)

    return PneumaticState(
        tank_pressure=tank_gas / vt,
        chamber_pressures=tuple(pressures),
        chamber_gas=tuple(gas),
        valve_states=state.valve_states,
        pump_on=state.pump_on,
        time=state.time + dt,
    )


def bang_bang_controller(
    reference: float, measured: float, cfg: ControllerConfig = ControllerConfig()
) -> ValveState:
    """Stateless valve decision for one chamber."""
    if measured < reference - cfg.deadband:
        return ValveState.INFLATE
    if measured > reference + cfg.deadband:
        return ValveState.EXHAUST
    return ValveState.CLOSED


@dataclass(frozen=True)
class ModeCommand:
    mode: Mode
    target_pressure: Optional[float] = None  # POWER, kPa
    target_angles: Optional[JointAngles] = None  # ABAD

    def __post_init__(self):
        if self.mode is Mode.POWER and self.target_pressure is None:
            raise ValueError("Power mode needs a target pressure")
        if self.mode is Mode.ABAD and self.target_angles is None:
            raise ValueError("Ab/Ad mode needs target joint angles")
        if self.mode is Mode.HOLDING and (
            self.target_pressure is not None or self.target_angles is not None
        ):
            raise ValueError("Holding mode takes no parameters")


@dataclass(frozen=True)
class ModeAction:
    """References per chamber (None = keep current) plus a lock request."""

    references: Optional[tuple] = None
    lock: bool = False


def apply_mode(
    cmd: ModeCommand,
    maps: ChannelMaps = DEFAULT_MAPS,
    lateral_bias: float = DEFAULT_LATERAL_BIAS,
    p_max: float = DEFAULT_P_MAX,
) -> ModeAction:
    """Translate a mode command into chamber references / lock commands.

    Power inflates every actuator toward the shared target; Ab/Ad decouples
    the per-joint references through the channel maps (same target for both
    fingers); Holding locks all valves and keeps the references.
    """
    if cmd.mode is Mode.POWER:
        return ModeAction(references=(float(cmd.target_pressure),) * N_CHAMBERS)
    if cmd.mode is Mode.ABAD:
        p = pressures_from_angles(cmd.target_angles, maps, lateral_bias, p_max)
        finger = (p.p0, p.p1, p.p2, p.p3)
        return ModeAction(references=finger + finger)
    return ModeAction(lock=True)


@dataclass(frozen=True)
class TrackingCycle:
    """One reference cycle: hold ``references`` for ``interval`` seconds."""

    interval: float
    references: tuple  # 8 kPa values


@dataclass
class TrackingResult:
    times: np.ndarray
    references: np.ndarray  # (steps, 8)
    measured: np.ndarray  # (steps, 8)
    cycle_intervals: List[float]
    cycle_reached: List[bool]
    cycle_channel_reached: List[tuple]

    def reach_report(self) -> str:
        lines = []
        for i, (interval, ok) in enumerate(
            zip(self.cycle_intervals, self.cycle_reached)
        ):
            lines.append(
                f"cycle {i:2d}  interval {interval:.2f} s  "
                f"{'reached' if ok else 'NOT reached'}"
            )
        return "\n".join(lines)


def make_group_schedule(
    group: int = 1,
    high: float = 40.0,
    low: float = 10.0,
    start_interval: float = 1.3,
    decrement: float = 0.08,
    floor: float = 0.2,
) -> List[TrackingCycle]:
    """Built-in reference schedules for the three tracking groups.

    Group 1: both fingers open/close together (all chambers toggle).
    Group 2: both fingers swing the same direction (lateral pairs antiphase).
    Group 3: the fingers swing in opposite directions.
    The cycle interval starts at ``start_interval`` and shrinks by
    ``decrement`` per wave; the schedule ends with the first interval below
    ``floor``.
    """
    if group not in (1, 2, 3):
        raise ValueError("group must be 1, 2 or 3")
    mid = 0.5 * (high + low)
    cycles = []
    interval = start_interval
    k = 0
    while True:
        a, b = (high, low) if k % 2 == 0 else (low, high)
        if group == 1:
            refs = (a,) * N_CHAMBERS
        elif group == 2:
            refs = (mid, a, mid, b, mid, a, mid, b)
        else:
            refs = (mid, a, mid, b, mid, b, mid, a)
        cycles.append(TrackingCycle(interval=interval, references=refs))
        if interval < floor:
            break
        k += 1
        interval = round(interval - decrement, 10)
    return cycles


def run_tracking_test(
    schedule: Sequence[TrackingCycle],
    cfg: ControllerConfig = ControllerConfig(),
    plant: PlantParams = PlantParams(),
    initial: Optional[PneumaticState] = None,
    record: bool = True,
) -> TrackingResult:
    """Closed-loop simulation of the bang-bang pressure loop over a schedule.

    A cycle is marked reached when every chamber entered the deadband around
    its reference at least once during the cycle.
    """
    if not schedule:
        raise ValueError("schedule must contain at least one cycle")
    state = initial if initial is not None else PneumaticState.initial(plant)
    dt = cfg.control_period
    times, refs_log, meas_log = [], [], []
    intervals, reached_flags, channel_flags = [], [], []

    for cycle in schedule:
        refs = cycle.references
        steps = max(1, int(round(cycle.interval / dt)))
        hit = [False] * N_CHAMBERS
        for _ in range(steps):
            valves = []
            for i in range(N_CHAMBERS):
                if state.valve_states[i] is ValveState.LOCKED:
                    valves.append(ValveState.LOCKED)
                else:
                    valves.append(bang_bang_controller(refs[i], state.chamber_pressures[i], cfg))
            state = step_plant(state.with_valves(valves), dt, plant)
            for i in range(N_CHAMBERS):
                if abs(state.chamber_pressures[i] - refs[i]) <= cfg.deadband:
                    hit[i] = True
            if record:
                times.append(state.time)
                refs_log.append(refs)
                meas_log.append(state.chamber_pressures)
        intervals.append(cycle.interval)
        channel_flags.append(tuple(hit))
        reached_flags.append(all(hit))

    return TrackingResult(
        times=np.array(times),
        references=np.array(refs_log) if refs_log else np.empty((0, N_CHAMBERS)),
        measured=np.array(meas_log) if meas_log else np.empty((0, N_CHAMBERS)),
        cycle_intervals=intervals,
        cycle_reached=reached_flags,
        cycle_channel_reached=channel_flags,
    )


@dataclass(frozen=True)
class HoldingParams:
    """Locked-gas spring for one joint: an antagonistic chamber pair whose
    volumes change linearly with the joint angle (isothermal)."""

    hold_pressure: float = 40.0  # kPa at equilibrium
    volume: float = 1.0  # rest volume per chamber
    arm: float = 0.2  # volume change per rad of deflection
    joint_stiffness: float = 0.0  # extra structural stiffness, torque/rad

    @property
    def gas(self) -> float:
        return self.hold_pressure * self.volume

    def restoring_torque(self, angle: float) -> float:
        v1 = self.volume - self.arm * angle
        v2 = self.volume + self.arm * angle
        return self.arm * (self.gas / v1 - self.gas / v2) + self.joint_stiffness * angle

    @property
    def linearized_stiffness(self) -> float:
        return 2.0 * self.gas * self.arm**2 / self.volume**2 + self.joint_stiffness


def holding_recovery_test(
    disturbance: Sequence[float],
    params: HoldingParams = HoldingParams(),
) -> np.ndarray:
    """Quasi-static angle trace of a locked joint under an external torque profile.

    The locked gas acts as a conservative (isothermal) spring, so once the
    disturbance returns to zero the equilibrium angle returns exactly to its
    pre-disturbance value.
    """
    torques = np.asarray(disturbance, dtype=float)
    if not np.all(np.isfinite(torques)):
        raise ValueError("disturbance profile must be finite")
    limit = 0.999 * params.volume / params.arm
    angles = np.empty_like(torques)
    for i, tau in enumerate(torques):
        if tau == 0.0:
            angles[i] = 0.0
            continue
        f = lambda th: params.restoring_torque(th) - tau
        angles[i] = brentq(f, -limit, limit, xtol=1e-12, rtol=1e-14)
    return angles
