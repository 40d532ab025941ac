"""softgrip: modeling, actuation, compliance and grasp-planning toolkit for a
6-DOF soft-rigid hybrid pneumatic gripper."""

__version__ = "0.1.0"

from .kinematics import (  # noqa: F401
    JointAngles,
    JointLimits,
    LinkGeometry,
    forward_kinematics,
    forward_chain,
    inverse_kinematics,
    workspace_sample,
)
from .pressure import (  # noqa: F401
    CalibrationSample,
    ChannelMaps,
    LinearMap,
    PressureVector,
    angles_from_pressures,
    fit_linear_map,
    fk_from_pressures,
    pressures_from_angles,
)
