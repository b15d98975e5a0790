"""Articulated-object kinematic sequence toolkit.

Represents multi-DoF articulated objects as ordered chains of one-DoF
joints (a kinematic sequence machine), synthesizes labeled point-cloud
demonstrations of desk-scale objects, recovers the chain from a
demonstration by screw-geometric fitting, scores predictions against
ground truth, and emits end-effector waypoint trajectories.
"""

from .core import FORMAT_VERSION, JointNode, JointType, Oksm, load_oksm, save_oksm
from .errors import (
    AmbiguousJoint,
    ArityMismatch,
    DegenerateConfiguration,
    GraspOnAxis,
    InvalidScript,
    IoError,
    MissingPrediction,
    NoMotionDetected,
    NonUnitInput,
    NullMotion,
    OksmError,
    ParseError,
    UnknownCategory,
    ValidationError,
    ZeroDelta,
)
from .estimator import EstimatorConfig, LinkTrack, estimate_oksm
from .geometry import (
    RigidTransform,
    ScrewParams,
    apply_transform,
    canonical_direction,
    kabsch_fit,
    rotation_about_axis,
    screw_from_transform,
    transform_from_screw,
)
from .metrics import (
    EvalReport,
    axis_direction_error,
    axis_position_error,
    composite_score,
    dof_accuracy,
    evaluate_dataset,
    order_accuracy,
    state_error,
)
from .planner import WaypointPlan, plan_joint, plan_sequence
from .synthgen import (
    ArticulatedTemplate,
    CATEGORIES,
    DatasetManifest,
    DemoSequence,
    GenConfig,
    MotionScript,
    generate_dataset,
    make_template,
    render_sequence,
    sample_surface,
)

__version__ = "0.1.0"
