"""tunneltrainer: real-time kinematic feedback for tunnel-guided training.

The engine scores live hand-centroid samples against a via-point tunnel,
emits per-sphere color/scale feedback, and ships with the offline error
pipeline, the study statistics toolkit, a 4-DOF arm model, deterministic
simulators for the with/without-feedback conditions and a line-JSON session
server.
"""

from .analytics import (ErrorSummary, RepetitionSet, err_task, joint_err_task,
                        sample_rmse, segment_repetitions, time_normalize)
from .arm import ArmGeometry, forward_kinematics, inverse_kinematics
from .config import EngineConfig, default_config, load_config
from .errors import TunnelTrainerError
from .feedback import (FeedbackMode, FeedbackParams, FeedbackUpdate, HandSample,
                       Phase, Session, TunnelState, feedback_for_error,
                       record_demonstration)
from .geometry import (ConfidenceInterval, Frame, Trajectory, arc_length,
                       frame_from_three_points, generate_exercise,
                       resample_polyline, transform_point, vec3)
from .pipeline import analyze_log_file, analyze_messages, run_default_sweep
from .simulate import (NoiseModel, SimConfig, run_closed_loop, run_open_loop,
                       to_joint_log)
from .spatial import SpatialIndex, build_spatial_index, nearest_via_point
from .stats import (cronbach_alpha, ks_normality, ols_regression, pearson,
                    sus_score, wilcoxon_signed_rank)
from .storage import load_trajectory, save_trajectory

__version__ = "0.1.0"

__all__ = [
    "ArmGeometry", "ConfidenceInterval", "EngineConfig", "ErrorSummary",
    "FeedbackMode", "FeedbackParams", "FeedbackUpdate", "Frame", "HandSample",
    "NoiseModel", "Phase", "RepetitionSet", "Session", "SimConfig",
    "SpatialIndex", "Trajectory", "TunnelState", "TunnelTrainerError",
    "analyze_log_file", "analyze_messages", "arc_length", "build_spatial_index",
    "cronbach_alpha", "default_config", "err_task", "feedback_for_error",
    "forward_kinematics", "frame_from_three_points", "generate_exercise",
    "inverse_kinematics", "joint_err_task", "ks_normality", "load_config",
    "load_trajectory", "nearest_via_point", "ols_regression", "pearson",
    "record_demonstration", "resample_polyline", "run_closed_loop",
    "run_default_sweep", "run_open_loop", "sample_rmse", "save_trajectory",
    "segment_repetitions", "sus_score", "time_normalize", "to_joint_log",
    "transform_point", "vec3", "wilcoxon_signed_rank",
]
