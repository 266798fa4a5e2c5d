"""Momentum analysis of rigid-part human motion.

Mass properties from part meshes, whole-body linear and angular momentum,
momentum-matching losses, plausibility metrics and a spectral detector of
implausible high-frequency momentum.
"""

from .body_model import BodySpec, PartMesh, PartProperties, build_body_spec, default_body, load_body_spec, save_body_spec
from .errors import DataError, MomoError
from .losses import LossReport, LossWeights, build_loss_report, geman_mcclure
from .metrics import PlausibilityReport, composite_measure, plausibility_report, rte
from .momentum import MomentumProfile, momentum_profile, swing_twist
from .motion import MotionSequence, load_motion, part_centroids, save_motion, time_derivative
from .spectrum import DetectorCalibration, calibrate_detector, default_k0, high_freq_score, is_implausible, spectral_damping_check
from .synth import SynthConfig, clean_corpus, generate, inject_hf_corruption, inject_noise

__version__ = "0.1.0"

__all__ = [
    "BodySpec", "PartMesh", "PartProperties", "build_body_spec", "default_body", "load_body_spec", "save_body_spec",
    "DataError", "MomoError",
    "LossReport", "LossWeights", "build_loss_report", "geman_mcclure",
    "PlausibilityReport", "composite_measure", "plausibility_report", "rte",
    "MomentumProfile", "momentum_profile", "swing_twist",
    "MotionSequence", "load_motion", "part_centroids", "save_motion", "time_derivative",
    "DetectorCalibration", "calibrate_detector", "default_k0", "high_freq_score", "is_implausible", "spectral_damping_check",
    "SynthConfig", "clean_corpus", "generate", "inject_hf_corruption", "inject_noise",
]
