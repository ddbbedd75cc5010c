"""Secure capacity and random-coding simulation for perturbed content hashing."""
from .capacity import (
    BinaryParams,
    CapacityResult,
    ProblemSpec,
    SolverConfig,
    binary_capacity_closed_form,
    capacity_sweep,
    information_capacity,
)
from .codec_sim import CodeParams, DecoderConfig, run_attack_experiment, run_error_experiment
from .prob_core import Channel, Dist, JointUX, JointUY, mutual_information
from .security import DistortionMatrix, max_security, sigma

__version__ = "0.1.0"
