"""Certified H2 analysis, observer synthesis and spectral simulation for
coupled ODE-PDE systems in PIE (partial integral equation) form."""

from ._piekit import (
    PIESystem,
    emit_csv,
    h2_norm_bound,
    preset_system,
    simulate,
    simulate_observer,
    synthesize_estimator,
)

__all__ = [
    "PIESystem",
    "emit_csv",
    "h2_norm_bound",
    "preset_system",
    "simulate",
    "simulate_observer",
    "synthesize_estimator",
]
