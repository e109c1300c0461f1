"""
Resonant quantum kicked rotor under periodic, random and Fibonacci kicks.

Usage:
    from kickedrotor import PropagatorConfig, ResonanceParams, SequenceSpec, build_sequence, evolve

    config = PropagatorConfig(
        resonance=ResonanceParams.create(1, 3),
        sequence=build_sequence(SequenceSpec("fibonacci"), 5.0, 10.0, 987),
    )
    series, state = evolve(config, record_schedule(987))
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    ConfigError,
    FitError,
    GridLimitError,
    KickedRotorError,
    NormDriftError,
    NumericalError,
    VerificationError,
)
from .obs import ExponentFit, MomentSeries, fit_exponent, record_schedule  # noqa: E402
from .qkr import (  # noqa: E402
    GridPolicy,
    PropagatorConfig,
    ResonanceParams,
    RotorState,
    evolve,
    new_state_delta,
    step,
)
from .seqgen import KickSequence, SequenceSpec, build_sequence  # noqa: E402

__all__ = [
    "evolve",
    "step",
    "new_state_delta",
    "fit_exponent",
    "record_schedule",
    "build_sequence",
    "ExponentFit",
    "GridPolicy",
    "KickSequence",
    "MomentSeries",
    "PropagatorConfig",
    "ResonanceParams",
    "RotorState",
    "SequenceSpec",
    "KickedRotorError",
    "ConfigError",
    "NumericalError",
    "NormDriftError",
    "GridLimitError",
    "FitError",
    "VerificationError",
]
