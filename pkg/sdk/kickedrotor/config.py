from __future__ import annotations

import os
import sys


def env(name: str, default: str | None = None) -> str | None:
    value = os.getenv(name)
    if value is None or value == "":
        return default
    return value


def env_bool(name: str, default: bool = False) -> bool:
    value = env(name)
    if value is None:
        return default
    return value.lower() in {"1", "true", "yes", "on"}


def log(message: str) -> None:
    """Print to stderr (keeps stdout clean for reports and file paths)."""
    if QUIET:
        return
    print(message, file=sys.stderr, flush=True)


KERNEL_TOL = float(env("QKR_KERNEL_TOL", "1e-14"))
MAX_SITES = int(env("QKR_MAX_SITES", str(2**24)))
GROWTH_CHUNK = int(env("QKR_GROWTH_CHUNK", "1024"))
EDGE_THRESHOLD = float(env("QKR_EDGE_THRESHOLD", "1e-12"))
WORKERS = int(env("QKR_WORKERS", str(os.cpu_count() or 1)))
QUIET = env_bool("QKR_QUIET", False)
DEFAULT_SEED = int(env("QKR_SEED", "20240601"))

# Run lengths are Fibonacci numbers so aperiodic blocks complete.
PRIMARY_STEPS = 987
SECONDARY_STEPS = 4181

NORM_DRIFT_ABORT = 1e-8
# Largest |a|^2 a step may push off the lattice before it is regrown.
LEAK_AMPLITUDE_SQ = 1e-28
EDGE_FRACTION = 0.05
