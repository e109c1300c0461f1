"""
Experiment orchestration: config files, parameter sweeps, verification and outputs.

Config files are JSON with nested sections:

    {
      "experiment": "simulate",
      "steps": 4181,
      "seed": 7,
      "output": "runs/sequences",
      "resonances": [[1, 3]],
      "kicks": {"kappa1": 5.0, "kappa2": 10.0, "grid": [], "control": true},
      "sequence": {"kind": "fibonacci", "pattern": "AB", "alpha": 0.5, "reverse_blocks": false},
      "record": {"per_decade": 64, "window": null},
      "numerics": {"method": "split", "convention": "standard", "kernel_tol": 1e-14},
      "grid": {"initial_half_width": 0, "growth_chunk": 1024, "edge_threshold": 1e-12, "max_sites": 16777216},
      "classical": {"particles": 10000, "partitions": 4, "kappa1": 0.5, "kappa2": 0.8},
      "cases": [{"name": "c", "p": 1, "q": 3, "sequence": {"kind": "fibonacci"}}]
    }

Every key is optional; unknown keys are rejected with their dotted path.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .analytic import antiresonance_sigma, primary_sigma
from .classical import (
    DEFAULT_PARTICLES,
    DEFAULT_PARTITIONS,
    ClassicalEnsemble,
    classical_exponent,
    ensemble_evolve,
    jacobian_determinant,
)
from .config import (
    DEFAULT_SEED,
    EDGE_THRESHOLD,
    GROWTH_CHUNK,
    KERNEL_TOL,
    MAX_SITES,
    PRIMARY_STEPS,
    SECONDARY_STEPS,
    WORKERS,
    log,
)
from .exceptions import ConfigError, FitError, NumericalError, VerificationError
from .obs import MomentSeries, fit_exponent, fit_moment_exponent, record_schedule
from .obs import sigma as sigma_of
from .qkr import (
    CONVENTIONS,
    DIRECT_CONVOLUTION,
    SPLIT_SPECTRAL,
    GridPolicy,
    Propagator,
    PropagatorConfig,
    ResonanceParams,
    commutator_norm,
    evolve,
    new_state_delta,
    overlap_with_delta,
)
from .seqgen import KINDS, SequenceSpec, build_sequence
from .specfun import bessel_row, bessel_series, kick_kernel

EXPERIMENTS = ("simulate", "sweep_resonance", "sweep_kappa", "classical", "verify")
DEFAULT_RESONANCE = ((1, 3),)
METHOD_NAMES = {"split": SPLIT_SPECTRAL, "direct": DIRECT_CONVOLUTION}

SERIES_CSV = "series.csv"
PQ_CSV = "c_vs_pq.csv"
KAPPA_CSV = "c_vs_kappa.csv"
CLASSICAL_CSV = "classical.csv"
MANIFEST = "manifest.json"

_TOP_KEYS = {
    "experiment", "steps", "seed", "output", "resonances", "kicks", "sequence",
    "record", "numerics", "grid", "classical", "cases",
}
_SECTION_KEYS = {
    "kicks": {"kappa1", "kappa2", "grid", "control"},
    "sequence": {"kind", "pattern", "alpha", "reverse_blocks"},
    "record": {"per_decade", "window"},
    "numerics": {"method", "convention", "kernel_tol"},
    "grid": {"initial_half_width", "growth_chunk", "edge_threshold", "max_sites"},
    "classical": {"particles", "partitions", "kappa1", "kappa2"},
}
_CASE_KEYS = {"name", "p", "q", "kappa1", "kappa2", "sequence", "steps"}


@dataclass(frozen=True)
class CaseConfig:
    """One sigma trace of a `simulate` run; unset fields fall back to the run's."""
    name: str
    p: int
    q: int
    kappa1: Optional[float] = None
    kappa2: Optional[float] = None
    sequence: dict = field(default_factory=dict)
    steps: Optional[int] = None


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "simulate"
    steps: Optional[int] = None
    seed: int = DEFAULT_SEED
    output: str = "runs"
    resonances: Tuple[Tuple[int, int], ...] = ()
    kappa1: float = 5.0
    kappa2: float = 10.0
    kappa_grid: Tuple[float, ...] = ()
    control: bool = True
    sequence_kind: str = "fibonacci"
    pattern: str = "AB"
    alpha: float = 0.5
    reverse_blocks: bool = False
    per_decade: int = 64
    window: Optional[Tuple[float, float]] = None
    method: str = "split"
    convention: str = "standard"
    kernel_tol: float = KERNEL_TOL
    initial_half_width: int = 0
    growth_chunk: int = GROWTH_CHUNK
    edge_threshold: float = EDGE_THRESHOLD
    max_sites: int = MAX_SITES
    particles: int = DEFAULT_PARTICLES
    partitions: int = DEFAULT_PARTITIONS
    classical_kappa1: float = 0.5
    classical_kappa2: float = 0.8
    cases: Tuple[CaseConfig, ...] = ()

    def sequence_spec(self, overrides: Optional[dict] = None) -> SequenceSpec:
        values = {
            "kind": self.sequence_kind,
            "pattern": self.pattern,
            "alpha": self.alpha,
            "reverse_blocks": self.reverse_blocks,
        }
        values.update(overrides or {})
        return SequenceSpec(seed=self.seed, **values)

    def grid_policy(self) -> GridPolicy:
        return GridPolicy(
            initial_half_width=self.initial_half_width,
            growth_chunk=self.growth_chunk,
            edge_threshold=self.edge_threshold,
            max_sites=self.max_sites,
        )

    def resonance_pairs(self) -> Tuple[Tuple[int, int], ...]:
        """
        Configured resonances. Without any, sweep_resonance covers
        default_resonances() and every other experiment runs 1/3.
        """
        if self.resonances:
            return self.resonances
        if self.experiment == "sweep_resonance":
            return default_resonances()
        return DEFAULT_RESONANCE

    def steps_for(self, q: int) -> int:
        if self.steps is not None:
            return self.steps
        return PRIMARY_STEPS if q == 1 else SECONDARY_STEPS

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "steps": self.steps,
            "seed": self.seed,
            "output": self.output,
            "resonances": [list(pq) for pq in self.resonances],
            "kicks": {
                "kappa1": self.kappa1,
                "kappa2": self.kappa2,
                "grid": list(self.kappa_grid),
                "control": self.control,
            },
            "sequence": {
                "kind": self.sequence_kind,
                "pattern": self.pattern,
                "alpha": self.alpha,
                "reverse_blocks": self.reverse_blocks,
            },
            "record": {
                "per_decade": self.per_decade,
                "window": list(self.window) if self.window else None,
            },
            "numerics": {
                "method": self.method,
                "convention": self.convention,
                "kernel_tol": self.kernel_tol,
            },
            "grid": {
                "initial_half_width": self.initial_half_width,
                "growth_chunk": self.growth_chunk,
                "edge_threshold": self.edge_threshold,
                "max_sites": self.max_sites,
            },
            "classical": {
                "particles": self.particles,
                "partitions": self.partitions,
                "kappa1": self.classical_kappa1,
                "kappa2": self.classical_kappa2,
            },
            "cases": [asdict(case) for case in self.cases],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        _reject_unknown(data, _TOP_KEYS, "")
        sections = {}
        for name, allowed in _SECTION_KEYS.items():
            section = data.get(name) or {}
            if not isinstance(section, dict):
                raise ConfigError(f"section {name} must be an object", name)
            _reject_unknown(section, allowed, name)
            sections[name] = section

        kicks, seq, record = sections["kicks"], sections["sequence"], sections["record"]
        numerics, grid, classical = sections["numerics"], sections["grid"], sections["classical"]
        defaults = cls()
        window = record.get("window")
        config = cls(
            experiment=_get(data, "experiment", str, defaults.experiment),
            steps=_get(data, "steps", int, None),
            seed=_get(data, "seed", int, defaults.seed),
            output=_get(data, "output", str, defaults.output),
            resonances=tuple(_pair(item, f"resonances[{i}]") for i, item in enumerate(data.get("resonances", []))),
            kappa1=_get(kicks, "kappa1", float, defaults.kappa1, "kicks"),
            kappa2=_get(kicks, "kappa2", float, defaults.kappa2, "kicks"),
            kappa_grid=tuple(float(k) for k in kicks.get("grid", [])),
            control=_get(kicks, "control", bool, defaults.control, "kicks"),
            sequence_kind=_get(seq, "kind", str, defaults.sequence_kind, "sequence"),
            pattern=_get(seq, "pattern", str, defaults.pattern, "sequence"),
            alpha=_get(seq, "alpha", float, defaults.alpha, "sequence"),
            reverse_blocks=_get(seq, "reverse_blocks", bool, defaults.reverse_blocks, "sequence"),
            per_decade=_get(record, "per_decade", int, defaults.per_decade, "record"),
            window=(float(window[0]), float(window[1])) if window else None,
            method=_get(numerics, "method", str, defaults.method, "numerics"),
            convention=_get(numerics, "convention", str, defaults.convention, "numerics"),
            kernel_tol=_get(numerics, "kernel_tol", float, defaults.kernel_tol, "numerics"),
            initial_half_width=_get(grid, "initial_half_width", int, defaults.initial_half_width, "grid"),
            growth_chunk=_get(grid, "growth_chunk", int, defaults.growth_chunk, "grid"),
            edge_threshold=_get(grid, "edge_threshold", float, defaults.edge_threshold, "grid"),
            max_sites=_get(grid, "max_sites", int, defaults.max_sites, "grid"),
            particles=_get(classical, "particles", int, defaults.particles, "classical"),
            partitions=_get(classical, "partitions", int, defaults.partitions, "classical"),
            classical_kappa1=_get(classical, "kappa1", float, defaults.classical_kappa1, "classical"),
            classical_kappa2=_get(classical, "kappa2", float, defaults.classical_kappa2, "classical"),
            cases=tuple(_case(item, i) for i, item in enumerate(data.get("cases", []))),
        )
        config.validate()
        return config

    def validate(self) -> None:
        """Check every module precondition that can be checked before launch."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment: {self.experiment}", "experiment")
        if self.steps is not None and self.steps < 0:
            raise ConfigError("steps must be >= 0", "steps")
        if self.method not in METHOD_NAMES:
            raise ConfigError(f"method must be one of {sorted(METHOD_NAMES)}", "numerics.method")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"convention must be one of {list(CONVENTIONS)}", "numerics.convention")
        if self.kernel_tol <= 0 or self.kernel_tol > 1e-2:
            raise ConfigError("kernel_tol must be in (0, 1e-2]", "numerics.kernel_tol")
        if self.sequence_kind not in KINDS:
            raise ConfigError(f"sequence kind must be one of {list(KINDS)}", "sequence.kind")
        if not self.pattern or set(self.pattern) - {"A", "B"}:
            raise ConfigError("pattern must be a nonempty string over A and B", "sequence.pattern")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must be in [0, 1]", "sequence.alpha")
        if self.per_decade < 1:
            raise ConfigError("per_decade must be >= 1", "record.per_decade")
        if self.window and not self.window[0] < self.window[1]:
            raise ConfigError("window must satisfy n_lo < n_hi", "record.window")
        if self.growth_chunk < 1:
            raise ConfigError("growth_chunk must be >= 1", "grid.growth_chunk")
        if self.particles < 1:
            raise ConfigError("particles must be >= 1", "classical.particles")
        for i, (p, q) in enumerate(self.resonances):
            _check_pair(p, q, f"resonances[{i}]")
        for i, case in enumerate(self.cases):
            _check_pair(case.p, case.q, f"cases[{i}]")
            _reject_unknown(case.sequence, _SECTION_KEYS["sequence"], f"cases[{i}].sequence")
            if case.sequence.get("kind", self.sequence_kind) not in KINDS:
                raise ConfigError(f"sequence kind must be one of {list(KINDS)}", f"cases[{i}].sequence.kind")
            if case.steps is not None and case.steps < 0:
                raise ConfigError("steps must be >= 0", f"cases[{i}].steps")
        if self.experiment == "sweep_resonance":
            for i, (p, q) in enumerate(self.resonances):
                if Fraction(p, q) == Fraction(1, 2):
                    raise ConfigError("p/q = 1/2 corresponds to an antiresonance", f"resonances[{i}]")
        if self.experiment == "sweep_kappa":
            if not self.kappa_grid:
                raise ConfigError("sweep_kappa needs a nonempty kappa grid", "kicks.grid")
            if any(k == 0.0 for k in self.kappa_grid):
                raise ConfigError("kappa = 0 gives sigma = 0 and no exponent", "kicks.grid")


def _reject_unknown(data: dict, allowed: set, prefix: str) -> None:
    for key in data:
        if key not in allowed:
            path = f"{prefix}.{key}" if prefix else key
            raise ConfigError(f"unknown config key: {path}", path)


def _get(data: dict, key: str, kind: Callable, default: Any, prefix: str = "") -> Any:
    path = f"{prefix}.{key}" if prefix else key
    if key not in data or data[key] is None:
        return default
    value = data[key]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path} must be true or false", path)
        return value
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{path} must be an integer", path)
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} has invalid value {value!r}", path)


def _check_pair(p: int, q: int, path: str) -> None:
    if q == 0:
        raise ConfigError("q must be nonzero", path)
    if p < 1 or q < 1:
        raise ConfigError("p and q must be positive", path)
    if math.gcd(p, q) != 1:
        raise ConfigError(f"p/q = {p}/{q} is not in lowest terms", path)


def _pair(item: Any, path: str) -> Tuple[int, int]:
    if not isinstance(item, (list, tuple)) or len(item) != 2 or not all(isinstance(v, int) for v in item):
        raise ConfigError("resonance must be a [p, q] pair of integers", path)
    return int(item[0]), int(item[1])


def _case(item: Any, index: int) -> CaseConfig:
    path = f"cases[{index}]"
    if not isinstance(item, dict):
        raise ConfigError("case must be an object", path)
    _reject_unknown(item, _CASE_KEYS, path)
    for key in ("p", "q"):
        if key not in item:
            raise ConfigError(f"case is missing {key}", f"{path}.{key}")
    sequence = item.get("sequence") or {}
    if not isinstance(sequence, dict):
        raise ConfigError("case sequence must be an object", f"{path}.sequence")
    return CaseConfig(
        name=str(item.get("name", f"case{index}")),
        p=_get(item, "p", int, 1, path),
        q=_get(item, "q", int, 1, path),
        kappa1=_get(item, "kappa1", float, None, path),
        kappa2=_get(item, "kappa2", float, None, path),
        sequence=dict(sequence),
        steps=_get(item, "steps", int, None, path),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", "config")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}", "config")
    return RunConfig.from_dict(data)


def default_resonances(max_q: int = 7) -> Tuple[Tuple[int, int], ...]:
    """All coprime p/q in (0, 1) with q <= max_q, except 1/2."""
    pairs = [
        (p, q)
        for q in range(3, max_q + 1)
        for p in range(1, q)
        if math.gcd(p, q) == 1
    ]
    return tuple(sorted(pairs, key=lambda pq: (Fraction(*pq), pq[1])))


# Outputs


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict]) -> str:
    """Write rows atomically; returns the SHA-256 of the file contents."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[name]) for name in columns])
    text = buffer.getvalue()
    _write_atomic(path, text)
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class RunManifest:
    """Everything needed to replay a run: resolved config, version, timings, fits, output hashes."""
    config: dict
    version: str = __version__
    runs: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)

    def write(self, directory: Path) -> Path:
        path = directory / MANIFEST
        _write_atomic(path, json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        try:
            with open(path) as f:
                data = json.load(f)
        except (FileNotFoundError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read manifest {path}: {exc}", "manifest")
        if not isinstance(data, dict) or "config" not in data:
            raise ConfigError("manifest has no config", "manifest.config")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"unexpected manifest contents: {exc}", "manifest")


# Experiments


@dataclass(frozen=True)
class Job:
    """One independent propagation, picklable for worker processes."""
    label: str
    p: int
    q: int
    kappa1: float
    kappa2: float
    sequence: SequenceSpec
    steps: int
    method: str
    convention: str
    kernel_tol: float
    grid: GridPolicy
    per_decade: int
    window: Optional[Tuple[float, float]]


@dataclass
class JobResult:
    job: Job
    series: MomentSeries
    wall_time: float
    fits: dict

    def summary(self) -> dict:
        return {
            "label": self.job.label,
            "p": self.job.p,
            "q": self.job.q,
            "kappa1": self.job.kappa1,
            "kappa2": self.job.kappa2,
            "sequence": self.job.sequence.label(),
            "steps": self.job.steps,
            "wall_time": round(self.wall_time, 3),
            "norm_drift": self.series.final_drift,
            "fits": self.fits,
        }


def run_job(job: Job) -> JobResult:
    """Propagate one configuration and fit sigma, m4^(1/4) and m6^(1/6)."""
    started = time.monotonic()
    config = PropagatorConfig(
        resonance=ResonanceParams.create(job.p, job.q, job.convention),
        sequence=build_sequence(job.sequence, job.kappa1, job.kappa2, job.steps),
        method=METHOD_NAMES[job.method],
        kernel_tol=job.kernel_tol,
        grid_policy=job.grid,
    )
    series, _ = evolve(config, record_schedule(job.steps, job.per_decade))
    fits = {}
    if job.steps > 0:
        fits["sigma"] = fit_exponent(series, job.window).to_dict()
        fits["m4"] = fit_moment_exponent(series, 4, job.window).to_dict()
        fits["m6"] = fit_moment_exponent(series, 6, job.window).to_dict()
    wall = time.monotonic() - started
    log(f"run_done label={job.label} p={job.p} q={job.q} wall={wall:.1f}s drift={series.final_drift:.2e}")
    return JobResult(job=job, series=series, wall_time=wall, fits=fits)


def _job(config: RunConfig, label: str, p: int, q: int, kappa1: float, kappa2: float,
         sequence: Optional[dict] = None, steps: Optional[int] = None) -> Job:
    return Job(
        label=label,
        p=p,
        q=q,
        kappa1=kappa1,
        kappa2=kappa2,
        sequence=config.sequence_spec(sequence),
        steps=steps if steps is not None else config.steps_for(q),
        method=config.method,
        convention=config.convention,
        kernel_tol=config.kernel_tol,
        grid=config.grid_policy(),
        per_decade=config.per_decade,
        window=config.window,
    )


def run_jobs(jobs: Sequence[Job], workers: int = WORKERS) -> list[JobResult]:
    """Run independent jobs, in worker processes when more than one is allowed."""
    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        return [run_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_job, jobs))


def _output_dir(config: RunConfig) -> Path:
    return Path(config.output)


def cmd_simulate(config: RunConfig, workers: int = WORKERS) -> Path:
    """series.csv with one sigma trace per case, plus manifest.json."""
    if config.cases:
        jobs = [
            _job(
                config,
                case.name,
                case.p,
                case.q,
                case.kappa1 if case.kappa1 is not None else config.kappa1,
                case.kappa2 if case.kappa2 is not None else config.kappa2,
                case.sequence,
                case.steps,
            )
            for case in config.cases
        ]
    else:
        jobs = [_job(config, f"{p}/{q}", p, q, config.kappa1, config.kappa2) for p, q in config.resonance_pairs()]

    results = run_jobs(jobs, workers)
    rows = []
    for result in results:
        for row in result.series.to_rows():
            rows.append({"case": result.job.label, "p": result.job.p, "q": result.job.q, **row})

    directory = _output_dir(config)
    manifest = RunManifest(config=config.to_dict(), runs=[r.summary() for r in results])
    manifest.outputs[SERIES_CSV] = write_csv(
        directory / SERIES_CSV, ("case", "p", "q") + MomentSeries.COLUMNS, rows
    )
    return manifest.write(directory)


def cmd_sweep_resonance(config: RunConfig, workers: int = WORKERS) -> Path:
    """c_vs_pq.csv: exponent c for each resonance under the configured sequence."""
    pairs = config.resonance_pairs()
    jobs = [_job(config, f"{p}/{q}", p, q, config.kappa1, config.kappa2) for p, q in pairs]
    results = run_jobs(jobs, workers)

    rows = []
    for result in results:
        fit = result.fits["sigma"]
        rows.append({
            "p": result.job.p,
            "q": result.job.q,
            "c": fit["c"],
            "residual_rms": fit["residual_rms"],
            "n_lo": fit["n_lo"],
            "n_hi": fit["n_hi"],
        })
    rows.sort(key=lambda row: (Fraction(row["p"], row["q"]), row["q"]))

    directory = _output_dir(config)
    manifest = RunManifest(config=config.to_dict(), runs=[r.summary() for r in results])
    manifest.outputs[PQ_CSV] = write_csv(
        directory / PQ_CSV, ("p", "q", "c", "residual_rms", "n_lo", "n_hi"), rows
    )
    return manifest.write(directory)


def cmd_sweep_kappa(config: RunConfig, workers: int = WORKERS) -> Path:
    """
    c_vs_kappa.csv on the plane kappa1 = -kappa2.

    (kappa, -kappa) and (-kappa, kappa) give identical probabilities, so each
    magnitude is propagated once and emitted twice; the first magnitude is
    also propagated mirrored and the sigma series compared.
    """
    p, q = config.resonance_pairs()[0]
    magnitudes = sorted({abs(k) for k in config.kappa_grid})
    jobs = [_job(config, f"cut:{k:g}", p, q, k, -k) for k in magnitudes]
    if config.control:
        jobs += [_job(config, f"control:{k:g}", p, q, k, k) for k in magnitudes]
    jobs.append(_job(config, f"mirror:{magnitudes[0]:g}", p, q, -magnitudes[0], magnitudes[0]))
    results = run_jobs(jobs, workers)

    mirror = results[-1]
    reference = results[0]
    gap = float(np.max(np.abs(reference.series.column("sigma") - mirror.series.column("sigma"))))
    if gap > 1e-10:
        raise NumericalError(f"sign symmetry violated: sigma series differ by {gap:.3e}")

    rows = []
    for result in results[:-1]:
        fit = result.fits["sigma"]
        k1, k2 = result.job.kappa1, result.job.kappa2
        pairs = [(k1, k2)] if k1 == k2 else [(k1, k2), (-k1, -k2)]
        for a, b in pairs:
            rows.append({"kappa1": a, "kappa2": b, "c": fit["c"], "residual_rms": fit["residual_rms"]})
    rows.sort(key=lambda row: (row["kappa1"], row["kappa2"]))

    directory = _output_dir(config)
    manifest = RunManifest(config=config.to_dict(), runs=[r.summary() for r in results])
    manifest.runs.append({"label": "sign_symmetry", "max_sigma_gap": gap})
    manifest.outputs[KAPPA_CSV] = write_csv(
        directory / KAPPA_CSV, ("kappa1", "kappa2", "c", "residual_rms"), rows
    )
    return manifest.write(directory)


def cmd_classical(config: RunConfig, workers: int = WORKERS) -> Path:
    """classical.csv with <P^2> of a standard-map ensemble."""
    steps = config.steps if config.steps is not None else 10_000
    started = time.monotonic()
    sequence = build_sequence(config.sequence_spec(), config.classical_kappa1, config.classical_kappa2, steps)
    ensemble = ClassicalEnsemble.create(sequence, config.particles, config.seed, config.partitions)
    series = ensemble_evolve(ensemble, steps, record_schedule(steps, config.per_decade), workers)
    run: dict = {
        "label": "classical",
        "sequence": sequence.spec.label(),
        "K1": sequence.kappa1,
        "K2": sequence.kappa2,
        "particles": ensemble.size,
        "steps": steps,
    }
    try:
        fit = classical_exponent(series, config.window)
        run["fits"] = {"rms_p": fit.to_dict(), "mean_p2_slope": 2.0 * fit.c}
    except FitError as exc:
        log(f"classical_fit_skipped reason={exc}")
    run["wall_time"] = round(time.monotonic() - started, 3)

    directory = _output_dir(config)
    manifest = RunManifest(config=config.to_dict(), runs=[run])
    manifest.outputs[CLASSICAL_CSV] = write_csv(
        directory / CLASSICAL_CSV, ("step", "mean_p2", "rms_p"), series.to_rows()
    )
    return manifest.write(directory)


# Verification


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


def _check(name: str, value: float, threshold: float, detail: str = "", above: bool = False) -> Check:
    passed = value > threshold if above else value < threshold
    return Check(name=name, passed=bool(passed), value=float(value), threshold=threshold, detail=detail)


def _propagate(params: ResonanceParams, kappas: Sequence[float], method: str = SPLIT_SPECTRAL,
               half_width: int = 64) -> list:
    propagator = Propagator(params, method)
    state = new_state_delta(half_width)
    states = []
    for kappa in kappas:
        state = propagator.step(state, float(kappa))
        states.append(state)
    return states


def _max_site_gap(a, b, probabilities: bool = False) -> float:
    lo, hi = min(a.l_min, b.l_min), max(a.l_max, b.l_max)
    wa, wb = a.window(lo, hi), b.window(lo, hi)
    if probabilities:
        return float(np.max(np.abs(np.abs(wa) ** 2 - np.abs(wb) ** 2)))
    return float(np.max(np.abs(wa - wb)))


def verify_checks(convention: str = "standard") -> list[Check]:
    """Every oracle and invariant check, cheap enough for one desktop core."""
    checks = []

    gap = 0.0
    for x in (0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0):
        row = bessel_row(x, 60).values
        gap = max(gap, max(abs(row[m] - bessel_series(x, m)) for m in range(61)))
    checks.append(_check("bessel_series_oracle", gap, 1e-12, "x <= 20, m <= 60"))

    unitarity = max(abs(kick_kernel(k).norm_sq() - 1.0) for k in (0.5, 1.0, 2.0, 5.0, 10.0, 15.0))
    checks.append(_check("kernel_unitarity", unitarity, 1e-12))

    third = ResonanceParams.create(1, 3, convention)
    letters = SequenceSpec("fibonacci").letters(100)
    kappas = [5.0 if c == "A" else 10.0 for c in letters]
    split = _propagate(third, kappas, SPLIT_SPECTRAL)
    direct = _propagate(third, kappas, DIRECT_CONVOLUTION)
    cross = max(_max_site_gap(a, b) for a, b in zip(split, direct))
    checks.append(_check("split_vs_direct", cross, 1e-10, "p/q=1/3, fibonacci 5/10, 100 steps"))

    primary = ResonanceParams.create(1, 1, convention)
    config = PropagatorConfig(
        resonance=primary,
        sequence=build_sequence(SequenceSpec("fibonacci"), 5.0, 10.0, PRIMARY_STEPS),
    )
    schedule = [n for n in record_schedule(PRIMARY_STEPS) if n >= 10]
    series, _ = evolve(config, schedule)
    oracle = primary_sigma(config.sequence.letters, 5.0, 10.0)[schedule]
    relative = float(np.max(np.abs(series.column("sigma") - oracle) / oracle))
    checks.append(_check("primary_sigma_oracle", relative, 5e-3, "q=1 fibonacci 5/10, 987 steps, relative"))
    c = fit_exponent(series).c
    checks.append(_check("primary_exponent", abs(c - 1.0), 1e-2, f"c={c:.4f}"))

    anti = ResonanceParams.create(1, 2, convention)
    revival = _propagate(anti, [5.0] * 200)
    worst = max(abs(overlap_with_delta(s) - 1.0) for s in revival[1::2])
    checks.append(_check("antiresonance_revival", worst, 1e-10, "kappa=5, |<0|psi(2k)>| = 1"))

    alternating = _propagate(anti, [5.0, 10.0] * 100)
    signed = antiresonance_sigma("AB" * 100, 5.0, 10.0)
    anti_gap = max(abs(sigma_of(s) - signed[s.step]) for s in alternating)
    checks.append(_check("antiresonance_oracle", anti_gap, 1e-8, "alternating 5/10, 200 steps"))

    letters = SequenceSpec("fibonacci").letters(200)
    kappas = [5.0 if c == "A" else 10.0 for c in letters]
    for p, q in ((1, 5), (2, 5)):
        low = _propagate(ResonanceParams.create(p, q, convention), kappas)
        high = _propagate(ResonanceParams.create(q - p, q, convention), kappas)
        sym = max(abs(sigma_of(a) - sigma_of(b)) for a, b in zip(low, high))
        checks.append(_check(f"pq_symmetry_{p}_{q}", sym, 1e-10, f"{p}/{q} vs {q - p}/{q}"))

    positive = _propagate(third, kappas)
    negative = _propagate(third, [-k for k in kappas])
    sign = max(_max_site_gap(a, b, probabilities=True) for a, b in zip(positive, negative))
    checks.append(_check("sign_symmetry", sign, 1e-10, "p/q=1/3, 200 steps"))

    checks.append(_check("commutator_primary", commutator_norm(5.0, 10.0, primary), 1e-12))
    checks.append(_check("commutator_secondary", commutator_norm(5.0, 10.0, third), 1e-3, above=True))

    random_letters_ = SequenceSpec("random", alpha=0.5).letters(2000)
    drift = _propagate(third, [5.0 if c == "A" else 10.0 for c in random_letters_])[-1].norm_error
    checks.append(_check("norm_drift", drift, 1e-10, "p/q=1/3 random, 2000 steps"))

    rng = np.random.default_rng(DEFAULT_SEED)
    jac = max(
        abs(jacobian_determinant(t, p, 0.8) - 1.0)
        for t, p in zip(rng.uniform(0, 2 * np.pi, 32), rng.uniform(-5, 5, 32))
    )
    checks.append(_check("classical_jacobian", jac, 1e-8))
    return checks


def cmd_verify(convention: str = "standard") -> dict:
    """Run every check and return the pass/fail report."""
    started = time.monotonic()
    checks = verify_checks(convention)
    for check in checks:
        log(f"check name={check.name} passed={check.passed} value={check.value:.3e}")
    return {
        "passed": all(check.passed for check in checks),
        "convention": convention,
        "version": __version__,
        "wall_time": round(time.monotonic() - started, 3),
        "checks": [asdict(check) for check in checks],
    }


def require_passed(report: dict) -> None:
    failed = [check["name"] for check in report["checks"] if not check["passed"]]
    if failed:
        raise VerificationError(f"{len(failed)} verification check(s) failed: {', '.join(failed)}", failed)


COMMANDS: dict = {
    "simulate": cmd_simulate,
    "sweep_resonance": cmd_sweep_resonance,
    "sweep_kappa": cmd_sweep_kappa,
    "classical": cmd_classical,
}


def with_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """Apply CLI overrides (None means keep) and re-validate."""
    updated = replace(config, **{k: v for k, v in overrides.items() if v is not None})
    updated.validate()
    return updated
