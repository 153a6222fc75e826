"""Benchmark protocol and CSV artefacts.

A benchmark is `trials` independent sessions, each commanding `setpoints`
normally drawn targets in sequence. Trial t always derives its generator
from [seed, t], so every controller sees byte-identical setpoint streams
and the whole run is reproducible from (config, seed) alone. Positions
and errors are written in millimetres; floats are rendered with repr so
a rerun produces byte-identical files.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .config import EvalConfig
from .errors import ConfigError

M_TO_MM = 1000.0

# Column names are part of the file contract; length-like columns hold
# millimetres (stated in the units comment), gains are raw coefficients.
EVAL_COLUMNS = ("trial", "step", "setpoint", "measured", "error", "kp", "ki", "kd")
TRAINING_COLUMNS = (
    "episode",
    "steps",
    "total_reward",
    "discounted_reward",
    "final_error",
    "mean_last10_error",
)
COMPARISON_COLUMNS = (
    "rank",
    "controller",
    "mean_abs_error_mm",
    "std_abs_error_mm",
    "rms_error_mm",
    "mean_trial_rms_mm",
    "max_abs_error_mm",
)
TRAJECTORY_COLUMNS = ("step", "setpoint", "measured")

_UNITS_COMMENT = "# units: setpoint/measured/error columns are mm; gains are unitless"


@dataclass(frozen=True)
class EvalRow:
    """One settled setpoint command; lengths in the unit the source used."""

    trial: int
    step: int
    setpoint: float
    measured: float
    error: float
    kp: float
    ki: float
    kd: float


@dataclass(frozen=True)
class TrialResult:
    """One trial's rows plus its error statistics, all in millimetres."""

    trial: int
    rows: tuple
    mean_abs_error_mm: float
    std_abs_error_mm: float
    rms_error_mm: float
    max_abs_error_mm: float


@dataclass(frozen=True)
class ControllerStats:
    """Pooled over all trials; mean_trial_rms averages per-trial RMS."""

    controller: str
    mean_abs_error_mm: float
    std_abs_error_mm: float
    rms_error_mm: float
    mean_trial_rms_mm: float
    max_abs_error_mm: float


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Generator for one benchmark trial, decorrelated across trials."""
    return np.random.default_rng([int(seed), int(trial)])


def draw_setpoints(rng: np.random.Generator, eval_cfg: EvalConfig) -> np.ndarray:
    return rng.normal(eval_cfg.setpoint_mean, eval_cfg.setpoint_std, eval_cfg.setpoints)


def evaluate_tuner(tuner, eval_cfg: EvalConfig, seed: int):
    """Run the full benchmark on a fitted tuner; rows are in metres."""
    rows = []
    for trial in range(eval_cfg.trials):
        rng = trial_rng(seed, trial)
        setpoints = draw_setpoints(rng, eval_cfg)
        for r in tuner.run_trial(setpoints, rng=rng):
            rows.append(EvalRow(trial, r.step, r.setpoint, r.measured, r.error, r.kp, r.ki, r.kd))
    return rows


def rows_to_mm(rows):
    """Scale the metre-valued fields for reporting; gains pass through."""
    return [
        EvalRow(
            r.trial,
            r.step,
            r.setpoint * M_TO_MM,
            r.measured * M_TO_MM,
            r.error * M_TO_MM,
            r.kp,
            r.ki,
            r.kd,
        )
        for r in rows
    ]


def trial_results(rows_mm):
    """Group millimetre rows by trial and attach per-trial statistics."""
    by_trial = {}
    for row in rows_mm:
        by_trial.setdefault(row.trial, []).append(row)
    results = []
    for trial in sorted(by_trial):
        trial_rows = tuple(by_trial[trial])
        errors = np.array([r.error for r in trial_rows])
        magnitudes = np.abs(errors)
        results.append(
            TrialResult(
                trial=trial,
                rows=trial_rows,
                mean_abs_error_mm=float(magnitudes.mean()),
                std_abs_error_mm=float(magnitudes.std()),
                rms_error_mm=float(np.sqrt(np.mean(errors**2))),
                max_abs_error_mm=float(magnitudes.max()),
            )
        )
    return results


def controller_stats(name: str, rows_mm) -> ControllerStats:
    per_trial = trial_results(rows_mm)
    errors = np.array([r.error for r in rows_mm])
    magnitudes = np.abs(errors)
    return ControllerStats(
        controller=name,
        mean_abs_error_mm=float(magnitudes.mean()),
        std_abs_error_mm=float(magnitudes.std()),
        rms_error_mm=float(np.sqrt(np.mean(errors**2))),
        mean_trial_rms_mm=float(np.mean([t.rms_error_mm for t in per_trial])),
        max_abs_error_mm=float(magnitudes.max()),
    )


def _render(value) -> str:
    # repr of a float is the shortest round-tripping decimal, so reruns
    # with identical arithmetic give identical bytes.
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path, meta: dict, columns, rows, units_comment=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        if units_comment:
            fh.write(units_comment + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_render(v) for v in row])


def write_eval_csv(path, rows, meta: dict):
    """Benchmark rows to disk, metre fields scaled to millimetres."""
    out = (
        (
            r.trial,
            r.step,
            r.setpoint * M_TO_MM,
            r.measured * M_TO_MM,
            r.error * M_TO_MM,
            r.kp,
            r.ki,
            r.kd,
        )
        for r in rows
    )
    _write_csv(path, meta, EVAL_COLUMNS, out, _UNITS_COMMENT)


def read_eval_csv(path):
    """Read a benchmark CSV back; returns (meta, rows in millimetres)."""
    meta = {}
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = None
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" not in token:
                        continue
                    key, _, value = token.partition("=")
                    meta[key] = value
                continue
            if header is None:
                header = tuple(line.split(","))
                if header != EVAL_COLUMNS:
                    raise ConfigError(f"{path}: unexpected columns {header!r}")
                continue
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(EVAL_COLUMNS):
                raise ConfigError(f"{path}: malformed row {line!r}")
            rows.append(
                EvalRow(
                    int(parts[0]),
                    int(parts[1]),
                    float(parts[2]),
                    float(parts[3]),
                    float(parts[4]),
                    float(parts[5]),
                    float(parts[6]),
                    float(parts[7]),
                )
            )
    if header is None:
        raise ConfigError(f"{path}: empty file")
    return meta, rows


def write_training_csv(path, logs, meta: dict):
    out = (
        (
            log.episode,
            log.steps,
            log.total_reward,
            log.discounted_reward,
            log.final_error * M_TO_MM,
            log.mean_last10_error * M_TO_MM,
        )
        for log in logs
    )
    _write_csv(path, meta, TRAINING_COLUMNS, out, "# units: error columns are mm")


def write_comparison_csv(path, ranked_stats, meta: dict):
    out = (
        (
            rank,
            s.controller,
            s.mean_abs_error_mm,
            s.std_abs_error_mm,
            s.rms_error_mm,
            s.mean_trial_rms_mm,
            s.max_abs_error_mm,
        )
        for rank, s in enumerate(ranked_stats, start=1)
    )
    _write_csv(path, meta, COMPARISON_COLUMNS, out)


def write_trajectory_csv(path, rows_mm, meta: dict, trial: int = 0):
    """Per-step settled trace of one trial, for plotting."""
    out = ((r.step, r.setpoint, r.measured) for r in rows_mm if r.trial == trial)
    _write_csv(path, meta, TRAJECTORY_COLUMNS, out, _UNITS_COMMENT)


@dataclass(frozen=True)
class CompareResult:
    """stats keeps drl/classical/fuzzy order; ranked sorts by mean error."""

    stats: tuple
    ranked: tuple
    ordering_reproduced: bool
    drl_vs_classical_ratio: float


def compare_controllers(rows_mm_by_name: dict) -> CompareResult:
    """Rank drl/classical/fuzzy by mean absolute settled error.

    The reference ordering (drl strictly best, fuzzy strictly worst) is
    flagged reproduced only when strict, so a tie reads as not reproduced.
    """
    required = ("drl", "classical", "fuzzy")
    missing = [name for name in required if name not in rows_mm_by_name]
    if missing:
        raise ConfigError(f"missing benchmark results for: {', '.join(missing)}")
    stats = tuple(controller_stats(name, rows_mm_by_name[name]) for name in required)
    ranked = tuple(sorted(stats, key=lambda s: s.mean_abs_error_mm))
    drl, classical, fuzzy = (s.mean_abs_error_mm for s in stats)
    reproduced = drl < classical < fuzzy
    ratio = drl / classical if classical > 0.0 else float("inf")
    return CompareResult(
        stats=stats, ranked=ranked, ordering_reproduced=reproduced, drl_vs_classical_ratio=ratio
    )
