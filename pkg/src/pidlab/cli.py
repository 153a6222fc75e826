"""Command line front end: train, eval, compare, autotune.

Every output file starts with a comment header carrying the config hash
and seed; stdout is key=value lines so scripts can scrape results.
Failures print `error: <reason>` on stderr and exit nonzero.
"""

import argparse
import os
import sys

from sklearn.exceptions import NotFittedError

from . import bench
from .config import config_hash, config_lines, load_config
from .errors import (
    CheckpointError,
    ConfigError,
    InsufficientExperienceError,
    NoOscillationError,
    NotConvergedError,
    NumericDomainError,
)
from .nn import load_net_file
from .pid import PidGains
from .relay import relay_autotune, zn_gains
from .tuners import DqnPidTuner, FuzzyPidTuner, ZieglerNicholsTuner
from .validation import as_generator

_HANDLED_ERRORS = (
    CheckpointError,
    ConfigError,
    InsufficientExperienceError,
    NoOscillationError,
    NotConvergedError,
    NumericDomainError,
    NotFittedError,
    OSError,
)

CONTROLLERS = ("drl", "classical", "fuzzy")


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _emit(**pairs):
    for key, value in pairs.items():
        print(f"{key}={_fmt(value)}")


def _meta(config) -> dict:
    return {"config_hash": config_hash(config), "seed": config.seed}


def _out_dir(args) -> str:
    out = args.out if args.out is not None else "."
    os.makedirs(out, exist_ok=True)
    return out


def _base_tuner_kwargs(config) -> dict:
    return dict(
        plant=config.plant,
        bounds=config.bounds,
        base_kp=config.train.base_kp,
        base_ki=config.train.base_ki,
        base_kd=config.train.base_kd,
        d_scale=config.train.d_scale,
        integral_limit=config.train.integral_limit,
        rollout_ticks=config.train.rollout_ticks,
        random_state=config.seed,
    )


def cmd_train(config, out: str) -> int:
    tuner = DqnPidTuner(
        plant=config.plant,
        bounds=config.bounds,
        d_scale=config.train.d_scale,
        integral_limit=config.train.integral_limit,
        rollout_ticks=config.train.rollout_ticks,
        random_state=config.seed,
        train_config=config.train,
        reward_params=config.rewards,
    ).fit()
    report = tuner.report_
    meta = _meta(config)

    training_csv = os.path.join(out, "training.csv")
    bench.write_training_csv(training_csv, report.logs, meta)
    final_path = os.path.join(out, "checkpoint_final.bin")
    best_path = os.path.join(out, "checkpoint_best.bin")
    with open(final_path, "wb") as fh:
        fh.write(report.final_checkpoint)
    with open(best_path, "wb") as fh:
        fh.write(report.best_checkpoint)

    manifest_path = os.path.join(out, "manifest.txt")
    gains = tuner.gains_
    with open(manifest_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_hash={meta['config_hash']} seed={meta['seed']}\n")
        for line in config_lines(config):
            fh.write(line + "\n")
        fh.write(f"final_kp={gains.kp!r}\n")
        fh.write(f"final_ki={gains.ki!r}\n")
        fh.write(f"final_kd={gains.kd!r}\n")
        fh.write(f"best_episode={report.best_episode}\n")

    _emit(
        training_csv=training_csv,
        checkpoint_final=final_path,
        checkpoint_best=best_path,
        manifest=manifest_path,
        episodes=len(report.logs),
        best_episode=report.best_episode,
        final_kp=gains.kp,
        final_ki=gains.ki,
        final_kd=gains.kd,
    )
    return 0


def _manifest_gains(manifest_path: str):
    """Trained gains recorded beside a checkpoint, if the manifest exists."""
    if not os.path.exists(manifest_path):
        return None
    values = {}
    with open(manifest_path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line or "=" not in line:
                continue
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    try:
        return PidGains(
            float(values["final_kp"]), float(values["final_ki"]), float(values["final_kd"])
        )
    except (KeyError, ValueError):
        return None


def _build_tuner(config, controller: str, checkpoint):
    if controller == "classical":
        return ZieglerNicholsTuner(
            **_base_tuner_kwargs(config),
            relay_amplitude=config.relay_amplitude,
            relay_max_steps=config.relay_max_steps,
        ).fit()
    if controller == "fuzzy":
        scale = config.fuzzy_scale
        return FuzzyPidTuner(
            **_base_tuner_kwargs(config),
            rules_path=config.fuzzy_rules_path or None,
            error_range=scale.error_range,
            derror_range=scale.derror_range,
            kp_step=scale.kp_step,
            ki_step=scale.ki_step,
            kd_step=scale.kd_step,
        ).fit()
    if checkpoint is None:
        raise ConfigError("--checkpoint is required for controller 'drl'")
    network = load_net_file(checkpoint)
    gains = _manifest_gains(os.path.join(os.path.dirname(checkpoint) or ".", "manifest.txt"))
    tuner = DqnPidTuner(
        plant=config.plant,
        bounds=config.bounds,
        d_scale=config.train.d_scale,
        integral_limit=config.train.integral_limit,
        rollout_ticks=config.train.rollout_ticks,
        random_state=config.seed,
        train_config=config.train,
    )
    return tuner.restore(network, gains)


def cmd_eval(config, out: str, controller: str, checkpoint) -> int:
    tuner = _build_tuner(config, controller, checkpoint)
    rows = bench.evaluate_tuner(tuner, config.eval, config.seed)
    path = os.path.join(out, f"eval_{controller}.csv")
    meta = dict(_meta(config), controller=controller)
    bench.write_eval_csv(path, rows, meta)
    stats = bench.controller_stats(controller, bench.rows_to_mm(rows))
    _emit(
        eval_csv=path,
        rows=len(rows),
        mean_abs_error_mm=stats.mean_abs_error_mm,
        std_abs_error_mm=stats.std_abs_error_mm,
        rms_error_mm=stats.rms_error_mm,
        max_abs_error_mm=stats.max_abs_error_mm,
    )
    return 0


def cmd_compare(out: str) -> int:
    rows_by_name = {}
    metas = {}
    missing = []
    for name in CONTROLLERS:
        path = os.path.join(out, f"eval_{name}.csv")
        if not os.path.exists(path):
            missing.append(path)
            continue
        meta, rows = bench.read_eval_csv(path)
        metas[name] = meta
        rows_by_name[name] = rows
    if missing:
        raise ConfigError(f"missing eval results: {', '.join(missing)}")

    idents = {(m.get("config_hash"), m.get("seed")) for m in metas.values()}
    if len(idents) != 1:
        raise ConfigError("eval CSVs disagree on config_hash/seed; rerun eval with one config")
    shared_hash, shared_seed = idents.pop()
    meta = {"config_hash": shared_hash, "seed": shared_seed}

    result = bench.compare_controllers(rows_by_name)
    bench.write_comparison_csv(os.path.join(out, "comparison.csv"), result.ranked, meta)
    for name in CONTROLLERS:
        bench.write_trajectory_csv(
            os.path.join(out, f"fig5_{name}.csv"), rows_by_name[name], dict(meta, controller=name)
        )

    by_name = {s.controller: s for s in result.stats}
    verdict_lines = [
        # ascending mean error, best tracker first
        "ranking=" + "<".join(s.controller for s in result.ranked),
        f"drl_mean_abs_error_mm={by_name['drl'].mean_abs_error_mm!r}",
        f"classical_mean_abs_error_mm={by_name['classical'].mean_abs_error_mm!r}",
        f"fuzzy_mean_abs_error_mm={by_name['fuzzy'].mean_abs_error_mm!r}",
        f"drl_vs_classical_ratio={result.drl_vs_classical_ratio!r}",
        "ordering_reproduced=" + ("yes" if result.ordering_reproduced else "no"),
    ]
    verdict_path = os.path.join(out, "verdict.txt")
    with open(verdict_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_hash={shared_hash} seed={shared_seed}\n")
        for line in verdict_lines:
            fh.write(line + "\n")
    print(f"comparison_csv={os.path.join(out, 'comparison.csv')}")
    print(f"verdict={verdict_path}")
    for line in verdict_lines:
        print(line)
    return 0


def cmd_autotune(config) -> int:
    rng = as_generator(config.seed)
    result = relay_autotune(
        config.plant,
        amplitude=config.relay_amplitude,
        max_steps=config.relay_max_steps,
        rng=rng,
    )
    gains = zn_gains(result, config.bounds)
    _emit(
        ku=result.ultimate_gain,
        tu=result.ultimate_period,
        oscillation_amplitude=result.amplitude,
        kp=gains.kp,
        ki=gains.ki,
        kd=gains.kd,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value config file")
    common.add_argument("--seed", type=int, metavar="N", help="override the config seed")
    common.add_argument("--out", metavar="DIR", help="output directory (default: .)")

    parser = argparse.ArgumentParser(
        prog="pidlab", description="PID tuner training and benchmark harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], help="train the DQN tuner, write checkpoints")
    ev = sub.add_parser("eval", parents=[common], help="benchmark one controller")
    ev.add_argument("--controller", required=True, choices=CONTROLLERS)
    ev.add_argument("--checkpoint", metavar="PATH", help="trained network (drl only)")
    sub.add_parser("compare", parents=[common], help="rank previously written eval CSVs")
    sub.add_parser("autotune", parents=[common], help="relay experiment, print tuned gains")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.seed)
        if args.command == "train":
            return cmd_train(config, _out_dir(args))
        if args.command == "eval":
            return cmd_eval(config, _out_dir(args), args.controller, args.checkpoint)
        if args.command == "compare":
            return cmd_compare(_out_dir(args))
        return cmd_autotune(config)
    except _HANDLED_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
