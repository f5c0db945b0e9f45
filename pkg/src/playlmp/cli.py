"""Operator-facing command surface.

Subcommands: collect, train, eval, robustness, coverage, embed, serve.
Every run prints its fully seeded invocation so any output file can be
reproduced from the log line alone.  Exit codes: 0 ok, 1 usage,
2 data error, 3 training divergence.

The environment config defaults to the built-in world; --config takes a
path, resolved against $PLAYLMP_CONFIG_DIR when relative.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import eval as evalmod
from .collectors import collect_demos, collect_play, collect_random
from .data import load_dataset, save_dataset
from .exceptions import DataFormatError, DivergenceError, PlaylmpError
from .models import ESTIMATOR_KINDS, load_model, manifest_hash, save_model
from .playground import EnvConfig
from .tasks import TASK_IDS

CONFIG_DIR_VAR = "PLAYLMP_CONFIG_DIR"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGENCE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; usage is 1 here
        raise UsageError(message)


def _echo(args_namespace, command: str, extra: dict) -> None:
    parts = [f"playlmp {command}"]
    for key, value in sorted(vars(args_namespace).items()):
        if key in ("func", "command") or value is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                parts.append(flag)
        elif isinstance(value, list):
            parts.extend(f"{flag} {v}" for v in value)
        else:
            parts.append(f"{flag} {value}")
    for key, value in extra.items():
        parts.append(f"[{key}={value}]")
    print(" ".join(parts))


def _load_config(path: str | None) -> EnvConfig:
    if path is None:
        config = EnvConfig()
        config.validate()
        return config
    resolved = Path(path)
    if not resolved.is_absolute() and CONFIG_DIR_VAR in os.environ:
        resolved = Path(os.environ[CONFIG_DIR_VAR]) / resolved
    if not resolved.exists():
        raise DataFormatError(f"config file not found: {resolved}")
    return EnvConfig.load(resolved)


def _parse_overrides(pairs, kind: str) -> dict:
    defaults = ESTIMATOR_KINDS[kind]().get_params()
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise UsageError(f"--set expects key=value, got '{pair}'")
        key, _, raw = pair.partition("=")
        if key not in defaults:
            raise UsageError(
                f"unknown hyperparameter '{key}' for model '{kind}' "
                f"(known: {', '.join(sorted(defaults))})")
        default = defaults[key]
        if isinstance(default, bool):
            overrides[key] = raw.lower() in ("1", "true", "yes")
        elif isinstance(default, int):
            overrides[key] = int(raw)
        elif isinstance(default, float):
            overrides[key] = float(raw)
        else:
            overrides[key] = raw
    return overrides


# ---------------------------------------------------------------------------
# subcommands


def cmd_collect(args) -> int:
    config = _load_config(args.config)
    if args.kind == "play":
        dataset = collect_play(config, minutes=args.minutes, seed=args.seed)
    elif args.kind == "random":
        dataset = collect_random(config, minutes=args.minutes, seed=args.seed)
    elif args.kind == "demos":
        dataset = collect_demos(config, per_task=args.per_task, seed=args.seed)
    else:
        raise UsageError(f"unknown collector kind '{args.kind}'")
    save_dataset(dataset, args.out)
    _echo(args, "collect", {"config_hash": config.hash()[:12],
                            "ticks": dataset.total_ticks,
                            "episodes": len(dataset.episodes)})
    return EXIT_OK


def _train_one(kind: str, dataset, config, overrides: dict, seed: int,
               steps: int | None, out_dir: Path, resume: bool) -> str:
    if resume:
        est = load_model(out_dir)
        extra = (steps or est.train_steps) - est.trained_steps_
        if extra <= 0:
            raise UsageError(f"checkpoint already trained {est.trained_steps_} steps")
        est.resume(dataset, extra)
    else:
        params = dict(overrides)
        params["seed"] = seed
        if steps is not None:
            params["train_steps"] = steps
        est = ESTIMATOR_KINDS[kind](**params)
        est.fit(dataset, config)
    return save_model(out_dir, est)


def cmd_train(args) -> int:
    config = _load_config(args.config)
    if args.model not in ESTIMATOR_KINDS:
        raise UsageError(f"unknown model kind '{args.model}' "
                         f"(known: {', '.join(sorted(ESTIMATOR_KINDS))})")
    dataset = load_dataset(args.data, config=config)
    overrides = _parse_overrides(args.set, args.model)
    out = Path(args.out)
    hashes = {}
    if args.model == "bc":
        tasks = [args.task] if args.task else list(TASK_IDS)
        for task_id in tasks:
            task_overrides = dict(overrides, task_id=task_id)
            hashes[task_id] = _train_one("bc", dataset, config, task_overrides,
                                         args.seed, args.steps, out / task_id,
                                         args.resume)
    else:
        hashes[args.model] = _train_one(args.model, dataset, config, overrides,
                                        args.seed, args.steps, out, args.resume)
    _echo(args, "train", {"manifest_hash": ",".join(h[:12] for h in hashes.values())})
    return EXIT_OK


def _load_policy(model_dir: Path):
    """A model directory is either one checkpoint or a per-task suite."""
    model_dir = Path(model_dir)
    if (model_dir / "manifest.json").exists():
        est = load_model(model_dir)
        return est, manifest_hash(model_dir)
    suite = {}
    hashes = []
    for sub in sorted(model_dir.iterdir()):
        if (sub / "manifest.json").exists():
            suite[sub.name] = load_model(sub)
            hashes.append(manifest_hash(sub))
    if not suite:
        raise DataFormatError(f"no model manifest under {model_dir}")
    import hashlib

    joint = hashlib.sha256("".join(hashes).encode()).hexdigest()
    return suite, joint


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    demos = load_dataset(args.demos, config=config)
    policy, policy_hash = _load_policy(Path(args.model))
    task_ids = args.tasks.split(",") if args.tasks else None
    report = evalmod.evaluate(policy, config, demos, task_ids=task_ids,
                              n_rollouts=args.rollouts, radius=args.radius,
                              seed=args.seed, manifest_hash=policy_hash)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = out / f"eval_{policy_hash[:12]}_s{args.seed}"
    csv_path, json_path = evalmod.write_eval_report(report, base)
    _echo(args, "eval", {"manifest_hash": policy_hash[:12],
                         "aggregate": f"{report.aggregate.rate:.3f}",
                         "report": str(csv_path)})
    return EXIT_OK


def cmd_robustness(args) -> int:
    config = _load_config(args.config)
    demos = load_dataset(args.demos, config=config)
    policies = {}
    hashes = []
    for spec in args.model:
        if "=" not in spec:
            raise UsageError(f"--model expects name=dir, got '{spec}'")
        name, _, path = spec.partition("=")
        policies[name], h = _load_policy(Path(path))
        hashes.append(h[:12])
    radii = tuple(float(r) for r in args.radii.split(","))
    table = evalmod.robustness_sweep(policies, config, demos, radii=radii,
                                     n_rollouts=args.rollouts, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = out / f"robustness_{'_'.join(hashes)}_s{args.seed}"
    csv_path, _ = evalmod.write_robustness_table(table, list(policies), base)
    slopes = {m: round(table.slope(m), 4) for m in policies}
    _echo(args, "robustness", {"slopes": slopes, "report": str(csv_path)})
    return EXIT_OK


def cmd_coverage(args) -> int:
    config = _load_config(args.config)
    datasets = {}
    for spec in args.data:
        if "=" not in spec:
            raise UsageError(f"--data expects name=path, got '{spec}'")
        name, _, path = spec.partition("=")
        datasets[name] = load_dataset(path, config=config)
    curves = evalmod.coverage_analysis(datasets, bins_per_dim=args.bins)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = out / f"coverage_{'_'.join(sorted(datasets))}"
    csv_path, _ = evalmod.write_coverage_curves(curves, base)
    finals = evalmod.final_counts_at_common_duration(curves)
    _echo(args, "coverage", {"final_counts": finals, "report": str(csv_path)})
    return EXIT_OK


def cmd_embed(args) -> int:
    config = _load_config(args.config)
    play = load_dataset(args.play, config=config)
    demos = load_dataset(args.demos, config=config)
    est, policy_hash = _load_policy(Path(args.model))
    if isinstance(est, dict) or est.KIND != "lmp":
        raise DataFormatError("embedding export needs a latent-plan model")
    rows = evalmod.export_plan_embeddings(est, play, demos, n_play=args.windows,
                                          seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"embeddings_{policy_hash[:12]}_s{args.seed}.tsv"
    evalmod.write_embedding_table(rows, path)
    _echo(args, "embed", {"rows": len(rows), "report": str(path)})
    return EXIT_OK


def cmd_serve(args) -> int:
    import asyncio

    config = _load_config(args.config)
    _echo(args, "serve", {"config_hash": config.hash()[:12]})
    from .serve import serve_teleop

    try:
        asyncio.run(serve_teleop(config, args.port, args.out, seed=args.seed,
                                 host=args.host, one_session=args.one_session))
    except OSError as err:  # port busy and friends
        raise DataFormatError(f"cannot serve on port {args.port}: {err}") from err
    except KeyboardInterrupt:
        pass
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="playlmp",
                     description="Play-supervised control on a 2-D desk playground")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("collect", help="collect a dataset")
    p.add_argument("--kind", required=True, choices=["play", "demos", "random"])
    p.add_argument("--minutes", type=float, default=30.0,
                   help="simulated minutes (play/random)")
    p.add_argument("--per-task", type=int, default=120,
                   help="successful demos per task (demos)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--task", help="single task for --model bc")
    p.add_argument("--steps", type=int)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on the task suite")
    p.add_argument("--model", required=True)
    p.add_argument("--demos", required=True)
    p.add_argument("--tasks", help="comma-separated subset")
    p.add_argument("--rollouts", type=int, default=20)
    p.add_argument("--radius", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("robustness", help="success vs initial-state perturbation")
    p.add_argument("--model", action="append", required=True, metavar="NAME=DIR")
    p.add_argument("--demos", required=True)
    p.add_argument("--radii", default="0,0.05,0.1,0.2,0.4")
    p.add_argument("--rollouts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("coverage", help="interaction-space coverage curves")
    p.add_argument("--data", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("embed", help="export plan embeddings")
    p.add_argument("--model", required=True)
    p.add_argument("--play", required=True)
    p.add_argument("--demos", required=True)
    p.add_argument("--windows", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("serve", help="host the teleoperation bridge")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--one-session", action="store_true",
                   help="exit after the first session ends")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as err:
        print(f"divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (PlaylmpError, FileNotFoundError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
