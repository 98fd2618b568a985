"""Command-line interface: ``riforest {fit,score,bench,noise,ablate}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal failure.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from dataclasses import dataclass, field
from pathlib import Path

from riforest.builder import build_forest
from riforest.evaluation import (
    ablation_suite,
    ablation_table,
    noise_robustness,
    repeated_benchmark,
)
from riforest.exceptions import DataError, ParameterError, RiForestError
from riforest.io import format_table, load_csv, load_model, save_model
from riforest.model import SPLIT_STRATEGIES, RiForestParams, validate_params
from riforest.scoring import score_dataset

__all__ = ["RunConfig", "build_parser", "main", "run", "load_csv", "load_model", "save_model"]

COMMANDS = ("fit", "score", "bench", "noise", "ablate")
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input_path: str
    model_path: str | None = None
    output_path: str | None = None
    label_column: str = "label"
    format: str = "csv"
    params: RiForestParams = field(default_factory=RiForestParams)
    repeats: int = 20
    noise_counts: tuple[int, ...] = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)

    def validate(self) -> RunConfig:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.command in ("fit", "score") and not self.model_path:
            raise UsageError(f"{self.command} requires --model")
        if self.repeats < 1:
            raise UsageError(f"--repeats must be >= 1, got {self.repeats}")
        validate_params(self.params)
        return self


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _noise_counts(text: str) -> tuple[int, ...]:
    try:
        counts = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not counts or any(k < 0 for k in counts):
        raise argparse.ArgumentTypeError(f"expected nonnegative integers, got {text!r}")
    return counts


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    d = RiForestParams()
    g = p.add_argument_group("forest parameters")
    g.add_argument("--trees", type=int, default=d.num_trees, help="number of trees")
    g.add_argument("--subsample", type=int, default=d.subsample_size, help="rows per tree")
    g.add_argument("--bins", type=int, default=d.num_bins, help="histogram bins")
    g.add_argument("--alpha", type=float, default=d.entropy_threshold, help="entropy threshold")
    g.add_argument("--tau", type=int, default=d.num_random_hyperplanes, help="random hyperplanes per node")
    g.add_argument("--split", choices=SPLIT_STRATEGIES, default=d.split_strategy)
    g.add_argument("--no-random-hyperplanes", action="store_true")
    g.add_argument("--unit-path-length", action="store_true", help="every split counts 1")
    g.add_argument("--no-entropy-gate", action="store_true")
    g.add_argument("--seed", type=int, default=None, help="master seed (random if omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="riforest", description="Entropy-gated isolation forest.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_text, labels=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", required=True, help="headed CSV file")
        p.add_argument("--output", help="result file (stdout if omitted)")
        p.add_argument("--label-column", default="label")
        if name != "fit":
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        if name != "score":
            _add_param_flags(p)
        if labels:
            p.add_argument("--repeats", type=int, default=20)
        return p

    command("fit", "train a forest and save it").add_argument("--model", required=True)
    command("score", "score rows with a saved forest").add_argument("--model", required=True)
    command("bench", "repeated AUROC benchmark", labels=True)
    noise = command("noise", "AUROC as noise columns are added", labels=True)
    noise.add_argument("--noise-counts", type=_noise_counts, default="10,20,30,40,50,60,70,80,90,100")
    command("ablate", "compare the full forest with its ablations", labels=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    params = RiForestParams()
    if hasattr(args, "trees"):
        seed = args.seed
        if seed is None:
            seed = secrets.randbits(64)
            print(f"riforest: using seed {seed}", file=sys.stderr)
        params = RiForestParams(
            num_trees=args.trees,
            subsample_size=args.subsample,
            num_bins=args.bins,
            entropy_threshold=args.alpha,
            num_random_hyperplanes=args.tau,
            split_strategy=args.split,
            use_random_hyperplanes=not args.no_random_hyperplanes,
            use_path_length=not args.unit_path_length,
            use_entropy_gate=not args.no_entropy_gate,
            master_seed=seed,
        )
    config = RunConfig(
        command=args.command,
        input_path=args.input,
        model_path=getattr(args, "model", None),
        output_path=args.output,
        label_column=args.label_column,
        format=getattr(args, "format", "csv"),
        params=params,
    )
    if hasattr(args, "repeats"):
        config.repeats = args.repeats
    if hasattr(args, "noise_counts"):
        config.noise_counts = args.noise_counts
    return config


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def run(config: RunConfig) -> int:
    """Execute one command. Errors propagate; :func:`main` maps them to exit codes."""
    config.validate()
    fmt = config.format
    needs_labels = config.command in ("bench", "noise", "ablate")
    data = load_csv(config.input_path, config.label_column, require_labels=needs_labels)

    if config.command == "fit":
        forest = build_forest(data, config.params)
        save_model(forest, config.model_path)
        if config.output_path:
            _emit(f"trained {len(forest.trees)} trees on {data.n} rows, {data.d} columns\n",
                  config.output_path)
        return EXIT_OK

    if config.command == "score":
        forest = load_model(config.model_path)
        report = score_dataset(data, forest)
        rows = [{"row_index": i, "score": float(s)} for i, s in enumerate(report.scores)]
        _emit(format_table(rows, fmt), config.output_path)
        return EXIT_OK

    if config.command == "bench":
        result = repeated_benchmark(data, config.params, config.repeats)
        rows = [{"run": i, "auroc": a} for i, a in enumerate(result.per_run_auroc)]
        summary = {"mean_auroc": result.mean_auroc, "cv": result.cv}
        _emit(format_table(rows, fmt, summary), config.output_path)
        return EXIT_OK

    if config.command == "noise":
        sweep = noise_robustness(data, config.params, config.noise_counts, config.repeats)
        rows = [
            {"noise_count": k, "mean_auroc": r.mean_auroc, "cv": r.cv}
            for k, r in zip(sweep.noise_counts, sweep.results)
        ]
        _emit(format_table(rows, fmt), config.output_path)
        return EXIT_OK

    results = ablation_suite(data, config.params, config.repeats)
    _emit(format_table(ablation_table(results), fmt), config.output_path)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        config = config_from_args(build_parser().parse_args(argv)).validate()
        return run(config)
    except (UsageError, ParameterError) as exc:
        print(f"riforest: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"riforest: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RiForestError as exc:
        print(f"riforest: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        print(f"riforest: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
