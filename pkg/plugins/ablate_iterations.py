"""
ReliefE Iterations Ablation Plugin - ranking quality against the iteration budget
Usage: reliefe ablate-iterations DATASET [--variants relieff,reliefe-absmean-adaptive]
"""

import argparse
import logging

import config
from core.params import RankingConfig, SparsifyParams, VARIANTS
from modules.ablation import iteration_budgets, iteration_curve
from plugins._common import (
    add_dataset_arguments,
    add_embedding_arguments,
    add_metric_argument,
    embedding_config,
    write_rows,
)

logger = logging.getLogger(__name__)


HANDLED_COMMANDS = {"ablate-iterations"}


def _variants(value: str):
    names = [v.strip().lower() for v in value.split(",") if v.strip()]
    unknown = [name for name in names if name not in VARIANTS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown variants: {', '.join(unknown)}")
    return names


def configure_parser(parser: argparse.ArgumentParser) -> None:
    add_dataset_arguments(parser)
    add_metric_argument(parser)
    add_embedding_arguments(parser)
    parser.add_argument("--variants", type=_variants,
                        default=["relieff", "reliefe-absmean-adaptive"])
    parser.add_argument("--max-iterations", type=int, default=32)
    parser.add_argument("--top-f", type=int, default=10)
    parser.add_argument("--k", type=int, default=config.K_NEIGHBORS)
    parser.add_argument("--folds", type=int, default=config.PROBE_FOLDS)
    parser.add_argument("-o", "--output", default="-")


def handle_ablate_iterations(app, args: argparse.Namespace) -> int:
    dataset = app.load_dataset(args)
    n_jobs = app.jobs(args)
    base = RankingConfig(
        k_neighbors=args.k,
        metric=args.metric,
        embedding=embedding_config(args, n_jobs),
        sparsify=SparsifyParams(seed=args.seed),
        seed=args.seed,
        n_jobs=n_jobs,
        serial=bool(args.serial),
    )
    budgets = iteration_budgets(args.max_iterations)
    app.record_config("ranking", base)
    app.record_config("ablation", {"variants": args.variants, "budgets": budgets,
                                   "top_f": args.top_f, "folds": args.folds})

    rows = iteration_curve(dataset, args.variants, budgets, args.top_f, base_config=base,
                           folds=args.folds, seed=args.seed, n_jobs=n_jobs)
    with app.timer.stage("write"):
        write_rows(args.output, rows, ("variant", "iterations", "f1"))
    app.record_output(args.output if args.output != "-" else None)
    return 0


def setup(app):
    """Setup iterations ablation plugin"""
    if not app.plugin_loader.register_command_handler(
        HANDLED_COMMANDS, lambda args: handle_ablate_iterations(app, args),
        parser=configure_parser, help_text="ranking quality per iteration budget",
    ):
        logger.warning("Iterations ablation plugin skipped: command already registered")
