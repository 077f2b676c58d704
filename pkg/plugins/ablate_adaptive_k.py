"""
ReliefE Adaptive-k Ablation Plugin - neighborhood sizes picked by the gap rule
Usage: reliefe ablate-adaptive-k DATASET [--iterations 100] [--embed]
"""

import argparse
import logging

import config
from core.params import RankingConfig, SparsifyParams
from modules.ablation import ADAPTIVE_K_ITERATIONS, adaptive_k_values
from plugins._common import (
    add_dataset_arguments,
    add_embedding_arguments,
    add_metric_argument,
    embedding_config,
    write_rows,
)

logger = logging.getLogger(__name__)


HANDLED_COMMANDS = {"ablate-adaptive-k"}


def configure_parser(parser: argparse.ArgumentParser) -> None:
    add_dataset_arguments(parser)
    add_metric_argument(parser)
    add_embedding_arguments(parser)
    parser.add_argument("--iterations", type=int, default=ADAPTIVE_K_ITERATIONS)
    parser.add_argument("--k", type=int, default=config.K_NEIGHBORS,
                        help="upper bound of the adaptive window")
    parser.add_argument("--embed", action="store_true")
    parser.add_argument("--abs-mean", action="store_true")
    parser.add_argument("-o", "--output", default="-")


def handle_ablate_adaptive_k(app, args: argparse.Namespace) -> int:
    dataset = app.load_dataset(args)
    n_jobs = app.jobs(args)
    ranking_config = RankingConfig(
        iterations=args.iterations,
        k_neighbors=args.k,
        adaptive_threshold=True,
        abs_mean_update=args.abs_mean,
        use_embedding=args.embed,
        metric=args.metric,
        embedding=embedding_config(args, n_jobs),
        sparsify=SparsifyParams(seed=args.seed),
        seed=args.seed,
        n_jobs=n_jobs,
        serial=bool(args.serial),
    )
    app.record_config("ranking", ranking_config)

    rows = adaptive_k_values(dataset, ranking_config, iterations=args.iterations)
    with app.timer.stage("write"):
        write_rows(args.output, rows, ("iteration", "class", "k"))
    app.record_output(args.output if args.output != "-" else None)
    return 0


def setup(app):
    """Setup adaptive-k ablation plugin"""
    if not app.plugin_loader.register_command_handler(
        HANDLED_COMMANDS, lambda args: handle_ablate_adaptive_k(app, args),
        parser=configure_parser, help_text="record adaptive k per iteration and class",
    ):
        logger.warning("Adaptive-k ablation plugin skipped: command already registered")
