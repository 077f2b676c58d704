"""
ReliefE Sparsity Ablation Plugin - output density over an epsilon grid
Usage: reliefe ablate-sparsity DATASET [--eps-min 1e-4] [--eps-max 10] [--points 20]
"""

import argparse
import logging

from modules.ablation import epsilon_grid, sparsity_sweep
from plugins._common import add_dataset_arguments, write_rows

logger = logging.getLogger(__name__)


HANDLED_COMMANDS = {"ablate-sparsity"}


def configure_parser(parser: argparse.ArgumentParser) -> None:
    add_dataset_arguments(parser)
    parser.add_argument("--eps-min", type=float, default=1e-4)
    parser.add_argument("--eps-max", type=float, default=10.0)
    parser.add_argument("--points", type=int, default=20)
    parser.add_argument("-o", "--output", default="-")


def handle_ablate_sparsity(app, args: argparse.Namespace) -> int:
    dataset = app.load_dataset(args)
    grid = epsilon_grid(args.eps_min, args.eps_max, args.points)
    app.record_config("ablation", {"epsilons": grid})

    with app.timer.stage("sparsify"):
        rows = sparsity_sweep(dataset.features, grid, seed=args.seed, n_jobs=app.jobs(args))
    with app.timer.stage("write"):
        write_rows(args.output, rows, ("epsilon", "input_density", "output_density"))
    app.record_output(args.output if args.output != "-" else None)
    return 0


def setup(app):
    """Setup sparsity ablation plugin"""
    if not app.plugin_loader.register_command_handler(
        HANDLED_COMMANDS, lambda args: handle_ablate_sparsity(app, args),
        parser=configure_parser, help_text="density after sparsification per epsilon",
    ):
        logger.warning("Sparsity ablation plugin skipped: command already registered")
