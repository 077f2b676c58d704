"""
ReliefE Dim Plugin - latent dimension estimate of a dataset
Usage: reliefe dim DATASET [--points fit.csv]
"""

import argparse
import logging

import numpy as np

import config
from modules.embed import representative_sample
from modules.intrinsic_dim import estimate_dimension
from plugins._common import add_dataset_arguments, add_metric_argument, write_json, write_table

logger = logging.getLogger(__name__)


HANDLED_COMMANDS = {"dim"}


def configure_parser(parser: argparse.ArgumentParser) -> None:
    add_dataset_arguments(parser)
    add_metric_argument(parser)
    parser.add_argument("--sample-cap", type=int, default=config.SAMPLE_CAP)
    parser.add_argument("--tail-fraction", type=float, default=config.DIM_TAIL_FRACTION)
    parser.add_argument("--multiplier", type=float, default=config.DIM_MULTIPLIER)
    parser.add_argument("--points", default=None,
                        help="CSV of (log mu, -log(1 - EMP)) fit points")
    parser.add_argument("-o", "--output", default="-")


class DimHandler:
    def __init__(self, app):
        self.app = app

    def handle_dim(self, args: argparse.Namespace) -> int:
        dataset = self.app.load_dataset(args)
        self.app.record_config("dim", {
            "sample_cap": args.sample_cap,
            "tail_fraction": args.tail_fraction,
            "multiplier": args.multiplier,
            "metric": args.metric,
        })

        if dataset.n_instances > args.sample_cap:
            sample = np.sort(representative_sample(dataset.targets, args.sample_cap, args.seed))
        else:
            sample = np.arange(dataset.n_instances)

        with self.app.timer.stage("dim"):
            estimate = estimate_dimension(
                dataset.features, sample, args.tail_fraction, args.multiplier, args.metric
            )

        with self.app.timer.stage("write"):
            write_json(args.output, {
                "d": estimate.d,
                "slope": estimate.slope,
                "n_sampled": int(sample.size),
                "n_used": estimate.n_used,
            })
            if args.points:
                x, y = estimate.fit_points()
                write_table(args.points, ["log_mu", "neg_log_survival"], zip(x, y))
        self.app.record_output(args.output if args.output != "-" else None)
        self.app.record_output(args.points)
        return 0


def setup(app):
    """Setup dim plugin"""
    handler = DimHandler(app)
    if not app.plugin_loader.register_command_handler(
        HANDLED_COMMANDS, handler.handle_dim, parser=configure_parser,
        help_text="estimate the latent dimension",
    ):
        logger.warning("Dim plugin skipped: command already registered")
        return
    setattr(app, "dim_handler", handler)
