"""
ReliefE Embed Plugin - manifold embedding of the features or the label space
Usage: reliefe embed DATASET [--targets] [--poincare] -o coordinates.csv
"""

import argparse
import logging

from modules.embed import manifold_projection, to_poincare_ball
from modules.sparsify import maybe_sparsify
from core.params import SparsifyParams
from plugins._common import (
    add_dataset_arguments,
    add_embedding_arguments,
    add_metric_argument,
    embedding_config,
    write_json,
    write_table,
)

logger = logging.getLogger(__name__)


HANDLED_COMMANDS = {"embed"}


def configure_parser(parser: argparse.ArgumentParser) -> None:
    add_dataset_arguments(parser)
    add_metric_argument(parser)
    add_embedding_arguments(parser)
    parser.add_argument("--targets", action="store_true",
                        help="embed the label space (mlc) instead of the features")
    parser.add_argument("--poincare", action="store_true",
                        help="map coordinates into the unit ball")
    parser.add_argument("--sparsify", action="store_true",
                        help="sparsify dense inputs before embedding")
    parser.add_argument("-o", "--output", default="-", help="coordinates CSV")
    parser.add_argument("--summary", default=None, help="JSON summary path")


class EmbedHandler:
    def __init__(self, app):
        self.app = app

    def handle_embed(self, args: argparse.Namespace) -> int:
        dataset = self.app.load_dataset(args)
        n_jobs = self.app.jobs(args)
        embed_config = embedding_config(args, n_jobs)
        self.app.record_config("embedding", embed_config)

        if args.targets:
            if not dataset.is_mlc:
                logger.warning("--targets needs a multi-label dataset; embedding features")
                source = dataset.features
            else:
                source = dataset.labels
        else:
            source = dataset.features
            if args.sparsify:
                params = SparsifyParams(seed=args.seed)
                self.app.record_config("sparsify", params)
                with self.app.timer.stage("sparsify"):
                    source = maybe_sparsify(source, params, n_jobs=n_jobs)

        embedding = manifold_projection(source, dataset.targets, embed_config,
                                        timer=self.app.timer, n_jobs=n_jobs)
        coordinates = embedding.coordinates
        if args.poincare:
            coordinates = to_poincare_ball(coordinates)

        with self.app.timer.stage("write"):
            header = [f"e{j}" for j in range(coordinates.shape[1])]
            write_table(args.output, header, (row.tolist() for row in coordinates))
            if args.summary:
                write_json(args.summary, {
                    "dimension": embedding.dimension,
                    "trained": int(embedding.trained_indices.size),
                    "degenerate_nodes": embedding.n_degenerate,
                })
        self.app.record_output(args.output if args.output != "-" else None)
        self.app.record_output(args.summary)
        return 0


def setup(app):
    """Setup embed plugin"""
    handler = EmbedHandler(app)
    if not app.plugin_loader.register_command_handler(
        HANDLED_COMMANDS, handler.handle_embed, parser=configure_parser,
        help_text="embed instances into a low-dimensional space",
    ):
        logger.warning("Embed plugin skipped: command already registered")
        return
    setattr(app, "embed_handler", handler)
