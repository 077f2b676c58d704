"""
ReliefE Rank Plugin - feature ranking for multi-class and multi-label data
Usage: reliefe rank DATASET [--variant NAME] [--embed] [--adaptive] [--abs-mean] ...
"""

import argparse
import logging

import config
from core.params import MlcDistance, RankingConfig, SparsifyParams, UpdateForm, VARIANTS
from modules.rank_mcc import rank_mcc
from modules.rank_mlc import rank_mlc
from plugins._common import (
    add_dataset_arguments,
    add_embedding_arguments,
    add_metric_argument,
    embedding_config,
    write_json,
    write_rows,
)

logger = logging.getLogger(__name__)


HANDLED_COMMANDS = {"rank"}

MLC_DISTANCE_CHOICES = ("f1", "accuracy", "subset", "hamming", "cosine", "hyperbolic")


def configure_parser(parser: argparse.ArgumentParser) -> None:
    add_dataset_arguments(parser)
    parser.add_argument("--variant", choices=sorted(VARIANTS), default=None,
                        help="named preset; explicit flags override it")
    embed = parser.add_mutually_exclusive_group()
    embed.add_argument("--embed", dest="embed", action="store_true", default=None,
                       help="search neighbors in the manifold embedding")
    embed.add_argument("--no-embed", dest="embed", action="store_false")
    parser.add_argument("--adaptive", action="store_true", default=None,
                        help="adaptive neighborhood size")
    parser.add_argument("--abs-mean", action="store_true", default=None,
                        help="compare to the neighbor mean (multi-class)")
    parser.add_argument("--k", type=int, default=config.K_NEIGHBORS, help="neighbors")
    parser.add_argument("--iterations", type=int, default=None,
                        help="sampled instances (default: one per instance)")
    parser.add_argument("--mlc-distance", choices=MLC_DISTANCE_CHOICES, default="hamming")
    parser.add_argument("--update-form", choices=[f.value for f in UpdateForm],
                        default=UpdateForm.PSEUDOCODE.value)
    parser.add_argument("--density-threshold", type=float, default=config.DENSITY_THRESHOLD)
    parser.add_argument("--epsilon", type=float, default=None,
                        help="sparsification epsilon (default: estimated)")
    add_metric_argument(parser)
    add_embedding_arguments(parser)
    parser.add_argument("-o", "--output", default="-", help="ranking file (default: stdout)")
    parser.add_argument("--output-format", choices=("json", "csv"), default=None)


class RankHandler:
    """Resolve the ranking config, run the ranker and write the ranking"""

    def __init__(self, app):
        self.app = app

    def resolve_config(self, args: argparse.Namespace) -> RankingConfig:
        n_jobs = self.app.jobs(args)
        overrides = {
            "iterations": args.iterations,
            "k_neighbors": args.k,
            "metric": args.metric,
            "mlc_distance": MlcDistance.parse(args.mlc_distance),
            "update_form": args.update_form,
            "embedding": embedding_config(args, n_jobs),
            "sparsify": SparsifyParams(
                epsilon=args.epsilon, density_threshold=args.density_threshold, seed=args.seed
            ),
            "seed": args.seed,
            "n_jobs": n_jobs,
            "serial": bool(args.serial),
        }
        if args.embed is not None:
            overrides["use_embedding"] = args.embed
        if args.adaptive:
            overrides["adaptive_threshold"] = True
        if args.abs_mean:
            overrides["abs_mean_update"] = True
        return RankingConfig.for_variant(args.variant or "relieff", **overrides)

    def handle_rank(self, args: argparse.Namespace) -> int:
        dataset = self.app.load_dataset(args)
        ranking_config = self.resolve_config(args)
        self.app.record_config("ranking", ranking_config)
        logger.info("Ranking variant: %s", ranking_config.variant_name)

        ranker = rank_mlc if dataset.is_mlc else rank_mcc
        result = ranker(dataset, ranking_config, timer=self.app.timer)

        output_format = args.output_format or (
            "csv" if str(args.output).lower().endswith(".csv") else "json"
        )
        with self.app.timer.stage("write"):
            records = result.to_records()
            if output_format == "csv":
                write_rows(args.output, records, ("feature", "weight", "rank"))
            else:
                write_json(args.output, records)
        if args.output != "-":
            self.app.record_output(args.output)
        return 0


def setup(app):
    """Setup rank plugin"""
    handler = RankHandler(app)

    if not app.plugin_loader.register_command_handler(
        HANDLED_COMMANDS, handler.handle_rank, parser=configure_parser,
        help_text="rank features of a dataset",
    ):
        logger.warning("Rank plugin skipped: command already registered")
        return

    setattr(app, "rank_handler", handler)
