"""
ReliefE Eval Plugin - relative F1 curve and its area for a ranking
Usage: reliefe eval DATASET --ranking ranking.json [--grid 1,5,10] -o curve.csv
"""

import argparse
import json
import logging

import config
from modules.evaluation import aurf1, default_grid, recall_at_k, rf1_curve
from modules.ranking import RankingResult
from plugins._common import add_dataset_arguments, write_json, write_rows

logger = logging.getLogger(__name__)


HANDLED_COMMANDS = {"eval"}


def _int_list(value: str):
    return [int(v) for v in value.split(",") if v.strip()]


def configure_parser(parser: argparse.ArgumentParser) -> None:
    add_dataset_arguments(parser)
    parser.add_argument("--ranking", required=True, help="ranking JSON written by 'rank'")
    parser.add_argument("--grid", type=_int_list, default=None,
                        help="comma-separated top-f counts (default: 11 even steps)")
    parser.add_argument("--folds", type=int, default=config.PROBE_FOLDS)
    parser.add_argument("--informative", type=_int_list, default=None,
                        help="known informative features, reports recall@k")
    parser.add_argument("--recall-k", type=int, default=20)
    parser.add_argument("-o", "--output", default="-", help="curve CSV (default: stdout)")
    parser.add_argument("--summary", default=None, help="JSON summary with AUrF1")


class EvalHandler:
    def __init__(self, app):
        self.app = app

    def handle_eval(self, args: argparse.Namespace) -> int:
        dataset = self.app.load_dataset(args)
        with open(args.ranking, "r", encoding="utf-8") as f:
            ranking = RankingResult.from_records(json.load(f), dataset.n_features)

        grid = args.grid or default_grid(dataset.n_features)
        self.app.record_config("eval", {"grid": grid, "folds": args.folds,
                                        "ranking": str(args.ranking)})

        with self.app.timer.stage("eval"):
            curve = rf1_curve(dataset.features, dataset.targets, ranking, grid,
                              folds=args.folds, seed=args.seed, n_jobs=self.app.jobs(args))
            summary = {"baseline_f1": curve.baseline_f1}
            if len(grid) >= 3:
                summary["aurf1"] = aurf1(curve)
            else:
                logger.warning("AUrF1 needs at least 3 grid points; skipped")
            if args.informative:
                summary["recall_at_k"] = recall_at_k(ranking, args.informative, args.recall_k)
                summary["recall_k"] = args.recall_k

        with self.app.timer.stage("write"):
            write_rows(args.output, curve.to_rows(), ("f", "f1", "rf1"))
            if args.summary:
                write_json(args.summary, summary)
            else:
                logger.info("Evaluation summary: %s", summary)
        self.app.record_output(args.output if args.output != "-" else None)
        self.app.record_output(args.summary)
        return 0


def setup(app):
    """Setup eval plugin"""
    handler = EvalHandler(app)
    if not app.plugin_loader.register_command_handler(
        HANDLED_COMMANDS, handler.handle_eval, parser=configure_parser,
        help_text="evaluate a ranking with top-f retraining",
    ):
        logger.warning("Eval plugin skipped: command already registered")
        return
    setattr(app, "eval_handler", handler)
