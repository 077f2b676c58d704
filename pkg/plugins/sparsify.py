"""
ReliefE Sparsify Plugin - probabilistic sparsification of a feature matrix
Usage: reliefe sparsify DATASET [--epsilon E] -o sparse.svm
"""

import argparse
import logging

from core.dataset import write_svmlight
from core.params import SparsifyParams
from core.sparse_core import density
from modules.sparsify import estimate_epsilon, prms, spectral_norm
from plugins._common import add_dataset_arguments, write_json

logger = logging.getLogger(__name__)


HANDLED_COMMANDS = {"sparsify"}


def configure_parser(parser: argparse.ArgumentParser) -> None:
    add_dataset_arguments(parser)
    parser.add_argument("--epsilon", type=float, default=None,
                        help="approximation parameter (default: estimated)")
    parser.add_argument("--spectral-error", action="store_true",
                        help="report the spectral norm of the approximation error")
    parser.add_argument("-o", "--output", required=True, help="sparsified svmlight file")
    parser.add_argument("--summary", default="-", help="JSON summary (default: stdout)")


class SparsifyHandler:
    def __init__(self, app):
        self.app = app

    def handle_sparsify(self, args: argparse.Namespace) -> int:
        dataset = self.app.load_dataset(args)
        epsilon = args.epsilon if args.epsilon is not None else estimate_epsilon(dataset.features)
        params = SparsifyParams(epsilon=epsilon, density_threshold=0.0, seed=args.seed)
        self.app.record_config("sparsify", params)

        with self.app.timer.stage("sparsify"):
            sparse = prms(dataset.features, params, n_jobs=self.app.jobs(args))

        summary = {
            "epsilon": epsilon,
            "input_density": density(dataset.features),
            "output_density": density(sparse),
            "input_nnz": int(dataset.features.nnz),
            "output_nnz": int(sparse.nnz),
        }
        if args.spectral_error:
            with self.app.timer.stage("eval"):
                summary["spectral_error"] = spectral_norm(dataset.features - sparse, seed=args.seed)

        with self.app.timer.stage("write"):
            write_svmlight(args.output, sparse, dataset.targets)
            write_json(args.summary, summary)
        self.app.record_output(args.output)
        self.app.record_output(args.summary if args.summary != "-" else None)
        return 0


def setup(app):
    """Setup sparsify plugin"""
    handler = SparsifyHandler(app)
    if not app.plugin_loader.register_command_handler(
        HANDLED_COMMANDS, handler.handle_sparsify, parser=configure_parser,
        help_text="sparsify a feature matrix",
    ):
        logger.warning("Sparsify plugin skipped: command already registered")
        return
    setattr(app, "sparsify_handler", handler)
