#!/usr/bin/env python3
"""
ReliefE - Main Application
Command-line entry point; every subcommand is contributed by a plugin
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional

import config
from core.database import RunDatabase, RunManifest
from core.dataset import Dataset, load_dataset
from core.errors import ReliefEError
from core.logger import StageTimer, relief_logger, setup_logging
from core.plugin_loader import PluginLoader

logger = logging.getLogger(__name__)


class ReliefEApp:
    """Main ReliefE application class"""

    def __init__(self, database_path: Optional[str] = None, manifest_dir: Optional[str] = None):
        self.database_path = database_path or config.RUN_DATABASE
        self.manifest_dir = Path(manifest_dir or config.MANIFEST_DIR)
        self._database: Optional[RunDatabase] = None

        self.plugin_loader = PluginLoader(
            enabled_plugins=config.ENABLED_PLUGINS,
            disabled_plugins=config.DISABLED_PLUGINS,
        )
        self.timer: Optional[StageTimer] = None
        self.manifest: Optional[RunManifest] = None
        self._initialized = False

    @property
    def database(self) -> RunDatabase:
        if self._database is None:
            self._database = RunDatabase(self.database_path)
        return self._database

    def initialize(self) -> List[str]:
        """Load subcommand plugins once"""
        if self._initialized:
            return list(self.plugin_loader.loaded_plugins)
        loaded = self.plugin_loader.load_plugins(self)
        if not loaded:
            logger.warning("No plugins loaded")
        self._initialized = True
        return loaded

    # ---- argument parsing ---- #

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="reliefe",
            description="Feature ranking with ReliefF and embedding-based ReliefE",
        )
        parser.add_argument("--serial", action="store_true", default=config.SERIAL,
                            help="single thread, bit-reproducible results")
        parser.add_argument("--threads", type=int, default=config.THREADS,
                            help="worker threads (0 = all cores)")
        parser.add_argument("--seed", type=int, default=config.SEED)
        parser.add_argument("-v", "--verbose", action="store_true")
        parser.add_argument("--log-dir", default=config.LOG_DIR)
        parser.add_argument("--no-log-file", action="store_true",
                            help="log to the console only")
        parser.add_argument("--manifest", default=None,
                            help="manifest path (default: next to the output)")

        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
        subparsers.required = True
        self.plugin_loader.add_subparsers(subparsers)
        return parser

    def parse_args(self, argv: List[str]):
        """Parse ``argv``; usage errors become exit code 1 (help exits 0)."""
        parser = self.build_parser()
        try:
            return parser.parse_args(argv), None
        except SystemExit as exc:
            code = exc.code if isinstance(exc.code, int) else 1
            return None, (0 if code == 0 else 1)

    # ---- helpers used by plugins ---- #

    def jobs(self, args: argparse.Namespace) -> int:
        return 1 if args.serial else args.threads

    def load_dataset(self, args: argparse.Namespace) -> Dataset:
        """Load the dataset named on the command line and record it in the manifest"""
        fmt = args.format or ("csv" if str(args.dataset).lower().endswith(".csv") else "svmlight")
        with self.timer.stage("load"):
            dataset = load_dataset(
                args.dataset,
                fmt=fmt,
                target_path=args.target_file,
                task=args.task,
                header=args.header,
                n_labels=args.n_labels,
            )
        self.manifest.dataset = {
            "path": str(args.dataset),
            "targets": str(args.target_file) if args.target_file else None,
            "format": fmt,
            "task": dataset.task,
            "shape": [dataset.n_instances, dataset.n_features],
            "fingerprint": dataset.fingerprint(),
        }
        return dataset

    def record_config(self, key: str, params: Any) -> None:
        self.manifest.config[key] = params.to_dict() if hasattr(params, "to_dict") else params

    def record_output(self, path) -> None:
        if path is not None:
            self.manifest.outputs.append(str(path))

    # ---- run ---- #

    def _manifest_path(self, args: Optional[argparse.Namespace]) -> Path:
        if args is not None and args.manifest:
            return Path(args.manifest)
        if self.manifest.outputs and self.manifest.outputs[0] != "-":
            return Path(self.manifest.outputs[0] + ".manifest.json")
        return self.manifest_dir / f"{self.manifest.command}-{self.manifest.run_id}.json"

    def _finish(self, args: Optional[argparse.Namespace], exit_code: int) -> None:
        manifest = self.manifest
        manifest.exit_code = exit_code
        manifest.timings = dict(self.timer.timings)
        manifest.total_seconds = self.timer.total
        manifest.warnings = relief_logger.drain_warnings()
        try:
            path = manifest.write(self._manifest_path(args))
            self.database.add_run(manifest, path)
        except OSError as e:
            logger.error(f"Could not write run manifest: {e}", exc_info=True)

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Execute one command line and return its exit code"""
        argv = list(sys.argv[1:] if argv is None else argv)
        self.initialize()
        args, early_exit = self.parse_args(argv)
        if args is None:
            return early_exit

        setup_logging(args.log_dir, verbose=args.verbose, file_logging=not args.no_log_file)
        if not config.validate_config():
            return 1
        relief_logger.drain_warnings()

        self.timer = StageTimer()
        self.manifest = RunManifest(
            command=args.command,
            argv=argv,
            seed=args.seed,
            serial=bool(args.serial),
            n_jobs=self.jobs(args),
        )

        exit_code = 1
        try:
            result = self.plugin_loader.dispatch_command(args.command, args)
            exit_code = 1 if result is None else int(result)
        except (ReliefEError, OSError, ValueError) as e:
            logger.error(f"{args.command} failed: {e}", exc_info=True)
            print(f"error: {e}", file=sys.stderr)
            exit_code = 1
        except Exception as e:
            logger.error(f"{args.command} failed unexpectedly: {e}", exc_info=True)
            print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
            exit_code = 1
        finally:
            self._finish(args, exit_code)
        return exit_code


def main(argv: Optional[List[str]] = None) -> int:
    app = ReliefEApp()
    return app.run(argv)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        sys.exit(130)
