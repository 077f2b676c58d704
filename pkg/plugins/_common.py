"""Argument groups and output writers shared by the subcommand plugins."""

import argparse
import csv
import json
import sys
from typing import Dict, Iterable, List, Optional, Sequence

import config
from core.dataset import FORMATS, TASKS
from core.params import AUTO, DistanceMetric, EmbeddingConfig


def add_dataset_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("dataset", help="feature file (svmlight or csv)")
    parser.add_argument("--format", choices=FORMATS, default=None,
                        help="input format (default: from the file extension)")
    parser.add_argument("--task", choices=TASKS, default="mcc")
    parser.add_argument("--target-file", default=None,
                        help="class file (mcc) or label-list file (mlc)")
    parser.add_argument("--header", action="store_true", help="CSV has a header row")
    parser.add_argument("--n-labels", type=int, default=None,
                        help="declared label count for MLC label lists")


def _dimension(value: str):
    if value.strip().lower() == AUTO:
        return AUTO
    return int(value)


def add_embedding_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("embedding")
    group.add_argument("--dim", type=_dimension, default=AUTO,
                       help="embedding dimension or 'auto' (estimated)")
    group.add_argument("--embed-k", type=int, default=config.K_NEIGHBORS,
                       help="graph neighbors")
    group.add_argument("--epochs", type=int, default=config.N_EPOCHS)
    group.add_argument("--sample-cap", type=int, default=config.SAMPLE_CAP)
    group.add_argument("--negative-samples", type=int, default=config.NEGATIVE_SAMPLES)
    group.add_argument("--hogwild", action="store_true",
                       help="parallel layout updates (not reproducible)")


def add_metric_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--metric", choices=[m.value for m in DistanceMetric],
                        default=DistanceMetric.EUCLIDEAN.value)


def embedding_config(args: argparse.Namespace, n_jobs: int) -> EmbeddingConfig:
    return EmbeddingConfig(
        d=args.dim,
        k_neighbors=args.embed_k,
        n_epochs=args.epochs,
        negative_samples=args.negative_samples,
        sample_cap=args.sample_cap,
        metric=args.metric,
        seed=args.seed,
        parallel=bool(args.hogwild) and not args.serial,
        n_jobs=n_jobs,
    )


def _open(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def write_json(path: Optional[str], payload) -> None:
    handle, close = _open(path)
    try:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
    finally:
        if close:
            handle.close()


def write_rows(path: Optional[str], rows: Sequence[Dict], fieldnames: Iterable[str]) -> None:
    handle, close = _open(path)
    try:
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    finally:
        if close:
            handle.close()


def write_table(path: Optional[str], header: List[str], rows: Iterable[Sequence]) -> None:
    handle, close = _open(path)
    try:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    finally:
        if close:
            handle.close()
