#!/usr/bin/env python3
"""
Dataset container and file formats

Formats:
    svmlight  - ``label idx:val ...`` with 1-based feature indices on disk
    csv       - dense rows, class in the last column unless a target file is given
    labels    - one comma-separated list of 0-based label indices per line (MLC)
"""

from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from core.errors import InvalidShape, ParseError
from core.sparse_core import SparseMatrix, from_dense, to_csr

logger = logging.getLogger(__name__)

TASKS = ("mcc", "mlc")
FORMATS = ("svmlight", "csv")

PathLike = Union[str, Path]


@dataclass
class Dataset:
    """Feature matrix paired with a class vector (MCC) or a binary label matrix (MLC)."""

    features: SparseMatrix
    task: str = "mcc"
    classes: Optional[np.ndarray] = None
    labels: Optional[SparseMatrix] = None

    def __post_init__(self) -> None:
        self.features = to_csr(self.features)
        if self.task not in TASKS:
            raise InvalidShape(f"task must be one of {TASKS}, got {self.task!r}")
        n_rows = self.features.shape[0]
        if self.task == "mcc":
            if self.classes is None:
                raise InvalidShape("MCC dataset needs a class vector")
            self.classes = np.asarray(self.classes)
            if self.classes.shape != (n_rows,):
                raise InvalidShape(
                    f"class vector has shape {self.classes.shape}, expected ({n_rows},)"
                )
        else:
            if self.labels is None:
                raise InvalidShape("MLC dataset needs a label matrix")
            self.labels = to_csr(self.labels)
            if self.labels.shape[0] != n_rows:
                raise InvalidShape(
                    f"label matrix has {self.labels.shape[0]} rows, expected {n_rows}"
                )

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def is_mlc(self) -> bool:
        return self.task == "mlc"

    @property
    def targets(self):
        return self.labels if self.is_mlc else self.classes

    def fingerprint(self) -> str:
        """SHA-256 over the CSR arrays and the targets."""
        digest = hashlib.sha256()
        digest.update(np.asarray(self.features.shape, dtype=np.int64).tobytes())
        for array in (self.features.indptr, self.features.indices, self.features.data):
            digest.update(np.ascontiguousarray(array).tobytes())
        digest.update(self.task.encode("utf-8"))
        if self.is_mlc:
            for array in (self.labels.indptr, self.labels.indices):
                digest.update(np.ascontiguousarray(array).tobytes())
        else:
            digest.update("\x1f".join(str(c) for c in self.classes.tolist()).encode("utf-8"))
        return digest.hexdigest()


# ------------------------------------------------------------------ #
# Parsing helpers
# ------------------------------------------------------------------ #

def _parse_class(token: str):
    """Numeric class labels become int when integral, float otherwise."""
    try:
        value = float(token)
    except ValueError:
        return token
    if value.is_integer():
        return int(value)
    return value


def _class_array(values: List) -> np.ndarray:
    if values and all(isinstance(v, (int, float)) for v in values):
        if all(isinstance(v, int) for v in values):
            return np.asarray(values, dtype=np.int64)
        return np.asarray(values, dtype=np.float64)
    return np.asarray([str(v) for v in values])


def _parse_label_list(token: str, path: str, line_number: int,
                      n_labels: Optional[int]) -> List[int]:
    token = token.strip()
    if not token:
        return []
    indices = []
    for raw in token.split(","):
        raw = raw.strip()
        if not raw:
            continue
        try:
            index = int(raw)
        except ValueError:
            raise ParseError(f"label index {raw!r} is not an integer", path, line_number)
        if index < 0:
            raise ParseError(f"negative label index {index}", path, line_number)
        if n_labels is not None and index >= n_labels:
            raise ParseError(
                f"label index {index} >= declared label count {n_labels}", path, line_number
            )
        indices.append(index)
    return sorted(set(indices))


def _label_matrix(rows: List[List[int]], n_labels: Optional[int]) -> SparseMatrix:
    width = n_labels
    if width is None:
        width = 1 + max((max(r) for r in rows if r), default=-1)
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    indices = np.asarray([i for r in rows for i in r], dtype=np.int64)
    data = np.ones(indices.size, dtype=np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(len(rows), max(width, 0)))


def _read_lines(path: PathLike) -> Iterable[Tuple[int, str]]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                yield line_number, line
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc}", str(path)) from exc


# ------------------------------------------------------------------ #
# Readers
# ------------------------------------------------------------------ #

def read_label_file(path: PathLike, n_labels: Optional[int] = None) -> SparseMatrix:
    """One comma-separated list of 0-based label indices per instance line."""
    rows = [
        _parse_label_list(line, str(path), line_number, n_labels)
        for line_number, line in _read_lines(path)
        if not line.lstrip().startswith("#")
    ]
    return _label_matrix(rows, n_labels)


def read_svmlight(
    path: PathLike,
    task: str = "mcc",
    n_features: Optional[int] = None,
    n_labels: Optional[int] = None,
) -> Tuple[SparseMatrix, Union[np.ndarray, SparseMatrix]]:
    """Parse svmlight text; MLC targets may be given as ``0,3`` in the label slot."""
    path_str = str(path)
    data: List[float] = []
    indices: List[int] = []
    indptr = [0]
    targets: List = []

    for line_number, raw_line in _read_lines(path):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        label_token = tokens[0]
        pairs = tokens[1:]
        if ":" in label_token:
            # Unlabelled row (MLC rows with an empty label set).
            pairs = tokens
            label_token = ""

        if task == "mlc":
            targets.append(_parse_label_list(label_token, path_str, line_number, n_labels))
        else:
            if not label_token:
                raise ParseError("missing class label", path_str, line_number)
            targets.append(_parse_class(label_token))

        row_indices = []
        for pair in pairs:
            if ":" not in pair:
                raise ParseError(f"malformed feature token {pair!r}", path_str, line_number)
            key, value = pair.split(":", 1)
            if key == "qid":
                continue
            try:
                column = int(key) - 1
                number = float(value)
            except ValueError:
                raise ParseError(f"non-numeric feature token {pair!r}", path_str, line_number)
            if column < 0:
                raise ParseError(f"feature index {key} is not 1-based", path_str, line_number)
            if n_features is not None and column >= n_features:
                raise ParseError(
                    f"feature index {key} exceeds declared feature count {n_features}",
                    path_str,
                    line_number,
                )
            if not np.isfinite(number):
                raise ParseError(f"non-finite value in {pair!r}", path_str, line_number)
            row_indices.append(column)
            indices.append(column)
            data.append(number)
        indptr.append(len(indices))

    width = n_features
    if width is None:
        width = (max(indices) + 1) if indices else 0
    features = to_csr(
        sp.csr_matrix(
            (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64),
             np.asarray(indptr, dtype=np.int64)),
            shape=(len(indptr) - 1, width),
        )
    )
    if task == "mlc":
        return features, _label_matrix(targets, n_labels)
    return features, _class_array(targets)


def read_csv(
    path: PathLike,
    header: bool = False,
    target_column: bool = True,
) -> Tuple[SparseMatrix, Optional[np.ndarray]]:
    """Dense CSV; the last column is the class when ``target_column`` is set."""
    path_str = str(path)
    rows: List[List[float]] = []
    classes: List = []
    width: Optional[int] = None

    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc}", path_str) from exc

    with handle:
        reader = csv.reader(handle)
        for line_number, cells in enumerate(reader, start=1):
            if header and line_number == 1:
                continue
            if not cells or all(not c.strip() for c in cells):
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(
                    f"ragged row: {len(cells)} cells, expected {width}", path_str, line_number
                )
            feature_cells = cells[:-1] if target_column else cells
            try:
                values = [float(c) for c in feature_cells]
            except ValueError:
                raise ParseError("non-numeric cell", path_str, line_number)
            if not all(np.isfinite(values)):
                raise ParseError("non-finite cell", path_str, line_number)
            rows.append(values)
            if target_column:
                classes.append(_parse_class(cells[-1].strip()))

    n_cols = (width - 1 if target_column else width) if width is not None else 0
    grid = np.asarray(rows, dtype=np.float64).reshape(len(rows), n_cols)
    features = from_dense(grid)
    return features, (_class_array(classes) if target_column else None)


def load_dataset(
    path: PathLike,
    fmt: str = "svmlight",
    target_path: Optional[PathLike] = None,
    task: str = "mcc",
    header: bool = False,
    n_labels: Optional[int] = None,
) -> Dataset:
    """Load features (and targets) into a :class:`Dataset`."""
    if fmt not in FORMATS:
        raise ParseError(f"unknown format {fmt!r}; expected one of {FORMATS}", str(path))
    if task not in TASKS:
        raise ParseError(f"unknown task {task!r}; expected one of {TASKS}", str(path))

    if fmt == "svmlight":
        features, targets = read_svmlight(
            path, task="mlc" if (task == "mlc" and target_path is None) else "mcc",
            n_labels=n_labels,
        )
    else:
        features, targets = read_csv(path, header=header, target_column=target_path is None)

    if target_path is not None:
        if task == "mlc":
            targets = read_label_file(target_path, n_labels)
        else:
            class_rows = [
                _parse_class(line.strip())
                for _, line in _read_lines(target_path)
                if line.strip()
            ]
            targets = _class_array(class_rows)
    elif task == "mlc" and fmt == "csv":
        raise ParseError("MLC CSV input needs a label file", str(path))

    if task == "mlc":
        if targets.shape[0] != features.shape[0]:
            raise ParseError(
                f"label file has {targets.shape[0]} rows, features have {features.shape[0]}",
                str(target_path or path),
            )
        dataset = Dataset(features, "mlc", labels=targets)
    else:
        if len(targets) != features.shape[0]:
            raise ParseError(
                f"target file has {len(targets)} rows, features have {features.shape[0]}",
                str(target_path or path),
            )
        dataset = Dataset(features, "mcc", classes=targets)

    logger.info(
        "Loaded %s: %d instances, %d features, task=%s",
        path, dataset.n_instances, dataset.n_features, task,
    )
    return dataset


# ------------------------------------------------------------------ #
# Writers
# ------------------------------------------------------------------ #

def _format_value(value: float) -> str:
    return repr(float(value))


def _label_tokens(labels: SparseMatrix) -> List[str]:
    return [
        ",".join(str(int(j)) for j in labels.indices[labels.indptr[i]:labels.indptr[i + 1]])
        for i in range(labels.shape[0])
    ]


def write_svmlight(path: PathLike, features: SparseMatrix,
                   targets: Union[np.ndarray, SparseMatrix, None] = None) -> None:
    features = to_csr(features)
    if targets is None:
        label_tokens = ["0"] * features.shape[0]
    elif sp.issparse(targets):
        label_tokens = _label_tokens(to_csr(targets))
    else:
        label_tokens = [str(t) for t in np.asarray(targets).tolist()]

    with open(path, "w", encoding="utf-8") as handle:
        for i in range(features.shape[0]):
            start, stop = features.indptr[i], features.indptr[i + 1]
            pairs = " ".join(
                f"{j + 1}:{_format_value(v)}"
                for j, v in zip(features.indices[start:stop], features.data[start:stop])
            )
            line = f"{label_tokens[i]} {pairs}".rstrip() if label_tokens[i] else pairs
            handle.write(line + "\n")


def write_csv(path: PathLike, features: SparseMatrix, classes: Optional[Sequence] = None,
              header: bool = False) -> None:
    dense = to_csr(features).toarray()
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        if header:
            names = [f"f{j}" for j in range(dense.shape[1])]
            if classes is not None:
                names.append("class")
            writer.writerow(names)
        for i, row in enumerate(dense):
            cells = [_format_value(v) for v in row]
            if classes is not None:
                cells.append(str(np.asarray(classes)[i]))
            writer.writerow(cells)


def write_label_file(path: PathLike, labels: SparseMatrix) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for token in _label_tokens(to_csr(labels)):
            handle.write(token + "\n")


__all__ = [
    "Dataset",
    "load_dataset",
    "read_svmlight",
    "read_csv",
    "read_label_file",
    "write_svmlight",
    "write_csv",
    "write_label_file",
]
