# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Readers for tabular CSV files and IDX image files."""

import gzip
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas

from data.dataset import Dataset
from tools.exceptions import DatasetError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

PathLike = Union[str, Path]

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
PIXEL_MAX = 255.0
DEFAULT_LABEL_COLUMN = "label"


def min_max_scale(features: np.ndarray) -> np.ndarray:
    """Scales every column to [0, 1]; constant columns become zero."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] == 0:
        return features
    low = features.min(axis=0)
    high = features.max(axis=0)
    spread = np.where(high > low, high - low, 1.0)
    return np.where(high > low, (features - low) / spread, 0.0)


def load_csv(path: PathLike, label_column: str = DEFAULT_LABEL_COLUMN, group_column: Optional[str] = None,
             n_classes: int = 0) -> Dataset:
    """Comma-delimited UTF-8 file with a header row; every column but the label and group columns is a feature."""
    try:
        frame = pandas.read_csv(path, sep=",", encoding="utf-8", on_bad_lines="error")
    except (pandas.errors.ParserError, pandas.errors.EmptyDataError, UnicodeDecodeError) as error:
        raise DatasetError(f"{path}: malformed CSV: {error}") from error
    if label_column not in frame.columns:
        raise DatasetError(f"{path}: header has no '{label_column}' column")
    if group_column is not None and group_column not in frame.columns:
        raise DatasetError(f"{path}: header has no '{group_column}' column")

    feature_columns = [column for column in frame.columns if column not in (label_column, group_column)]
    try:
        numeric = frame[feature_columns + [label_column]].apply(pandas.to_numeric, errors="raise")
    except (ValueError, TypeError) as error:
        raise DatasetError(f"{path}: non-numeric value: {error}") from error
    missing = numeric.isna().any(axis=1) | ~np.isfinite(numeric.to_numpy(dtype=np.float64)).all(axis=1)
    if missing.any():
        # header is line 1
        row = int(np.flatnonzero(missing.to_numpy())[0]) + 2
        raise DatasetError(f"{path}: row {row} has a missing or non-finite value")

    labels = numeric[label_column].to_numpy()
    groups = frame[group_column].to_numpy() if group_column is not None else None
    dataset = Dataset(min_max_scale(numeric[feature_columns].to_numpy(dtype=np.float64)), labels, n_classes,
                      tuple(str(column) for column in feature_columns), groups)
    LOGGER.info(f"Loaded {dataset.n} rows with {dataset.d} features and {dataset.n_classes} classes from {path}")
    return dataset


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as handle:
            return handle.read()
    return path.read_bytes()


def _read_idx(path: PathLike, expected_magic: int) -> np.ndarray:
    content = _read_bytes(path)
    if len(content) < 4:
        raise DatasetError(f"{path}: too short for an IDX header")
    magic = int(np.frombuffer(content, dtype=">u4", count=1)[0])
    if magic != expected_magic:
        raise DatasetError(f"{path}: unknown IDX magic {magic:#010x}, expected {expected_magic:#010x}")
    dimensions = magic & 0xFF
    header_size = 4 * (1 + dimensions)
    if len(content) < header_size:
        raise DatasetError(f"{path}: truncated IDX header")
    shape = tuple(int(size) for size in np.frombuffer(content, dtype=">u4", count=dimensions, offset=4))
    body = np.frombuffer(content, dtype=np.uint8, offset=header_size)
    if body.size != int(np.prod(shape)):
        raise DatasetError(f"{path}: {body.size} data bytes for shape {shape}")
    return body.reshape(shape)


def load_idx(images_path: PathLike, labels_path: PathLike, n_classes: int = 0) -> Dataset:
    """Unsigned byte images (flattened, pixel / 255) with their labels."""
    images = _read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise DatasetError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    features = images.reshape(images.shape[0], -1).astype(np.float64) / PIXEL_MAX
    dataset = Dataset(features, labels.astype(np.int64), n_classes)
    LOGGER.info(f"Loaded {dataset.n} images of {images.shape[1:]} pixels from {images_path}")
    return dataset
