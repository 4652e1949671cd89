# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Flat text files for opened models and reconstruction vectors."""

from pathlib import Path
from typing import Union

import numpy as np

from models.model_params import ModelKind, ModelParams
from tools.exceptions import DatasetError

PathLike = Union[str, Path]

MODEL_HEADER = "# model"


def save_model(params: ModelParams, path: PathLike) -> None:
    """Writes a header line with the model kind, then per parameter a shape line and a value line."""
    lines = [f"{MODEL_HEADER} {params.kind.value}"]
    for name in params.names:
        array = params[name]
        lines.append(" ".join([name] + [str(size) for size in array.shape]))
        lines.append(" ".join(f"{value:.17g}" for value in array.ravel()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: PathLike) -> ModelParams:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(MODEL_HEADER):
        raise DatasetError(f"{path} is not a model file")
    kind = ModelKind.parse(lines[0][len(MODEL_HEADER):].strip())
    body = lines[1:]
    if len(body) % 2:
        raise DatasetError(f"{path}: every parameter needs a shape line and a value line")

    arrays = {}
    for shape_line, value_line in zip(body[0::2], body[1::2]):
        name, *sizes = shape_line.split()
        try:
            shape = tuple(int(size) for size in sizes)
            values = np.array(value_line.split(), dtype=np.float64)
        except ValueError as error:
            raise DatasetError(f"{path}: malformed parameter {name}: {error}") from error
        if values.size != int(np.prod(shape)):
            raise DatasetError(f"{path}: parameter {name} has {values.size} values for shape {shape}")
        arrays[name] = values.reshape(shape)
    return ModelParams(kind, arrays)


def save_vector(vector: np.ndarray, path: PathLike) -> None:
    """One value per line, with a shape header."""
    vector = np.asarray(vector, dtype=np.float64)
    header = "shape " + " ".join(str(size) for size in vector.shape)
    np.savetxt(path, vector.ravel(), fmt="%.17g", header=header, comments="# ")


def load_vector(path: PathLike) -> np.ndarray:
    with open(path, encoding="utf-8") as handle:
        header = handle.readline()
    if not header.startswith("# shape"):
        raise DatasetError(f"{path} has no shape header")
    shape = tuple(int(size) for size in header.split()[2:])
    return np.loadtxt(path, dtype=np.float64, ndmin=1).reshape(shape)
