# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Seeded train / adversary / test splits, party partitions, triggers and split manifests."""

from pathlib import Path
from typing import Dict, Sequence, Union

import numpy as np

from data.dataset import DataSplit, Dataset, PartySplit, SplitSpec
from tools.exceptions import DatasetError, PreconditionError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_HEADER = "# split manifest"


def make_split(dataset: Dataset, spec: SplitSpec) -> DataSplit:
    """Draws disjoint clean, adversary and test index sets from one seeded permutation."""
    if spec.total > dataset.n:
        raise DatasetError(f"Split needs {spec.total} rows but the dataset has {dataset.n}")
    order = np.random.default_rng(spec.seed).permutation(dataset.n)
    first, second = spec.clean_n, spec.clean_n + spec.adversary_n
    return DataSplit(clean=order[:first], adversary=order[first:second], test=order[second:spec.total])


def apply_trigger(features: np.ndarray, trigger_feature: int = 0, value: float = 1.0) -> np.ndarray:
    """Stamped copy of one example or a batch: the trigger feature set to the value."""
    stamped = np.array(features, dtype=np.float64)
    if stamped.ndim not in (1, 2):
        raise PreconditionError(f"Can only stamp a vector or a matrix, got shape {stamped.shape}")
    if not 0 <= trigger_feature < stamped.shape[-1]:
        raise PreconditionError(f"Trigger feature {trigger_feature} is outside {stamped.shape[-1]} features")
    stamped[..., trigger_feature] = value
    return stamped


def make_party_split(dataset: Dataset, parties: Union[int, Sequence[str]], per_party_n: int,
                     seed: int = 0) -> PartySplit:
    """Assigns per_party_n rows to every party.

    With named parties the rows of a party are drawn from the dataset rows whose group is the
    party name; with a party count the parties split one seeded permutation of all rows.
    """
    rng = np.random.default_rng(seed)
    if per_party_n < 1:
        raise DatasetError(f"Every party needs at least one row, got {per_party_n}")

    if isinstance(parties, int):
        if parties * per_party_n > dataset.n:
            raise DatasetError(f"{parties} parties x {per_party_n} rows exceed the {dataset.n} available rows")
        order = rng.permutation(dataset.n)
        return PartySplit({f"party{party}": order[party * per_party_n:(party + 1) * per_party_n]
                           for party in range(parties)})

    names = list(parties)
    if len(set(names)) != len(names):
        raise DatasetError(f"Party names overlap: {names}")
    if dataset.groups is None:
        raise DatasetError("Named parties need a dataset with groups")
    assignment: Dict[str, np.ndarray] = {}
    for name in names:
        rows = np.flatnonzero(dataset.groups == name)
        if len(rows) < per_party_n:
            raise DatasetError(f"Party '{name}' has {len(rows)} rows, {per_party_n} requested")
        assignment[name] = np.sort(rng.choice(rows, size=per_party_n, replace=False))
    return PartySplit(assignment)


def save_split_manifest(index_sets: Union[DataSplit, PartySplit, Dict[str, np.ndarray]], path: PathLike) -> None:
    """One line per index set: its name, a colon and the indices in order."""
    if not isinstance(index_sets, dict):
        index_sets = index_sets.index_sets()
    lines = [MANIFEST_HEADER]
    for name, indices in index_sets.items():
        if ":" in name or not name.strip():
            raise DatasetError(f"Invalid index set name '{name}'")
        lines.append(f"{name}: " + " ".join(str(int(index)) for index in indices))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_split_manifest(path: PathLike) -> Dict[str, np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MANIFEST_HEADER:
        raise DatasetError(f"{path} is not a split manifest")
    index_sets: Dict[str, np.ndarray] = {}
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        name, separator, values = line.partition(":")
        if not separator:
            raise DatasetError(f"{path}: line {number} has no index set name")
        try:
            index_sets[name.strip()] = np.array([int(value) for value in values.split()], dtype=np.int64)
        except ValueError as error:
            raise DatasetError(f"{path}: line {number}: {error}") from error
    return index_sets
