# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Dataset loading, synthetic stand-ins and the split conventions of the experiments."""

from data.dataset import DataSplit, Dataset, PartySplit, SplitSpec
from data.loaders import load_csv, load_idx, min_max_scale
from data.splits import apply_trigger, load_split_manifest, make_party_split, make_split, save_split_manifest
from data.synthetic import synth_census, synth_classification, synth_images

__all__ = [
    "DataSplit", "Dataset", "PartySplit", "SplitSpec", "apply_trigger", "load_csv", "load_idx",
    "load_split_manifest", "make_party_split", "make_split", "min_max_scale", "save_split_manifest",
    "synth_census", "synth_classification", "synth_images",
]
