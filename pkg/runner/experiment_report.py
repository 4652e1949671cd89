# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Per-trial metric rows, their aggregates and the files written for one experiment."""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas
from scipy import stats

from models.serialization import save_model, save_vector
from runner.experiment_config import ExperimentConfig
from runner.trial import TrialOutcome
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

REPORT_FILE = "report.csv"
SUMMARY_FILE = "summary.txt"
ROC_FILE = "roc.csv"
AUDIT_FILE = "script_audit.txt"
INTERVAL_LEVEL = 0.95
FLOAT_FORMAT = "%.10g"

PathLike = Union[str, Path]


def mean_interval(values: List[float], level: float = INTERVAL_LEVEL) -> Dict[str, Optional[float]]:
    """Mean with a Student t confidence interval; the interval is absent for fewer than two values."""
    array = np.asarray([value for value in values if not math.isnan(value)], dtype=np.float64)
    if array.size == 0:
        return {"mean": None, "low": None, "high": None}
    mean = float(array.mean())
    if array.size < 2:
        return {"mean": mean, "low": None, "high": None}
    if float(array.std()) == 0.0:
        return {"mean": mean, "low": mean, "high": mean}
    low, high = stats.t.interval(level, array.size - 1, loc=mean, scale=stats.sem(array))
    return {"mean": mean, "low": float(low), "high": float(high)}


@dataclass
class ExperimentReport:
    """Trial outcomes of one experiment, or of every point of a sweep."""
    config: ExperimentConfig
    outcomes: List[TrialOutcome] = field(default_factory=list)
    sweep_attribute: Optional[str] = None
    sweep_points: List[Any] = field(default_factory=list)

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for index, outcome in enumerate(self.outcomes):
            row: Dict[str, Any] = {}
            if self.sweep_attribute is not None:
                row["sweep_value"] = self.sweep_points[index]
            row["trial"] = outcome.trial
            row.update(outcome.metrics)
            rows.append(row)
        return rows

    def frame(self) -> pandas.DataFrame:
        return pandas.DataFrame(self.rows())

    @property
    def directive_count(self) -> int:
        """Directives applied in the attacked arm of the first trial."""
        if not self.outcomes:
            return 0
        return int(self.outcomes[0].metrics.get("directives_attacked", 0))

    def aggregates(self) -> Dict[str, Dict[str, Optional[float]]]:
        frame = self.frame()
        metric_columns = [column for column in frame.columns if column not in ("trial", "sweep_value")]
        if self.sweep_attribute is None:
            return {column: mean_interval(frame[column].tolist()) for column in metric_columns}
        aggregates = {}
        for point, group in frame.groupby("sweep_value", sort=False):
            for column in metric_columns:
                aggregates[f"{column}@{point}"] = mean_interval(group[column].tolist())
        return aggregates

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.config.experiment.name,
            "config_hash": self.config.config_hash(),
            "trials": len(self.outcomes),
            "directives": self.directive_count,
            "sweep_attribute": self.sweep_attribute,
            "aggregates": self.aggregates(),
            "config": self.config.to_dict(),
        }

    def write(self, output_directory: PathLike, write_models: bool = False) -> Path:
        """Writes every report file; called only after all trials succeeded."""
        directory = Path(output_directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.frame().to_csv(directory / REPORT_FILE, index=False, float_format=FLOAT_FORMAT)
        (directory / SUMMARY_FILE).write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n",
                                              encoding="utf-8")

        roc_rows = [row for outcome in self.outcomes for row in outcome.roc_rows]
        if roc_rows:
            pandas.DataFrame(roc_rows).to_csv(directory / ROC_FILE, index=False, float_format=FLOAT_FORMAT)

        for index, outcome in enumerate(self.outcomes):
            suffix = f"{index}" if self.sweep_attribute is not None else f"{outcome.trial}"
            if outcome.reconstruction is not None:
                vector, original = outcome.reconstruction
                save_vector(vector, directory / f"recon_{suffix}.vec")
                save_vector(original, directory / f"recon_{suffix}_original.vec")
            if write_models:
                for arm, model in outcome.models.items():
                    save_model(model, directory / f"model_{suffix}_{arm}.txt")

        audit = self.outcomes[0].audit_lines if self.outcomes else []
        (directory / AUDIT_FILE).write_text(audit_text(audit, self.directive_count), encoding="utf-8")
        LOGGER.info(f"Report of {len(self.outcomes)} trials written to {directory}")
        return directory


def audit_text(lines: List[str], count: int) -> str:
    return "\n".join(list(lines) + [f"{count} directives"]) + "\n"
