# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Experiment configuration, trial execution and reports."""

from runner.experiment_config import ExperimentConfig
from runner.experiment_report import ExperimentReport
from runner.experiment_runner import ExperimentRunner, run, run_experiment, run_sweep

__all__ = ["ExperimentConfig", "ExperimentReport", "ExperimentRunner", "run", "run_experiment", "run_sweep"]
