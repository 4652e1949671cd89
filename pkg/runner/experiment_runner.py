# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Asynchronous dispatch of trials and shadow models to a bounded process pool."""

import asyncio
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Any, Callable, Optional, TypeVar

import numpy as np

from runner.experiment_config import ExperimentConfig, sweep_values
from runner.experiment_report import ExperimentReport
from runner.trial import run_trial, shadow_statistics
from tools.exceptions import PreconditionError, TrialError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

Result = TypeVar("Result")


class ExperimentRunner:
    """Runs every trial of an experiment and collects the outcomes in trial order.

    With one worker everything runs inline in the event loop's thread; otherwise trials and the
    shadow models of the membership evaluation go to a process pool of the given size.
    """
    def __init__(self, config: ExperimentConfig, workers: Optional[int] = None, keep_models: bool = False):
        self.__config = config
        self.__workers = workers or config.experiment.workers
        self.__keep_models = keep_models
        self.__executor: Optional[Executor] = None

    @property
    def config(self) -> ExperimentConfig:
        return self.__config

    @property
    def workers(self) -> int:
        return self.__workers

    async def _dispatch(self, function: Callable[..., Result], *args: Any) -> Result:
        if self.__executor is None:
            return function(*args)
        return await asyncio.get_running_loop().run_in_executor(self.__executor, function, *args)

    async def _membership_statistics(self, trial: int) -> Optional[np.ndarray]:
        if not self.__config.uses_membership:
            return None
        count = self.__config.evaluation.shadows
        if count == 0:
            raise TrialError(trial, "shadows", PreconditionError("Membership evaluation needs shadow models, got 0"))
        LOGGER.info(f"Training {count} shadow models for trial {trial}")
        statistics = await asyncio.gather(
            *(self._dispatch(shadow_statistics, self.__config, trial, shadow) for shadow in range(count)))
        return np.stack(statistics)

    async def _run_trial(self, trial: int):
        statistics = await self._membership_statistics(trial)
        return await self._dispatch(run_trial, self.__config, trial, statistics, self.__keep_models)

    async def run(self) -> ExperimentReport:
        trials = self.__config.experiment.trials
        LOGGER.info(f"Experiment {self.__config.experiment.name}: {trials} trials on {self.__workers} workers")
        if self.__workers > 1:
            with ProcessPoolExecutor(max_workers=self.__workers) as executor:
                self.__executor = executor
                try:
                    outcomes = await asyncio.gather(*(self._run_trial(trial) for trial in range(trials)))
                finally:
                    self.__executor = None
        else:
            outcomes = [await self._run_trial(trial) for trial in range(trials)]
        return ExperimentReport(self.__config, list(outcomes))


async def run_experiment(config: ExperimentConfig, workers: Optional[int] = None,
                         keep_models: bool = False) -> ExperimentReport:
    return await ExperimentRunner(config, workers, keep_models).run()


async def run_sweep(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Runs the experiment once per value of the sweep attribute; rows are tagged with the value."""
    attribute = config.evaluation.sweep_attribute
    outcomes, points = [], []
    for value in sweep_values(config):
        LOGGER.info(f"Sweep point {attribute} = {value}")
        report = await run_experiment(config.with_value(attribute, value), workers)
        outcomes.extend(report.outcomes)
        points.extend([value] * len(report.outcomes))
    return ExperimentReport(config, outcomes, sweep_attribute=attribute, sweep_points=points)


def run(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Synchronous entry point for library use."""
    return asyncio.run(run_experiment(config, workers))

