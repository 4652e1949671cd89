# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Command line surface of the attack laboratory."""

import argparse
import asyncio
import sys
from typing import List, Optional

from runner.experiment_config import NO_ATTACK, RECONSTRUCTION, ExperimentConfig
from runner.experiment_report import audit_text
from runner.experiment_runner import run_experiment, run_sweep
from runner.trial import compile_script, prepare_trial, run_phase
from tools.exceptions import ConfigValueError
from tools.tools import FullLogger, load_environmental_variables, log_exception

LOGGER = FullLogger(__name__)

EXPERIMENT_CONFIG = "EXPERIMENT_CONFIG"
EXPERIMENT_WORKERS = "EXPERIMENT_WORKERS"

TRAIN = "train"
ATTACK = "attack"
EVALUATE_MI = "evaluate-mi"
RECONSTRUCT = "reconstruct"
SWEEP = "sweep"
AUDIT_SCRIPT = "audit-script"
SUBCOMMANDS = {
    TRAIN: "train the honest model only and save it",
    ATTACK: "run the honest control and the attacked arm",
    EVALUATE_MI: "run with the offline membership inference evaluation",
    RECONSTRUCT: "run the reconstruction attack and dump the recovered vectors",
    SWEEP: "grid Evaluation.SweepAttribute over Evaluation.SweepValues",
    AUDIT_SCRIPT: "print the compiled directives of the first trial",
}


def build_parser() -> argparse.ArgumentParser:
    environment = load_environmental_variables(
        (EXPERIMENT_CONFIG, str, None),
        (EXPERIMENT_WORKERS, int, None)
    )
    parser = argparse.ArgumentParser(description="Additive-attack laboratory for MPC machine learning training")
    parser.add_argument("command", choices=list(SUBCOMMANDS),
                        help="; ".join(f"{name}: {text}" for name, text in SUBCOMMANDS.items()))
    parser.add_argument("--config", default=environment[EXPERIMENT_CONFIG],
                        help=f"experiment YAML file (default from {EXPERIMENT_CONFIG})")
    parser.add_argument("--seed", type=int, help="overrides Experiment.Seed")
    parser.add_argument("--trials", type=int, help="overrides Experiment.Trials")
    parser.add_argument("--out", help="overrides Experiment.OutputDirectory")
    parser.add_argument("--backend", choices=["real", "fixed"], help="overrides Backend.Name")
    parser.add_argument("--workers", type=int, default=environment[EXPERIMENT_WORKERS],
                        help=f"overrides Experiment.Workers (default from {EXPERIMENT_WORKERS})")
    return parser


def load_config(arguments: argparse.Namespace) -> ExperimentConfig:
    """The configuration file with the command line overrides applied."""
    if arguments.config is None:
        raise ConfigValueError(f"No experiment configuration given (use --config or {EXPERIMENT_CONFIG})")
    config = ExperimentConfig.from_file(arguments.config)
    overrides = {
        "Experiment.Seed": arguments.seed,
        "Experiment.Trials": arguments.trials,
        "Experiment.OutputDirectory": arguments.out,
        "Backend.Name": arguments.backend,
        "Experiment.Workers": arguments.workers,
    }
    for key_path, value in overrides.items():
        if value is not None:
            config = config.with_value(key_path, value)
    if arguments.command == TRAIN:
        config = config.with_value("Attack.Intent", NO_ATTACK)
    elif arguments.command == EVALUATE_MI:
        config = config.with_value("Evaluation.Membership", True)
    elif arguments.command == RECONSTRUCT:
        config = config.with_value("Attack.Intent", RECONSTRUCTION)
    return config


def audit_script(config: ExperimentConfig) -> str:
    data = run_phase(0, "data", prepare_trial, config, 0)
    script = run_phase(0, "compile", compile_script, config, data)
    return audit_text(script.audit_lines(), script.planned_count(data.context.total_steps))


async def start_experiment(argv: Optional[List[str]] = None) -> None:
    """Parses the command line, runs the requested command and writes its report."""
    arguments = build_parser().parse_args(argv)
    config = load_config(arguments)
    if arguments.command == AUDIT_SCRIPT:
        sys.stdout.write(audit_script(config))
        return

    workers = config.experiment.workers
    if arguments.command == SWEEP:
        report = await run_sweep(config, workers)
    else:
        report = await run_experiment(config, workers, keep_models=arguments.command == TRAIN)
    report.write(config.experiment.output_directory, write_models=arguments.command == TRAIN)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        asyncio.run(start_experiment(argv))
        return 0
    except SystemExit:
        raise
    except BaseException as error:  # pylint: disable=broad-except
        log_exception(error)
        LOGGER.info("Experiment will now exit.")
        return 1
