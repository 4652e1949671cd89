# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Project-local helpers used by every package: logger wrapper and environment variable loading.

These are written for this repository. They are not the external simulation-tools
submodule, and only the names FullLogger and load_environmental_variables match it.
"""

import logging
import os
import sys
import traceback
from typing import Any, Dict, Optional, Tuple, Type, Union

EnvironmentVariableValue = Union[str, int, float, bool, None]

LOG_LEVEL_VARIABLE = "SIMULATOR_LOG_LEVEL"
LOG_FILE_VARIABLE = "SIMULATOR_LOG_FILE"

DEFAULT_LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

TRUE_STRINGS = {"true", "1", "yes", "on"}
FALSE_STRINGS = {"false", "0", "no", "off"}


def _parse_value(name: str, raw_value: str, value_type: Type) -> EnvironmentVariableValue:
    if value_type is bool:
        lowered = raw_value.strip().lower()
        if lowered in TRUE_STRINGS:
            return True
        if lowered in FALSE_STRINGS:
            return False
        raise ValueError(f"Environment variable {name} is not a boolean: '{raw_value}'")
    return value_type(raw_value)


def load_environmental_variables(
        *env_variable_specifications: Tuple[str, Type, EnvironmentVariableValue]) -> Dict[str, EnvironmentVariableValue]:
    """Loads the given environment variables.

    Each specification is a tuple (variable name, variable type, default value).
    The default value is used when the variable is missing or cannot be converted to the given type.
    Returns a dictionary from variable name to the loaded value.
    """
    values: Dict[str, EnvironmentVariableValue] = {}
    for name, value_type, default_value in env_variable_specifications:
        raw_value = os.environ.get(name)
        if raw_value is None or raw_value == "":
            values[name] = default_value
            continue
        try:
            values[name] = _parse_value(name, raw_value, value_type)
        except ValueError:
            print(f"Could not convert {name}='{raw_value}' to {value_type.__name__}, "
                  f"using default value {default_value}", file=sys.stderr)
            values[name] = default_value
    return values


class FullLogger:
    """Logger wrapper that writes to stdout and, optionally, to a log file.

    The level and the file are read from the environment when the logger is created.
    """
    def __init__(self, logger_name: str, logger_level: Optional[str] = None):
        environment = load_environmental_variables(
            (LOG_LEVEL_VARIABLE, str, DEFAULT_LOG_LEVEL),
            (LOG_FILE_VARIABLE, str, None)
        )
        level_name = (logger_level or str(environment[LOG_LEVEL_VARIABLE])).upper()
        self.__level = logging.getLevelName(level_name)
        if not isinstance(self.__level, int):
            self.__level = logging.INFO

        self.__logger = logging.getLogger(logger_name)
        self.__logger.setLevel(self.__level)
        self.__logger.propagate = False

        if not self.__logger.handlers:
            formatter = logging.Formatter(LOG_FORMAT)
            stream_handler = logging.StreamHandler(sys.stdout)
            stream_handler.setFormatter(formatter)
            self.__logger.addHandler(stream_handler)

            log_file = environment[LOG_FILE_VARIABLE]
            if log_file:
                file_handler = logging.FileHandler(str(log_file))
                file_handler.setFormatter(formatter)
                self.__logger.addHandler(file_handler)

    @property
    def level(self) -> int:
        return self.__level

    @property
    def logger(self) -> logging.Logger:
        return self.__logger

    def debug(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.__logger.debug(message, *args, **kwargs)

    def info(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.__logger.info(message, *args, **kwargs)

    def warning(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.__logger.warning(message, *args, **kwargs)

    def error(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.__logger.error(message, *args, **kwargs)

    def critical(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.__logger.critical(message, *args, **kwargs)


LOGGER = FullLogger(__name__)


def log_exception(error: BaseException) -> None:
    """Logs the given exception together with its traceback."""
    LOGGER.error(f"{type(error).__name__}: {error}")
    LOGGER.error("".join(traceback.format_exception(type(error), error, error.__traceback__)))
