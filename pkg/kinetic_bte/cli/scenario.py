"""Scenario loading."""

import logging

from pathlib import Path
from typing import Union

import yaml

from pydantic import ValidationError

from ..errors import ScenarioParseError, ScenarioValidationError
from ..models.scenario import Scenario


logger = logging.getLogger(__name__)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Parse and validate a YAML scenario file, rejecting unknown keys."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as error:
        mark = getattr(error, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark is not None else str(path)
        problem = getattr(error, "problem", None) or str(error)
        raise ScenarioParseError(f"{where}: {problem}") from error

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioParseError(f"{path}: the scenario root must be a mapping")

    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as error:
        first = error.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ScenarioValidationError(f"{path}: {key}: {first['msg']}") from error

    logger.info("Loaded scenario %s (%s)", path, scenario.content_hash())

    return scenario
