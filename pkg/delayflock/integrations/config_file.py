"""
Run-config JSON loading and dumping.
"""
import json
from pathlib import Path

from pydantic import ValidationError

from delayflock.cli.schema import RunConfig
from delayflock.core.errors import ConfigValidationError
from delayflock.utils.logging import logger


def _locate(text: str, key: str) -> int | None:
    """First line mentioning a quoted key, for error messages."""
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def parse_run_config(text: str) -> RunConfig:
    """
    Validate a run configuration from JSON text.

    Args:
        text: JSON document

    Returns:
        Validated RunConfig

    Raises:
        ConfigValidationError: On malformed JSON or schema violations
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigValidationError(e.msg, line=e.lineno) from e

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = [str(part) for part in first["loc"]]
        field = ".".join(location) or None
        line = _locate(text, location[-1]) if location else None
        raise ConfigValidationError(first["msg"], field=field, line=line) from e


def load_run_config(path: str | Path) -> RunConfig:
    """
    Read and validate a run configuration file.

    Args:
        path: UTF-8 JSON file

    Returns:
        Validated RunConfig

    Raises:
        ConfigValidationError: If the file is unreadable or invalid
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigValidationError(f"cannot read config: {e}") from e

    config = parse_run_config(text)
    logger.info(f"Loaded run config | path={path} | scenario={config.scenario.name}")
    return config


def dump_run_config(config: RunConfig) -> str:
    """Serialize a run configuration to JSON text that loads back identically."""
    return json.dumps(config.model_dump(mode="json", by_alias=True, exclude_none=True), indent=2) + "\n"
