"""
Logging for simulation runs.

Every lifecycle event is one line `[event] run_id=... | key=value | ...`.
Sweep members log under `<run_id>:beta=<beta>` so a sweep can be grepped
per member.
"""
import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import numpy as np

from delayflock.config import settings


def setup_logging(log_file: Optional[str] = None) -> logging.Logger:
    """
    Configure the `delayflock` logger.

    numpy and scipy RuntimeWarnings (overflow in a kernel, quadrature
    accuracy) are routed into the same handlers via `py.warnings`.

    Args:
        log_file: Optional path to log file. If None, logs only to stdout.

    Returns:
        Configured logger instance.
    """
    logger = logging.getLogger("delayflock")
    logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper()))

    # Prevent duplicate handlers
    if logger.handlers:
        return logger

    formatter = logging.Formatter(
        fmt="%(asctime)s - %(name)s - %(levelname)s - %(module)s:%(lineno)d - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S"
    )
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stdout)]

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))

    logging.captureWarnings(True)
    warnings_logger = logging.getLogger("py.warnings")
    for handler in handlers:
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        warnings_logger.addHandler(handler)

    return logger


def event_field(value: Any) -> str:
    """
    Render one event value.

    Floats (numpy included) get 6 significant digits, enums their value and
    paths their file name; everything else goes through str().
    """
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    if isinstance(value, Path):
        return value.name
    return str(value)


def member_run_id(run_id: str, beta: float) -> str:
    """Run id of one sweep member."""
    return f"{run_id}:beta={beta!r}"


def log_run_event(
    logger: logging.Logger,
    event: str,
    run_id: Optional[str],
    level: int = logging.INFO,
    **fields: Any,
) -> None:
    """
    Log a structured simulation event.

    Args:
        logger: Logger instance
        event: Event name (e.g., "integration_started", "certificate_absent")
        run_id: Run identifier, "-" for library calls outside a command
        level: Logging level
        **fields: Event data; None values are dropped
    """
    parts = [f"[{event}] run_id={run_id or '-'}"]
    parts.extend(f"{k}={event_field(v)}" for k, v in fields.items() if v is not None)
    logger.log(level, " | ".join(parts))


# Create default logger instance
logger = setup_logging(settings.LOG_FILE)
