"""
`run`: simulate a scenario and write the plot-ready CSV.
"""
from pathlib import Path
from typing import Optional
from uuid import uuid4

from pydantic import ValidationError

from delayflock.cli.schema import ExitCode, RunConfig
from delayflock.core.certificate import certify
from delayflock.core.diagnostics import lyapunov_series, sample_series
from delayflock.core.errors import ConfigValidationError, DomainError, IntegrationFault
from delayflock.core.history import HistorySet
from delayflock.core.integrator import integrate
from delayflock.core.models import SystemConfig
from delayflock.core.scenarios import scenario_notes
from delayflock.integrations.config_file import load_run_config
from delayflock.integrations.csv_output import write_series_csv
from delayflock.integrations.json_report import utcnow, write_sidecar
from delayflock.utils.logging import log_run_event, logger


def new_run_id() -> str:
    return uuid4().hex[:12]


def prepare_run(
    config_path: str | Path, h_divisor: Optional[int] = None
) -> tuple[RunConfig, SystemConfig, HistorySet]:
    """
    Load a config file and build the system it describes.

    Raises:
        ConfigValidationError: On any configuration problem
    """
    run_config = load_run_config(config_path)
    if h_divisor is not None and h_divisor < 1:
        raise ConfigValidationError("--h-divisor must be a positive integer", field="h_divisor")
    try:
        config, history = run_config.build(h_divisor)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigValidationError(first["msg"], field=".".join(str(p) for p in first["loc"]) or None) from e
    except DomainError as e:
        raise ConfigValidationError(str(e), field="scenario") from e
    return run_config, config, history


def cmd_run(
    config_path: str | Path,
    output_path: str | Path,
    stride: Optional[int] = None,
    h_divisor: Optional[int] = None,
) -> int:
    """
    Simulate the configured scenario and write its series CSV plus sidecar.

    Args:
        config_path: Run config JSON
        output_path: CSV destination
        stride: Integration steps between CSV rows (overrides the config)
        h_divisor: Steps per delay m (overrides the config)

    Returns:
        Exit status
    """
    run_id = new_run_id()
    started_at = utcnow()
    log_run_event(logger, "run_started", run_id, config=config_path)

    try:
        run_config, config, history = prepare_run(config_path, h_divisor)
        if stride is not None and stride < 1:
            raise ConfigValidationError("--stride must be a positive integer", field="stride")
    except ConfigValidationError as e:
        logger.error(f"Invalid configuration | run_id={run_id} | {e}")
        return ExitCode.CONFIG_ERROR

    try:
        trajectory = integrate(config, history, run_id=run_id)
    except IntegrationFault as e:
        logger.error(f"Integration fault | run_id={run_id} | {e}")
        return ExitCode.INTEGRATION_FAULT

    certificate = certify(config, history, run_id=run_id)
    if config.horizon >= 2.0 * config.delay:
        series = lyapunov_series(trajectory)
    else:
        series = sample_series(trajectory)

    write_series_csv(
        output_path,
        series,
        trajectory,
        certificate,
        stride=stride or run_config.output.stride,
        per_agent=run_config.output.per_agent,
    )

    notes = scenario_notes(run_config.scenario)
    write_sidecar(
        output_path,
        run_id,
        "run",
        started_at,
        config=run_config.model_dump(mode="json", by_alias=True, exclude_none=True),
        notes=notes,
        extra={"certificate": certificate.model_dump(mode="json")},
    )
    log_run_event(logger, "run_finished", run_id, output=output_path)
    return ExitCode.SUCCESS
