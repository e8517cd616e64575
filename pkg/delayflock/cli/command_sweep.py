"""
`sweep`: one simulation per beta, run concurrently, one CSV row each.
"""
import asyncio
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from delayflock.cli.command_run import new_run_id
from delayflock.cli.schema import ExitCode
from delayflock.core.errors import ConfigValidationError, DomainError, IntegrationFault
from delayflock.core.orchestrator import SweepOrchestrator
from delayflock.integrations.config_file import load_run_config
from delayflock.integrations.csv_output import write_sweep_csv
from delayflock.integrations.json_report import utcnow, write_sidecar
from delayflock.utils.logging import log_run_event, logger


def cmd_sweep(
    config_path: str | Path,
    output_path: str | Path,
    h_divisor: Optional[int] = None,
) -> int:
    """
    Sweep the kernel exponent over the config's betas.

    Args:
        config_path: Run config JSON with a non-empty betas list
        output_path: CSV destination
        h_divisor: Steps per delay m (overrides the config)

    Returns:
        Exit status
    """
    run_id = new_run_id()
    started_at = utcnow()
    log_run_event(logger, "sweep_requested", run_id, config=config_path)

    try:
        run_config = load_run_config(config_path)
        if not run_config.betas:
            raise ConfigValidationError("sweep needs a non-empty betas list", field="betas")
        if h_divisor is not None and h_divisor < 1:
            raise ConfigValidationError("--h-divisor must be a positive integer", field="h_divisor")
        # Build every member up front so config problems surface before any simulation
        members = {beta: run_config.with_beta(beta).build(h_divisor) for beta in run_config.betas}
    except ValidationError as e:
        logger.error(f"Invalid configuration | run_id={run_id} | {e}")
        return ExitCode.CONFIG_ERROR
    except (ConfigValidationError, DomainError) as e:
        logger.error(f"Invalid configuration | run_id={run_id} | {e}")
        return ExitCode.CONFIG_ERROR

    orchestrator = SweepOrchestrator(lambda beta: members[beta], run_id)
    try:
        rows = asyncio.run(orchestrator.run(sorted(set(run_config.betas))))
    except IntegrationFault as e:
        logger.error(f"Integration fault | run_id={run_id} | {e}")
        return ExitCode.INTEGRATION_FAULT

    write_sweep_csv(output_path, rows)
    write_sidecar(
        output_path,
        run_id,
        "sweep",
        started_at,
        config=run_config.model_dump(mode="json", by_alias=True, exclude_none=True),
    )
    return ExitCode.SUCCESS
