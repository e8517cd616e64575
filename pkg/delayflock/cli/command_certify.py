"""
`certify`: a-priori certificate, simulation and verdicts on every inequality.
"""
from pathlib import Path
from typing import Optional

from delayflock.cli.command_run import new_run_id, prepare_run
from delayflock.cli.schema import ExitCode
from delayflock.core.certificate import certify
from delayflock.core.diagnostics import lyapunov_series
from delayflock.core.errors import ConfigValidationError, IntegrationFault
from delayflock.core.integrator import integrate
from delayflock.core.models import CertificateAbsence
from delayflock.core.scenarios import scenario_notes
from delayflock.core.verification import check_paper_inequalities
from delayflock.integrations.json_report import utcnow, write_report, write_sidecar
from delayflock.utils.logging import log_run_event, logger

MIN_DELAYS = 3

ABSENCE_NOTES = {
    CertificateAbsence.FINITE_INTEGRAL: "kernel integral is finite: no unconditional flocking certificate",
    CertificateAbsence.PHI_UNDERFLOW: (
        "phi floor underflow: the kernel integral diverges but d* lies past the floating-point range, "
        "so the certified decay rate is not representable"
    ),
}


def cmd_certify(
    config_path: str | Path,
    output_path: str | Path,
    h_divisor: Optional[int] = None,
) -> int:
    """
    Certify, simulate and verify; write the JSON verdict report plus sidecar.

    Args:
        config_path: Run config JSON
        output_path: Report destination
        h_divisor: Steps per delay m (overrides the config)

    Returns:
        0 when every check passes, 1 on a failed inequality, 4 without a certificate
    """
    run_id = new_run_id()
    started_at = utcnow()
    log_run_event(logger, "certify_started", run_id, config=config_path)

    try:
        run_config, config, history = prepare_run(config_path, h_divisor)
        if config.horizon < MIN_DELAYS * config.delay * (1.0 - 1e-12):
            raise ConfigValidationError(f"certify needs a horizon of at least {MIN_DELAYS} delays", field="horizon")
    except ConfigValidationError as e:
        logger.error(f"Invalid configuration | run_id={run_id} | {e}")
        return ExitCode.CONFIG_ERROR

    certificate = certify(config, history, run_id=run_id)

    try:
        trajectory = integrate(config, history, run_id=run_id)
    except IntegrationFault as e:
        logger.error(f"Integration fault | run_id={run_id} | {e}")
        return ExitCode.INTEGRATION_FAULT

    notes = scenario_notes(run_config.scenario)
    if certificate.absence is not None:
        notes.append(ABSENCE_NOTES[certificate.absence])
        logger.warning(f"No certificate | run_id={run_id} | {ABSENCE_NOTES[certificate.absence]}")

    report = check_paper_inequalities(
        trajectory, certificate, series=lyapunov_series(trajectory), notes=notes, run_id=run_id
    )
    write_report(output_path, report)
    write_sidecar(
        output_path,
        run_id,
        "certify",
        started_at,
        config=run_config.model_dump(mode="json", by_alias=True, exclude_none=True),
        notes=notes,
    )

    if not certificate.exists:
        status = ExitCode.NO_CERTIFICATE
    elif not report.passed:
        status = ExitCode.INEQUALITY_FAILED
    else:
        status = ExitCode.SUCCESS
    log_run_event(logger, "certify_finished", run_id, status=int(status))
    return status
