"""
CSV writers for series and sweep output.

Floats use the shortest round-trip representation; missing values are empty
fields. Rows never carry timestamps, so identical runs give identical bytes.
"""
import csv
import math
from pathlib import Path
from typing import Optional

import numpy as np

from delayflock.core.integrator import Trajectory
from delayflock.core.models import DiagnosticsSeries, FlockingCertificate, SweepRow
from delayflock.utils.logging import logger

SERIES_HEADER = ["t", "d_X", "d_V", "envelope", "phi"]
SWEEP_HEADER = ["beta", "final_dV", "certified", "C_or_empty"]


def format_number(value: Optional[float]) -> str:
    """Shortest round-trip decimal, empty for None or NaN."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def series_rows(
    series: DiagnosticsSeries,
    traj: Trajectory,
    certificate: FlockingCertificate,
    stride: int = 1,
    per_agent: bool = False,
) -> tuple[list[str], list[list[str]]]:
    """
    Build header and rows at every stride-th integration step from t = 0.

    Args:
        series: Sampled diagnostics
        traj: Trajectory the series was sampled from
        certificate: Certificate (envelope column empty when absent)
        stride: Integration steps between rows
        per_agent: Append x_<a>_<k> and v_<a>_<k> columns

    Returns:
        (header, rows)
    """
    config = traj.config
    header = list(SERIES_HEADER)
    if per_agent:
        header += [f"x_{a}_{k}" for a in range(config.agent_count) for k in range(config.dimension)]
        header += [f"v_{a}_{k}" for a in range(config.agent_count) for k in range(config.dimension)]

    per_step = series.samples_per_step
    indices = list(range(series.samples_per_delay, series.times.size, stride * per_step))
    if indices[-1] != series.times.size - 1:
        indices.append(series.times.size - 1)
    indices = np.asarray(indices)

    times = series.times[indices]
    envelope = certificate.envelope(times)
    if per_agent:
        positions, velocities = traj.states(times)

    rows = []
    for row, i in enumerate(indices):
        cells = [
            format_number(times[row]),
            format_number(series.d_x[i]),
            format_number(series.d_v[i]),
            format_number(None if envelope is None else envelope[row]),
            format_number(series.phi[i]),
        ]
        if per_agent:
            cells += [format_number(x) for x in positions[row].ravel()]
            cells += [format_number(v) for v in velocities[row].ravel()]
        rows.append(cells)
    return header, rows


def write_series_csv(
    path: str | Path,
    series: DiagnosticsSeries,
    traj: Trajectory,
    certificate: FlockingCertificate,
    stride: int = 1,
    per_agent: bool = False,
) -> None:
    """Write the run CSV."""
    header, rows = series_rows(series, traj, certificate, stride, per_agent)
    _write(path, header, rows)
    logger.info(f"Wrote series CSV | path={path} | rows={len(rows)}")


def write_sweep_csv(path: str | Path, rows: list[SweepRow]) -> None:
    """Write one line per sweep member in the given order."""
    cells = [
        [format_number(r.beta), format_number(r.final_dv), str(r.certified).lower(), format_number(r.decay_rate)]
        for r in rows
    ]
    _write(path, SWEEP_HEADER, cells)
    logger.info(f"Wrote sweep CSV | path={path} | rows={len(rows)}")


def _write(path: str | Path, header: list[str], rows: list[list[str]]) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
