"""
JSON verdict reports and metadata sidecars.
"""
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from delayflock.core.models import VerdictReport
from delayflock.utils.logging import logger


def utcnow() -> datetime:
    """Wall-clock UTC time; only metadata sidecars record it."""
    return datetime.now(timezone.utc)


def sidecar_path(output_path: str | Path) -> Path:
    """<out>.meta.json next to the output file."""
    return Path(f"{output_path}.meta.json")


def write_report(path: str | Path, report: VerdictReport) -> None:
    """Write the verdict report; contents depend only on the run."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(report.model_dump_json(indent=2, by_alias=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote verdict report | path={path} | pass={report.passed}")


def write_sidecar(
    output_path: str | Path,
    run_id: str,
    command: str,
    started_at: datetime,
    ended_at: Optional[datetime] = None,
    config: Optional[dict[str, Any]] = None,
    notes: Optional[list[str]] = None,
    extra: Optional[dict[str, Any]] = None,
) -> Path:
    """
    Write the metadata sidecar for an output file.

    Args:
        output_path: Data file the sidecar describes
        run_id: Run identifier
        command: CLI command name
        started_at: UTC start time
        ended_at: UTC end time (now when None)
        config: Normalized run configuration
        notes: Scenario notes
        extra: Additional fields

    Returns:
        Path of the sidecar
    """
    ended_at = ended_at or utcnow()
    metadata = {
        "run_id": run_id,
        "command": command,
        "output": str(output_path),
        "started_at": started_at.isoformat(),
        "ended_at": ended_at.isoformat(),
        "duration_sec": round((ended_at - started_at).total_seconds(), 3),
        "config": config,
        "notes": notes or [],
    }
    metadata.update(extra or {})

    target = sidecar_path(output_path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as f:
        json.dump(metadata, f, ensure_ascii=False, indent=2)
    return target
