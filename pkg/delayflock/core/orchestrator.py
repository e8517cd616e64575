"""
Sweep Orchestrator - runs independent simulations over a list of beta values.
"""
import asyncio
import logging
from typing import Callable, Optional

from delayflock.config import settings
from delayflock.core.certificate import certify
from delayflock.core.diagnostics import diameter_velocities
from delayflock.core.history import HistorySet
from delayflock.core.integrator import integrate
from delayflock.core.models import SweepRow, SystemConfig
from delayflock.utils.logging import log_run_event, logger, member_run_id

MemberFactory = Callable[[float], tuple[SystemConfig, HistorySet]]


class SweepOrchestrator:
    """Runs sweep members concurrently and collects one row per beta."""

    def __init__(self, member_factory: MemberFactory, run_id: str, max_workers: Optional[int] = None):
        """
        Initialize Sweep Orchestrator.

        Args:
            member_factory: Builds (config, history) for a given beta
            run_id: Identifier used in log events
            max_workers: Concurrency cap (settings.sweep_workers() when None)
        """
        self.member_factory = member_factory
        self.run_id = run_id
        self.max_workers = max_workers or settings.sweep_workers()

        self.rows: list[SweepRow] = []
        self._lock = asyncio.Lock()

    def simulate_member(self, beta: float) -> SweepRow:
        """
        Integrate and certify one member synchronously.

        Args:
            beta: Kernel exponent of this member

        Returns:
            SweepRow with final d_V and the certificate outcome
        """
        config, history = self.member_factory(beta)
        member_id = member_run_id(self.run_id, beta)
        trajectory = integrate(config, history, run_id=member_id)
        certificate = certify(config, history, run_id=member_id)
        return SweepRow(
            beta=beta,
            final_dv=diameter_velocities(trajectory, config.horizon),
            certified=certificate.exists,
            decay_rate=certificate.decay_rate,
        )

    async def run_member(self, beta: float, semaphore: asyncio.Semaphore) -> None:
        """
        Run one member in a worker thread and record its row.

        Args:
            beta: Kernel exponent of this member
            semaphore: Shared concurrency limit
        """
        async with semaphore:
            log_run_event(logger, "sweep_member_started", member_run_id(self.run_id, beta))
            try:
                row = await asyncio.to_thread(self.simulate_member, beta)
            except Exception as e:
                log_run_event(logger, "sweep_member_failed", member_run_id(self.run_id, beta), logging.ERROR, error=e)
                raise

            async with self._lock:
                self.rows.append(row)

            log_run_event(
                logger, "sweep_member_finished", member_run_id(self.run_id, beta),
                final_dv=row.final_dv, certified=row.certified, decay_rate=row.decay_rate,
            )

    async def run(self, betas: list[float]) -> list[SweepRow]:
        """
        Run every member and return rows sorted by beta.

        Args:
            betas: Kernel exponents to sweep

        Returns:
            One SweepRow per beta, ascending
        """
        semaphore = asyncio.Semaphore(self.max_workers)
        log_run_event(logger, "sweep_started", self.run_id, members=len(betas), workers=self.max_workers)

        await asyncio.gather(*(self.run_member(beta, semaphore) for beta in betas))

        log_run_event(logger, "sweep_finished", self.run_id, members=len(self.rows))
        return sorted(self.rows, key=lambda row: row.beta)
