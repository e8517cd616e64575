"""
Run configuration file schema.
"""
from enum import IntEnum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from delayflock.config import settings
from delayflock.core.errors import ConfigValidationError
from delayflock.core.history import HistorySet
from delayflock.core.kernels import KernelSpec, PowerLawKernel, example_kernel
from delayflock.core.models import (
    InlineScenario,
    NoFlockScenario,
    RandomScenario,
    ScenarioSpec,
    SystemConfig,
    is_whole,
)
from delayflock.core.scenarios import build_scenario


class OutputOptions(BaseModel):
    """Which rows and columns the CSV writer emits."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    stride: int = Field(default=1, ge=1)
    per_agent: bool = False


class RunConfig(BaseModel):
    """A complete run: scenario, kernel, grid, horizon, output and optional sweep."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    scenario: ScenarioSpec
    kernel: Optional[KernelSpec] = None
    steps_per_delay: Optional[int] = Field(default=None, ge=1)
    step: Optional[float] = Field(default=None, gt=0)
    horizon: Optional[float] = Field(default=None, gt=0)
    output: OutputOptions = Field(default_factory=OutputOptions)
    betas: Optional[list[float]] = None

    @field_validator("betas")
    @classmethod
    def validate_betas(cls, v: Optional[list[float]]) -> Optional[list[float]]:
        """Exponents must be non-negative."""
        if v is not None and any(beta < 0 for beta in v):
            raise ValueError("beta values must be non-negative")
        return v

    @model_validator(mode="after")
    def validate_run(self) -> "RunConfig":
        """Grid must divide tau and the kernel must suit the scenario."""
        if self.step is not None:
            if self.steps_per_delay is not None:
                raise ValueError("give either step or steps_per_delay, not both")
            if not is_whole(self.scenario.tau / self.step):
                raise ValueError(f"step {self.step} does not divide tau {self.scenario.tau}")
        if isinstance(self.scenario, NoFlockScenario) and self.kernel is not None:
            raise ValueError("noflock fixes its own kernel from beta")
        if isinstance(self.scenario, (RandomScenario, InlineScenario)) and self.kernel is None:
            raise ValueError(f"scenario {self.scenario.name} requires a kernel")
        return self

    def resolved_steps_per_delay(self, override: Optional[int] = None) -> int:
        """
        Steps per delay m, in priority order: override, config, settings default.

        Args:
            override: Value of --h-divisor, if given

        Returns:
            m with tau = m h
        """
        if override is not None:
            return override
        if self.steps_per_delay is not None:
            return self.steps_per_delay
        if self.step is not None:
            return int(round(self.scenario.tau / self.step))
        return settings.DEFAULT_STEPS_PER_DELAY

    def build(self, steps_override: Optional[int] = None) -> tuple[SystemConfig, HistorySet]:
        """Build the system configuration and history for this run."""
        return build_scenario(
            self.scenario, self.kernel, self.resolved_steps_per_delay(steps_override), self.horizon
        )

    def with_beta(self, beta: float) -> "RunConfig":
        """
        Copy of this run with the kernel exponent replaced.

        noflock bases take beta into their initial data; other bases need a
        power-law kernel whose beta is replaced.

        Raises:
            ConfigValidationError: If beta cannot be applied to this base
        """
        if isinstance(self.scenario, NoFlockScenario):
            if beta <= 0.5:
                raise ConfigValidationError(f"noflock sweep needs beta > 1/2, got {beta}", field="betas")
            return self.model_copy(update={"scenario": self.scenario.model_copy(update={"beta": beta})})

        kernel = self.kernel
        if kernel is None and not isinstance(self.scenario, (RandomScenario, InlineScenario)):
            kernel = example_kernel()
        if not isinstance(kernel, PowerLawKernel):
            raise ConfigValidationError("sweeps need a power_law kernel", field="kernel")
        return self.model_copy(update={"kernel": kernel.model_copy(update={"beta": beta})})


class ExitCode(IntEnum):
    """Process exit status of every command."""
    SUCCESS = 0
    INEQUALITY_FAILED = 1
    CONFIG_ERROR = 2
    INTEGRATION_FAULT = 3
    NO_CERTIFICATE = 4
