"""
Data models for the delayed flocking simulator.
"""
from enum import Enum
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from delayflock.core.kernels import KernelSpec

GRID_TOLERANCE = 1e-9


class Inequality(str, Enum):
    """Inequalities checked against a simulated trajectory."""
    INTERVAL_MONOTONE = "interval_monotone"
    VELOCITY_HULL = "velocity_hull"
    SPEED_BOUND = "speed_bound"
    CROSS_DELAY_POSITION = "cross_delay_position"
    ENDPOINT_GRONWALL = "endpoint_gronwall"
    CONTRACTION = "contraction"
    LYAPUNOV_DOMINATES = "lyapunov_dominates"
    LYAPUNOV_MONOTONE = "lyapunov_monotone"
    ENVELOPE = "envelope"
    POSITION_BOUND = "position_bound"
    POSITION_BOUND_SUP = "position_bound_sup"


class CertificateAbsence(str, Enum):
    """Why no decay rate could be certified."""
    FINITE_INTEGRAL = "finite kernel integral"
    PHI_UNDERFLOW = "phi floor underflow"


def is_whole(value: float) -> bool:
    """True when value is an integer up to grid tolerance."""
    return abs(value - round(value)) <= GRID_TOLERANCE * max(1.0, abs(value))


class SystemConfig(BaseModel):
    """Agents, dimension, delay, kernel and the integration grid."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    agent_count: int = Field(ge=2)
    dimension: int = Field(ge=1)
    delay: float = Field(gt=0)
    kernel: KernelSpec
    steps_per_delay: int = Field(ge=1)
    horizon: float = Field(gt=0)

    @model_validator(mode="after")
    def validate_grid(self) -> "SystemConfig":
        """Horizon must cover one delay and sit on the step grid."""
        if self.horizon < self.delay * (1.0 - GRID_TOLERANCE):
            raise ValueError(f"horizon {self.horizon} is shorter than the delay {self.delay}")
        if not is_whole(self.horizon / self.step):
            raise ValueError(f"horizon {self.horizon} is not a multiple of the step {self.step}")
        return self

    @property
    def step(self) -> float:
        """h = tau / m."""
        return self.delay / self.steps_per_delay

    @property
    def step_count(self) -> int:
        """Number of steps covering [0, T]."""
        return int(round(self.horizon / self.step))

    @property
    def delay_count(self) -> int:
        """Number of whole delay intervals inside [0, T]."""
        return self.step_count // self.steps_per_delay


class AgentState(BaseModel):
    """Position and velocity of one agent at one time."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    position: tuple[float, ...]
    velocity: tuple[float, ...]


class FlockingCertificate(BaseModel):
    """A-priori flocking certificate computed from the history alone."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="strings")

    kernel_sup: float
    speed_bound: float
    initial_diameter: float
    integral_diverges: bool
    delay: float
    start_diameter: float = 0.0
    dstar: Optional[float] = None
    phi_floor: Optional[float] = None
    decay_rate: Optional[float] = None
    absence: Optional[CertificateAbsence] = None

    @property
    def exists(self) -> bool:
        return self.decay_rate is not None

    def envelope(self, t):
        """
        I0 * exp(-C (t - 2 tau)).

        Args:
            t: Time or array of times

        Returns:
            Envelope value(s), or None without a certificate
        """
        if self.decay_rate is None:
            return None
        values = self.initial_diameter * np.exp(-self.decay_rate * (np.asarray(t, dtype=float) - 2.0 * self.delay))
        return float(values) if np.ndim(values) == 0 else values


class DiagnosticsSeries(BaseModel):
    """Observables sampled on the dense grid, NaN where undefined (t < 0)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    d_x: np.ndarray
    d_v: np.ndarray
    running_max_dx: np.ndarray
    phi: np.ndarray
    interval_diameters: list[float]
    samples_per_step: int
    samples_per_delay: int
    kernel_sup: float
    speed_bound: float
    delay: float
    lyapunov_d: Optional[np.ndarray] = None
    lyapunov_l: Optional[np.ndarray] = None

    def index_of(self, t: float) -> int:
        """Index of the sample nearest to t."""
        spacing = self.delay / self.samples_per_delay
        return int(round((t - self.times[0]) / spacing))

    def delay_index(self, n: int) -> int:
        """Index of the sample at t = n tau."""
        return (n + 1) * self.samples_per_delay


class InequalityVerdict(BaseModel):
    """Worst margin (right side minus left side) of one inequality."""

    model_config = ConfigDict(populate_by_name=True, ser_json_inf_nan="strings")

    inequality: Inequality
    worst_margin: float
    worst_location: float
    passed: bool = Field(alias="pass")
    evaluations: int


class RunSummary(BaseModel):
    """Achieved quantities reported next to the verdicts."""

    max_dv_first_delay: float
    final_dv: float
    max_dx: float
    position_budget: float
    sup_dx: float
    samples_per_step: int
    notes: list[str] = Field(default_factory=list)


class VerdictReport(BaseModel):
    """Certificate plus verdicts on every checked inequality."""

    model_config = ConfigDict(populate_by_name=True, ser_json_inf_nan="strings")

    certificate: FlockingCertificate
    verdicts: list[InequalityVerdict]
    passed: bool = Field(alias="pass")
    tolerance: float
    summary: RunSummary

    def failures(self) -> list[InequalityVerdict]:
        """Verdicts with a margin below -tolerance."""
        return [v for v in self.verdicts if not v.passed]


class OrderEstimate(BaseModel):
    """Self-convergence order of the integrator at one time."""

    order: float
    successive_orders: list[float]
    errors: list[float]
    degenerate: bool
    at_time: float


class SweepRow(BaseModel):
    """One member of a beta sweep."""

    beta: float
    final_dv: float
    certified: bool
    decay_rate: Optional[float] = None


# --- Scenario specifications ---------------------------------------------------

class Example1Scenario(BaseModel):
    """Two agents keeping d_V constant during the first delay."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    name: Literal["example1"] = "example1"
    tau: float = Field(default=1.0, gt=0)
    epsilon: float = Field(default=0.2, gt=0)

    @model_validator(mode="after")
    def validate_epsilon(self) -> "Example1Scenario":
        if self.epsilon >= self.tau:
            raise ValueError("epsilon must be smaller than tau")
        return self


class Example2Scenario(BaseModel):
    """Two agents at rest relative to each other whose gap opens after t = 0."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: Literal["example2"] = "example2"

    @property
    def tau(self) -> float:
        return 1.0


class NoFlockScenario(BaseModel):
    """Two agents flying apart under a kernel with finite integral."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    name: Literal["noflock"] = "noflock"
    tau: float = Field(default=1.0, gt=0)
    beta: float = Field(default=0.75)

    @field_validator("beta")
    @classmethod
    def validate_beta(cls, v: float) -> float:
        if v <= 0.5:
            raise ValueError("beta must exceed 1/2")
        return v


# numpy bit generators a random scenario may name
RandomGenerator = Literal["PCG64"]


class RandomScenario(BaseModel):
    """Constant histories drawn from a seeded numpy generator."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    name: Literal["random"] = "random"
    seed: int = Field(ge=0)
    generator: RandomGenerator = "PCG64"
    agents: int = Field(ge=2)
    dimension: int = Field(default=2, ge=1)
    tau: float = Field(default=1.0, gt=0)
    pos_spread: float = Field(default=1.0, ge=0)
    vel_spread: float = Field(default=1.0, ge=0)


class InlineScenario(BaseModel):
    """History samples on the uniform grid over [-tau, 0], shape (k+1, N, d)."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    name: Literal["inline"] = "inline"
    tau: float = Field(gt=0)
    positions: list[list[list[float]]]
    velocities: list[list[list[float]]]

    @model_validator(mode="after")
    def validate_samples(self) -> "InlineScenario":
        positions = np.asarray(self.positions, dtype=float)
        velocities = np.asarray(self.velocities, dtype=float)
        if positions.ndim != 3 or positions.shape != velocities.shape:
            raise ValueError("positions and velocities must both have shape (samples, agents, dimension)")
        if positions.shape[0] < 2:
            raise ValueError("at least two history samples are required")
        if positions.shape[1] < 2 or positions.shape[2] < 1:
            raise ValueError("at least two agents and one dimension are required")
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(velocities))):
            raise ValueError("history samples must be finite")
        return self


ScenarioSpec = Annotated[
    Union[Example1Scenario, Example2Scenario, NoFlockScenario, RandomScenario, InlineScenario],
    Field(discriminator="name"),
]

