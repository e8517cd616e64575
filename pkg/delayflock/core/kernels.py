"""
Influence functions psi: the classical power-law family and tabulated kernels.

Every kernel is validated when it is constructed (non-negative, non-increasing,
Lipschitz), so evaluation is total on r >= 0.
"""
from typing import Annotated, Literal, Union

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from delayflock.core.errors import DomainError


class PowerLawKernel(BaseModel):
    """psi(r) = amplitude / (sigma^2 + r^2)^beta."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    type: Literal["power_law"] = "power_law"
    amplitude: float = Field(gt=0)
    sigma: float = Field(gt=0)
    beta: float = Field(ge=0)

    def evaluate(self, r: ArrayLike):
        """
        Evaluate psi.

        Args:
            r: Non-negative radius or array of radii

        Returns:
            psi(r), a float for scalar input and an array otherwise

        Raises:
            DomainError: If any radius is negative
        """
        radii = _checked_radii(r)
        values = self.amplitude * (self.sigma ** 2 + radii ** 2) ** (-self.beta)
        return float(values) if values.ndim == 0 else values

    def log_evaluate_expm1(self, u: ArrayLike):
        """
        log psi(e^u - 1), finite even where e^u overflows.

        Args:
            u: Non-negative log-radius ln(1 + r)

        Returns:
            log psi, a float for scalar input and an array otherwise
        """
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            log_r = u + np.log(-np.expm1(-u))
        values = np.log(self.amplitude) - self.beta * np.logaddexp(2.0 * np.log(self.sigma), 2.0 * log_r)
        return float(values) if values.ndim == 0 else values

    def sup(self) -> float:
        """K = psi(0)."""
        return self.evaluate(0.0)

    def integral_diverges(self) -> bool:
        """The integral of psi over [0, inf) is infinite iff beta <= 1/2."""
        return self.beta <= 0.5

    def lipschitz(self) -> float:
        """
        Global Lipschitz constant of psi.

        |psi'(r)| = 2 beta A r (sigma^2 + r^2)^(-beta-1) peaks at
        r* = sigma / sqrt(2 beta + 1).

        Returns:
            max over r >= 0 of |psi'(r)|
        """
        if self.beta == 0:
            return 0.0
        r_star = self.sigma / np.sqrt(2.0 * self.beta + 1.0)
        base = self.sigma ** 2 + r_star ** 2
        return float(2.0 * self.beta * self.amplitude * r_star * base ** (-self.beta - 1.0))


class TabulatedKernel(BaseModel):
    """Piecewise-linear psi through (radii, values), constant past the last radius."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False, populate_by_name=True)

    type: Literal["tabulated"] = "tabulated"
    radii: tuple[float, ...] = Field(min_length=1)
    values: tuple[float, ...] = Field(min_length=1)
    lipschitz_bound: float = Field(ge=0, alias="lipschitz")

    @model_validator(mode="after")
    def validate_table(self) -> "TabulatedKernel":
        """Reject tables that break non-negativity, monotonicity or the declared bound."""
        radii = np.asarray(self.radii)
        values = np.asarray(self.values)

        if radii.shape != values.shape:
            raise ValueError("radii and values must have the same length")
        if radii[0] != 0.0:
            raise ValueError("radii must start at 0")
        if np.any(np.diff(radii) <= 0):
            raise ValueError("radii must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("values must be non-negative")
        if np.any(np.diff(values) > 0):
            raise ValueError("values must be non-increasing")

        if radii.size > 1:
            slopes = np.abs(np.diff(values) / np.diff(radii))
            steepest = float(slopes.max())
            if steepest > self.lipschitz_bound * (1.0 + 1e-12):
                raise ValueError(
                    f"declared lipschitz {self.lipschitz_bound} is below the table slope {steepest}"
                )
        return self

    def evaluate(self, r: ArrayLike):
        """
        Evaluate psi by linear interpolation.

        Args:
            r: Non-negative radius or array of radii

        Returns:
            psi(r), a float for scalar input and an array otherwise

        Raises:
            DomainError: If any radius is negative
        """
        radii = _checked_radii(r)
        values = np.interp(radii, self.radii, self.values)
        return float(values) if np.ndim(values) == 0 else values

    def log_evaluate_expm1(self, u: ArrayLike):
        """log psi(e^u - 1); the table is constant past its last radius, so u is clipped there."""
        u = np.minimum(np.asarray(u, dtype=float), np.log1p(self.radii[-1]) + 1.0)
        with np.errstate(divide="ignore"):
            values = np.log(np.interp(np.expm1(u), self.radii, self.values))
        return float(values) if values.ndim == 0 else values

    def sup(self) -> float:
        """K = psi(0), the first sample."""
        return self.evaluate(0.0)

    def integral_diverges(self) -> bool:
        """Constant extrapolation diverges unless the tail value is zero."""
        return self.values[-1] > 0

    def lipschitz(self) -> float:
        """Declared bound, validated against the table slopes."""
        return self.lipschitz_bound


KernelSpec = Annotated[Union[PowerLawKernel, TabulatedKernel], Field(discriminator="type")]


def _checked_radii(r: ArrayLike) -> np.ndarray:
    radii = np.asarray(r, dtype=float)
    if np.any(radii < 0) or np.any(np.isnan(radii)):
        raise DomainError(f"kernel radius must be non-negative, got {r!r}")
    return radii


def psi_eval(kernel: KernelSpec, r: ArrayLike):
    """
    Evaluate the influence function.

    Args:
        kernel: Kernel specification
        r: Non-negative radius (or array of radii)

    Returns:
        psi(r)
    """
    return kernel.evaluate(r)


def psi_sup(kernel: KernelSpec) -> float:
    """Return K = psi(0), the supremum of a non-increasing kernel."""
    return kernel.sup()


def psi_integral_diverges(kernel: KernelSpec) -> bool:
    """Return True when the integral of psi over [0, inf) is infinite."""
    return kernel.integral_diverges()


def psi_lipschitz(kernel: KernelSpec) -> float:
    """Return a global Lipschitz bound of psi."""
    return kernel.lipschitz()


def example_kernel() -> PowerLawKernel:
    """psi(x) = 1/sqrt(1 + x^2), the kernel of the rising-gap scenario."""
    return PowerLawKernel(amplitude=1.0, sigma=1.0, beta=0.5)
