"""Run Configuration Schema.

Pydantic schemas to process and validate a run configuration before any computation starts. The validated
``RunConfig`` dumps (without None values) to the config echo written into every report; parsing the echo gives back
an equal configuration.
"""
# pylint: disable=no-self-argument
# mypy: disable-error-code=assignment
import json
from pathlib import Path

from pydantic import Field, field_validator, model_validator

from takens_nf.pipeline import RADII
from takens_nf.schemas.system_parameters import BaseConfig, SystemConfig
from takens_nf.schemas.utilities import deep_merge, fold_family_parameters
from takens_nf.schemas.validators import format_intervals, format_positive_values


class SpectrumConfig(BaseConfig):
    """Gamma grid of the spectrum computation, or an inline spectrum."""

    gamma_lo: float | None = Field(default=None, gt=0)
    gamma_hi: float | None = Field(default=None, gt=0)
    samples: int = Field(default=64, ge=16)
    refine: int = Field(default=10, ge=0)
    threshold: float = Field(default=1e-4, gt=0)
    workers: int | None = Field(default=None, ge=1)
    intervals: tuple[tuple[float, float], ...] | None = None
    center: tuple[float, float] | None = None

    _format_intervals = field_validator("intervals")(format_intervals)

    @field_validator("center")
    def check_center(cls, value: tuple[float, float] | None) -> tuple[float, float] | None:
        """The center interval contains 1."""
        if value is not None and not 0 < value[0] <= 1.0 <= value[1]:
            raise ValueError(f"center interval {list(value)} must contain 1")
        return value

    @model_validator(mode="after")
    def check_gamma_range(self) -> "SpectrumConfig":
        """gamma_lo must be below gamma_hi; a lone center means no hyperbolic intervals."""
        if self.gamma_lo is not None and self.gamma_hi is not None and self.gamma_lo >= self.gamma_hi:
            raise ValueError(f"gamma_lo={self.gamma_lo} must be below gamma_hi={self.gamma_hi}")
        if self.center is not None and self.intervals is None:
            self.intervals = ()
        return self

    @property
    def inline(self) -> bool:
        """True when the spectrum is given instead of computed."""
        return self.intervals is not None


class OrdersConfig(BaseConfig):
    """Orders of the non-resonance check (N), of the normal form (N0) and of the x_c-jets (J)."""

    N: int = 3
    N0: int = 3
    J: int = 2

    @model_validator(mode="after")
    def check_orders(self) -> "OrdersConfig":
        """N >= 2, N0 >= 1 and J >= 0."""
        if self.N < 2:
            raise ValueError(f"N must be at least 2, got {self.N}")
        if self.N0 < 1:
            raise ValueError(f"N0 must be at least 1, got {self.N0}")
        if self.J < 0:
            raise ValueError(f"J must be non-negative, got {self.J}")
        return self


class TolerancesConfig(BaseConfig):
    """Accuracy of the series solvers and inflation of the spectral endpoints."""

    tol: float = Field(default=1e-8, gt=0, lt=1)
    varsigma: float = Field(default=1e-6, ge=0)
    budget: int = Field(default=10**7, ge=1)


class HomotopyConfig(BaseConfig):
    """Sampling of the homotopy conjugacy verifier."""

    tau: float = Field(default=1.0, ge=0, le=1)
    flow: bool = True
    samples: int = Field(default=4, ge=1)
    max_terms: int = Field(default=2000, ge=10)


class OutputConfig(BaseConfig):
    """Where and what to write."""

    out: str = "out"
    csv: bool = False
    radii: tuple[float, ...] = RADII

    _format_radii = field_validator("radii")(format_positive_values)


class RunConfig(BaseConfig):
    """Process and validate a complete run configuration."""

    system: SystemConfig
    window: int = Field(default=32, ge=4)
    spectrum: SpectrumConfig = Field(default_factory=SpectrumConfig)
    orders: OrdersConfig = Field(default_factory=OrdersConfig)
    tolerances: TolerancesConfig = Field(default_factory=TolerancesConfig)
    homotopy: HomotopyConfig = Field(default_factory=HomotopyConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="before")
    def fold_flat_system(cls, values: dict) -> dict:
        """Accept ``{"system": "<family>", <family parameters>...}`` as a shorthand."""
        return fold_family_parameters(values) if isinstance(values, dict) else values

    def echo(self) -> dict:
        """The config echo: every field with its effective value, None values dropped, JSON compatible."""
        return json.loads(json.dumps(self.model_dump()))


def parse_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    """Read a JSON configuration file and validate it.

    Args:
        path (str | Path): The configuration file.
        overrides (dict | None): Nested values merged over the file content before validation, e.g. from flags.

    Returns:
        (RunConfig): The validated configuration with defaults applied.

    Raises:
        json.JSONDecodeError: When the file is not valid JSON; the message carries line and column.
        pydantic.ValidationError: When a value is out of range or a key is unknown; the message names the key.
    """
    values = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(values, dict):
        raise json.JSONDecodeError("Expected a JSON object at the top level", str(values)[:40], 0)
    if overrides:
        values = deep_merge(fold_family_parameters(values), overrides)
    return RunConfig.model_validate(values)
