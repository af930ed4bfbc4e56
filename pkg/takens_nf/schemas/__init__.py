"""Pydantic schemas to validate run configurations before any computation starts."""

from takens_nf.schemas.run_parameters import (
    HomotopyConfig,
    OrdersConfig,
    OutputConfig,
    RunConfig,
    SpectrumConfig,
    TolerancesConfig,
    parse_config,
)
from takens_nf.schemas.system_parameters import (
    JetRecord,
    RandomNonlinearityConfig,
    SystemConfig,
)

__all__ = [
    "HomotopyConfig",
    "JetRecord",
    "OrdersConfig",
    "OutputConfig",
    "RandomNonlinearityConfig",
    "RunConfig",
    "SpectrumConfig",
    "SystemConfig",
    "TolerancesConfig",
    "parse_config",
]
