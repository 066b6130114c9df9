"""Joint density networks: monotone marginals coupled by an FGM copula."""

from ._jdan import (
    Bounds,
    ConfigError,
    ContractError,
    DataError,
    DomainError,
    Forecaster,
    JdanError,
    JointModel,
    NumericalError,
    copula_cdf,
    copula_density,
    find_negative_witness,
    load_model,
)

__all__ = [
    "Bounds",
    "ConfigError",
    "ContractError",
    "DataError",
    "DomainError",
    "Forecaster",
    "JdanError",
    "JointModel",
    "NumericalError",
    "copula_cdf",
    "copula_density",
    "find_negative_witness",
    "load_model",
]
