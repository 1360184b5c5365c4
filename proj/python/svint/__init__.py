from ._core import (
    ConfigError,
    Retraction,
    UnknownModel,
    __version__,
    dtau_inv_apply,
    dtau_inv_dual,
    hat,
    list_models,
    simulate,
    tau,
    tau_inv,
    vee,
)

__all__ = [
    "ConfigError",
    "Retraction",
    "UnknownModel",
    "__version__",
    "dtau_inv_apply",
    "dtau_inv_dual",
    "hat",
    "list_models",
    "simulate",
    "tau",
    "tau_inv",
    "vee",
]
