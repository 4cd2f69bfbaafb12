"""Event-driven sparse and procedural-connectivity kernels for spiking networks."""

from ._core import (
    CsrMatrix,
    DimensionError,
    JitConnSpec,
    NumericalError,
    ValidationError,
    csrmv,
    event_csrmv,
    jitconn_event_matvec,
    jitconn_matvec,
    simulate_config,
    simulate_ei_net,
    surrogate_relu_grad,
    train_reservoir,
)

__all__ = [
    "CsrMatrix",
    "DimensionError",
    "JitConnSpec",
    "NumericalError",
    "ValidationError",
    "csrmv",
    "event_csrmv",
    "jitconn_event_matvec",
    "jitconn_matvec",
    "simulate_config",
    "simulate_ei_net",
    "surrogate_relu_grad",
    "train_reservoir",
]
