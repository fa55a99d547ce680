"""Minimal dense neural-network engine: MLPs with ReLU/LayerNorm, Adam, and
finite-difference gradient checking.  Hot kernels run through a compiled
backend when available (see `backend`)."""

from .adam import AdamState, adam_init, adam_step
from .backend import active_backend_name, available_backends
from .gradcheck import fd_conditioning, gradcheck_mlp, max_relative_error, relu_margin
from .mlp import (
    ForwardCache,
    MlpConfig,
    MlpParams,
    init_params,
    layer_norm,
    mlp_backward,
    mlp_forward,
)

__all__ = [
    "AdamState",
    "ForwardCache",
    "MlpConfig",
    "MlpParams",
    "active_backend_name",
    "adam_init",
    "adam_step",
    "available_backends",
    "fd_conditioning",
    "gradcheck_mlp",
    "init_params",
    "layer_norm",
    "max_relative_error",
    "mlp_backward",
    "mlp_forward",
    "relu_margin",
]
