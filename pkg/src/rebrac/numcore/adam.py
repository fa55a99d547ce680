"""Bias-corrected Adam over MlpParams or plain lists of arrays."""

from dataclasses import dataclass

import numpy as np

from . import backend
from .mlp import MlpParams


@dataclass
class AdamState:
    """First/second moment accumulators aligned with the parameter arrays."""

    m: list
    v: list
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def _as_arrays(params):
    if isinstance(params, MlpParams):
        return params.param_list()
    return list(params)


def adam_init(params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8) -> AdamState:
    """Fresh optimizer state (zero moments, t = 0) shaped like `params`."""
    arrays = _as_arrays(params)
    return AdamState(
        m=[np.zeros_like(a) for a in arrays],
        v=[np.zeros_like(a) for a in arrays],
        t=0,
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(params, grads, state: AdamState):
    """One Adam update; returns (new_params, new_state) without mutating inputs."""
    p_arrays = _as_arrays(params)
    g_arrays = _as_arrays(grads)
    if len(p_arrays) != len(g_arrays) or len(p_arrays) != len(state.m):
        raise ValueError("params, grads and optimizer state have different structures")
    for p, g in zip(p_arrays, g_arrays):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != param shape {p.shape}")
    new_p, new_m, new_v = backend.active_backend().adam_step(
        p_arrays, g_arrays, state.m, state.v,
        state.t, state.lr, state.beta1, state.beta2, state.eps,
    )
    if isinstance(params, MlpParams):
        new_params = MlpParams.from_param_list(params, new_p)
    else:
        new_params = new_p
    new_state = AdamState(
        m=new_m, v=new_v, t=state.t + 1,
        lr=state.lr, beta1=state.beta1, beta2=state.beta2, eps=state.eps,
    )
    return new_params, new_state
