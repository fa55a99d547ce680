"""Central finite-difference verification of the analytic backward pass."""

import numpy as np

from .mlp import mlp_backward, mlp_forward


def _loss(params, cfg, x, probe):
    y, _ = mlp_forward(params, cfg, x)
    return float((y * probe).sum())


def max_relative_error(analytic, numeric, floor=1e-8):
    denom = np.maximum(floor, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / denom))


def fd_conditioning(params, cfg, x):
    """(relu_margin, min_ln_std): how well-conditioned a finite-difference
    check is for this (params, config, input) triple.

    relu_margin is the smallest |pre-ReLU value| across hidden layers: a
    central difference straddling a ReLU kink measures neither one-sided
    derivative.  min_ln_std is the smallest per-row standard deviation feeding
    a LayerNorm (inf when LayerNorm is off): the curvature of
    1/sqrt(var + eps) grows without bound as var -> 0, swamping the h^2
    truncation error.  Callers should resample below-threshold triples.
    """
    h = np.asarray(x, dtype=np.float64)
    margin = np.inf
    min_std = np.inf
    for i in range(len(cfg.hidden_dims)):
        z = h @ params.weights[i].astype(np.float64) + params.biases[i].astype(np.float64)
        if cfg.layer_norm:
            mu = z.mean(axis=1, keepdims=True)
            var = z.var(axis=1, keepdims=True)
            min_std = min(min_std, float(np.sqrt(var).min()))
            z = params.ln_gains[i] * ((z - mu) / np.sqrt(var + cfg.ln_eps))
            z = z + params.ln_offsets[i]
        margin = min(margin, float(np.abs(z).min()))
        h = np.maximum(z, 0.0)
    return margin, min_std


def relu_margin(params, cfg, x):
    """Smallest |pre-ReLU activation| across all hidden layers."""
    return fd_conditioning(params, cfg, x)[0]


def gradcheck_mlp(params, cfg, x, probe=None, h=1e-6, floor=1e-8):
    """Compare analytic parameter/input gradients against central differences.

    The scalar objective is sum(probe * y) for a fixed probe array, so the
    analytic side is exactly mlp_backward(cache, probe).  Parameters should be
    float64; returns the max relative error over every parameter entry and the
    input gradient.
    """
    x = np.asarray(x, dtype=np.float64)
    if probe is None:
        probe = np.ones((x.shape[0], cfg.output_dim))
    probe = np.asarray(probe, dtype=np.float64)

    y, cache = mlp_forward(params, cfg, x)
    grads, x_grad = mlp_backward(cache, probe)

    worst = 0.0
    for p_arr, g_arr in zip(params.param_list(), grads.param_list()):
        numeric = np.empty_like(p_arr)
        flat_p = p_arr.ravel()
        flat_n = numeric.ravel()
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + h
            up = _loss(params, cfg, x, probe)
            flat_p[i] = orig - h
            down = _loss(params, cfg, x, probe)
            flat_p[i] = orig
            flat_n[i] = (up - down) / (2.0 * h)
        worst = max(worst, max_relative_error(g_arr, numeric, floor))

    numeric_x = np.empty_like(x)
    flat_x = x.ravel()
    flat_n = numeric_x.ravel()
    for i in range(flat_x.size):
        orig = flat_x[i]
        flat_x[i] = orig + h
        up = _loss(params, cfg, x, probe)
        flat_x[i] = orig - h
        down = _loss(params, cfg, x, probe)
        flat_x[i] = orig
        flat_n[i] = (up - down) / (2.0 * h)
    worst = max(worst, max_relative_error(x_grad, numeric_x, floor))
    return worst
