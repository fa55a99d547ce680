"""Pure-numpy reference kernels for the MLP engine.

The compiled extension (`rebrac.numcore._kernels`) implements the same three
entry points with identical semantics; this module is the fallback and the
reference for cross-backend tests.  All functions are pure: inputs are never
mutated and outputs are freshly allocated.
"""

import numpy as np

OUT_ACT_NONE = 0
OUT_ACT_TANH = 1


def layer_norm(x, gain, offset, eps):
    """Row-wise layer normalization with biased variance over the feature axis."""
    mu = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    xhat = (x - mu) / np.sqrt(var + eps)
    return gain * xhat + offset


def mlp_forward(weights, biases, gains, offsets, x, layer_norm_on, out_act, max_action, ln_eps):
    """Forward pass through linear -> [LayerNorm] -> ReLU hidden layers plus a
    linear output layer with optional scaled-tanh activation.

    Returns (y, cache) where cache is the tuple consumed by `mlp_backward`:
    (hs, xhats, inv_stds, tanh_unit).  hs[i] is the input to linear layer i
    (hs[0] is x itself); xhats/inv_stds are per-LayerNorm intermediates;
    tanh_unit is tanh of the output pre-activation (None when out_act is none).
    """
    n_hidden = len(weights) - 1
    hs = [x]
    xhats = []
    inv_stds = []
    h = x
    for i in range(n_hidden):
        z = h @ weights[i] + biases[i]
        if layer_norm_on:
            mu = z.mean(axis=1, keepdims=True)
            var = z.var(axis=1, keepdims=True)
            istd = 1.0 / np.sqrt(var + ln_eps)
            xhat = (z - mu) * istd
            xhats.append(xhat)
            inv_stds.append(np.ascontiguousarray(istd[:, 0]))
            z = gains[i] * xhat + offsets[i]
        h = np.maximum(z, 0.0)
        hs.append(h)
    y = h @ weights[-1] + biases[-1]
    tanh_unit = None
    if out_act == OUT_ACT_TANH:
        tanh_unit = np.tanh(y)
        y = max_action * tanh_unit
    return y, (hs, xhats, inv_stds, tanh_unit)


def mlp_backward(weights, gains, cache, upstream, layer_norm_on, out_act, max_action, ln_eps):
    """Backward pass matching `mlp_forward`.

    Returns (w_grads, b_grads, gain_grads, offset_grads, x_grad).
    """
    hs, xhats, inv_stds, tanh_unit = cache
    g = upstream
    if out_act == OUT_ACT_TANH:
        g = g * (max_action * (1.0 - tanh_unit * tanh_unit))
    n_lin = len(weights)
    w_grads = [None] * n_lin
    b_grads = [None] * n_lin
    n_hidden = n_lin - 1
    gain_grads = [None] * n_hidden if layer_norm_on else []
    offset_grads = [None] * n_hidden if layer_norm_on else []
    for i in range(n_lin - 1, 0, -1):
        w_grads[i] = hs[i].T @ g
        b_grads[i] = g.sum(axis=0)
        g = g @ weights[i].T
        g = g * (hs[i] > 0)
        if layer_norm_on:
            xhat = xhats[i - 1]
            istd = inv_stds[i - 1][:, None]
            gain_grads[i - 1] = (g * xhat).sum(axis=0)
            offset_grads[i - 1] = g.sum(axis=0)
            gx = g * gains[i - 1]
            g = istd * (
                gx
                - gx.mean(axis=1, keepdims=True)
                - xhat * (gx * xhat).mean(axis=1, keepdims=True)
            )
    w_grads[0] = hs[0].T @ g
    b_grads[0] = g.sum(axis=0)
    x_grad = g @ weights[0].T
    return w_grads, b_grads, gain_grads, offset_grads, x_grad


def adam_step(params, grads, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected Adam update over aligned lists of arrays.

    `t` is the step count before this call; returns (new_params, new_m, new_v)
    for step t + 1.
    """
    t_new = t + 1
    bc1 = 1.0 - beta1**t_new
    bc2 = 1.0 - beta2**t_new
    new_p, new_m, new_v = [], [], []
    for p, g, mi, vi in zip(params, grads, m, v):
        m2 = beta1 * mi + (1.0 - beta1) * g
        v2 = beta2 * vi + (1.0 - beta2) * (g * g)
        step = lr * (m2 / bc1) / (np.sqrt(v2 / bc2) + eps)
        new_p.append(p - step)
        new_m.append(m2)
        new_v.append(v2)
    return new_p, new_m, new_v
