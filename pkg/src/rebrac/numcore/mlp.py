"""Dense MLP engine: configs, parameters, forward/backward.

Networks are plain numpy arrays; every operation is a pure function.  The
architecture is fixed to the shape used by the agent: a stack of
linear -> optional LayerNorm -> ReLU hidden layers, a linear output layer and
an optional tanh scaled to the action bound.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteError, StaleCacheError
from . import backend
from ._kernels_np import OUT_ACT_NONE, OUT_ACT_TANH

MAX_HIDDEN_LAYERS = 6

_OUT_ACT_CODES = {"none": OUT_ACT_NONE, "tanh": OUT_ACT_TANH}


@dataclass(frozen=True)
class MlpConfig:
    """Architecture of one network.

    output_activation is "none" or "tanh"; with "tanh" the output is
    max_action * tanh(pre-activation).  layer_norm inserts LayerNorm after
    each hidden linear layer, before the ReLU.
    """

    input_dim: int
    hidden_dims: tuple = (256, 256, 256)
    output_dim: int = 1
    layer_norm: bool = False
    output_activation: str = "none"
    max_action: float = 1.0
    ln_eps: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))
        if len(self.hidden_dims) == 0:
            raise ValueError("hidden_dims must be non-empty")
        if len(self.hidden_dims) > MAX_HIDDEN_LAYERS:
            raise ValueError(f"at most {MAX_HIDDEN_LAYERS} hidden layers supported")
        if min((self.input_dim, self.output_dim) + self.hidden_dims) < 1:
            raise ValueError("all layer dims must be >= 1")
        if self.output_activation not in _OUT_ACT_CODES:
            raise ValueError(f"unknown output_activation {self.output_activation!r}")

    @property
    def n_layers(self):
        """Number of linear layers (hidden + output)."""
        return len(self.hidden_dims) + 1

    def layer_dims(self):
        """(fan_in, fan_out) per linear layer."""
        dims = (self.input_dim,) + self.hidden_dims + (self.output_dim,)
        return list(zip(dims[:-1], dims[1:]))

    def to_dict(self):
        return {
            "input_dim": self.input_dim,
            "hidden_dims": list(self.hidden_dims),
            "output_dim": self.output_dim,
            "layer_norm": self.layer_norm,
            "output_activation": self.output_activation,
            "max_action": self.max_action,
            "ln_eps": self.ln_eps,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["hidden_dims"] = tuple(d["hidden_dims"])
        return cls(**d)


@dataclass
class MlpParams:
    """Weights, biases and LayerNorm gains/offsets of one network.

    weights[i] has shape (fan_in, fan_out) so the forward pass is x @ W + b.
    ln_gains/ln_offsets are empty unless the config enables layer_norm.
    """

    weights: list
    biases: list
    ln_gains: list = field(default_factory=list)
    ln_offsets: list = field(default_factory=list)

    def param_list(self):
        """All arrays in canonical order (weights, biases, gains, offsets)."""
        return [*self.weights, *self.biases, *self.ln_gains, *self.ln_offsets]

    @classmethod
    def from_param_list(cls, template, arrays):
        """Rebuild a params object structured like `template` from a flat list."""
        nw = len(template.weights)
        nb = len(template.biases)
        ng = len(template.ln_gains)
        it = iter(arrays)
        weights = [next(it) for _ in range(nw)]
        biases = [next(it) for _ in range(nb)]
        gains = [next(it) for _ in range(ng)]
        offsets = [next(it) for _ in range(ng)]
        return cls(weights, biases, gains, offsets)

    def copy(self):
        return MlpParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            [g.copy() for g in self.ln_gains],
            [o.copy() for o in self.ln_offsets],
        )

    @property
    def dtype(self):
        return self.weights[0].dtype

    def n_params(self):
        return sum(a.size for a in self.param_list())


@dataclass
class ForwardCache:
    """Intermediates retained by mlp_forward for the matching backward call."""

    params: MlpParams
    cfg: MlpConfig
    raw: tuple
    backend_name: str
    batch: int


def init_params(cfg: MlpConfig, seed, dtype=np.float32) -> MlpParams:
    """Deterministic parameter initialization from (config, seed).

    Weights and biases are uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)];
    LayerNorm gains start at 1 and offsets at 0.
    """
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in cfg.layer_dims():
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(dtype))
        biases.append(rng.uniform(-bound, bound, size=fan_out).astype(dtype))
    gains, offsets = [], []
    if cfg.layer_norm:
        for d in cfg.hidden_dims:
            gains.append(np.ones(d, dtype=dtype))
            offsets.append(np.zeros(d, dtype=dtype))
    return MlpParams(weights, biases, gains, offsets)


def _check_finite(arr, what):
    if not np.isfinite(arr).all():
        raise NonFiniteError(f"non-finite values in {what}")


def layer_norm(x, gain, offset, eps=1e-5):
    """Row-wise LayerNorm: gain * (x - mean) / sqrt(var + eps) + offset.

    Variance is biased (divide by the feature count d).
    """
    x = np.asarray(x)
    if x.ndim != 2:
        raise ValueError("layer_norm expects a (batch, d) array")
    dtype = x.dtype if x.dtype in (np.float32, np.float64) else np.float64
    x = np.ascontiguousarray(x, dtype=dtype)
    gain = np.ascontiguousarray(gain, dtype=dtype)
    offset = np.ascontiguousarray(offset, dtype=dtype)
    out = backend.active_backend().layer_norm(x, gain, offset, float(eps))
    _check_finite(out, "layer_norm output")
    return out


def mlp_forward(params: MlpParams, cfg: MlpConfig, x):
    """Evaluate the network on a (batch, input_dim) input.

    Returns (y, cache); the cache feeds mlp_backward and is only valid while
    `params` is unchanged.
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[1] != cfg.input_dim:
        raise ValueError(
            f"input shape {x.shape} incompatible with input_dim {cfg.input_dim}"
        )
    if x.shape[0] == 0:
        raise ValueError("mlp_forward needs at least one input row")
    x = np.ascontiguousarray(x, dtype=params.dtype)
    _check_finite(x, "mlp_forward input")
    kb = backend.active_backend()
    y, raw = kb.mlp_forward(
        params.weights,
        params.biases,
        params.ln_gains,
        params.ln_offsets,
        x,
        cfg.layer_norm,
        _OUT_ACT_CODES[cfg.output_activation],
        cfg.max_action,
        cfg.ln_eps,
    )
    _check_finite(y, "mlp_forward output")
    cache = ForwardCache(params, cfg, raw, backend.active_backend_name(), x.shape[0])
    return y, cache


def mlp_backward(cache: ForwardCache, upstream):
    """Gradients of sum(upstream * y) with respect to params and input.

    Returns (grads: MlpParams, x_grad).
    """
    upstream = np.asarray(upstream)
    cfg = cache.cfg
    params = cache.params
    if upstream.shape != (cache.batch, cfg.output_dim):
        raise StaleCacheError(
            f"upstream shape {upstream.shape} does not match cached forward "
            f"({cache.batch}, {cfg.output_dim})"
        )
    upstream = np.ascontiguousarray(upstream, dtype=params.dtype)
    kb = backend.get_backend(cache.backend_name)
    w_g, b_g, gain_g, offset_g, x_grad = kb.mlp_backward(
        params.weights,
        params.ln_gains,
        cache.raw,
        upstream,
        cfg.layer_norm,
        _OUT_ACT_CODES[cfg.output_activation],
        cfg.max_action,
        cfg.ln_eps,
    )
    grads = MlpParams(w_g, b_g, gain_g, offset_g)
    _check_finite(x_grad, "mlp_backward input gradient")
    return grads, x_grad
