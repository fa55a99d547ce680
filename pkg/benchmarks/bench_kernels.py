"""Benchmark the compiled kernels against the pure-numpy fallback.

Times one full network update (forward + backward + Adam) at several
(width, batch) points, which is the shape of work dominating offline training
runs.  Run as: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from rebrac.numcore import MlpConfig, adam_init, adam_step, init_params
from rebrac.numcore import mlp_backward, mlp_forward
from rebrac.numcore.backend import available_backends, use_backend


def time_update(width, batch, depth=3, layer_norm=True, steps=200, dtype=np.float32):
    cfg = MlpConfig(
        input_dim=10, hidden_dims=(width,) * depth, output_dim=1, layer_norm=layer_norm
    )
    params = init_params(cfg, 0, dtype=dtype)
    state = adam_init(params)
    x = np.random.default_rng(0).normal(size=(batch, 10)).astype(dtype)
    upstream = np.full((batch, 1), 1.0 / batch, dtype=dtype)
    # Warm up any lazy allocation paths before timing.
    y, cache = mlp_forward(params, cfg, x)
    t0 = time.perf_counter()
    for _ in range(steps):
        y, cache = mlp_forward(params, cfg, x)
        grads, _ = mlp_backward(cache, upstream)
        params, state = adam_step(params, grads, state)
    return (time.perf_counter() - t0) / steps


def main():
    shapes = [(48, 128), (64, 256), (128, 256), (256, 1024)]
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    header = f"{'width':>6} {'batch':>6}" + "".join(f"  {b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    for width, batch in shapes:
        steps = 50 if batch >= 1024 else 200
        row = f"{width:>6} {batch:>6}"
        times = {}
        for name in backends:
            with use_backend(name):
                times[name] = time_update(width, batch, steps=steps)
            row += f"  {times[name] * 1e3:>9.3f} ms"
        if len(backends) == 2:
            row += f"  {times['numpy'] / times['cython']:>7.2f}x"
        print(row)


if __name__ == "__main__":
    main()
