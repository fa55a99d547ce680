"""Binary agent checkpoints.

Layout: magic "RBAC", u16 version, u32 header length, a JSON header (config,
counters, observation-standardization constants, array manifest), then the six
networks' parameter arrays as little-endian float32 in canonical order
(actor, actor_target, critic_a, critic_b, critic_a_target, critic_b_target;
within a network: weights, biases, LayerNorm gains, offsets), and a CRC32
trailer over everything before it.  Identical agents produce identical bytes.

Optimizer moments and the rng stream are deliberately not stored: a loaded
agent is ready for evaluation or a fresh optimization run, not for bit-exact
training resumption.
"""

import json
import struct
import zlib

import numpy as np

from ..errors import DatasetFormatError
from ..numcore import adam_init
from .config import AgentConfig
from .core import AgentState

MAGIC = b"RBAC"
VERSION = 1
_PREFIX = struct.Struct("<4sHI")

_NETS = (
    "actor",
    "actor_target",
    "critic_a",
    "critic_b",
    "critic_a_target",
    "critic_b_target",
)


def save_checkpoint(state: AgentState, path):
    """Write the agent to `path`; returns the path."""
    manifest = []
    blocks = []
    for net in _NETS:
        params = getattr(state, net)
        shapes = []
        for arr in params.param_list():
            shapes.append(list(arr.shape))
            blocks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
        manifest.append({"net": net, "shapes": shapes})
    header = {
        "cfg": state.cfg.to_dict(),
        "train_steps": state.train_steps,
        "actor_updates": state.actor_updates,
        "state_mean": None
        if state.state_mean is None
        else [float(v) for v in state.state_mean],
        "state_std": None
        if state.state_std is None
        else [float(v) for v in state.state_std],
        "arrays": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    body = _PREFIX.pack(MAGIC, VERSION, len(header_bytes)) + header_bytes + b"".join(
        blocks
    )
    crc = zlib.crc32(body) & 0xFFFFFFFF
    with open(path, "wb") as f:
        f.write(body)
        f.write(struct.pack("<I", crc))
    return path


def load_checkpoint(path, seed=0) -> AgentState:
    """Read a checkpoint written by save_checkpoint.

    Verifies magic, version, size and CRC; raises DatasetFormatError on any
    mismatch.  The returned agent has fresh optimizer state and a fresh rng
    stream derived from `seed`.
    """
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < _PREFIX.size + 4:
        raise DatasetFormatError(f"{path}: truncated file ({len(blob)} bytes)")
    magic, version, header_len = _PREFIX.unpack_from(blob, 0)
    if magic != MAGIC:
        raise DatasetFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    header_end = _PREFIX.size + header_len
    if len(blob) < header_end + 4:
        raise DatasetFormatError(f"{path}: truncated file ({len(blob)} bytes)")
    try:
        header = json.loads(blob[_PREFIX.size : header_end].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DatasetFormatError(f"{path}: unreadable header ({exc})") from exc

    payload = 0
    for entry in header["arrays"]:
        for shape in entry["shapes"]:
            payload += 4 * int(np.prod(shape, dtype=np.int64))
    expected = header_end + payload + 4
    if len(blob) != expected:
        raise DatasetFormatError(
            f"{path}: truncated or oversized file ({len(blob)} bytes, "
            f"expected {expected})"
        )
    crc_stored = struct.unpack_from("<I", blob, expected - 4)[0]
    crc_actual = zlib.crc32(blob[: expected - 4]) & 0xFFFFFFFF
    if crc_stored != crc_actual:
        raise DatasetFormatError(
            f"{path}: checksum mismatch (stored {crc_stored:#010x}, "
            f"computed {crc_actual:#010x})"
        )

    cfg = AgentConfig.from_dict(header["cfg"])
    from ..numcore import init_params

    dtype = cfg.np_dtype
    offset = header_end

    def read_net(template):
        nonlocal offset
        arrays = []
        for t in template.param_list():
            count = t.size
            arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
            offset += 4 * count
            arrays.append(arr.reshape(t.shape).astype(dtype))
        return type(template).from_param_list(template, arrays)

    stored = {e["net"]: e["shapes"] for e in header["arrays"]}
    if set(stored) != set(_NETS):
        raise DatasetFormatError(f"{path}: array manifest does not list all networks")
    actor_template = init_params(cfg.actor_cfg, 0, dtype=dtype)
    critic_template = init_params(cfg.critic_cfg, 0, dtype=dtype)
    for net in _NETS:
        template = actor_template if net.startswith("actor") else critic_template
        expected_shapes = [list(a.shape) for a in template.param_list()]
        if stored[net] != expected_shapes:
            raise DatasetFormatError(
                f"{path}: stored shapes for {net} do not match the stored config"
            )

    nets = {}
    for net in _NETS:
        template = actor_template if net.startswith("actor") else critic_template
        nets[net] = read_net(template)

    mean = header["state_mean"]
    std = header["state_std"]
    return AgentState(
        cfg=cfg,
        actor=nets["actor"],
        actor_target=nets["actor_target"],
        critic_a=nets["critic_a"],
        critic_b=nets["critic_b"],
        critic_a_target=nets["critic_a_target"],
        critic_b_target=nets["critic_b_target"],
        actor_opt=adam_init(nets["actor"], lr=cfg.actor_lr),
        critic_a_opt=adam_init(nets["critic_a"], lr=cfg.critic_lr),
        critic_b_opt=adam_init(nets["critic_b"], lr=cfg.critic_lr),
        rng=np.random.default_rng(np.random.SeedSequence(seed)),
        train_steps=header["train_steps"],
        actor_updates=header["actor_updates"],
        state_mean=None if mean is None else np.asarray(mean, dtype=np.float64),
        state_std=None if std is None else np.asarray(std, dtype=np.float64),
    )
