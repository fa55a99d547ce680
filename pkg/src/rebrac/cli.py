"""Command-line surface: dataset generation, training, evaluation, the
single-toggle ablation matrix, network-depth scans, and expected-best-score
reports.

Subcommands: gen-data, train, eval, ablate, eop, depth-scan.
Exit codes: 0 success, 2 usage/validation, 3 runtime failure (divergence or
non-finite numerics).  The REBRAC_OUT environment variable supplies the
default output directory.  Run settings can come from a JSON file with flat
dotted keys (e.g. {"agent.gamma": 0.999, "train_steps": 30000}); command-line
flags override file values.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace as _ds_replace

import numpy as np

from .agent import (
    AgentConfig,
    evaluate,
    final_score,
    profile_for_env,
    save_checkpoint,
    select_action,
    train_agent,
    with_overrides,
)
from .agent.checkpoint import load_checkpoint
from .datasets import TIERS, generate, load as load_dataset, save as save_dataset
from .envs import (
    ENV_NAMES,
    expert_policy,
    load_ref_scores,
    make_env,
    normalized_score,
    random_policy,
    rollout,
)
from .errors import DatasetFormatError, DivergenceError, NonFiniteError
from .evalstats import ScoreTable, eop, eop_std, format_percent_change


class UsageError(ValueError):
    """Raised for bad flag combinations or unusable inputs; exits with 2."""


# --------------------------------------------------------------------------
# Shared config plumbing
# --------------------------------------------------------------------------

DEFAULT_SEEDS = (0, 1, 2, 3)
DESK_STEPS = 50_000
PAPER_STEPS = 1_000_000

# Dotted --set keys accepted for the agent, split by how they apply.
_SCALAR_KEYS = {
    "gamma", "tau", "beta1_actor", "beta2_critic", "batch_size",
    "actor_lr", "critic_lr", "policy_noise", "noise_clip", "policy_delay",
    "q_normalization", "state_normalization", "dtype",
}
_STRUCT_KEYS = {"hidden", "depth", "actor_depth", "critic_depth", "critic_layer_norm"}


def apply_agent_overrides(cfg: AgentConfig, overrides: dict) -> AgentConfig:
    """Apply flat `agent.<key>` overrides to a base config.

    Scalar keys map straight onto AgentConfig fields; structural keys
    (hidden, depth, actor_depth, critic_depth, critic_layer_norm) rebuild the
    network shapes.
    """
    scalars = {}
    struct = {}
    for key, value in overrides.items():
        if key in _SCALAR_KEYS:
            scalars[key] = value
        elif key in _STRUCT_KEYS:
            struct[key] = value
        else:
            raise UsageError(f"unknown agent override {key!r}")
    if struct:
        width = int(struct.get("hidden", cfg.actor_cfg.hidden_dims[0]))
        actor_depth = int(
            struct.get("actor_depth", struct.get("depth", len(cfg.actor_cfg.hidden_dims)))
        )
        critic_depth = int(
            struct.get(
                "critic_depth", struct.get("depth", len(cfg.critic_cfg.hidden_dims))
            )
        )
        actor_cfg = _ds_replace(cfg.actor_cfg, hidden_dims=(width,) * actor_depth)
        critic_cfg = _ds_replace(
            cfg.critic_cfg,
            hidden_dims=(width,) * critic_depth,
            layer_norm=bool(struct.get("critic_layer_norm", cfg.critic_cfg.layer_norm)),
        )
        scalars["actor_cfg"] = actor_cfg
        scalars["critic_cfg"] = critic_cfg
    try:
        return with_overrides(cfg, **scalars)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid agent override: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one training invocation."""

    env: str
    dataset: str
    train_steps: int = DESK_STEPS
    eval_every: int = 0
    eval_episodes: int = 10
    seeds: tuple = DEFAULT_SEEDS
    out_dir: str = ""
    paper_protocol: bool = False
    agent_overrides: dict = None

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "agent_overrides", dict(self.agent_overrides or {}))
        if self.env not in ENV_NAMES:
            raise UsageError(f"unknown environment {self.env!r}; known: {ENV_NAMES}")
        if not self.seeds:
            raise UsageError("seeds must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise UsageError(f"seeds must be distinct, got {self.seeds}")
        if self.train_steps < 1:
            raise UsageError("train_steps must be >= 1")
        if self.eval_episodes < 1:
            raise UsageError("eval_episodes must be >= 1")
        if not os.path.exists(self.dataset):
            raise UsageError(f"dataset not found: {self.dataset}")

    def agent_config(self, env) -> AgentConfig:
        cfg = profile_for_env(
            self.env, env.state_dim, env.action_dim, paper_protocol=self.paper_protocol
        )
        return apply_agent_overrides(cfg, self.agent_overrides)


def _parse_set_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _collect_overrides(pairs):
    """--set agent.k=v pairs -> {'k': v} with JSON-parsed values."""
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise UsageError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        if not key.startswith("agent."):
            raise UsageError(f"--set keys must start with 'agent.', got {key!r}")
        out[key[len("agent.") :]] = _parse_set_value(value)
    return out


def _load_config_file(path):
    if path is None:
        return {}
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config file must hold a JSON object")
    return data


def resolve_run_config(args) -> RunConfig:
    """Merge defaults < config file < flags into a RunConfig."""
    file_cfg = _load_config_file(getattr(args, "config", None))
    agent_overrides = {
        k[len("agent.") :]: v for k, v in file_cfg.items() if k.startswith("agent.")
    }
    agent_overrides.update(_collect_overrides(getattr(args, "set", None)))

    def pick(flag_value, file_key, default):
        if flag_value is not None:
            return flag_value
        if file_key in file_cfg:
            return file_cfg[file_key]
        return default

    paper = bool(pick(getattr(args, "paper_protocol", None) or None, "paper_protocol", False))
    default_steps = PAPER_STEPS if paper else DESK_STEPS
    seeds = pick(getattr(args, "seeds", None), "seeds", list(DEFAULT_SEEDS))
    if isinstance(seeds, str):
        seeds = [int(s) for s in seeds.split(",") if s != ""]
    env = pick(getattr(args, "env", None), "env", None)
    dataset = pick(getattr(args, "dataset", None), "dataset", None)
    if env is None:
        raise UsageError("an environment is required (--env or config file)")
    if dataset is None:
        raise UsageError("a dataset path is required (--dataset or config file)")
    return RunConfig(
        env=env,
        dataset=dataset,
        train_steps=int(pick(getattr(args, "steps", None), "train_steps", default_steps)),
        eval_every=int(pick(getattr(args, "eval_every", None), "eval_every", 0)),
        eval_episodes=int(pick(getattr(args, "eval_episodes", None), "eval_episodes", 10)),
        seeds=seeds,
        out_dir=out_dir(getattr(args, "out", None) or file_cfg.get("out")),
        paper_protocol=paper,
        agent_overrides=agent_overrides,
    )


def out_dir(flag_value=None):
    """Output directory: --out flag beats REBRAC_OUT beats ./rebrac_out."""
    path = flag_value or os.environ.get("REBRAC_OUT") or "rebrac_out"
    os.makedirs(path, exist_ok=True)
    return path


# --------------------------------------------------------------------------
# Ablation toggles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AblationSpec:
    """Single-change variants of a base config; toggles compose."""

    no_layer_norm: bool = False
    shallow: bool = False
    no_actor_penalty: bool = False
    no_critic_penalty: bool = False
    small_batch: bool = False
    large_batch: bool = False
    default_gamma: bool = False

    TOGGLE_NAMES = (
        "no_layer_norm",
        "shallow",
        "no_actor_penalty",
        "no_critic_penalty",
        "small_batch",
        "large_batch",
        "default_gamma",
    )

    def __post_init__(self):
        if self.small_batch and self.large_batch:
            raise UsageError("small_batch and large_batch are mutually exclusive")

    def active(self):
        return tuple(n for n in self.TOGGLE_NAMES if getattr(self, n))

    def label(self):
        return "+".join(self.active()) or "base"

    def apply(self, cfg: AgentConfig) -> AgentConfig:
        if self.no_layer_norm:
            cfg = with_overrides(
                cfg, critic_cfg=_ds_replace(cfg.critic_cfg, layer_norm=False)
            )
        if self.shallow:
            if len(cfg.actor_cfg.hidden_dims) < 2:
                raise UsageError("cannot remove a hidden layer: depth already 1")
            cfg = with_overrides(
                cfg,
                actor_cfg=_ds_replace(
                    cfg.actor_cfg, hidden_dims=cfg.actor_cfg.hidden_dims[:-1]
                ),
                critic_cfg=_ds_replace(
                    cfg.critic_cfg, hidden_dims=cfg.critic_cfg.hidden_dims[:-1]
                ),
            )
        if self.no_actor_penalty:
            cfg = with_overrides(cfg, beta1_actor=0.0)
        if self.no_critic_penalty:
            cfg = with_overrides(cfg, beta2_critic=0.0)
        if self.small_batch:
            cfg = with_overrides(cfg, batch_size=max(1, cfg.batch_size // 4))
        if self.large_batch:
            cfg = with_overrides(cfg, batch_size=cfg.batch_size * 4)
        if self.default_gamma:
            cfg = with_overrides(cfg, gamma=0.99)
        return cfg

    @classmethod
    def single(cls, name):
        if name not in cls.TOGGLE_NAMES:
            raise UsageError(
                f"unknown toggle {name!r}; known: {', '.join(cls.TOGGLE_NAMES)}"
            )
        return cls(**{name: True})


# --------------------------------------------------------------------------
# Training/eval helpers shared by train, ablate, depth-scan
# --------------------------------------------------------------------------


def _train_one_seed(run: RunConfig, cfg: AgentConfig, seed, tag=""):
    """One seeded training run; returns dict with scores and artifact paths."""
    ds = load_dataset(run.dataset)
    env = make_env(run.env)
    suffix = f"{tag}_seed{seed}" if tag else f"seed{seed}"
    metrics_path = os.path.join(run.out_dir, f"metrics_{suffix}.csv")
    state, history = train_agent(
        ds,
        cfg,
        seed=seed,
        n_steps=run.train_steps,
        env=env,
        eval_every=run.eval_every,
        eval_episodes=run.eval_episodes,
        metrics_path=metrics_path,
    )
    ckpt_path = os.path.join(run.out_dir, f"agent_{suffix}.ckpt")
    save_checkpoint(state, ckpt_path)
    raw = final_score(history)
    refs = load_ref_scores()[run.env]
    return {
        "seed": seed,
        "raw": raw,
        "normalized": normalized_score(raw, refs),
        "checkpoint": ckpt_path,
        "metrics": metrics_path,
    }


def _train_seeds(run: RunConfig, cfg: AgentConfig, jobs=1, tag=""):
    if jobs <= 1 or len(run.seeds) == 1:
        return [_train_one_seed(run, cfg, s, tag) for s in run.seeds]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_train_one_seed, run, cfg, s, tag) for s in run.seeds]
        return [f.result() for f in futures]


def _mean_std(values):
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_gen_data(args):
    policy = TIERS[args.policy]
    env = make_env(args.env)
    ds = generate(env, policy, n_transitions=args.n, seed=args.seed)
    if args.file:
        path = args.file
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
    else:
        name = f"{args.env}_{args.policy}_n{args.n}_s{args.seed}.rbd"
        path = os.path.join(out_dir(args.out), name)
    save_dataset(ds, path)
    print(
        f"wrote {path}: {ds.n} transitions, {ds.meta['n_episodes']} episodes, "
        f"env={args.env}, policy={policy.describe()}, seed={args.seed}"
    )
    return 0


def cmd_train(args):
    run = resolve_run_config(args)
    env = make_env(run.env)
    cfg = run.agent_config(env)
    with open(os.path.join(run.out_dir, "run_config.json"), "w") as f:
        json.dump(
            {
                "env": run.env,
                "dataset": run.dataset,
                "train_steps": run.train_steps,
                "eval_every": run.eval_every,
                "eval_episodes": run.eval_episodes,
                "seeds": list(run.seeds),
                "paper_protocol": run.paper_protocol,
                "agent": cfg.to_dict(),
            },
            f,
            indent=2,
            sort_keys=True,
        )
        f.write("\n")
    results = _train_seeds(run, cfg, jobs=args.jobs)
    norm = [r["normalized"] for r in results]
    mean, std = _mean_std(norm)
    summary = {
        "env": run.env,
        "dataset": run.dataset,
        "per_seed": {str(r["seed"]): {"raw": r["raw"], "normalized": r["normalized"]}
                     for r in results},
        "mean_normalized": mean,
        "std_normalized": std,
    }
    scores_path = os.path.join(run.out_dir, "scores.json")
    with open(scores_path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    for r in results:
        print(
            f"seed {r['seed']}: raw {r['raw']:.3f}, normalized {r['normalized']:.1f} "
            f"-> {r['checkpoint']}"
        )
    print(f"mean normalized: {mean:.1f} ± {std:.1f} ({scores_path})")
    return 0


def _eval_policy_fn(args):
    """(policy, env, label) for eval: a checkpoint or a scripted reference."""
    env = make_env(args.env) if args.env else None
    if args.checkpoint:
        if not os.path.exists(args.checkpoint):
            raise UsageError(f"checkpoint not found: {args.checkpoint}")
        state = load_checkpoint(args.checkpoint)
        if env is None:
            raise UsageError("--env is required with --checkpoint")
        return lambda obs: select_action(state, obs), env, args.checkpoint
    if args.policy == "expert":
        if env is None:
            raise UsageError("--env is required with --policy")
        return expert_policy(args.env), env, f"expert[{args.env}]"
    if args.policy == "random":
        if env is None:
            raise UsageError("--env is required with --policy")
        return random_policy(env.action_dim, seed=args.seed), env, f"random[{args.env}]"
    raise UsageError("provide --checkpoint PATH or --policy expert|random")


def cmd_eval(args):
    if args.episodes < 1:
        raise UsageError("--episodes must be >= 1")
    policy, env, label = _eval_policy_fn(args)
    returns = rollout(env, policy, seed=args.seed, n_episodes=args.episodes)
    refs = load_ref_scores()[args.env]
    rows = [(i, float(r), normalized_score(r, refs)) for i, r in enumerate(returns)]
    path = os.path.join(out_dir(args.out), "eval_scores.csv")
    with open(path, "w") as f:
        f.write("episode,raw_return,normalized_score\n")
        for i, raw, norm in rows:
            f.write(f"{i},{raw!r},{norm!r}\n")
    mean, std = _mean_std([n for _, _, n in rows])
    print(f"{label}: {mean:.1f} ± {std:.1f} over {args.episodes} episodes ({path})")
    return 0


def cmd_ablate(args):
    run = resolve_run_config(args)
    env = make_env(run.env)
    base_cfg = run.agent_config(env)
    toggles = (
        list(AblationSpec.TOGGLE_NAMES)
        if args.toggles is None
        else [t for t in args.toggles.split(",") if t]
    )
    variants = [("base", AblationSpec())]
    variants += [(name, AblationSpec.single(name)) for name in toggles]

    table = ScoreTable()
    summaries = []
    for name, spec in variants:
        cfg = spec.apply(base_cfg)
        results = _train_seeds(run, cfg, jobs=args.jobs, tag=name)
        for r in results:
            table.add(name, run.env, r["seed"], r["normalized"])
        mean, std = _mean_std([r["normalized"] for r in results])
        summaries.append((name, mean, std))

    base_mean = summaries[0][1]
    report_path = os.path.join(run.out_dir, "ablation.csv")
    with open(report_path, "w") as f:
        f.write("variant,mean_normalized,std_normalized,delta_vs_base\n")
        for name, mean, std in summaries:
            if name == "base":
                delta = ""
            elif base_mean == 0.0:
                delta = "undefined"
            else:
                delta = format_percent_change(mean, base_mean)
            f.write(f"{name},{mean!r},{std!r},{delta}\n")
    runs_path = os.path.join(run.out_dir, "ablation_runs.csv")
    with open(runs_path, "w") as f:
        f.write(table.to_csv())
    for name, mean, std in summaries:
        extra = ""
        if name != "base" and base_mean != 0.0:
            extra = f" {format_percent_change(mean, base_mean)}"
        print(f"{name}: {mean:.1f} ± {std:.1f}{extra}")
    print(f"report: {report_path}")
    return 0


def cmd_eop(args):
    if not os.path.exists(args.scores):
        raise UsageError(f"scores file not found: {args.scores}")
    with open(args.scores) as f:
        table = ScoreTable.from_csv(f.read())
    ks = list(range(1, args.k_max + 1))
    path = os.path.join(out_dir(args.out), "eop.csv")
    with open(path, "w") as f:
        f.write("algorithm,dataset,k,eop,eop_std\n")
        for algo in table.algorithms():
            for ds_name in table.datasets(algo):
                scores = table.scores(algo, ds_name)
                for k in ks:
                    if k > len(scores):
                        f.write(f"{algo},{ds_name},{k},-,-\n")
                    else:
                        f.write(
                            f"{algo},{ds_name},{k},"
                            f"{eop(scores, k)!r},{eop_std(scores, k)!r}\n"
                        )
    print(f"wrote {path} (budgets 1..{args.k_max})")
    return 0


def cmd_depth_scan(args):
    run = resolve_run_config(args)
    env = make_env(run.env)
    base_cfg = run.agent_config(env)
    depths = [int(d) for d in args.depths.split(",") if d]
    if not depths or min(depths) < 1:
        raise UsageError("--depths must list positive integers")
    which_list = [w for w in args.which.split(",") if w]
    for w in which_list:
        if w not in ("actor", "critic", "both"):
            raise UsageError(f"--which entries must be actor|critic|both, got {w!r}")

    width = base_cfg.actor_cfg.hidden_dims[0]
    path = os.path.join(run.out_dir, "depth_scan.csv")
    rows = []
    for which in which_list:
        for depth in depths:
            cfg = base_cfg
            if which in ("actor", "both"):
                cfg = with_overrides(
                    cfg, actor_cfg=_ds_replace(cfg.actor_cfg, hidden_dims=(width,) * depth)
                )
            if which in ("critic", "both"):
                cfg = with_overrides(
                    cfg,
                    critic_cfg=_ds_replace(cfg.critic_cfg, hidden_dims=(width,) * depth),
                )
            results = _train_seeds(run, cfg, jobs=args.jobs, tag=f"{which}{depth}")
            for r in results:
                rows.append((which, depth, r["seed"], r["raw"], r["normalized"]))
    with open(path, "w") as f:
        f.write("which,depth,seed,raw_return,normalized_score\n")
        for which, depth, seed, raw, norm in rows:
            f.write(f"{which},{depth},{seed},{raw!r},{norm!r}\n")
    print(f"wrote {path}: {len(rows)} runs")
    return 0


# --------------------------------------------------------------------------
# Parser and entry point
# --------------------------------------------------------------------------


def _add_run_flags(p):
    p.add_argument("--config", help="JSON run config with flat dotted keys")
    p.add_argument("--env", choices=ENV_NAMES)
    p.add_argument("--dataset", help="path to a stored dataset")
    p.add_argument("--steps", type=int, help="training steps per seed")
    p.add_argument("--seeds", help="comma-separated seed list, e.g. 0,1,2,3")
    p.add_argument("--eval-every", type=int, dest="eval_every")
    p.add_argument("--eval-episodes", type=int, dest="eval_episodes")
    p.add_argument("--out", help="output directory (default $REBRAC_OUT)")
    p.add_argument(
        "--set",
        action="append",
        metavar="agent.KEY=VALUE",
        help="agent config override, repeatable (e.g. --set agent.gamma=0.999)",
    )
    p.add_argument(
        "--paper-protocol",
        action="store_true",
        dest="paper_protocol",
        help="full-scale settings: wide networks, 1M steps",
    )
    p.add_argument("--jobs", type=int, default=1, help="concurrent seed runs")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rebrac",
        description="Offline actor-critic with decoupled behavior anchors: "
        "data, training, evaluation, ablations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate an offline dataset")
    p.add_argument("--env", choices=ENV_NAMES, required=True)
    p.add_argument("--policy", choices=sorted(TIERS), required=True)
    p.add_argument("--n", type=int, required=True, help="number of transitions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.add_argument("--file", help="explicit output file path")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train over a seed list")
    _add_run_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint or scripted policy")
    p.add_argument("--env", choices=ENV_NAMES, required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--policy", choices=("expert", "random"))
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="base + single-toggle variants")
    _add_run_flags(p)
    p.add_argument(
        "--toggles",
        help="comma-separated toggle names (default: all); empty string for none",
    )
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("eop", help="expected best score per deployment budget")
    p.add_argument("--scores", required=True, help="CSV: algorithm,dataset,run,score")
    p.add_argument("--k-max", type=int, default=20, dest="k_max")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eop)

    p = sub.add_parser("depth-scan", help="score vs network depth")
    _add_run_flags(p)
    p.add_argument("--depths", default="2,3,4,5,6")
    p.add_argument(
        "--which", default="actor,critic,both", help="comma list of actor|critic|both"
    )
    p.set_defaults(func=cmd_depth_scan)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, DatasetFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DivergenceError, NonFiniteError) as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
