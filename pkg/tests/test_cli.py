"""Command-line behavior: artifacts, determinism, exit codes, report shapes."""

import hashlib
import json
import os

import numpy as np
import pytest

from rebrac.agent import init_agent, make_config, read_metrics, save_checkpoint
from rebrac.cli import (
    AblationSpec,
    RunConfig,
    UsageError,
    apply_agent_overrides,
    main,
)
from rebrac.datasets import OfflineDataset, load as load_dataset, save as save_dataset
from rebrac.evalstats import ScoreTable


# ---------------------------------------------------------------- fixtures


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def reach_dataset(workdir):
    """Small expert reach dataset shared by the training-based tests."""
    path = workdir / "reach_expert.rbd"
    rc = main(
        ["gen-data", "--env", "reach", "--policy", "expert", "--n", "1200",
         "--seed", "0", "--file", str(path)]
    )
    assert rc == 0
    return str(path)


def run_train(dataset, out, extra=()):
    return main(
        ["train", "--env", "reach", "--dataset", dataset, "--steps", "100",
         "--seeds", "0", "--eval-episodes", "2", "--out", str(out),
         "--set", "agent.hidden=8", *extra]
    )


def sha256(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


# ---------------------------------------------------------------- gen-data


class TestGenData:
    def test_transition_count_and_meta(self, reach_dataset):
        ds = load_dataset(reach_dataset)
        assert ds.n == 1200
        assert os.path.exists(reach_dataset + ".meta.json")

    def test_deterministic_bytes(self, workdir):
        a, b = workdir / "a.rbd", workdir / "b.rbd"
        for path in (a, b):
            rc = main(
                ["gen-data", "--env", "maze", "--policy", "random", "--n", "500",
                 "--seed", "7", "--file", str(path)]
            )
            assert rc == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_policy_is_usage_error(self, capsys):
        rc = main(["gen-data", "--env", "reach", "--policy", "galactic", "--n", "10"])
        assert rc == 2
        assert "invalid choice" in capsys.readouterr().err

    def test_default_name_in_out_dir(self, tmp_path):
        rc = main(
            ["gen-data", "--env", "reach", "--policy", "random", "--n", "300",
             "--seed", "3", "--out", str(tmp_path)]
        )
        assert rc == 0
        assert (tmp_path / "reach_random_n300_s3.rbd").exists()


# ---------------------------------------------------------------- train


class TestTrain:
    def test_artifacts_and_actor_update_count(self, reach_dataset, tmp_path):
        rc = run_train(reach_dataset, tmp_path)
        assert rc == 0
        metrics = read_metrics(tmp_path / "metrics_seed0.csv")
        assert len(metrics) == 100
        actor_rows = [m for m in metrics if m["actor_loss"] is not None]
        assert len(actor_rows) == 50  # policy_delay 2 over 100 steps
        scores = json.loads((tmp_path / "scores.json").read_text())
        assert set(scores["per_seed"]) == {"0"}
        assert (tmp_path / "agent_seed0.ckpt").exists()
        assert (tmp_path / "run_config.json").exists()

    def test_identical_checkpoints_across_invocations(self, reach_dataset, tmp_path):
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        assert run_train(reach_dataset, d1) == 0
        assert run_train(reach_dataset, d2) == 0
        assert sha256(d1 / "agent_seed0.ckpt") == sha256(d2 / "agent_seed0.ckpt")
        assert (d1 / "metrics_seed0.csv").read_bytes() == (
            d2 / "metrics_seed0.csv"
        ).read_bytes()

    def test_missing_dataset_fails_before_training(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(
            ["train", "--env", "reach", "--dataset", str(tmp_path / "absent.rbd"),
             "--steps", "10", "--seeds", "0", "--out", str(out)]
        )
        assert rc == 2
        assert "dataset not found" in capsys.readouterr().err
        assert not (out / "run_config.json").exists()

    def test_divergence_exits_3(self, tmp_path, capsys):
        n = 64
        rng = np.random.default_rng(0)
        ds = OfflineDataset(
            states=rng.normal(size=(n, 4)).astype(np.float32),
            actions=np.clip(rng.normal(size=(n, 2)), -1, 1).astype(np.float32),
            rewards=np.full(n, 1e30, dtype=np.float32),
            next_states=rng.normal(size=(n, 4)).astype(np.float32),
            next_actions=np.clip(rng.normal(size=(n, 2)), -1, 1).astype(np.float32),
            dones=np.zeros(n, dtype=np.uint8),
            meta={"env": "reach"},
        )
        path = tmp_path / "bad.rbd"
        save_dataset(ds, path)
        rc = main(
            ["train", "--env", "reach", "--dataset", str(path), "--steps", "50",
             "--seeds", "0", "--out", str(tmp_path / "out"),
             "--set", "agent.hidden=8"]
        )
        assert rc == 3
        assert "aborted" in capsys.readouterr().err

    def test_duplicate_seeds_rejected(self, reach_dataset, tmp_path, capsys):
        rc = main(
            ["train", "--env", "reach", "--dataset", reach_dataset,
             "--seeds", "1,1", "--out", str(tmp_path)]
        )
        assert rc == 2
        assert "distinct" in capsys.readouterr().err

    def test_config_file_with_flag_precedence(self, reach_dataset, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(
            json.dumps(
                {
                    "env": "reach",
                    "dataset": reach_dataset,
                    "train_steps": 7,
                    "seeds": [0],
                    "eval_episodes": 2,
                    "agent.hidden": 8,
                    "agent.gamma": 0.95,
                }
            )
        )
        out = tmp_path / "out"
        rc = main(["train", "--config", str(cfg_path), "--steps", "5",
                   "--out", str(out)])
        assert rc == 0
        recorded = json.loads((out / "run_config.json").read_text())
        assert recorded["train_steps"] == 5  # flag beats file
        assert recorded["agent"]["gamma"] == 0.95  # file override applied
        assert len(read_metrics(out / "metrics_seed0.csv")) == 5

    def test_env_var_output_dir(self, reach_dataset, tmp_path, monkeypatch):
        target = tmp_path / "from_env"
        monkeypatch.setenv("REBRAC_OUT", str(target))
        rc = main(
            ["train", "--env", "reach", "--dataset", reach_dataset, "--steps", "4",
             "--seeds", "0", "--eval-episodes", "2", "--set", "agent.hidden=8"]
        )
        assert rc == 0
        assert (target / "agent_seed0.ckpt").exists()


# ---------------------------------------------------------------- eval


class TestEval:
    def test_expert_wrapper_scores_near_100(self, tmp_path, capsys):
        rc = main(
            ["eval", "--env", "reach", "--policy", "expert", "--episodes", "5",
             "--out", str(tmp_path)]
        )
        assert rc == 0
        lines = (tmp_path / "eval_scores.csv").read_text().splitlines()
        assert lines[0] == "episode,raw_return,normalized_score"
        scores = [float(line.split(",")[2]) for line in lines[1:]]
        assert len(scores) == 5
        assert abs(np.mean(scores) - 100.0) < 10.0

    def test_random_weights_checkpoint_scores_near_zero(self, tmp_path):
        cfg = make_config(4, 2, hidden=8)
        state = init_agent(cfg, 0)
        ckpt = tmp_path / "fresh.ckpt"
        save_checkpoint(state, ckpt)
        rc = main(
            ["eval", "--env", "reach", "--checkpoint", str(ckpt), "--episodes", "5",
             "--out", str(tmp_path)]
        )
        assert rc == 0
        lines = (tmp_path / "eval_scores.csv").read_text().splitlines()[1:]
        mean = np.mean([float(line.split(",")[2]) for line in lines])
        # Monte-Carlo: an untrained net's near-constant small actions land in
        # the random-policy regime (can undershoot 0), far below expert's 100.
        assert -150.0 < mean < 40.0

    def test_zero_episodes_rejected(self, capsys):
        rc = main(["eval", "--env", "reach", "--policy", "random", "--episodes", "0"])
        assert rc == 2

    def test_requires_policy_or_checkpoint(self, capsys):
        rc = main(["eval", "--env", "reach"])
        assert rc == 2

    def test_missing_checkpoint(self, tmp_path, capsys):
        rc = main(
            ["eval", "--env", "reach", "--checkpoint", str(tmp_path / "nope.ckpt")]
        )
        assert rc == 2


# ---------------------------------------------------------------- ablate


class TestAblate:
    def test_report_schema_and_identity_toggle(self, reach_dataset, tmp_path):
        # default_gamma is an identity change on reach (gamma already 0.99),
        # so its runs reproduce base exactly and the delta prints as +0.0%.
        out = tmp_path / "out"
        rc = main(
            ["ablate", "--env", "reach", "--dataset", reach_dataset,
             "--steps", "40", "--seeds", "0,1", "--eval-episodes", "2",
             "--out", str(out), "--set", "agent.hidden=8",
             "--toggles", "no_actor_penalty,default_gamma"]
        )
        assert rc == 0
        lines = (out / "ablation.csv").read_text().splitlines()
        assert lines[0] == "variant,mean_normalized,std_normalized,delta_vs_base"
        variants = [line.split(",")[0] for line in lines[1:]]
        assert variants == ["base", "no_actor_penalty", "default_gamma"]
        base_row = lines[1].split(",")
        gamma_row = lines[3].split(",")
        assert base_row[3] == ""
        assert gamma_row[1] == base_row[1]  # identical config, identical score
        assert gamma_row[3] == "(+0.0%)"

        table = ScoreTable.from_csv((out / "ablation_runs.csv").read_text())
        assert set(table.algorithms()) == {"base", "no_actor_penalty", "default_gamma"}
        assert len(table.scores("base")) == 2

    def test_zero_toggles_degenerates_to_base_only(self, reach_dataset, tmp_path):
        out = tmp_path / "out"
        rc = main(
            ["ablate", "--env", "reach", "--dataset", reach_dataset,
             "--steps", "20", "--seeds", "0", "--eval-episodes", "2",
             "--out", str(out), "--set", "agent.hidden=8", "--toggles", ""]
        )
        assert rc == 0
        lines = (out / "ablation.csv").read_text().splitlines()
        assert len(lines) == 2 and lines[1].startswith("base,")

    def test_unknown_toggle_rejected(self, reach_dataset, tmp_path, capsys):
        rc = main(
            ["ablate", "--env", "reach", "--dataset", reach_dataset,
             "--out", str(tmp_path), "--toggles", "no_such_toggle"]
        )
        assert rc == 2
        assert "unknown toggle" in capsys.readouterr().err


class TestAblationSpec:
    def base(self):
        return make_config(4, 2, hidden=16, gamma=0.999, batch_size=64)

    def test_each_toggle_changes_exactly_its_knob(self):
        base = self.base()
        assert not AblationSpec.single("no_layer_norm").apply(base).critic_cfg.layer_norm
        assert len(AblationSpec.single("shallow").apply(base).actor_cfg.hidden_dims) == 2
        assert AblationSpec.single("no_actor_penalty").apply(base).beta1_actor == 0.0
        assert AblationSpec.single("no_critic_penalty").apply(base).beta2_critic == 0.0
        assert AblationSpec.single("small_batch").apply(base).batch_size == 16
        assert AblationSpec.single("large_batch").apply(base).batch_size == 256
        assert AblationSpec.single("default_gamma").apply(base).gamma == 0.99

    def test_base_spec_is_identity(self):
        base = self.base()
        assert AblationSpec().apply(base) == base
        assert AblationSpec().label() == "base"

    def test_toggles_compose(self):
        cfg = AblationSpec(no_actor_penalty=True, shallow=True).apply(self.base())
        assert cfg.beta1_actor == 0.0
        assert len(cfg.critic_cfg.hidden_dims) == 2

    def test_batch_toggles_exclusive(self):
        with pytest.raises(UsageError):
            AblationSpec(small_batch=True, large_batch=True)


# ---------------------------------------------------------------- eop command


class TestEopCommand:
    def test_known_values_and_dash(self, tmp_path):
        table = ScoreTable()
        for run, score in enumerate([0.0, 1.0, 2.0, 3.0]):
            table.add("algo", "toy", run, score)
        scores_path = tmp_path / "scores.csv"
        scores_path.write_text(table.to_csv())
        rc = main(["eop", "--scores", str(scores_path), "--k-max", "6",
                   "--out", str(tmp_path)])
        assert rc == 0
        rows = (tmp_path / "eop.csv").read_text().splitlines()
        assert rows[0] == "algorithm,dataset,k,eop,eop_std"
        by_k = {int(r.split(",")[2]): r.split(",") for r in rows[1:]}
        assert float(by_k[1][3]) == pytest.approx(1.5)  # k=1: plain mean
        assert float(by_k[2][3]) == pytest.approx(14.0 / 6.0, abs=1e-9)
        assert float(by_k[4][3]) == 3.0  # k=N: the max
        assert by_k[5][3] == "-" and by_k[6][4] == "-"

    def test_missing_file(self, tmp_path, capsys):
        rc = main(["eop", "--scores", str(tmp_path / "none.csv")])
        assert rc == 2


# ---------------------------------------------------------------- depth-scan


class TestDepthScan:
    def test_counting_and_schema(self, reach_dataset, tmp_path):
        out = tmp_path / "out"
        rc = main(
            ["depth-scan", "--env", "reach", "--dataset", reach_dataset,
             "--steps", "20", "--seeds", "0,1", "--eval-episodes", "2",
             "--out", str(out), "--set", "agent.hidden=8",
             "--depths", "3,4", "--which", "actor"]
        )
        assert rc == 0
        lines = (out / "depth_scan.csv").read_text().splitlines()
        assert lines[0] == "which,depth,seed,raw_return,normalized_score"
        assert len(lines) == 1 + 4  # 2 depths x 2 seeds, actor-only
        cells = [line.split(",") for line in lines[1:]]
        assert [(c[0], c[1], c[2]) for c in cells] == [
            ("actor", "3", "0"), ("actor", "3", "1"),
            ("actor", "4", "0"), ("actor", "4", "1"),
        ]

    def test_bad_which_rejected(self, reach_dataset, tmp_path, capsys):
        rc = main(
            ["depth-scan", "--env", "reach", "--dataset", reach_dataset,
             "--out", str(tmp_path), "--which", "everything"]
        )
        assert rc == 2


# ---------------------------------------------------------------- parsing


class TestParsing:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_missing_required_flag(self, capsys):
        assert main(["gen-data", "--env", "reach"]) == 2

    def test_run_config_validation(self, tmp_path):
        ds = tmp_path / "d.rbd"
        ds.write_bytes(b"x")  # existence is all RunConfig checks
        with pytest.raises(UsageError, match="nonempty"):
            RunConfig(env="reach", dataset=str(ds), seeds=())
        with pytest.raises(UsageError, match="unknown environment"):
            RunConfig(env="lander", dataset=str(ds))
        with pytest.raises(UsageError, match="not found"):
            RunConfig(env="reach", dataset=str(tmp_path / "missing.rbd"))

    def test_agent_override_helpers(self):
        cfg = make_config(4, 2, hidden=16)
        out = apply_agent_overrides(
            cfg, {"gamma": 0.9, "hidden": 8, "actor_depth": 2, "critic_depth": 4}
        )
        assert out.gamma == 0.9
        assert out.actor_cfg.hidden_dims == (8, 8)
        assert out.critic_cfg.hidden_dims == (8, 8, 8, 8)
        with pytest.raises(UsageError, match="unknown agent override"):
            apply_agent_overrides(cfg, {"warp_speed": 9})
        with pytest.raises(UsageError, match="invalid agent override"):
            apply_agent_overrides(cfg, {"gamma": 2.0})
