"""
End-to-end tests for the umdqn_lab command line
"""
import csv
import json

import pytest

from umdqn_lab import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main
from utils.artifacts import git_blob_hash

TINY_SETTINGS = """\
# fast grid-world run
algorithm=umdqn-c
env=gridworld
seed=3
total_steps=40
dnn_hidden=8
umnn_hidden=8
n_cc=8
batch_size=4
replay_capacity=100
target_update=20
n_z=16
n_tau=16
n_mc=16
simpson_points=21
eval_every_episodes=1
eval_episodes=1
checkpoint_every=20
"""


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory):
    """A finished tiny training run shared by the checkpoint-consuming commands"""
    root = tmp_path_factory.mktemp("cli")
    settings = root / "tiny.cfg"
    settings.write_text(TINY_SETTINGS)
    out = root / "run"
    code = main(["train", "--config", str(settings), "--output-dir", str(out)])
    return {"code": code, "config": settings, "out": out, "checkpoint": out / "checkpoints" / "final.json"}


class TestTrain:
    """Test suite for the train command"""

    def test_artifacts(self, trained_run):
        """Test training writes the log, learning curve, checkpoints and manifest"""
        out = trained_run["out"]
        assert trained_run["code"] == EXIT_OK
        for name in ("training_log.csv", "learning_curve.csv", "manifest.json", "checkpoints/final.json"):
            assert (out / name).exists(), name
        header = read_rows(out / "training_log.csv")[0]
        assert header == ["episode", "env_steps", "episode_return", "train_loss_mean", "eval_return_mean", "epsilon"]
        assert read_rows(out / "learning_curve.csv")[0][3] == "episode_return_smoothed"

    def test_manifest(self, trained_run):
        """Test the manifest echoes the config and hashes every artifact"""
        out = trained_run["out"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "train"
        assert manifest["config"]["seed"] == 3
        assert manifest["config"]["z_min"] == -2.0
        assert manifest["artifacts"]["training_log.csv"] == git_blob_hash(out / "training_log.csv")
        assert manifest["resources"]["learning"]["env_steps"] == 40

    def test_checkpoint_embeds_config(self, trained_run):
        """Test the final checkpoint records the run configuration"""
        payload = json.loads(trained_run["checkpoint"].read_text())
        assert payload["format"] == "umdqn-checkpoint"
        assert payload["metadata"]["steps"] == 40
        assert payload["metadata"]["config"]["n_cc"] == 8

    def test_invalid_setting(self, tmp_path):
        """Test an out-of-range discount exits with 1"""
        code = main(["train", "--set", "gamma=1.5", "--set", "total_steps=1", "--output-dir", str(tmp_path)])
        assert code == EXIT_INVALID

    def test_unknown_setting(self, tmp_path):
        """Test unknown keys exit with 1"""
        assert main(["train", "--set", "learning_speed=3", "--output-dir", str(tmp_path)]) == EXIT_INVALID

    def test_missing_return_bound(self, tmp_path):
        """Test a CDF run without z_min exits with 1 before training"""
        assert main(["train", "--set", "z_min=", "--output-dir", str(tmp_path)]) == EXIT_INVALID
        assert not (tmp_path / "training_log.csv").exists()


class TestEval:
    """Test suite for the eval command"""

    def test_zero_episodes(self, trained_run, tmp_path):
        """Test --episodes 0 writes a header-only returns file"""
        code = main(["eval", "--checkpoint", str(trained_run["checkpoint"]), "--episodes", "0",
                     "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        assert (tmp_path / "eval_returns.csv").read_text() == "episode,return\n"
        summary = read_rows(tmp_path / "eval_summary.csv")
        assert summary[1][0] == "0"

    def test_episodes(self, trained_run, tmp_path):
        """Test one row per evaluation episode"""
        code = main(["eval", "--checkpoint", str(trained_run["checkpoint"]), "--episodes", "2",
                     "--set", "eps_test=1.0", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        rows = read_rows(tmp_path / "eval_returns.csv")
        assert [r[0] for r in rows[1:]] == ["1", "2"]

    def test_algorithm_mismatch(self, trained_run, tmp_path):
        """Test loading a Cramer checkpoint as a KL agent is a runtime failure"""
        code = main(["eval", "--checkpoint", str(trained_run["checkpoint"]), "--algo", "umdqn-kl",
                     "--episodes", "0", "--output-dir", str(tmp_path)])
        assert code == EXIT_RUNTIME


class TestDumpDistribution:
    """Test suite for the dump-dist command"""

    def test_cdf_curve(self, trained_run, tmp_path):
        """Test the dumped curve spans the return domain and is nondecreasing"""
        code = main(["dump-dist", "--checkpoint", str(trained_run["checkpoint"]), "--state", "2,3",
                     "--action", "1", "--points", "11", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        rows = read_rows(tmp_path / "dist_cdf_2_3_a1.csv")
        assert rows[0] == ["x", "value", "representation", "state_id", "action"]
        assert len(rows) == 12
        x = [float(r[0]) for r in rows[1:]]
        values = [float(r[1]) for r in rows[1:]]
        assert x[0] == -2.0 and x[-1] == 2.0
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert rows[1][2:] == ["cdf", "2,3", "1"]

    def test_state_outside_grid(self, trained_run, tmp_path):
        """Test a cell outside the grid is a runtime failure"""
        code = main(["dump-dist", "--checkpoint", str(trained_run["checkpoint"]), "--state", "9,9",
                     "--action", "0", "--output-dir", str(tmp_path)])
        assert code == EXIT_RUNTIME


class TestCompareOracle:
    """Test suite for the compare-oracle command"""

    def test_single_cell(self, trained_run, tmp_path):
        """Test one cell and action gives six comparison rows"""
        code = main(["compare-oracle", "--checkpoint", str(trained_run["checkpoint"]), "--states", "5,6",
                     "--actions", "0", "--n-rollouts", "20", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        rows = read_rows(tmp_path / "oracle_comparison.csv")
        assert rows[0][:4] == ["state_id", "action", "oracle_policy", "metric"]
        assert len(rows) == 7
        assert {r[3] for r in rows[1:]} == {"kl", "cramer", "wasserstein"}
        assert '"5,6"' in (tmp_path / "oracle_comparison.csv").read_text()
        assert read_rows(tmp_path / "oracle_atoms.csv")[0] == ["state_id", "action", "oracle_policy", "atom_value", "probability"]

    def test_cartpole_unsupported(self, trained_run, tmp_path):
        """Test non-grid-world runs exit with 1"""
        code = main(["compare-oracle", "--checkpoint", str(trained_run["checkpoint"]), "--env", "cartpole",
                     "--states", "0,0", "--output-dir", str(tmp_path)])
        assert code == EXIT_INVALID


class TestContractionCommand:
    """Test suite for the probe-contraction command"""

    def test_report(self, tmp_path):
        """Test one row per metric and a recorded KL witness"""
        code = main(["probe-contraction", "--trials", "5", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        rows = read_rows(tmp_path / "contraction.csv")
        assert rows[0] == [
            "metric", "gamma", "trials", "skipped", "max_ratio", "mean_ratio", "search_max_ratio", "witness_ratio",
        ]
        by_metric = {r[0]: r for r in rows[1:]}
        assert set(by_metric) == {"kl", "cramer", "wasserstein"}
        assert float(by_metric["wasserstein"][4]) <= 0.9 + 1e-9
        assert float(by_metric["kl"][4]) > 1.0
        assert float(by_metric["kl"][7]) == pytest.approx(float(by_metric["kl"][4]))
        assert by_metric["wasserstein"][7] == ""
        manifest = json.loads((tmp_path / "contraction_manifest.json").read_text())
        assert manifest["kl_witness_ratio"] > 1.0

    def test_invalid_gamma(self, tmp_path):
        """Test gamma outside (0, 1) exits with 1"""
        assert main(["probe-contraction", "--gamma", "1.0", "--output-dir", str(tmp_path)]) == EXIT_INVALID


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
