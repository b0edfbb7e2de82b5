"""
Unit tests for layered run configuration, seeding and artifact files
"""
import math

import numpy as np
import pytest

from config import TrainConfig, load_train_config, read_config_file
from utils.artifacts import format_value, git_blob_hash, write_csv, write_distribution
from utils.errors import ConfigValidationError
from utils.seeding import spawn_streams


class TestLoadTrainConfig:
    """Test suite for settings precedence and validation"""

    def test_environment_defaults(self):
        """Test CartPole picks up its own discount and return bounds"""
        config = load_train_config({"env": "cartpole"}, environ=False)
        assert (config.gamma, config.z_min, config.z_max) == (0.99, -10.0, 110.0)

    def test_precedence(self, tmp_path, monkeypatch):
        """Test CLI > file > environment > checkpoint"""
        path = tmp_path / "run.cfg"
        path.write_text("seed=5\nbatch_size=16\n")
        monkeypatch.setenv("UMDQN_BATCH_SIZE", "8")
        monkeypatch.setenv("UMDQN_N_MC", "64")
        config = load_train_config({"seed": "9"}, path, base={"n_mc": 32, "n_z": 50})
        assert config.seed == 9
        assert config.batch_size == 16
        assert config.n_mc == 64
        assert config.n_z == 50

    def test_typed_values(self, tmp_path):
        """Test widths, booleans and floats are parsed from text"""
        path = tmp_path / "run.cfg"
        path.write_text("umnn_hidden=128,64\nriemann_weight=yes\nlearning_rate=5e-4\ntotal_steps=1e3\n")
        config = load_train_config(config_file=path, environ=False)
        assert config.umnn_hidden == (128, 64)
        assert config.riemann_weight is True
        assert config.learning_rate == 5e-4
        assert config.total_steps == 1000

    def test_comments_ignored(self, tmp_path):
        """Test # comments are skipped"""
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nalgorithm=umdqn-w\n")
        assert read_config_file(path) == {"algorithm": "umdqn-w"}

    def test_missing_file(self, tmp_path):
        """Test a missing config file is a config error"""
        with pytest.raises(ConfigValidationError):
            read_config_file(tmp_path / "absent.cfg")

    def test_bad_number(self):
        """Test unparseable values name their field"""
        with pytest.raises(ConfigValidationError) as info:
            load_train_config({"batch_size": "many"}, environ=False)
        assert info.value.field == "batch_size"

    def test_quantile_runs_without_bounds(self):
        """Test QF runs do not need z_min and z_max"""
        config = TrainConfig(algorithm="umdqn-w", z_min=None, z_max=None).validate()
        assert config.domain().width == 1.0

    def test_density_runs_need_bounds(self):
        """Test PDF runs require z_min"""
        with pytest.raises(ConfigValidationError) as info:
            TrainConfig(algorithm="umdqn-kl", z_min=None).validate()
        assert info.value.field == "z_min"

    @pytest.mark.parametrize("field,value", [
        ("gamma", 1.0),
        ("batch_size", 0),
        ("simpson_points", 20),
        ("latent", "cauchy"),
        ("kl_direction", "both"),
        ("eps_test", 1.5),
    ])
    def test_invalid_values(self, field, value):
        """Test out-of-range settings are rejected with their field name"""
        with pytest.raises(ConfigValidationError) as info:
            TrainConfig(**{field: value}).validate()
        assert info.value.field == field

    def test_zero_discount_needs_quantiles(self):
        """Test gamma = 0 is only accepted for QF runs"""
        with pytest.raises(ConfigValidationError):
            TrainConfig(algorithm="umdqn-c", gamma=0.0).validate()
        TrainConfig(algorithm="umdqn-w", gamma=0.0).validate()


class TestSeeding:
    """Test suite for seed streams"""

    def test_reproducible(self):
        """Test equal seeds give equal streams"""
        a, b = spawn_streams(4), spawn_streams(4)
        assert a.replay.uniform() == b.replay.uniform()

    def test_independent(self):
        """Test streams of one seed differ from each other"""
        streams = spawn_streams(4)
        assert streams.init.uniform() != streams.acting.uniform()


class TestArtifacts:
    """Test suite for CSV and manifest helpers"""

    def test_format_value(self):
        """Test NaN cells are empty and floats keep full precision"""
        assert format_value(math.nan) == ""
        assert format_value(0.1) == "0.1"
        assert format_value(np.float64(1 / 3)) == repr(1 / 3)
        assert format_value(np.int64(7)) == "7"

    def test_row_width_checked(self, tmp_path):
        """Test rows must match the header"""
        with pytest.raises(ValueError):
            write_csv(tmp_path / "bad.csv", ("a", "b"), [(1,)])

    def test_distribution_quotes_cells(self, tmp_path):
        """Test grid-cell ids are quoted"""
        path = write_distribution(tmp_path / "d.csv", np.array([0.0]), np.array([0.5]), "pdf", "2,3", 1)
        assert path.read_text() == 'x,value,representation,state_id,action\n0.0,0.5,pdf,"2,3",1\n'

    def test_git_blob_hash(self, tmp_path):
        """Test the hash matches git hash-object for a known blob"""
        path = tmp_path / "hello.txt"
        path.write_bytes(b"hello\n")
        assert git_blob_hash(path) == "ce013625030ba8dba906f756967f9e9ca394464a"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
