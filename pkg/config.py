"""
Configuration management for the UMDQN lab
Handles environment variables, per-environment defaults and run settings
"""
import dataclasses
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values, load_dotenv

from distributional.views import Representation, ReturnDomain
from utils.errors import ConfigValidationError

# Load environment variables
load_dotenv()


class Config:
    """Application configuration"""

    # Application
    APP_NAME = "umdqn-lab"
    APP_VERSION = "1.0.0"

    # Directories
    BASE_DIR = Path.cwd()
    OUTPUT_ROOT = Path(os.getenv("UMDQN_OUTPUT_ROOT", "runs"))

    # Logging
    LOG_FILE_NAME = "umdqn_lab.log"
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_LEVEL: str = os.getenv("UMDQN_LOG_LEVEL", "INFO")

    # Environment variable prefix for TrainConfig fields (UMDQN_GAMMA, UMDQN_BATCH_SIZE, ...)
    ENV_PREFIX = "UMDQN_"

    # Algorithms and the representation each one learns
    ALGORITHMS: Tuple[str, ...] = ("umdqn-kl", "umdqn-c", "umdqn-w")
    ENVIRONMENTS: Tuple[str, ...] = ("gridworld", "cartpole")

    # Artifact names
    TRAINING_LOG = "training_log.csv"
    LEARNING_CURVE = "learning_curve.csv"
    MANIFEST = "manifest.json"
    CHECKPOINT_DIR = "checkpoints"
    FINAL_CHECKPOINT = "final.json"

    @classmethod
    def env_overrides(cls) -> Dict[str, str]:
        """TrainConfig values found in UMDQN_* environment variables"""
        names = {f.name for f in dataclasses.fields(TrainConfig)}
        found = {}
        for key, value in os.environ.items():
            if key.startswith(cls.ENV_PREFIX):
                name = key[len(cls.ENV_PREFIX):].lower()
                if name in names:
                    found[name] = value
        return found


ALGORITHM_REPRESENTATION: Dict[str, Representation] = {
    "umdqn-kl": Representation.PDF,
    "umdqn-c": Representation.CDF,
    "umdqn-w": Representation.QF,
}

# Domain bounds and discount per environment
ENV_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "gridworld": {"gamma": 0.5, "z_min": -2.0, "z_max": 2.0},
    "cartpole": {"gamma": 0.99, "z_min": -10.0, "z_max": 110.0},
}

LATENT_CHOICES = ("logistic", "normal")
KL_DIRECTIONS = ("target_model", "model_target")


@dataclass
class TrainConfig:
    """Every knob of a training run"""
    algorithm: str = "umdqn-c"
    env: str = "gridworld"
    seed: int = 0
    total_steps: int = 100_000
    output_dir: str = "runs/default"

    # network structure
    dnn_hidden: Tuple[int, ...] = (128,)
    umnn_hidden: Tuple[int, ...] = (128,)
    n_cc: int = 32

    # learning
    gamma: float = 0.5
    learning_rate: float = 1e-4
    adam_eps: float = 1e-5
    train_every: int = 1
    target_update: int = 1000
    replay_capacity: int = 10_000
    batch_size: int = 32
    grad_clip: float = 1.0

    # exploration
    eps_start: float = 1.0
    eps_end: float = 0.01
    eps_decay: float = 10_000.0
    eps_test: float = 0.001

    # distribution grids
    n_z: int = 200
    n_tau: int = 200
    z_min: Optional[float] = -2.0
    z_max: Optional[float] = 2.0
    kappa: float = 1.0
    latent: str = "logistic"
    simpson_points: int = 201
    n_mc: int = 256
    kl_direction: str = "target_model"
    kl_mass_correction: bool = False
    riemann_weight: bool = False

    # reporting
    eval_every_episodes: int = 50
    eval_episodes: int = 10
    checkpoint_every: int = 10_000
    smoothing_window: int = 20
    log_every_episodes: int = 10

    @property
    def representation(self) -> Representation:
        return ALGORITHM_REPRESENTATION[self.algorithm]

    def domain(self) -> ReturnDomain:
        z_min = 0.0 if self.z_min is None else self.z_min
        z_max = 1.0 if self.z_max is None else self.z_max
        return ReturnDomain(z_min, z_max, self.n_z, self.n_tau)

    def validate(self) -> "TrainConfig":
        if self.algorithm not in ALGORITHM_REPRESENTATION:
            raise ConfigValidationError("algorithm", f"must be one of {sorted(ALGORITHM_REPRESENTATION)}", self.algorithm)
        if self.env not in ENV_DEFAULTS:
            raise ConfigValidationError("env", f"must be one of {sorted(ENV_DEFAULTS)}", self.env)
        if self.representation is not Representation.QF:
            for bound in ("z_min", "z_max"):
                if getattr(self, bound) is None:
                    raise ConfigValidationError(bound, f"required for {self.algorithm} runs")
        if self.z_min is not None and self.z_max is not None and self.z_min >= self.z_max:
            raise ConfigValidationError("z_max", f"must exceed z_min={self.z_min}", self.z_max)
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigValidationError("gamma", "must lie in [0, 1)", self.gamma)
        if self.gamma == 0.0 and self.representation is not Representation.QF:
            raise ConfigValidationError("gamma", "PDF/CDF learning needs gamma > 0", self.gamma)
        for name in ("learning_rate", "adam_eps", "grad_clip", "kappa", "eps_decay"):
            if getattr(self, name) <= 0:
                raise ConfigValidationError(name, "must be positive", getattr(self, name))
        for name in ("total_steps", "train_every", "target_update", "replay_capacity", "batch_size",
                     "n_cc", "n_mc", "eval_every_episodes", "checkpoint_every", "smoothing_window",
                     "log_every_episodes"):
            if getattr(self, name) < 1:
                raise ConfigValidationError(name, "must be at least 1", getattr(self, name))
        if self.n_cc < 2:
            raise ConfigValidationError("n_cc", "must be at least 2", self.n_cc)
        if self.eval_episodes < 0:
            raise ConfigValidationError("eval_episodes", "must be non-negative", self.eval_episodes)
        if self.batch_size > self.replay_capacity:
            raise ConfigValidationError("batch_size", f"cannot exceed replay_capacity={self.replay_capacity}", self.batch_size)
        for name in ("eps_start", "eps_end", "eps_test"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigValidationError(name, "must lie in [0, 1]", getattr(self, name))
        if self.n_z < 2:
            raise ConfigValidationError("n_z", "must be at least 2", self.n_z)
        if self.n_tau < 2:
            raise ConfigValidationError("n_tau", "must be at least 2", self.n_tau)
        if self.simpson_points < 3 or self.simpson_points % 2 == 0:
            raise ConfigValidationError("simpson_points", "must be odd and at least 3", self.simpson_points)
        if self.latent not in LATENT_CHOICES:
            raise ConfigValidationError("latent", f"must be one of {LATENT_CHOICES}", self.latent)
        if self.kl_direction not in KL_DIRECTIONS:
            raise ConfigValidationError("kl_direction", f"must be one of {KL_DIRECTIONS}", self.kl_direction)
        if not self.dnn_hidden or not self.umnn_hidden or min(self.dnn_hidden + self.umnn_hidden) < 1:
            raise ConfigValidationError("dnn_hidden", "layer widths must be positive integers")
        return self

    def to_dict(self) -> Dict[str, Any]:
        values = dataclasses.asdict(self)
        values["dnn_hidden"] = list(self.dnn_hidden)
        values["umnn_hidden"] = list(self.umnn_hidden)
        return values


def _convert(name: str, raw: Any) -> Any:
    """Coerce a raw (string) value into the type of TrainConfig.<name>"""
    default = TrainConfig.__dataclass_fields__[name].default
    if not isinstance(raw, str):
        if name in ("dnn_hidden", "umnn_hidden"):
            return tuple(int(w) for w in raw)
        return raw
    text = raw.strip()
    try:
        if name in ("z_min", "z_max"):
            if text == "":
                raise ConfigValidationError(name, "empty value; set a number or remove the key")
            return float(text)
        if name in ("dnn_hidden", "umnn_hidden"):
            return tuple(int(part) for part in text.replace("[", "").replace("]", "").split(",") if part.strip())
        if isinstance(default, bool):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(float(text)) if "e" in text.lower() else int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError as e:
        raise ConfigValidationError(name, f"cannot parse '{raw}'", raw) from e
    return text


def _known(values: Mapping[str, Any], source: str) -> Dict[str, Any]:
    names = TrainConfig.__dataclass_fields__
    unknown = sorted(set(values) - set(names))
    if unknown:
        raise ConfigValidationError(unknown[0], f"unknown setting in {source}")
    return {k: _convert(k, v) for k, v in values.items() if v is not None}


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """key=value lines (comments with #), parsed with python-dotenv"""
    path = Path(path)
    if not path.exists():
        raise ConfigValidationError("config", f"file not found: {path}")
    raw = dotenv_values(path)
    return {k.strip().lower(): ("" if v is None else v) for k, v in raw.items()}


def load_train_config(
    cli: Optional[Mapping[str, Any]] = None,
    config_file: Optional[Union[str, Path]] = None,
    environ: bool = True,
    base: Optional[Mapping[str, Any]] = None,
) -> TrainConfig:
    """
    Merge settings with precedence
        CLI flags > config file > UMDQN_* environment variables > base > environment defaults
    base is the configuration stored in a checkpoint, when one is being loaded.
    """
    layers = []
    if base:
        layers.append(_known(base, "checkpoint"))
    if environ:
        layers.append(_known(Config.env_overrides(), "environment"))
    if config_file:
        layers.append(_known(read_config_file(config_file), str(config_file)))
    layers.append(_known({k: v for k, v in (cli or {}).items() if v is not None}, "command line"))

    merged: Dict[str, Any] = {}
    for layer in layers:
        merged.update(layer)

    env_name = merged.get("env", TrainConfig.env)
    if env_name not in ENV_DEFAULTS:
        raise ConfigValidationError("env", f"must be one of {sorted(ENV_DEFAULTS)}", env_name)
    values = dict(ENV_DEFAULTS[env_name])
    values.update(merged)
    return TrainConfig(**values).validate()


def setup_logging(log_dir: Optional[Union[str, Path]] = None, level: Optional[str] = None) -> Path:
    """Install the lab's log format on the root logger (file + console)"""
    log_dir = Path(log_dir) if log_dir else Config.OUTPUT_ROOT
    log_dir.mkdir(parents=True, exist_ok=True)
    log_file = log_dir / Config.LOG_FILE_NAME
    logging.basicConfig(
        level=getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO),
        format=Config.LOG_FORMAT,
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler()
        ],
        force=True,
    )
    return log_file


# Create logger instance
logger = logging.getLogger(__name__)
