"""
Checkpoint files: versioned JSON map of parameter name -> row-major float64 array + shape
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from utils.errors import CheckpointError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "umdqn-checkpoint"
CHECKPOINT_VERSION = 1


def save_checkpoint(
    path: Union[str, Path],
    parameters: Dict[str, np.ndarray],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "metadata": metadata or {},
        "parameters": {
            name: {"shape": list(values.shape), "data": np.asarray(values, dtype=np.float64).ravel(order="C").tolist()}
            for name, values in parameters.items()
        },
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload))
    tmp.replace(path)
    logger.info(f"Checkpoint written: {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e

    if payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {payload.get('version')} (expected {CHECKPOINT_VERSION})")

    parameters = {}
    for name, entry in payload.get("parameters", {}).items():
        shape = tuple(entry["shape"])
        data = np.asarray(entry["data"], dtype=np.float64)
        if data.size != int(np.prod(shape)):
            raise CheckpointError(f"{name}: {data.size} values do not fill shape {shape}")
        parameters[name] = data.reshape(shape)
    return parameters, payload.get("metadata", {})
