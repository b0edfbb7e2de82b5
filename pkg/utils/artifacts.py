"""
CSV and JSON artifacts written by the lab
Column orders here are the schemas documented in ARTIFACT_FORMATS.md
"""
import csv
import hashlib
import json
import logging
import math
from dataclasses import asdict
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

EVAL_COLUMNS = ("episode", "return")
EVAL_SUMMARY_COLUMNS = ("episodes", "mean_return", "std_return", "min_return", "max_return")
DISTRIBUTION_COLUMNS = ("x", "value", "representation", "state_id", "action")
ORACLE_ATOM_COLUMNS = ("state_id", "action", "oracle_policy", "atom_value", "probability")
COMPARISON_COLUMNS = ("state_id", "action", "oracle_policy", "metric", "learnt_vs_oracle_distance",
                      "learnt_mean", "oracle_mean")
CONTRACTION_COLUMNS = (
    "metric", "gamma", "trials", "skipped", "max_ratio", "mean_ratio", "search_max_ratio", "witness_ratio",
)

PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """NaN -> empty cell; floats keep full precision"""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "" if math.isnan(value) else repr(value)
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"{path.name}: row has {len(row)} cells, header has {len(columns)}")
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def write_eval_returns(path: PathLike, returns: Sequence[float]) -> Path:
    return write_csv(path, EVAL_COLUMNS, ((i + 1, float(r)) for i, r in enumerate(returns)))


def eval_summary(returns: Sequence[float]) -> Dict[str, Any]:
    values = np.asarray(returns, dtype=np.float64)
    if values.size == 0:
        return {"episodes": 0, "mean_return": math.nan, "std_return": math.nan,
                "min_return": math.nan, "max_return": math.nan}
    return {
        "episodes": int(values.size),
        "mean_return": float(values.mean()),
        "std_return": float(values.std()),
        "min_return": float(values.min()),
        "max_return": float(values.max()),
    }


def write_eval_summary(path: PathLike, returns: Sequence[float]) -> Path:
    summary = eval_summary(returns)
    return write_csv(path, EVAL_SUMMARY_COLUMNS, [[summary[c] for c in EVAL_SUMMARY_COLUMNS]])


def write_distribution(path: PathLike, x: np.ndarray, values: np.ndarray, representation: str,
                       state_id: str, action: int) -> Path:
    return write_csv(
        path,
        DISTRIBUTION_COLUMNS,
        ((float(xi), float(vi), representation, state_id, int(action)) for xi, vi in zip(x, values)),
    )


def write_oracle_atoms(path: PathLike, oracles) -> Path:
    """oracles: (state_id, action, oracle_policy) -> EmpiricalDistribution"""
    def rows():
        for (state_id, action, policy), dist in oracles.items():
            for value, prob in dist.rows():
                yield state_id, action, policy, value, prob
    return write_csv(path, ORACLE_ATOM_COLUMNS, rows())


def write_comparison(path: PathLike, rows) -> Path:
    return write_csv(path, COMPARISON_COLUMNS, ([asdict(r)[c] for c in COMPARISON_COLUMNS] for r in rows))


def write_contraction(path: PathLike, reports) -> Path:
    return write_csv(path, CONTRACTION_COLUMNS, ([r.summary()[c] for c in CONTRACTION_COLUMNS] for r in reports))


def git_blob_hash(path: PathLike) -> str:
    """Content hash as computed by `git hash-object`"""
    content = Path(path).read_bytes()
    header = f"blob {len(content)}\0".encode()
    return hashlib.sha1(header + content).hexdigest()


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str))
    return path


def write_manifest(
    path: PathLike,
    command: str,
    config: Dict[str, Any],
    artifacts: Sequence[PathLike],
    resources: Optional[Dict[str, Any]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """Config echo plus a content hash of every artifact"""
    payload = {
        "command": command,
        "created": datetime.now().isoformat(),
        "config": config,
        "artifacts": {Path(p).name: git_blob_hash(p) for p in artifacts if Path(p).exists()},
    }
    if resources is not None:
        payload["resources"] = resources
    if extra:
        payload.update(extra)
    write_json(path, payload)
    logger.info(f"Manifest written: {path}")
    return path
