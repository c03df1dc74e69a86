"""
Utility functions for the r-DepTH toolkit
"""
import hashlib
import json
from pathlib import Path
from typing import Any

from .exceptions import ConfigError


def compute_hash(data: dict) -> str:
    """Compute a stable hash for a dictionary"""
    json_str = json.dumps(data, sort_keys=True, default=str)
    return hashlib.sha256(json_str.encode()).hexdigest()[:16]


def derive_seed(base_seed: int, key: str) -> int:
    """Derive a reproducible per-item seed from a base seed and a string key"""
    digest = hashlib.sha256(f"{base_seed}:{key}".encode()).hexdigest()
    return int(digest[:8], 16)


def load_json_file(path) -> Any:
    """Read a JSON-syntax file, raising ConfigError when it cannot be parsed"""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}") from e


def dump_json_file(data: Any, path) -> None:
    """Write JSON with sorted keys so identical data gives identical bytes"""
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
