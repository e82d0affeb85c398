"""Canonical JSON serialization and config hashing.

Artifacts must be byte-identical across runs of the same config, so all
JSON is dumped with sorted keys, fixed indentation, and strict floats
(no NaN/Infinity). The config hash is the SHA-256 of the canonical dump
of the parsed config, which makes it independent of file formatting.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import SchemaError


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_dumps(obj).encode("utf-8")).hexdigest()


def write_json(path: Path, obj) -> None:
    Path(path).write_text(canonical_dumps(obj), encoding="utf-8")


def read_json(path: Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


def check_keys(obj: dict, where: str, required: tuple, optional: tuple = ()) -> None:
    """Reject missing required keys and any unknown key."""
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    missing = [k for k in required if k not in obj]
    if missing:
        raise SchemaError(f"{where}: missing fields {missing}")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise SchemaError(f"{where}: unknown fields {unknown}")
