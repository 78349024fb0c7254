"""Run manifests and report files with stable, reproducible formatting."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainError


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _json_safe(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    return str(value)


@dataclass(frozen=True)
class RunManifest:
    """What a run was: subcommand, resolved flags, seed and input digests.

    Re-running the recorded flag set (including the recorded seed)
    against inputs with the same digests reproduces the outputs.
    """

    subcommand: str
    flags: dict
    seed: int
    seed_source: str  # "flag" or "entropy"
    version: str
    inputs: dict  # flag name -> {"path": ..., "sha256": ...}

    def to_json_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "flags": _json_safe(self.flags),
            "seed": self.seed,
            "seed_source": self.seed_source,
            "version": self.version,
            "inputs": _json_safe(self.inputs),
        }


def _round9(value):
    """Recursively clamp floats to 9 significant digits for stable JSON."""
    if isinstance(value, float):
        return float(f"{value:.9g}")
    if isinstance(value, (list, tuple)):
        return [_round9(v) for v in value]
    if isinstance(value, dict):
        return {k: _round9(v) for k, v in value.items()}
    return value


def emit_report(results, format: str, path, manifest: RunManifest | None = None) -> None:
    """Write one artifact file.

    CSV: results must be a str of CSV text or expose to_csv_text().
    JSON: results must be a dict or expose to_json_dict(); the manifest,
    when given, is embedded under "manifest".  Keys are sorted and
    floats clamped to 9 significant digits so identical results give
    identical bytes.
    """
    if format == "csv":
        if isinstance(results, str):
            text = results
        elif hasattr(results, "to_csv_text"):
            text = results.to_csv_text()
        else:
            raise DomainError(f"no CSV form for {type(results).__name__}")
    elif format == "json":
        if hasattr(results, "to_json_dict"):
            doc = results.to_json_dict()
        elif isinstance(results, dict):
            doc = dict(results)
        else:
            raise DomainError(f"no JSON form for {type(results).__name__}")
        if manifest is not None:
            doc = {"manifest": manifest.to_json_dict(), **doc}
        text = json.dumps(_round9(_json_safe(doc)), indent=2, sort_keys=True) + "\n"
    else:
        raise DomainError(f"format must be 'csv' or 'json', got {format!r}")
    Path(path).write_text(text, encoding="utf-8")
