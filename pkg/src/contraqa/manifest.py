"""Run manifests: enough config + input digests to replay any command."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from contraqa import __version__


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(command: str, config: dict, inputs: dict[str, str | Path]) -> dict:
    return {
        "tool": "contraqa",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {
            name: {"path": str(path), "sha256": file_digest(path)}
            for name, path in inputs.items()
            if path and Path(path).is_file()
        },
    }


def write_manifest(manifest: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_config_file(path: str | Path) -> dict[str, object]:
    """Parse a key=value config file ('#' starts a comment).

    Values are coerced to bool/int/float when they look like one; flags on
    the command line override anything set here.
    """
    values: dict[str, object] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if value.lower() in ("true", "false"):
                values[key] = value.lower() == "true"
                continue
            try:
                values[key] = int(value)
                continue
            except ValueError:
                pass
            try:
                values[key] = float(value)
                continue
            except ValueError:
                pass
            values[key] = value
    return values
