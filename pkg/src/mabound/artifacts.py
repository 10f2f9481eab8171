"""Deterministic JSON and CSV output, and the run manifest."""
from __future__ import annotations

__all__ = (
    "ArtifactWriter",
    "canonical_json",
    "config_digest",
    "dumps_json",
    "format_float",
    "to_jsonable",
)

import csv
import hashlib
import json
import math
import typing as t
from pathlib import Path

import attr
import numpy as np
from loguru import logger

from .version import __version__

MANIFEST = "manifest.json"


def format_float(value: float) -> str:
    """Formats a float with 17 significant digits and a '.' decimal separator."""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def to_jsonable(value: t.Any) -> t.Any:
    """Converts numpy scalars, arrays and tuples into plain JSON types."""
    if isinstance(value, t.Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _json_float(value: float) -> str:
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    text = format_float(value)
    # integral values keep a fraction so they read back as floats
    return text if any(c in text for c in ".e") else text + ".0"


def _encode(value: t.Any, indent: int | None, depth: int) -> str:
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, float):
        return _json_float(value)
    if isinstance(value, (int, str)):
        return json.dumps(value)
    if isinstance(value, dict):
        items = [(json.dumps(str(k)), v) for k, v in sorted(value.items())]
        parts = [f"{k}:{'' if indent is None else ' '}{_encode(v, indent, depth + 1)}" for k, v in items]
        return _join(parts, "{", "}", indent, depth)
    if isinstance(value, list):
        return _join([_encode(v, indent, depth + 1) for v in value], "[", "]", indent, depth)
    raise TypeError(f"cannot encode {type(value).__name__} as JSON")


def _join(parts: list[str], opening: str, closing: str, indent: int | None, depth: int) -> str:
    if not parts:
        return opening + closing
    if indent is None:
        return opening + ",".join(parts) + closing
    inner = "\n" + " " * (indent * (depth + 1))
    return opening + inner + ("," + inner).join(parts) + "\n" + " " * (indent * depth) + closing


def dumps_json(value: t.Any, indent: int | None = None) -> str:
    """Serialises with sorted keys, writing every float with :func:`format_float`.

    Integral floats gain a ``.0``; non-finite floats are written as ``NaN``
    and ``Infinity``, which :func:`json.loads` accepts.
    """
    return _encode(to_jsonable(value), indent, 0)


def canonical_json(value: t.Any) -> str:
    """Serialises with sorted keys and compact separators."""
    return dumps_json(value)


def config_digest(config: t.Mapping[str, t.Any]) -> str:
    """The SHA-256 digest of the canonical JSON form of a configuration."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def _sha256_of_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as f:
        for block in iter(lambda: f.read(1024 * 1024), b""):
            digest.update(block)
    return digest.hexdigest()


@attr.s(slots=True, auto_attribs=True)
class ArtifactWriter:
    """Writes the artifacts of a run into one directory and records them.

    Attributes
    ----------
    directory: Path
        The output directory; created on the first write.
    files: list[str]
        The names of the files written so far, in order.
    """
    directory: Path = attr.ib(converter=Path)
    files: list[str] = attr.ib(factory=list)

    def _path(self, name: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        if name not in self.files:
            self.files.append(name)
        return self.directory / name

    def write_json(self, name: str, payload: t.Any) -> Path:
        path = self._path(name)
        path.write_text(dumps_json(payload, indent=2) + "\n", encoding="utf-8")
        logger.debug(f"wrote {path}")
        return path

    def write_csv(self, name: str, columns: t.Sequence[str], rows: t.Iterable[t.Mapping[str, t.Any]]) -> Path:
        """Writes rows with a fixed column order; floats are written with :func:`format_float`."""
        path = self._path(name)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow(
                    format_float(float(row[c])) if isinstance(row[c], (float, np.floating)) else row[c]
                    for c in columns
                )
        logger.debug(f"wrote {path}")
        return path

    def write_manifest(self, command: str, digest: str, seed: int, exit_code: int) -> Path:
        """Writes ``manifest.json`` naming every file written so far with its SHA-256 digest."""
        produced = {name: _sha256_of_file(self.directory / name) for name in self.files if name != MANIFEST}
        payload = {
            "command": command,
            "config_sha256": digest,
            "exit_code": exit_code,
            "files": produced,
            "seed": seed,
            "version": __version__,
        }
        path = self._path(MANIFEST)
        path.write_text(dumps_json(payload, indent=2) + "\n", encoding="utf-8")
        logger.info(f"wrote {len(produced)} artifacts and the manifest to {self.directory}")
        return path
