"""Readers for the provenance-headed artifact formats.

CSV files start with one '# {json}' line; JSON documents carry a 'meta'
key.  Anything else is refused: the provenance header is the contract
that the data came out of a reproducible pipeline.
"""

from __future__ import annotations

import json
import os

import numpy as np

__all__ = ["ArtifactError", "MissingInputError", "read_csv", "read_json", "require_columns"]


class ArtifactError(Exception):
    """Input file exists but violates the artifact schema."""


class MissingInputError(Exception):
    """Referenced input file does not exist."""


def read_csv(path: str) -> tuple[dict, dict[str, np.ndarray]]:
    if not os.path.exists(path):
        raise MissingInputError(f"input file not found: {path}")
    with open(path) as handle:
        first = handle.readline()
        if not first.startswith("#"):
            raise ArtifactError(f"{path}: missing provenance header line")
        try:
            meta = json.loads(first[1:].strip())
        except json.JSONDecodeError as exc:
            raise ArtifactError(f"{path}: provenance header is not JSON") from exc
        header = handle.readline().strip()
        if not header:
            raise ArtifactError(f"{path}: empty column header")
        names = header.split(",")
        rows = [line.rstrip("\n").split(",") for line in handle if line.strip()]
    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(names):
        raw = [row[j] for row in rows]
        try:
            columns[name] = np.array([float(x) for x in raw])
        except ValueError:
            columns[name] = np.array(raw)
    return meta, columns


def read_json(path: str) -> dict:
    if not os.path.exists(path):
        raise MissingInputError(f"input file not found: {path}")
    with open(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ArtifactError(f"{path}: not valid JSON") from exc
    if "meta" not in doc:
        raise ArtifactError(f"{path}: missing provenance 'meta' block")
    return doc


def require_columns(path: str, columns: dict, names: list[str]) -> None:
    for name in names:
        if name not in columns:
            raise ArtifactError(f"{path}: required column {name!r} is missing")
