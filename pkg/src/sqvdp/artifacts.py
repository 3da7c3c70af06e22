"""CSV/JSON artifact writers with provenance headers.

Every file starts with a single ``#``-prefixed JSON line recording the
tool version, the subcommand, the physical parameters and the numeric
knobs that produced it.  Bodies are written with repr-exact floats and
through a temp-file + rename, so identical configurations reproduce
byte-identical files and readers never see partial output.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from . import __version__

__all__ = [
    "provenance",
    "write_csv",
    "write_json",
    "write_modes_binary",
    "read_artifact_csv",
]


def provenance(subcommand: str, params=None, **extra) -> dict:
    meta = {"tool": "sqvdp", "version": __version__, "subcommand": subcommand}
    if params is not None:
        meta["params"] = params.as_dict()
    meta.update(extra)
    return meta


def _format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return repr(complex(value))
    return str(value)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, columns: dict[str, list], meta: dict) -> None:
    """Columnar CSV with a '# {json}' provenance first line."""
    names = list(columns)
    length = len(columns[names[0]]) if names else 0
    for name in names:
        if len(columns[name]) != length:
            raise ValueError(f"column {name!r} has mismatched length")
    lines = ["# " + json.dumps(meta, sort_keys=True)]
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_format_cell(columns[name][i]) for name in names))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: str, payload: dict, meta: dict) -> None:
    """JSON artifact carrying its provenance under the 'meta' key."""
    document = {"meta": meta, **payload}
    _atomic_write(path, json.dumps(document, sort_keys=True, indent=2) + "\n")


def write_modes_binary(path: str, modes: np.ndarray) -> None:
    """Raw eigenmatrix sidecar.

    Layout: the (n_modes, d, d) array flattened row-major as little-endian
    complex128 (interleaved re/im float64).  Shape information lives in
    the JSON spectrum artifact next to it.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        np.ascontiguousarray(modes).astype("<c16").tofile(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_artifact_csv(path: str) -> tuple[dict, dict[str, np.ndarray]]:
    """Load a provenance-headed CSV back into (meta, column arrays)."""
    with open(path) as handle:
        first = handle.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: missing provenance header line")
        meta = json.loads(first[1:].strip())
        names = handle.readline().strip().split(",")
        rows = [line.strip().split(",") for line in handle if line.strip()]
    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(names):
        raw = [row[j] for row in rows]
        try:
            columns[name] = np.array([float(x) for x in raw])
        except ValueError:
            try:
                columns[name] = np.array([complex(x) for x in raw])
            except ValueError:
                columns[name] = np.array(raw)
    return meta, columns
