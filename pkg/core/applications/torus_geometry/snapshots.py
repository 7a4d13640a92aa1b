"""Scalar field snapshots: little-endian float64 payload behind an (n, N) int64 header, plus a JSON sidecar."""

import json
from pathlib import Path
from typing import Any

import numpy as np

from core.applications.torus_geometry.fields import TorusGrid
from core.helper.custom_exceptions import LabError

HEADER_DTYPE = np.dtype("<i8")
PAYLOAD_DTYPE = np.dtype("<f8")


def sidecar_path(path: Path) -> Path:
    return path.with_suffix(path.suffix + ".json")


def write_field_snapshot(
    path: Path,
    field: np.ndarray,
    grid: TorusGrid,
    metadata: dict[str, Any] | None = None,
) -> Path:
    field = grid.check_scalar(field)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        handle.write(np.array([grid.n, grid.N], dtype=HEADER_DTYPE).tobytes())
        handle.write(np.ascontiguousarray(field, dtype=PAYLOAD_DTYPE).tobytes(order="C"))
    sidecar = {
        "n": grid.n,
        "N": grid.N,
        "period": grid.period,
        "dtype": PAYLOAD_DTYPE.str,
        "order": "C",
        "axes": [f"x{j + 1}" for j in range(grid.n)] + [f"y{j + 1}" for j in range(grid.n)],
        "metadata": metadata or {},
    }
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path


def read_field_snapshot(path: Path) -> tuple[np.ndarray, TorusGrid, dict[str, Any]]:
    path = Path(path)
    raw = path.read_bytes()
    header = np.frombuffer(raw[: 2 * HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE)
    n, N = int(header[0]), int(header[1])  # noqa: N806
    sidecar = json.loads(sidecar_path(path).read_text())
    if (sidecar["n"], sidecar["N"]) != (n, N):
        msg = f"snapshot header ({n}, {N}) disagrees with its sidecar"
        raise LabError.ConfigError(msg)
    grid = TorusGrid(n=n, N=N, period=sidecar.get("period", 1.0))
    payload = np.frombuffer(raw[2 * HEADER_DTYPE.itemsize :], dtype=PAYLOAD_DTYPE)
    if payload.size != grid.size:
        msg = f"snapshot holds {payload.size} values, grid needs {grid.size}"
        raise LabError.ConfigError(msg)
    return payload.reshape(grid.shape).astype(float), grid, sidecar["metadata"]
