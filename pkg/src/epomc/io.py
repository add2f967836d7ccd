"""Output formats: CSV writers, binary snapshots, atomic file creation.

All floats are printed as the shortest decimal that round-trips the exact
64-bit value (Python ``repr``), so identical runs produce byte-identical
files.  Missing values (sweep gaps, out-of-domain metrics) are empty fields,
never NaN literals.  Every file is written to a temporary sibling and
renamed into place, so interrupted runs leave no partial outputs.

Binary snapshot layouts (all little-endian, documented for consumers):

covariance snapshot (``.covbin``):
    uint64  n_samples
    n_samples records of 37 float64: t, then the 36 upper-triangle
    covariance entries in row-major (q1, p1, x1, y1, q2, p2, x2, y2) order.

Wigner snapshot (``.wigbin``):
    uint64 n_q, uint64 n_p,
    float64 q_min, q_max, p_min, p_max,
    n_q * n_p float64 values, row-major (q index outer).
"""

from __future__ import annotations

import json
import math
import os
import struct
import tempfile

import numpy as np

from .classical import STATE_COLUMNS, ClassicalTrajectory
from .fluctuations import U_LABELS, CovarianceSeries, pack_upper
from .metrics import MetricSeries, WignerGrid

METRIC_COLUMNS = ("t", "S_p", "E_n", "nu_minus", "r1", "phi1", "r2", "phi2", "f")


def format_float(x) -> str:
    """Shortest round-trip decimal; empty field for missing values."""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def atomic_write_bytes(path, data: bytes) -> None:
    path = os.fspath(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_csv(path, header, rows) -> None:
    """Write a CSV with formatted floats; None/NaN become empty fields."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if v is None:
                cells.append("")
            elif isinstance(v, str):
                cells.append(v)
            else:
                cells.append(format_float(v))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_trajectory_csv(path, traj: ClassicalTrajectory) -> None:
    header = ("t",) + STATE_COLUMNS
    rows = (
        [traj.t[k]] + list(traj.states[k]) for k in range(len(traj.t))
    )
    write_csv(path, header, rows)


def covariance_column_labels():
    iu = np.triu_indices(8)
    labels = []
    for i, j in zip(*iu):
        ci, mi = U_LABELS[i][0], U_LABELS[i][1]
        cj, mj = U_LABELS[j][0], U_LABELS[j][1]
        labels.append(f"V_{ci}{cj}{mi}{mj}")
    return tuple(labels)


def write_covariance_csv(path, series: CovarianceSeries) -> None:
    header = ("t",) + covariance_column_labels()
    rows = (
        [series.t[k]] + list(pack_upper(series.covs[k])) for k in range(len(series.t))
    )
    write_csv(path, header, rows)


def write_covariance_snapshot(path, series: CovarianceSeries) -> None:
    n = len(series.t)
    buf = bytearray(struct.pack("<Q", n))
    rec = np.empty(37)
    for k in range(n):
        rec[0] = series.t[k]
        rec[1:] = pack_upper(series.covs[k])
        buf += rec.astype("<f8").tobytes()
    atomic_write_bytes(path, bytes(buf))


def read_covariance_snapshot(path):
    """Inverse of :func:`write_covariance_snapshot`; returns (t, upper_tris)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    (n,) = struct.unpack_from("<Q", raw, 0)
    body = np.frombuffer(raw, dtype="<f8", offset=8)
    if body.size != 37 * n:
        raise ValueError(f"corrupt covariance snapshot: {body.size} values for n={n}")
    body = body.reshape(n, 37)
    return body[:, 0].copy(), body[:, 1:].copy()


def write_metrics_csv(path, ms: MetricSeries) -> None:
    cols = (ms.t, ms.s_p, ms.e_n, ms.nu_minus, ms.r1, ms.phi1, ms.r2, ms.phi2, ms.f)
    rows = ([col[k] for col in cols] for k in range(len(ms.t)))
    write_csv(path, METRIC_COLUMNS, rows)


def write_wigner_csv(path, grid: WignerGrid) -> None:
    """Wigner values as a bare CSV matrix (rows = q axis, columns = p axis)."""
    lines = []
    for i in range(len(grid.q)):
        lines.append(",".join(format_float(v) for v in grid.w[i]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_wigner_header(path, grid: WignerGrid) -> None:
    """Sidecar header with axis ranges and steps for a Wigner CSV matrix."""
    doc = {
        "q_min": float(grid.q[0]),
        "q_max": float(grid.q[-1]),
        "q_step": float(grid.q[1] - grid.q[0]),
        "n_q": int(len(grid.q)),
        "p_min": float(grid.p[0]),
        "p_max": float(grid.p[-1]),
        "p_step": float(grid.p[1] - grid.p[0]),
        "n_p": int(len(grid.p)),
    }
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_wigner_snapshot(path, grid: WignerGrid) -> None:
    head = struct.pack(
        "<QQdddd",
        len(grid.q), len(grid.p),
        float(grid.q[0]), float(grid.q[-1]),
        float(grid.p[0]), float(grid.p[-1]),
    )
    atomic_write_bytes(path, head + grid.w.astype("<f8").tobytes())


def read_wigner_snapshot(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    n_q, n_p, q_min, q_max, p_min, p_max = struct.unpack_from("<QQdddd", raw, 0)
    body = np.frombuffer(raw, dtype="<f8", offset=struct.calcsize("<QQdddd"))
    if body.size != n_q * n_p:
        raise ValueError("corrupt Wigner snapshot")
    return {
        "q": np.linspace(q_min, q_max, n_q),
        "p": np.linspace(p_min, p_max, n_p),
        "w": body.reshape(n_q, n_p).copy(),
    }


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
