"""CSV and JSON readers/writers.

Frequency data ``point_re,point_im,H_1_1_re,H_1_1_im,...`` (one row per point),
time data ``t,u_1..u_m,y_1..y_p`` on a constant step, and two-variable grid
data with header ``point_re,point_im,p1,p1,p2,p2,...`` and one row of
``[re, im]`` response pairs per frequency point.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from . import loewner_bilinear, loewner_parametric
from .errors import ParseError, SchemaError
from .loewner_parametric import ParamGrid
from .model_core import FrequencySample, TimeSeries
from .model_core import model_from_dict as _descriptor_from_dict
from .model_core import model_to_dict as _descriptor_to_dict
from .model_core import DescriptorModel, BilinearModel

STEP_RTOL = 1e-9
_H_COL = re.compile(r"^H_(\d+)_(\d+)_(re|im)$")


def _rows(path):
    """Header and numeric rows; comment lines start with '#'."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc), path=str(path)) from None
    header, rows = None, []
    for lineno, rec in enumerate(csv.reader(text.splitlines()), start=1):
        if not rec or rec[0].lstrip().startswith("#"):
            continue
        if header is None:
            header = [c.strip() for c in rec]
            continue
        if len(rec) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(rec)}", lineno, str(path))
        try:
            rows.append((lineno, [float(c) for c in rec]))
        except ValueError as exc:
            raise ParseError(f"not a number: {exc}", lineno, str(path)) from None
    if header is None:
        raise ParseError("empty file", path=str(path))
    return header, rows


def _kind(header) -> str:
    if _param_header(header) is not None:
        return "grid"
    if header[:2] == ["point_re", "point_im"]:
        return "frequency"
    if header and header[0] == "t":
        return "time"
    raise SchemaError(f"unrecognized header {header}")


def _response_layout(cols):
    idx = {}
    for k, c in enumerate(cols):
        m = _H_COL.match(c)
        if not m:
            raise SchemaError(f"bad response column {c!r}")
        idx[(int(m[1]), int(m[2]), m[3])] = k
    p = max(i for i, _, _ in idx)
    m_ = max(j for _, j, _ in idx)
    for i in range(1, p + 1):
        for j in range(1, m_ + 1):
            for part in ("re", "im"):
                if (i, j, part) not in idx:
                    raise SchemaError(f"missing column H_{i}_{j}_{part}")
    return p, m_, idx


def load_frequency_csv(path) -> list[FrequencySample]:
    header, rows = _rows(path)
    if _kind(header) != "frequency":
        raise SchemaError("not a frequency-sample file")
    p, m, idx = _response_layout(header[2:])
    seen = {}
    out = []
    for lineno, v in rows:
        z = complex(v[0], v[1])
        if z in seen:
            raise SchemaError(f"duplicate point {z} on lines {seen[z]} and {lineno}")
        seen[z] = lineno
        H = np.empty((p, m), dtype=complex)
        for i in range(p):
            for j in range(m):
                H[i, j] = complex(v[2 + idx[(i + 1, j + 1, "re")]], v[2 + idx[(i + 1, j + 1, "im")]])
        out.append(FrequencySample(z, H))
    return out


def save_frequency_csv(path, samples) -> None:
    p, m = samples[0].response.shape
    cols = ["point_re", "point_im"] + [f"H_{i + 1}_{j + 1}_{part}" for i in range(p) for j in range(m)
                                       for part in ("re", "im")]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for s in samples:
            row = [repr(float(s.point.real)), repr(float(s.point.imag))]
            for v in s.response.ravel():
                row += [repr(float(v.real)), repr(float(v.imag))]
            w.writerow(row)


def load_time_csv(path) -> TimeSeries:
    header, rows = _rows(path)
    if _kind(header) != "time":
        raise SchemaError("not a time-series file")
    ucols = [k for k, c in enumerate(header) if c.startswith("u_")]
    ycols = [k for k, c in enumerate(header) if c.startswith("y_")]
    if not ucols or len(ucols) + len(ycols) + 1 != len(header):
        raise SchemaError("time file needs columns t, u_1.., y_1..")
    if len(rows) < 2:
        raise SchemaError("time file needs at least two rows")
    data = np.array([v for _, v in rows])
    t = data[:, 0]
    dt = np.diff(t)
    step = float(np.mean(dt))
    bad = np.flatnonzero(np.abs(dt - step) > STEP_RTOL * abs(step))
    if step <= 0 or bad.size:
        line = rows[bad[0] + 1][0] if bad.size else rows[1][0]
        raise SchemaError(f"non-constant time step near line {line}")
    start = int(round(t[0] / step))
    return TimeSeries(step, data[:, ucols], data[:, ycols] if ycols else None, start_index=start)


def save_time_csv(path, series: TimeSeries) -> None:
    m = series.u.shape[1]
    p = 0 if series.y is None else series.y.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"u_{i + 1}" for i in range(m)] + [f"y_{i + 1}" for i in range(p)])
        for k, t in enumerate(series.t):
            row = [repr(float(t))] + [repr(float(x)) for x in series.u[k]]
            if p:
                row += [repr(float(x)) for x in series.y[k]]
            w.writerow(row)


def _param_header(header) -> np.ndarray | None:
    """Parameter values of a grid header ``point_re,point_im,p1,p1,p2,p2,...``."""
    if len(header) < 4 or header[:2] != ["point_re", "point_im"] or len(header) % 2:
        return None
    try:
        vals = np.array([float(c) for c in header[2:]])
    except ValueError:
        return None
    if np.any(vals[0::2] != vals[1::2]):
        raise SchemaError("grid header must list each parameter value twice (re, im)")
    return vals[0::2]


def load_grid_csv(path) -> ParamGrid:
    header, rows = _rows(path)
    params = _param_header(header)
    if params is None:
        raise SchemaError("grid header must be point_re,point_im followed by parameter values")
    if np.unique(params).size != params.size:
        raise SchemaError("duplicate parameter value in grid header")
    seen = {}
    zs, Phi = [], []
    for lineno, v in rows:
        z = complex(v[0], v[1])
        if z in seen:
            raise SchemaError(f"duplicate point {z} on lines {seen[z]} and {lineno}")
        seen[z] = lineno
        zs.append(z)
        Phi.append(np.array(v[2::2]) + 1j * np.array(v[3::2]))
    return ParamGrid(np.array(zs), params, np.array(Phi))


def save_grid_csv(path, grid: ParamGrid) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point_re", "point_im"] + [repr(float(p)) for p in grid.p for _ in range(2)])
        for i, z in enumerate(grid.z):
            row = [repr(float(z.real)), repr(float(z.imag))]
            for v in grid.Phi[i]:
                row += [repr(float(v.real)), repr(float(v.imag))]
            w.writerow(row)


def load_samples(path):
    """Frequency samples, a time series or a parameter grid, by header."""
    header, _ = _rows(path)
    kind = _kind(header)
    return {"frequency": load_frequency_csv, "time": load_time_csv, "grid": load_grid_csv}[kind](path)


# ---------------------------------------------------------------- models


def model_to_dict(model) -> dict:
    if isinstance(model, DescriptorModel):
        return _descriptor_to_dict(model)
    if isinstance(model, BilinearModel):
        return loewner_bilinear.model_to_dict(model)
    if isinstance(model, loewner_parametric.ParametricBarycentricModel):
        return loewner_parametric.model_to_dict(model)
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d: dict):
    kind = d.get("type") if isinstance(d, dict) else None
    try:
        if kind == "descriptor":
            return _descriptor_from_dict(d)
        if kind == "bilinear":
            return loewner_bilinear.model_from_dict(d)
        if kind == "parametric":
            return loewner_parametric.model_from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed {kind} model: {exc}") from None
    raise SchemaError(f"unknown model type {kind!r}")


def save_model(path, model) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path):
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, str(path)) from None
    except OSError as exc:
        raise ParseError(str(exc), path=str(path)) from None
    return model_from_dict(d)


def save_kernel_json(path, lam, mu, records: list[dict]) -> None:
    enc = lambda a: [[float(z.real), float(z.imag)] for z in a]
    doc = {"lambda": enc(lam), "mu": enc(mu), "kernels": records}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_kernel_json(path) -> tuple[np.ndarray, np.ndarray, dict[tuple, complex]]:
    """Right points, left points and kernel values keyed by their point tuple."""
    try:
        doc = json.loads(Path(path).read_text())
        dec = lambda a: np.array([complex(x, y) for x, y in a])
        table = {}
        for r in doc["kernels"]:
            pts = tuple(complex(a, b) for a, b in r["points"])
            if len(pts) != r["order"]:
                raise SchemaError(f"order {r['order']} does not match {len(pts)} points")
            table[pts] = complex(*r["value"])
        return dec(doc["lambda"]), dec(doc["mu"]), table
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, str(path)) from None
    except OSError as exc:
        raise ParseError(str(exc), path=str(path)) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed kernel file: {exc}") from None
