"""File formats.

* PGM images (``P2`` ASCII and ``P5`` binary, maxval up to 65535), read as
  floats in ``[0, 1]``.
* ``KOPAMAT1`` binary matrices: the 8-byte magic ``KOPAMAT1``, little-endian
  ``uint32`` rows and cols, then ``rows*cols`` little-endian float64 values in
  row-major order.
* JSON model files (``format: "hkopa-model"``, ``version: 1``).  Floats are
  written with ``repr`` precision so the round trip is bit-exact.
* CSV reports; the first line is a ``# hkopa-<kind> v1`` comment and further
  ``# key=value`` lines carry provenance.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
from pathlib import Path

import numpy as np

from .configspace import AmbientShape, Configuration
from .exceptions import FormatError
from .terms import HKopaModel, KroneckerTerm

__all__ = [
    "MAT_MAGIC",
    "MODEL_FORMAT",
    "MODEL_VERSION",
    "read_pgm",
    "write_pgm",
    "read_matrix",
    "write_matrix",
    "load_matrix",
    "save_matrix",
    "model_to_dict",
    "model_from_dict",
    "write_model",
    "read_model",
    "write_report_csv",
    "write_curve_csv",
    "write_long_csv",
    "write_cell_csv",
    "sha256_file",
]

MAT_MAGIC = b"KOPAMAT1"
MODEL_FORMAT = "hkopa-model"
MODEL_VERSION = 1
REPORT_SCHEMA = "v1"


# -- PGM ---------------------------------------------------------------------

def _pgm_tokens(data: bytes, count: int, pos: int = 0):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path) -> np.ndarray:
    """Read a grayscale PGM and scale samples to ``[0, 1]`` by dividing by maxval."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"{path}: invalid PGM dimensions or maxval")
    n = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = data[pos:pos + n * dtype.itemsize]
        if len(payload) < n * dtype.itemsize:
            raise FormatError(f"{path}: truncated PGM payload")
        values = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    else:
        try:
            toks, _ = _pgm_tokens(data, n, pos)
        except FormatError as exc:
            raise FormatError(f"{path}: truncated PGM payload") from exc
        try:
            values = np.array([int(t) for t in toks], dtype=np.float64)
        except ValueError as exc:
            raise FormatError(f"{path}: non-integer PGM sample") from exc
    if values.max(initial=0) > maxval:
        raise FormatError(f"{path}: sample exceeds maxval")
    return (values / maxval).reshape(height, width)


def write_pgm(m, path) -> None:
    """Write an 8-bit ``P5`` PGM; entries are clamped to ``[0, 1]`` and rounded half away from zero."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise FormatError("PGM output needs a 2-d matrix")
    scaled = np.clip(m, 0.0, 1.0) * 255.0
    q = np.floor(scaled + 0.5).astype(np.uint8)
    header = f"P5\n{m.shape[1]} {m.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + q.tobytes())


# -- binary matrices -----------------------------------------------------------

def write_matrix(m, path) -> None:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise FormatError(f"cannot store matrix of shape {m.shape}")
    header = MAT_MAGIC + struct.pack("<II", m.shape[0], m.shape[1])
    Path(path).write_bytes(header + m.astype("<f8").tobytes(order="C"))


def read_matrix(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:8] != MAT_MAGIC:
        raise FormatError(f"{path}: bad magic, expected {MAT_MAGIC!r}")
    if len(data) < 16:
        raise FormatError(f"{path}: truncated header")
    rows, cols = struct.unpack("<II", data[8:16])
    if rows < 1 or cols < 1:
        raise FormatError(f"{path}: invalid dimensions {rows}x{cols}")
    payload = data[16:]
    if len(payload) != rows * cols * 8:
        raise FormatError(f"{path}: payload holds {len(payload)} bytes, expected {rows * cols * 8}")
    return np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(rows, cols)


def load_matrix(path) -> np.ndarray:
    """Read a ``KOPAMAT1`` or PGM file, chosen by magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head == MAT_MAGIC:
        return read_matrix(path)
    if head[:2] in (b"P2", b"P5"):
        return read_pgm(path)
    raise FormatError(f"{path}: unrecognized matrix format")


def save_matrix(m, path) -> None:
    """Write ``.pgm`` paths as images and anything else as ``KOPAMAT1``."""
    if str(path).lower().endswith(".pgm"):
        write_pgm(m, path)
    else:
        write_matrix(m, path)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- model JSON ----------------------------------------------------------------

def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise FormatError("model contains non-finite values")


def model_to_dict(model: HKopaModel, provenance: dict | None = None) -> dict:
    terms = []
    for t in model.terms:
        _check_finite(t.a)
        _check_finite(t.b)
        _check_finite(t.lam)
        terms.append({
            "config": [t.config.a_rows, t.config.a_cols],
            "lambda": float(t.lam),
            "a": t.a.tolist(),
            "b": t.b.tolist(),
        })
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "ambient": [model.ambient.rows, model.ambient.cols],
        "canonical": bool(model.canonical),
        "terms": terms,
        "provenance": provenance or {},
    }


def model_from_dict(d: dict) -> HKopaModel:
    if d.get("format") != MODEL_FORMAT:
        raise FormatError("not an hkopa model file")
    if d.get("version") != MODEL_VERSION:
        raise FormatError(f"unsupported model version {d.get('version')!r}")
    try:
        shape = AmbientShape(*map(int, d["ambient"]))
        terms = []
        for t in d["terms"]:
            c = Configuration(int(t["config"][0]), int(t["config"][1]), shape)
            a = np.array(t["a"], dtype=np.float64).reshape(c.a_shape)
            b = np.array(t["b"], dtype=np.float64).reshape(c.b_shape)
            terms.append(KroneckerTerm(float(t["lambda"]), a, b, c))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model file: {exc}") from exc
    return HKopaModel(shape, terms, canonical=bool(d.get("canonical", True)))


def write_model(model: HKopaModel, path, provenance: dict | None = None) -> None:
    text = json.dumps(model_to_dict(model, provenance), indent=1, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def read_model(path) -> HKopaModel:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON") from exc
    return model_from_dict(d)


# -- CSV -------------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ("-inf" if x < 0 else "inf" if x > 0 else "nan")
    return str(x)


def _write_csv(path, kind, meta, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# hkopa-{kind} {REPORT_SCHEMA}\n")
        for k, v in (meta or {}).items():
            fh.write(f"# {k}={_fmt(v)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


REPORT_COLUMNS = ["k", "config", "lambda_hat", "ic_value", "cpv", "residual_fro",
                  "ic_count", "report_count", "overall_ic", "stopped_by"]


def write_report_csv(report, path, meta: dict | None = None) -> None:
    """Greedy fit report: one row per term; backfit objective history if present."""
    rows = [[r.k, str(r.config), r.lambda_hat, r.ic_value, r.cpv, r.residual_fro,
             r.ic_count, r.report_count, r.overall_ic, r.stopped_by] for r in report.records]
    meta = dict(meta or {})
    meta.setdefault("q", report.penalty)
    meta.setdefault("stopped_by", report.stopped_by)
    if report.objective:
        meta.setdefault("rounds", report.rounds)
        meta.setdefault("converged", report.converged)
    _write_csv(path, "report", meta, REPORT_COLUMNS, rows)


def write_objective_csv(report, path, meta: dict | None = None) -> None:
    rows = [[i, v] for i, v in enumerate(report.objective)]
    meta = dict(meta or {})
    meta.setdefault("rounds", report.rounds)
    meta.setdefault("converged", report.converged)
    _write_csv(path, "backfit", meta, ["round", "objective"], rows)


def write_curve_csv(curve, path, meta: dict | None = None) -> None:
    rows = [[p.method, p.terms, p.params, p.rse, p.rse_input, int(p.stop_marked)]
            for p in curve.points]
    _write_csv(path, "curve", meta, ["method", "terms", "params", "rse", "rse_input", "stop_marked"], rows)


def write_long_csv(table, path, meta: dict | None = None) -> None:
    from .bench import long_rows

    _write_csv(path, "simulation", meta, ["alpha", "sigma0", "seed", "iter", "metric", "value"],
               long_rows(table))


def write_cell_csv(cell, path, meta: dict | None = None) -> None:
    from .bench import ComponentErrors

    cols = ["iter", *ComponentErrors.METRICS]
    _write_csv(path, "cell", meta, cols, ([r[c] for c in cols] for r in cell.rows))
