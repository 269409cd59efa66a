"""Reading and writing posterior samples and regression data as CSV.

Samples are one row per retained draw with columns ``beta_0..beta_d``,
``sigma``, ``gamma`` (plus ``omega_k`` and ``eta2`` for lasso fits) and a
JSON sidecar ``<name>.meta.json`` holding the config, seed and diagnostics.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .lasso import LassoPriorConfig
from .sampler import PosteriorSamples, QuantRegConfig


def _fmt(x) -> str:
    return repr(float(x))


def meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_samples(samples: PosteriorSamples, path, extra_meta: dict | None = None):
    cols = samples.columns()
    names = list(cols)
    table = np.column_stack([cols[k] for k in names])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", *names])
        for it, row in zip(samples.iterations, table):
            w.writerow([int(it), *map(_fmt, row)])
    meta = dict(
        p0=samples.p0,
        seed=samples.seed,
        coefficient_names=samples.names,
        acceptance_rate=samples.acceptance_rate,
        config=samples.config.to_dict(),
        diagnostics=samples.diagnostics,
    )
    if extra_meta:
        meta.update(extra_meta)
    write_json(meta, meta_path(path))


def config_from_dict(d: dict) -> QuantRegConfig:
    d = dict(d)
    lasso = d.pop("lasso", None)
    if d.get("gamma_prior") is not None:
        d["gamma_prior"] = tuple(d["gamma_prior"])
    cfg = QuantRegConfig(**d)
    if lasso is not None:
        cfg.lasso = LassoPriorConfig(**lasso)
    return cfg


def read_samples(path) -> PosteriorSamples:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty samples file")
    header, body = rows[0], rows[1:]
    table = np.array(body, dtype=float).reshape(len(body), len(header))
    cols = {k: table[:, j] for j, k in enumerate(header)}
    for req in ("iteration", "sigma", "gamma", "beta_0"):
        if req not in cols:
            raise ValueError(f"{path}: missing column {req!r}")
    beta_names = sorted((k for k in header if k.startswith("beta_")), key=lambda k: int(k[5:]))
    omega_names = sorted((k for k in header if k.startswith("omega_")), key=lambda k: int(k[6:]))
    mp = meta_path(path)
    meta = json.loads(mp.read_text()) if mp.exists() else {}
    if "config" in meta:
        config = config_from_dict(meta["config"])
    else:
        config = QuantRegConfig(p0=float(meta.get("p0", 0.5)))
    extras = {}
    if omega_names:
        extras["omega"] = np.column_stack([cols[k] for k in omega_names])
    if "eta2" in cols:
        extras["eta2"] = cols["eta2"]
    return PosteriorSamples(
        beta=np.column_stack([cols[k] for k in beta_names]),
        sigma=cols["sigma"],
        gamma=cols["gamma"],
        iterations=cols["iteration"].astype(np.int64),
        p0=config.p0,
        acceptance_rate=float(meta.get("acceptance_rate", math.nan)),
        config=config,
        seed=meta.get("seed"),
        names=list(meta.get("coefficient_names", [])) or beta_names,
        extras=extras,
        diagnostics=meta.get("diagnostics", {}),
    )


def write_rows(rows: list[dict], path, fieldnames=None):
    """CSV of dict rows; floats written with full precision."""
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(v) if isinstance(v, (float, np.floating)) else v for k, v in row.items()})


def _parse_cell(text, row, col):
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"row {row}, column {col!r}: cannot parse {text!r} as a number") from None


def read_table(path) -> dict[str, np.ndarray]:
    """Numeric CSV with header; errors name the offending row and column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if len(set(header)) != len(header) or any(not h for h in header):
            raise ValueError(f"{path}: header must have unique, nonempty column names")
        data = []
        for i, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ValueError(f"{path}: row {i} has {len(rec)} fields, expected {len(header)}")
            data.append([_parse_cell(c.strip(), i, h) for c, h in zip(rec, header)])
    arr = np.array(data, dtype=float).reshape(len(data), len(header))
    for j, h in enumerate(header):
        bad = np.flatnonzero(~np.isfinite(arr[:, j]))
        if bad.size:
            raise ValueError(f"{path}: non-finite value at row {int(bad[0]) + 2}, column {h!r}")
    return {h: arr[:, j] for j, h in enumerate(header)}

