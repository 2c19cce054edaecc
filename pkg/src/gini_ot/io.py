"""CSV/JSON serialization for measures, plans, cost matrices and dataset bundles.

Floats are written with ``repr`` (shortest round-tripping form), so a write
followed by a read is exact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError
from .measures import DiscreteMeasure, make_measure

BUNDLE_FORMAT_VERSION = 1
BUNDLE_FILES = {"mu": "mu.csv", "nu": "nu.csv", "cost": "cost.csv"}


def _fmt(x) -> str:
    return repr(float(x))


def _parse_float(text, path, line, col) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{path}:{line}:{col}: not a number: {text!r}") from None


def _is_numeric_row(row) -> bool:
    try:
        [float(c) for c in row]
    except ValueError:
        return False
    return True


def _read_rows(path):
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 ({exc.reason})") from None
    if not rows:
        raise ParseError(f"{path}: file is empty")
    return rows


def read_matrix_csv(path):
    """Dense numeric matrix; an optional non-numeric first row is returned as the header."""
    rows = _read_rows(path)
    header = None
    first = 1
    if not _is_numeric_row(rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first = 2
    if not rows:
        raise ParseError(f"{path}: no numeric rows")
    width = len(rows[0])
    data = []
    for r, row in enumerate(rows, start=first):
        if len(row) != width:
            raise ParseError(f"{path}:{r}: expected {width} fields, got {len(row)}")
        data.append([_parse_float(c, path, r, c_ + 1) for c_, c in enumerate(row)])
    return np.array(data, dtype=float), header


def write_matrix_csv(path, A, header=None) -> None:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        for row in A:
            w.writerow([_fmt(x) for x in row])


# measures ----------------------------------------------------------------------


def write_measure_csv(path, measure: DiscreteMeasure) -> None:
    """One row of weights; a header row carries the labels when present."""
    write_matrix_csv(path, measure.weights[None, :], header=measure.labels)


def read_measure_csv(path) -> DiscreteMeasure:
    """A single row or a single column of non-negative weights (optionally headed by labels)."""
    A, header = read_matrix_csv(path)
    if A.shape[0] == 1:
        w = A[0]
        labels = header
    elif A.shape[1] == 1:
        w = A[:, 0]
        labels = None
    else:
        raise ParseError(f"{path}: a measure must be one row or one column, got shape {A.shape}")
    if labels is not None and len(labels) != w.size:
        raise ParseError(f"{path}: {len(labels)} labels for {w.size} weights")
    return make_measure(w, labels=labels)


def measure_to_json(measure: DiscreteMeasure) -> dict:
    out = {"weights": measure.weights.tolist()}
    if measure.labels is not None:
        out["labels"] = list(measure.labels)
    if measure.coords is not None:
        out["coords"] = [list(c) for c in measure.coords]
    return out


def measure_from_json(obj) -> DiscreteMeasure:
    if not isinstance(obj, dict) or "weights" not in obj:
        raise ParseError("measure JSON needs a 'weights' array")
    return make_measure(obj["weights"], labels=obj.get("labels"), coords=obj.get("coords"))


# plans ---------------------------------------------------------------------------


def write_plan_csv(path, P, col_labels=None) -> None:
    write_matrix_csv(path, P, header=col_labels)


def read_plan_csv(path):
    P, _ = read_matrix_csv(path)
    return P


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


# dataset bundles -------------------------------------------------------------------


def write_bundle(directory, mu, nu, M, generator: str, params: dict, seed=None) -> Path:
    """mu.csv, nu.csv, cost.csv plus manifest.json describing how they were made."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, m in (("mu", mu), ("nu", nu)):
        m = m if isinstance(m, DiscreteMeasure) else make_measure(m)
        write_measure_csv(d / BUNDLE_FILES[name], m)
    write_matrix_csv(d / BUNDLE_FILES["cost"], M)
    manifest = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "generator": generator,
        "params": params,
        "seed": seed,
        "files": BUNDLE_FILES,
        "rng": "numpy PCG64 with SeedSequence.spawn sub-seeds",
    }
    write_json(d / "manifest.json", manifest)
    return d


def read_bundle(directory):
    """Returns (mu, nu, M, manifest)."""
    d = Path(directory)
    manifest = read_json(d / "manifest.json")
    version = manifest.get("format_version")
    if version != BUNDLE_FORMAT_VERSION:
        raise ParseError(f"{d}: unsupported bundle format version {version!r}")
    files = manifest.get("files", BUNDLE_FILES)
    mu = read_measure_csv(d / files["mu"])
    nu = read_measure_csv(d / files["nu"])
    M, _ = read_matrix_csv(d / files["cost"])
    return mu, nu, M, manifest
