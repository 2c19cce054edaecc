"""Score a spatial forecast against actuals with the earth mover's distance.

Source = normalized forecast, target = normalized actual, ground cost =
great-circle distance between locales (or a user-supplied matrix).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .costs import GeoPoint, haversine_cost
from .errors import (
    DuplicateLocale,
    InputError,
    MissingColumn,
    NonPositiveTotal,
    ParseError,
    ShapeMismatch,
)
from .measures import SolverOptions, round_to_polytope, transport_cost
from .solvers import default_options, solve

log = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("locale_id", "lat", "lon", "forecast", "actual")
EVAL_METHODS = ("lp", "sinkhorn-stab", "got-qp", "got-fw", "got-md")


@dataclass(frozen=True, eq=False)
class LocaleTable:
    locale_ids: tuple
    lat: np.ndarray
    lon: np.ndarray
    forecast: np.ndarray
    actual: np.ndarray
    period: Optional[str] = None
    dropped: int = 0

    def __post_init__(self):
        n = len(self.locale_ids)
        for name in ("lat", "lon", "forecast", "actual"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ShapeMismatch(f"{name} has shape {arr.shape}, expected ({n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        seen = set()
        for lid in self.locale_ids:
            if lid in seen:
                raise DuplicateLocale(f"duplicate locale_id {lid!r}")
            seen.add(lid)
        for la, lo in zip(self.lat, self.lon):
            GeoPoint(la, lo)
        if np.any(self.forecast < 0) or np.any(self.actual < 0):
            raise InputError("forecast and actual must be non-negative")
        if not self.forecast.sum() > 0:
            raise NonPositiveTotal("forecast column sums to zero")
        if not self.actual.sum() > 0:
            raise NonPositiveTotal("actual column sums to zero")

    def __len__(self):
        return len(self.locale_ids)

    @property
    def points(self):
        return list(zip(self.lat, self.lon))


def load_locales(path, format: str = "csv", period: Optional[str] = None) -> LocaleTable:
    """Read ``locale_id,lat,lon,forecast,actual`` rows (header required, UTF-8).

    Rows with forecast = actual = 0 carry no information and are dropped;
    the count is kept in ``LocaleTable.dropped``.
    """
    if format != "csv":
        raise InputError(f"unsupported locale format {format!r}")
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    ids, cols = [], {c: [] for c in REQUIRED_COLUMNS[1:]}
    dropped = 0
    with fh:
        reader = csv.DictReader(fh)
        try:
            header = reader.fieldnames
        except UnicodeDecodeError as exc:
            raise ParseError(f"{path}: not UTF-8 ({exc.reason})") from None
        if not header:
            raise ParseError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        reader.fieldnames = header
        for name in REQUIRED_COLUMNS:
            if name not in header:
                raise MissingColumn(f"{path}: missing column {name!r}")
        for row in reader:
            line = reader.line_num
            if None in row or any(row[c] is None for c in REQUIRED_COLUMNS):
                raise ParseError(f"{path}:{line}: wrong number of fields")
            values = {}
            for name in REQUIRED_COLUMNS[1:]:
                text = row[name].strip()
                try:
                    values[name] = float(text)
                except ValueError:
                    col = header.index(name) + 1
                    raise ParseError(f"{path}:{line}:{col}: {name} is not a number: {text!r}") from None
                if not np.isfinite(values[name]):
                    raise ParseError(f"{path}:{line}: {name} is not finite")
            if values["forecast"] == 0 and values["actual"] == 0:
                dropped += 1
                continue
            ids.append(row["locale_id"].strip())
            for name, v in values.items():
                cols[name].append(v)
    if dropped:
        log.warning("%s: dropped %d rows with zero forecast and zero actual", path, dropped)
    if not ids:
        raise NonPositiveTotal(f"{path}: no rows with positive forecast or actual")
    return LocaleTable(tuple(ids), cols["lat"], cols["lon"], cols["forecast"], cols["actual"],
                       period=period, dropped=dropped)


def write_locales(table: LocaleTable, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REQUIRED_COLUMNS)
        for i, lid in enumerate(table.locale_ids):
            w.writerow([lid] + [repr(float(a[i])) for a in
                                (table.lat, table.lon, table.forecast, table.actual)])


@dataclass
class EvalReport:
    emd: float
    plan: np.ndarray
    cost: np.ndarray
    locale_ids: tuple
    total_forecast: float
    total_actual: float
    method: str
    period: Optional[str] = None
    normalized: bool = True
    converged: bool = True
    lam: Optional[float] = None
    info: dict = field(default_factory=dict)

    def flows(self, min_mass: float = 0.0):
        """(from_locale, to_locale, mass, cost) for every cell with mass > min_mass."""
        rows, cols = np.nonzero(self.plan > min_mass)
        return [(self.locale_ids[i], self.locale_ids[j], float(self.plan[i, j]),
                 float(self.cost[i, j])) for i, j in zip(rows, cols)]

    def to_dict(self, include_plan: bool = True) -> dict:
        out = {
            "emd": self.emd,
            "method": self.method,
            "lambda": self.lam,
            "period": self.period,
            "normalized": self.normalized,
            "converged": self.converged,
            "total_forecast": self.total_forecast,
            "total_actual": self.total_actual,
            "locales": list(self.locale_ids),
        }
        if include_plan:
            out["plan"] = [{"from": a, "to": b, "mass": m, "cost": c}
                           for a, b, m, c in self.flows()]
        return out


def emd_score(table: LocaleTable, method: str = "lp", opts: SolverOptions | None = None,
              cost=None) -> EvalReport:
    """EMD between the normalized forecast and actual columns.

    ``cost`` overrides the haversine matrix (any non-negative n x n matrix;
    metric properties are not checked).
    """
    if method not in EVAL_METHODS:
        raise InputError(f"method {method!r} not available for scoring; choose from {EVAL_METHODS}")
    if cost is None:
        M = haversine_cost(table.points, table.points)
    else:
        M = np.asarray(cost, dtype=float)
        n = len(table)
        if M.shape != (n, n):
            raise ShapeMismatch(f"cost shape {M.shape} does not match {n} locales")
    tf, ta = float(table.forecast.sum()), float(table.actual.sum())
    mu, nu = table.forecast / tf, table.actual / ta
    if method != "lp" and opts is None:
        opts = default_options(method)
    res = solve(mu, nu, M, method, opts)
    plan, emd = res.plan, res.transport_cost
    info = {"iterations": res.iterations, "marginal_violation": res.marginal_violation}
    if method != "lp":
        # with costs in km a 1e-9 marginal slack is worth ~1e-5 km; scoring a
        # plan that is exactly feasible keeps every method's emd >= the LP value
        plan = round_to_polytope(res.plan, mu, nu)
        emd = transport_cost(plan, M)
        info["rounding_l1"] = float(np.abs(plan - res.plan).sum())
    return EvalReport(
        emd=emd, plan=plan, cost=M, locale_ids=table.locale_ids,
        total_forecast=tf, total_actual=ta, method=method, period=table.period,
        converged=res.converged, lam=res.lam, info=info,
    )


PLAN_COLUMNS = ("from_locale", "to_locale", "mass", "cost")


def write_flows_csv(report: EvalReport, path) -> None:
    """Non-zero plan cells as ``from_locale,to_locale,mass,cost`` rows."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(PLAN_COLUMNS)
        for a, b, m, c in report.flows():
            w.writerow([a, b, repr(m), repr(c)])


def read_flows_csv(path, locale_ids):
    """Dense plan from a flows CSV; cells not listed are zero."""
    index = {lid: i for i, lid in enumerate(locale_ids)}
    P = np.zeros((len(index), len(index)))
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in PLAN_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise MissingColumn(f"{path}: missing column {missing[0]!r}")
        for row in reader:
            try:
                i, j = index[row["from_locale"]], index[row["to_locale"]]
            except KeyError as exc:
                raise ParseError(f"{path}:{reader.line_num}: unknown locale {exc.args[0]!r}") from None
            try:
                P[i, j] = float(row["mass"])
            except ValueError:
                raise ParseError(f"{path}:{reader.line_num}: mass is not a number") from None
    return P
