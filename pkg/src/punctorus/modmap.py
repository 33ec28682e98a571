"""The modulus-to-cross-ratio map and the laws pushed through it.

A table of tangency solves over a modulus grid backs a monotone spline
for the increasing map m -> CR(m) from [1, inf) onto [2, inf), its
numerical derivative at 1, the functional-equation extension below
m = 1, an asymptotic extension above the table, the inverse map, the
modulus and log-modulus probability densities, their summary
statistics, and the quasi-Moebius comparison constant.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, least_squares

from . import lame
from .closedform import _prep, _ret, quad_cr_median, quad_cr_pdf

__all__ = [
    "CrMapTable",
    "DerivedPdf",
    "build_cr_table",
    "default_table",
    "set_default_table",
    "cr_of_modulus",
    "modulus_of_cr",
    "asymptotic_bounds",
    "modulus_pdf",
    "teich_pdf",
    "summary_stats",
    "quasimobius_K",
    "derived_pdf",
]

_PI = math.pi
_PI2 = math.pi**2

_CSV_COLUMNS = ("m", "tau", "lambda_acc", "cross_ratio",
                "a1", "r1", "a2", "r2", "residual")

# Modulus cluster used for the derivative estimate at the left endpoint.
_CLUSTER_H = 0.02
_CLUSTER = tuple(1.0 + _CLUSTER_H * k for k in range(7))

# One-sided finite-difference stencils on the 0.02-spaced cluster.
_FD1 = np.array([-137 / 60, 5.0, -5.0, 10 / 3, -5 / 4, 1 / 5])
_FD2 = np.array([15 / 4, -77 / 6, 107 / 6, -13.0, 61 / 12, -5 / 6])


class CrMapTable:
    """Monotone (modulus, cross ratio) nodes with a spline and metadata.

    a_estimate is the derivative of the map at modulus 1, obtained from
    a one-sided stencil on the 0.02-spaced cluster of nodes next to 1
    and refined by a local fit constrained to the curvature relation
    CR''(1) = a^2 - a.  c_hat is the deficit (pi/2) sqrt(CR) - m at the
    last node; the asymptotic extension beyond the table reuses it, so
    the extended map is continuous there.  Instances are immutable in
    practice and safe to share across threads.
    """

    def __init__(self, ms: np.ndarray, crs: np.ndarray, records: list[dict]):
        ms = np.asarray(ms, dtype=float)
        crs = np.asarray(crs, dtype=float)
        if ms.ndim != 1 or ms.shape != crs.shape or len(ms) < 8:
            raise ValueError("need matching 1-d node arrays with at least 8 nodes")
        if not np.all(np.diff(ms) > 0) or not np.all(np.diff(crs) > 0):
            raise ValueError("table nodes must be strictly increasing")
        self.ms = ms
        self.crs = crs
        self.records = records
        self.interpolant = PchipInterpolator(ms, crs)
        self.deriv = self.interpolant.derivative()
        self.m_max = ms[-1].item()
        self.cr_max = crs[-1].item()
        self.c_hat = 0.5 * _PI * math.sqrt(self.cr_max) - self.m_max
        self.a_estimate, self.curvature_gap = self._derivative_estimate()

    @property
    def nodes(self) -> list[tuple[float, float]]:
        return list(zip(self.ms.tolist(), self.crs.tolist()))

    def _derivative_estimate(self) -> tuple[float, float]:
        idx = []
        for mc in _CLUSTER:
            j = int(np.argmin(np.abs(self.ms - mc)))
            if abs(self.ms[j] - mc) > 1e-12:
                break
            idx.append(j)
        if len(idx) < 7:
            # hand-assembled table without the cluster: fall back to the
            # spline derivative, which is what the stencil refines
            d = self.deriv(self.ms[0]).item()
            return d, math.nan
        cl = self.crs[idx]
        a_fd = (_FD1 @ cl[:6]) / _CLUSTER_H
        cr2_fd = (_FD2 @ cl[:6]) / _CLUSTER_H**2
        x = np.asarray(_CLUSTER) - 1.0

        def resid(p):
            a, c3, c4 = p
            return 2.0 + a * x + (a * a - a) * x * x / 2 + c3 * x**3 + c4 * x**4 - cl

        fit = least_squares(resid, [a_fd, 0.0, 0.0])
        a = fit.x[0].item()
        return a, abs(cr2_fd - (a_fd * a_fd - a_fd))

    def to_csv(self, path) -> None:
        """Write the per-node solve records, 17 significant digits."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(_CSV_COLUMNS)
            for rec in sorted(self.records, key=lambda r: r["m"]):
                w.writerow(format(rec[k], ".17g") for k in _CSV_COLUMNS)

    @classmethod
    def from_csv(cls, path) -> "CrMapTable":
        """Rebuild a table from its CSV emission, without re-solving.

        All derived quantities (spline, a_estimate, c_hat) are
        recomputed from the stored rows, so a write/read cycle is a
        faithful round trip.
        """
        records = []
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd)
            if tuple(header) != _CSV_COLUMNS:
                raise ValueError(f"unexpected table columns: {header}")
            for row in rd:
                records.append(dict(zip(_CSV_COLUMNS, map(float, row))))
        records.sort(key=lambda r: r["m"])
        ms = np.array([r["m"] for r in records])
        crs = np.array([r["cross_ratio"] for r in records])
        return cls(ms, crs, records)


@dataclass(frozen=True)
class DerivedPdf:
    """A density derived from the table: the modulus law or its log."""

    kind: str
    evaluator: Callable

    def __call__(self, x):
        return self.evaluator(x)


def build_cr_table(m_min: float = 1.0, m_max: float = 50.0, n: int = 256) -> CrMapTable:
    """Solve the tangency problem over a modulus grid and tabulate.

    Half the nodes are linear on [m_min, 4], half geometric above, plus
    the seven-node derivative cluster at 1.  Solves run in increasing
    modulus so each root warm-starts the next.  Any node failures are
    collected and reported together as a build error.
    """
    if not (1.0 <= m_min < m_max):
        raise ValueError("need 1 <= m_min < m_max")
    if n < 16:
        raise ValueError("need at least 16 nodes")
    if m_max <= 4.0:
        grid = np.linspace(m_min, m_max, n)
    else:
        lo = np.linspace(m_min, 4.0, n // 2)
        hi = np.geomspace(4.0, m_max, n - n // 2 + 1)[1:]
        grid = np.concatenate([lo, hi])
    ms = np.unique(np.concatenate([np.asarray(_CLUSTER), grid]))

    records: list[dict] = []
    crs = np.empty_like(ms)
    failures: list[tuple[float, str]] = []
    bracket = None
    for i, m in enumerate(ms):
        try:
            sol = lame.solve_accessory(1.0 / m, bracket=bracket)
        except (lame.SolverFailure, lame.BracketError, ValueError) as exc:
            failures.append((m.item(), str(exc)))
            bracket = None
            continue
        crs[i] = sol.cross_ratio
        rec = sol.as_record()
        records.append({
            "m": m.item(), "tau": rec["tau"], "lambda_acc": rec["lambda"],
            "cross_ratio": rec["cross_ratio"], "a1": rec["a1"], "r1": rec["r1"],
            "a2": rec["a2"], "r2": rec["r2"], "residual": rec["tangency_residual"],
        })
        w = max(0.02, 0.4 * abs(sol.lambda_acc) + 0.01)
        bracket = (sol.lambda_acc - w, sol.lambda_acc + w)
    if failures:
        listing = ", ".join(f"m={m:g} ({msg})" for m, msg in failures[:8])
        raise RuntimeError(f"table build failed at {len(failures)} node(s): {listing}")
    return CrMapTable(ms, crs, records)


_default: CrMapTable | None = None


def default_table() -> CrMapTable:
    """The lazily built standard table, m in [1, 50] with 256 nodes."""
    global _default
    if _default is None:
        _default = build_cr_table()
    return _default


def set_default_table(table: CrMapTable) -> None:
    """Install a prebuilt table as the module default."""
    global _default
    _default = table


def cr_of_modulus(m, table: CrMapTable | None = None):
    """The cross ratio of the torus with the given modulus.

    Below 1 the functional equation CR(1/m) = CR(m)/(CR(m) - 1) takes
    over; above the table the squared-linear asymptote continues the
    map.  Scalars or arrays.
    """
    t = table if table is not None else default_table()
    m, scalar = _prep(m)
    if (m <= 0).any():
        raise ValueError("modulus must be positive")
    out = np.empty_like(m)
    low = m < 1.0
    if low.any():
        q = np.asarray(cr_of_modulus(1.0 / m[low], t))
        out[low] = q / (q - 1.0)
    mid = (m >= 1.0) & (m <= t.m_max)
    if mid.any():
        out[mid] = t.interpolant(m[mid])
    high = m > t.m_max
    if high.any():
        out[high] = (2.0 * (m[high] + t.c_hat) / _PI) ** 2
    return _ret(out, scalar)


def modulus_of_cr(Q, table: CrMapTable | None = None):
    """Inverse of the cross-ratio map on [2, inf).

    Root-finds on the forward spline inside the table and switches to
    the shifted asymptotic inverse above it.
    """
    t = table if table is not None else default_table()
    Q, scalar = _prep(Q)
    if (Q < 2.0).any():
        raise ValueError("cross ratio must be at least 2")
    out = np.empty_like(Q)
    for i, q in enumerate(Q):
        if q >= t.cr_max:
            out[i] = 0.5 * _PI * math.sqrt(q) - t.c_hat
        elif q <= t.crs[0]:
            out[i] = t.ms[0]
        else:
            out[i] = brentq(lambda x: t.interpolant(x) - q,
                            t.ms[0].item(), t.m_max, xtol=1e-12)
    return _ret(out, scalar)


def asymptotic_bounds(Q):
    """Sandwich for the modulus: ((pi/2) sqrt(Q) - pi/2, (pi/2) sqrt(Q)).

    The width-pi/2 band that the empirical constants make valid for
    every tabulated cross ratio.
    """
    Q, scalar = _prep(Q)
    if (Q < 2.0).any():
        raise ValueError("cross ratio must be at least 2")
    up = 0.5 * _PI * np.sqrt(Q)
    lo = up - 0.5 * _PI
    if scalar:
        return lo[0].item(), up[0].item()
    return lo, up


def modulus_pdf(m, table: CrMapTable | None = None):
    """Density of the modulus of a random ideal quadrilateral, m >= 1.

    The canonical cross-ratio law pushed through the inverse map:
    density of CR times the spline derivative inside the table, the
    asymptotic-extension analogue above it.  The spline value is clamped
    to the law's support edge at 2, where rounding can undershoot.
    """
    t = table if table is not None else default_table()
    m, scalar = _prep(m)
    if (m < 1.0).any():
        raise ValueError("modulus law is supported on m >= 1")
    out = np.empty_like(m)
    mid = m <= t.m_max
    if mid.any():
        mm = m[mid]
        out[mid] = np.asarray(quad_cr_pdf(np.maximum(t.interpolant(mm), 2.0))) * t.deriv(mm)
    high = ~mid
    if high.any():
        mh = m[high]
        q = (2.0 * (mh + t.c_hat) / _PI) ** 2
        out[high] = np.asarray(quad_cr_pdf(q)) * (8.0 * (mh + t.c_hat) / _PI2)
    return _ret(out, scalar)


def teich_pdf(d, table: CrMapTable | None = None):
    """Density of the log of the modulus (the distance to the square)."""
    d, scalar = _prep(d)
    if (d < 0).any():
        raise ValueError("log-modulus law is supported on d >= 0")
    e = np.exp(d)
    return _ret(np.asarray(modulus_pdf(e, table)) * e, scalar)


def summary_stats(table: CrMapTable | None = None) -> tuple[float, float, float]:
    """(mean, median, sd) of the log-modulus law.

    Moments by quadrature in cross-ratio space, where the integrand is
    the exact closed-form law times powers of log(inverse map); the
    median is the pushforward of the cross-ratio median.
    """
    t = table if table is not None else default_table()

    def moment(p: float) -> float:
        def f(q: float) -> float:
            return math.log(modulus_of_cr(q, t)) ** p * quad_cr_pdf(q)

        v1, _ = quad(f, 2.0, t.cr_max, limit=400)
        v2, _ = quad(f, t.cr_max, np.inf, limit=400)
        return v1 + v2

    mean = moment(1)
    sd = math.sqrt(moment(2) - mean * mean)
    median = math.log(modulus_of_cr(quad_cr_median(), t))
    return mean, median, sd


def quasimobius_K(Q_src: float, Q_dst: float, table: CrMapTable | None = None) -> float:
    """Stretch constant between the tori of two cross ratios.

    The larger of the two modulus ratios; 1 exactly when the arguments
    coincide, symmetric, and growing like the square-root asymptote of
    the inverse map.
    """
    if Q_src < 2.0 or Q_dst < 2.0:
        raise ValueError("cross ratios must be at least 2")
    a = modulus_of_cr(Q_src, table)
    b = modulus_of_cr(Q_dst, table)
    return max(a / b, b / a)


def derived_pdf(kind: str, table: CrMapTable | None = None) -> DerivedPdf:
    """Package the modulus or log-modulus density as a DerivedPdf."""
    if kind == "modulus":
        return DerivedPdf(kind, lambda m: modulus_pdf(m, table))
    if kind == "teich":
        return DerivedPdf(kind, lambda d: teich_pdf(d, table))
    raise ValueError(f"unknown derived density {kind!r}")
