"""Traffic phases of the junction line in the (m, dm) plane.

Each phase is a plane f0 = F(m, dm); the central frequency is the minimum
of the seven planes (clipped at zero), so the binding plane names the phase.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .line import Aggregates, feasible
from .steady_state import headway_junction

PHASES = ("I-a", "I-b", "II-a", "II-b", "III-a", "III-b", "IV-a", "IV-b")

# boundary ties: IV-a > I > II > III, and a before b inside a pair
_PRECEDENCE = ("IV-a", "I-a", "I-b", "II-a", "II-b", "III-a", "III-b")


@dataclass(frozen=True)
class Phase:
    label: str
    f0: float         # trains / hour
    formula: str

    def __str__(self) -> str:
        return self.label


FORMULAS = {
    "I-a": "(m - dm) / (T0 + T1)",
    "I-b": "(m + dm) / (T0 + T2)",
    "II-a": "2 (n2 - dm) / (T1 + S2)",
    "II-b": "2 (n1 + dm) / (S1 + T2)",
    "III-a": "(mbar + dmbar) / (S0 + S2)",
    "III-b": "(mbar - dmbar) / (S0 + S1)",
    "IV-a": "1 / h_min",
    "IV-b": "0",
}


def plane_values(agg: Aggregates, m: float, dm: float) -> Dict[str, float]:
    """Frequency of every plane at (m, dm), in trains / second."""
    mbar = agg.n - m
    dmbar = agg.dn - dm
    return {
        "I-a": (m - dm) / (agg.T0 + agg.T1),
        "I-b": (m + dm) / (agg.T0 + agg.T2),
        "II-a": 2 * (agg.n2 - dm) / (agg.T1 + agg.S2),
        "II-b": 2 * (agg.n1 + dm) / (agg.S1 + agg.T2),
        "III-a": (mbar + dmbar) / (agg.S0 + agg.S2),
        "III-b": (mbar - dmbar) / (agg.S0 + agg.S1),
        "IV-a": 1.0 / agg.h_min,
    }


def classify(m: float, dm: float, agg: Aggregates, tol: float = 1e-12) -> Phase:
    if not feasible(agg.n0, agg.n1, agg.n2, m, dm):
        return Phase("IV-b", 0.0, FORMULAS["IV-b"])
    vals = plane_values(agg, m, dm)
    f = min(vals.values())
    for label in _PRECEDENCE:
        if vals[label] - f <= tol * max(1.0, abs(f)):
            return Phase(label, 3600.0 * vals[label], FORMULAS[label])
    raise AssertionError("unreachable")  # pragma: no cover


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Line2D:
    """dm = slope * m + intercept."""

    slope: float
    intercept: float

    def at(self, m: float) -> float:
        return self.slope * m + self.intercept

    def contains(self, p: Tuple[float, float], tol: float = 1e-9) -> bool:
        return abs(self.at(p[0]) - p[1]) <= tol * max(1.0, abs(p[1]))


@dataclass(frozen=True)
class PolygonGeometry:
    f_max: float  # trains / second
    points: Dict[str, Tuple[float, float]]
    lines: Dict[str, Line2D]

    def __getitem__(self, name: str) -> Tuple[float, float]:
        return self.points[name]


def polygon_points(agg: Aggregates) -> PolygonGeometry:
    h = agg.h_min
    if not (h > 0 and math.isfinite(h)):
        raise ValueError("degenerate line: h_min must be positive and finite")
    n0, n1, n2, n, dn = agg.n0, agg.n1, agg.n2, agg.n, agg.dn
    T0, T1, T2, S0, S1, S2 = agg.T0, agg.T1, agg.T2, agg.S0, agg.S1, agg.S2
    T, dT, dS = agg.T, agg.dT, agg.dS
    f = 1.0 / h
    pts = {
        "A": (0.0, 0.0),
        "B": (float(n1), float(-n1)),
        "C": (float(n0 + n1), float(-n1)),
        "D": (float(n), float(dn)),
        "E": (float(n0 + n2), float(n2)),
        "F": (float(n2), float(n2)),
        "G": (T * f, dT * f / 2),
        "H": ((2 * T0 + T2 - S1) / (2 * h) + n1, (S1 + T2) / (2 * h) - n1),
        "I": (n0 + n1 + (T2 - 2 * S0 - S1) / (2 * h), (S1 + T2) / (2 * h) - n1),
        "J": (n - (2 * S0 + S1 + S2) / (2 * h), dn - dS / (2 * h)),
        "K": (n0 + n2 + (T1 - 2 * S0 - S2) / (2 * h), n2 - (T1 + S2) / (2 * h)),
        "L": ((2 * T0 + T1 - S2) / (2 * h) + n2, n2 - (T1 + S2) / (2 * h)),
    }
    lines = {
        # feasible polygon ABCDEF
        "AB": Line2D(-1.0, 0.0),
        "BC": Line2D(0.0, float(-n1)),
        "CD": Line2D(1.0, float(-(n0 + 2 * n1))),
        "DE": Line2D(-1.0, float(n0 + 2 * n2)),
        "EF": Line2D(0.0, float(n2)),
        "FA": Line2D(1.0, 0.0),
        # capacity plateau GHIJKL
        "GH": Line2D(-1.0, (T0 + T2) / h),
        "HI": Line2D(0.0, (S1 + T2) / (2 * h) - n1),
        "IJ": Line2D(1.0, -(n0 + 2 * n1) + (S0 + S1) / h),
        "JK": Line2D(-1.0, n0 + 2 * n2 - (S0 + S2) / h),
        "KL": Line2D(0.0, n2 - (T1 + S2) / (2 * h)),
        "LG": Line2D(1.0, -(T0 + T1) / h),
        # phase borders radiating from the plateau
        "AG": Line2D(dT / T / 2, 0.0),
        "BH": Line2D(-(S1 + T2) / (S1 - 2 * T0 - T2), 2 * n1 * (T0 + T2) / (S1 - 2 * T0 - T2)),
        "CI": Line2D(-(S1 + T2) / (2 * S0 + S1 - T2),
                     (-2 * n1 * (S0 - T2) + (S1 + T2) * n0) / (2 * S0 + S1 - T2)),
        "DJ": Line2D(dS / (2 * S0 + S1 + S2), dn - dS * n / (2 * S0 + S1 + S2)),
        # II-a / III-a border, derived by equating the two planes; it passes
        # through E and K (the printed form carries the opposite sign on m - n0)
        "EK": Line2D((S2 + T1) / (2 * S0 + S2 - T1),
                     (2 * n2 * (S0 - T1) - (S2 + T1) * n0) / (2 * S0 + S2 - T1)),
        "FL": Line2D((S2 + T1) / (S2 - 2 * T0 - T1), -2 * n2 * (T0 + T1) / (S2 - 2 * T0 - T1)),
    }
    return PolygonGeometry(f, pts, lines)


# ---------------------------------------------------------------------------
# Optimal difference
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimalDm:
    """Optimal dm for a given m: a single value or the interval on the plateau."""

    lo: float
    hi: float

    @property
    def unique(self) -> bool:
        return abs(self.hi - self.lo) <= 1e-12

    @property
    def value(self) -> float:
        return (self.lo + self.hi) / 2

    def rounded(self) -> int:
        return int(math.floor(self.value + 0.5))


def plateau_interval(m: float, agg: Aggregates) -> Tuple[float, float]:
    """dm range keeping (m, dm) on the capacity plateau (may be empty: lo > hi)."""
    f = 1.0 / agg.h_min
    n, dn = agg.n, agg.dn
    lower = max(
        (agg.T0 + agg.T2) * f - m,
        (agg.S1 + agg.T2) * f / 2 - agg.n1,
        (agg.S0 + agg.S1) * f - n + m + dn,
    )
    upper = min(
        m - (agg.T0 + agg.T1) * f,
        agg.n2 - (agg.T1 + agg.S2) * f / 2,
        n - m + dn - (agg.S0 + agg.S2) * f,
    )
    return lower, upper


def optimal_dm(m: float, agg: Aggregates) -> OptimalDm:
    f = 1.0 / agg.h_min
    if m <= agg.T * f:
        v = agg.dT / (2 * agg.T) * m
        return OptimalDm(v, v)
    if m >= agg.n - agg.S * f:
        v = agg.dn + agg.dS / (2 * agg.S) * (m - agg.n)
        return OptimalDm(v, v)
    lo, hi = plateau_interval(m, agg)
    return OptimalDm(lo, hi)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

SWEEP_HEADER = "m,dm,f0_trains_per_hour,h0_s,phase"


@dataclass(frozen=True)
class SweepRow:
    m: float
    dm: float
    f0: float
    h0: float
    phase: str


def _fmt(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.6f}"


def sweep(agg: Aggregates, m_range: Iterable[float], dm_range: Sequence[float],
          agg_fn=None) -> List[SweepRow]:
    """Evaluate every (m, dm) cell; agg_fn(m, dm) may supply cell-specific aggregates."""
    rows = []
    dms = list(dm_range)
    for m in m_range:
        for dm in dms:
            a = agg if agg_fn is None else agg_fn(m, dm)
            rep = headway_junction(a, m, dm)
            ph = classify(m, dm, a)
            rows.append(SweepRow(m, dm, rep.f0, rep.h0, ph.label))
    return rows


def sweep_csv(rows: Iterable[SweepRow], header_comment: Optional[str] = None,
              fractional: bool = False) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(header_comment.rstrip("\n") + "\n")
    if fractional:
        buf.write("# grid: fractional (plotting only)\n")
    buf.write(SWEEP_HEADER + "\n")
    for r in rows:
        m_txt = f"{r.m:.6f}" if fractional else str(int(r.m))
        dm_txt = f"{r.dm:.6f}" if fractional else str(int(r.dm))
        buf.write(f"{m_txt},{dm_txt},{_fmt(r.f0)},{_fmt(r.h0)},{r.phase}\n")
    return buf.getvalue()


def full_grid(agg: Aggregates) -> Tuple[range, range]:
    """Integer bounding box of the feasible polygon."""
    return range(0, agg.n + 1), range(-agg.n1, agg.n2 + 1)
