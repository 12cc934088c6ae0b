"""Closed-form asymptotic headways and frequencies.

Junction line: h0 = max(h_fw, h_min, h_bw, h_br) with

    h_fw  = max{(T0+T1)/(m-dm), (T0+T2)/(m+dm)}
    h_bw  = max{(S0+S1)/(mbar-dmbar), (S0+S2)/(mbar+dmbar)}
    h_br  = max{(T1+S2)/(2(n2-dm)), (S1+T2)/(2(n1+dm))}

and h_min from the per-segment sums t + s.  A term whose denominator is not
positive is +inf: the point sits on (or outside) the border of the feasible
polygon and the flow is zero there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional

from .line import Aggregates, LinearLine, LineTopology, SegmentKey, aggregates

INF = math.inf

# tie precedence, highest first: the capacity plateau claims its edges
_PRECEDENCE = ("min", "fw", "br", "bw")


@dataclass(frozen=True)
class HeadwayReport:
    h_fw: float
    h_min: float
    h_bw: float
    h_br: float
    h0: float
    f0: float       # trains / hour on the central part
    binding: str    # fw, min, bw, br or zero

    @property
    def h1(self) -> float:
        return 2 * self.h0

    @property
    def h2(self) -> float:
        return 2 * self.h0

    @property
    def f1(self) -> float:
        return self.f0 / 2

    @property
    def f2(self) -> float:
        return self.f0 / 2


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else INF


def _binding(terms: Mapping[str, float], h0: float) -> str:
    tol = 1e-12 * max(1.0, abs(h0))
    for name in _PRECEDENCE:
        if abs(terms[name] - h0) <= tol:
            return name
    raise AssertionError("no binding term")  # pragma: no cover


def headway_junction(agg: Aggregates, m: float, dm: float) -> HeadwayReport:
    """Asymptotic central headway of the junction line with occupancy (m, dm)."""
    n = agg.n
    mbar = n - m
    dmbar = agg.dn - dm
    h_fw = max(_ratio(agg.T0 + agg.T1, m - dm), _ratio(agg.T0 + agg.T2, m + dm))
    h_bw = max(_ratio(agg.S0 + agg.S1, mbar - dmbar), _ratio(agg.S0 + agg.S2, mbar + dmbar))
    h_br = max(_ratio(agg.T1 + agg.S2, 2 * (agg.n2 - dm)), _ratio(agg.S1 + agg.T2, 2 * (agg.n1 + dm)))
    terms = {"fw": h_fw, "min": agg.h_min, "bw": h_bw, "br": h_br}
    h0 = max(terms.values())
    if m <= 0 or m >= n or math.isinf(h0):
        return HeadwayReport(h_fw, agg.h_min, h_bw, h_br, INF, 0.0, "zero")
    return HeadwayReport(h_fw, agg.h_min, h_bw, h_br, h0, 3600.0 / h0, _binding(terms, h0))


def frequency_junction(agg: Aggregates, m: float, dm: float):
    """(f0, f1, f2) in trains / hour."""
    rep = headway_junction(agg, m, dm)
    return rep.f0, rep.f0 / 2, rep.f0 / 2


# ---------------------------------------------------------------------------
# Linear line
# ---------------------------------------------------------------------------

def _linear_terms(t, s, m: int):
    n = len(t)
    return sum(t) / m, max(a + b for a, b in zip(t, s)), _ratio(sum(s), n - m)


def headway_linear(line: LinearLine, m: int) -> float:
    """max{sum t / m, max_j (t_j + s_j), sum s / (n - m)}; inf for m in {0, n}."""
    if m <= 0 or m >= line.n:
        return INF
    t = [sp.t_min for sp in line.segments]
    s = [sp.s_min for sp in line.segments]
    return max(_linear_terms(t, s, m))


def demand_travel(line, X: Optional[Mapping[SegmentKey, float]] = None,
                  margin: Optional[float] = None) -> Dict[SegmentKey, float]:
    """Per-segment travel time r_nominal + X g_min under demand.

    X defaults to the line's demand data and margin to its run margin.
    """
    out = {}
    for key in line.segment_keys():
        sp = line.seg(*key)
        if X is None:
            x = line.x_of(*key)
            Xj = x / (1 - x)
        else:
            Xj = X.get(key, 0.0)
        if not Xj >= 0 or math.isinf(Xj):
            raise ValueError(f"segment {key}: demand saturation (x >= 1)")
        if margin is None:
            r_nom = line.r_nominal(*key)
        else:
            r_nom = sp.r_min * (1 + margin)
        out[key] = r_nom + Xj * sp.g_lo
    return out


def headway_linear_demand(line: LinearLine, m: int, X=None, margin=None) -> float:
    if m <= 0 or m >= line.n:
        return INF
    tv = demand_travel(line, X, margin)
    t = [tv[k] for k in line.segment_keys()]
    s = [sp.s_min for sp in line.segments]
    return max(_linear_terms(t, s, m))


def demand_aggregates(topo: LineTopology, X=None, margin=None) -> Aggregates:
    """Aggregates with every travel time replaced by r_nominal + X g_min."""
    return aggregates(topo, demand_travel(topo, X, margin))


def headway_junction_demand(topo: LineTopology, m: float, dm: float, X=None, margin=None) -> HeadwayReport:
    return headway_junction(demand_aggregates(topo, X, margin), m, dm)
