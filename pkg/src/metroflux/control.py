"""Passenger-demand parameters, dwell/run laws and the feedback control laws.

Frequencies handed to and returned by the control laws are in trains per
hour; every time is in seconds.  Rounding of the macroscopic laws follows
the one table of published results: m is rounded up (the frequency target
is met) and dm to the nearest integer, halves away from zero.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .line import Aggregates, InfeasibleError, LineTopology, OverrideSpec, SegmentKey, feasible

INF = math.inf
ROUNDING = "m=ceil,dm=nearest"


class SaturationError(ValueError):
    """Demand parameter x reached 1: dwell times would be unbounded."""


# ---------------------------------------------------------------------------
# Demand laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DemandParams:
    x: float
    X: float


def demand_parameter(lambda_in: float, lambda_out: float,
                     alpha_in: float, alpha_out: float) -> DemandParams:
    """x = lambda_out / alpha_out + lambda_in / alpha_in and X = x / (1 - x)."""
    x = 0.0
    for lam, alpha, name in ((lambda_out, alpha_out, "out"), (lambda_in, alpha_in, "in")):
        if lam < 0:
            raise ValueError(f"lambda_{name} must be non-negative")
        if lam > 0:
            if not alpha > 0:
                raise ValueError(f"alpha_{name} must be positive when lambda_{name} > 0")
            x += lam / alpha
    if x >= 1.0:
        raise SaturationError(f"demand saturation: x = {x:.6f} >= 1")
    return DemandParams(x, x / (1.0 - x))


def dwell_time(h: float, x: float, w_bar: float, gamma: float = 0.0) -> float:
    """min((1 - gamma) x h, w_bar)."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    return min((1.0 - gamma) * x * h, w_bar)


def run_time(h: float, x: float, r_nominal: float, r_min: float, h_min: float) -> float:
    """max(r_min, r_nominal - x (h - h_min))."""
    return max(r_min, r_nominal - x * (h - h_min))


# ---------------------------------------------------------------------------
# Stability of the demand-dependent dynamics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlatformStability:
    key: SegmentKey
    x: float
    X: float
    dw: float          # X * dg, the largest dwell extension
    dr: float          # run time margin
    h_bar: float       # largest admissible initial headway
    h_first: Optional[float]
    margin_ok: bool
    headway_ok: bool

    @property
    def ok(self) -> bool:
        return self.margin_ok and self.headway_ok


@dataclass(frozen=True)
class StabilityReport:
    platforms: Tuple[PlatformStability, ...]

    @property
    def ok(self) -> bool:
        return all(p.ok for p in self.platforms)

    def failures(self) -> List[str]:
        out = []
        for p in self.platforms:
            if not p.margin_ok:
                out.append(f"platform {p.key}: dwell extension {p.dw:.6f} s exceeds run margin {p.dr:.6f} s")
            if not p.headway_ok:
                out.append(f"platform {p.key}: initial headway {p.h_first:.6f} s above h_bar {p.h_bar:.6f} s")
        return out


def max_dwell(line, key: SegmentKey) -> float:
    """w_bar = X g_min + dr: dwell times may grow by at most the run margin."""
    sp = line.seg(*key)
    x = line.x_of(*key)
    return x / (1.0 - x) * sp.g_lo + line.margin_of(*key)


def stability_check(line, initial_headways: Optional[Mapping[SegmentKey, float]] = None,
                    w_bar: Optional[Mapping[SegmentKey, float]] = None) -> StabilityReport:
    """Check dr >= X dg and h^1 <= h_bar = g_min / (1 - x) + dr / x per platform.

    Segments without demand pass trivially.  The dwell extension dw is
    taken from ``w_bar`` when given (dw = w_bar - X g_min), else from the
    segment's g_max (dw = X (g_max - g_min)), else from the default maximum
    dwell X g_min + dr, which makes dw = dr.
    """
    rows = []
    for key in line.segment_keys():
        x = line.x_of(*key)
        if x <= 0.0:
            continue
        if x >= 1.0:
            raise SaturationError(f"segment {key}: demand saturation (x >= 1)")
        sp = line.seg(*key)
        X = x / (1.0 - x)
        dr = line.margin_of(*key)
        if w_bar is not None and key in w_bar:
            dw = w_bar[key] - X * sp.g_lo
        elif sp.g_max is not None:
            dw = X * (sp.g_hi - sp.g_lo)
        else:
            dw = max_dwell(line, key) - X * sp.g_lo   # = dr by construction
        h_bar = sp.g_lo / (1.0 - x) + dr / x
        h1 = None if initial_headways is None else initial_headways.get(key)
        tol = 1e-9 * max(1.0, abs(dr))
        rows.append(PlatformStability(
            key, x, X, dw, dr, h_bar, h1,
            margin_ok=dw <= dr + tol,
            headway_ok=h1 is None or h1 <= h_bar * (1 + 1e-12),
        ))
    return StabilityReport(tuple(rows))


# ---------------------------------------------------------------------------
# Macroscopic control of m and dm
# ---------------------------------------------------------------------------

def _ceil(v: float) -> int:
    # 1e-9 guards against T f landing a hair above an integer by float noise
    return int(math.ceil(v - 1e-9))


def nearest(v: float) -> int:
    """Nearest integer, halves away from zero."""
    return int(math.copysign(math.floor(abs(v) + 0.5), v))


@dataclass(frozen=True)
class ControlPlan:
    f0: float                       # target, trains / hour
    m: int
    dm: int
    rounding: str = ROUNDING
    overrides: Tuple[OverrideSpec, ...] = ()
    h_req: Optional[float] = None   # seconds
    h_fea: Optional[float] = None   # seconds
    period: str = ""

    @property
    def f_fea(self) -> float:
        return 3600.0 / self.h_fea if self.h_fea else self.f0


def feedback_demand(f0: float, agg: Aggregates, check: bool = True) -> ControlPlan:
    """m = ceil(T f0), dm = nearest(dT f0 / 2) for a target f0 in trains / hour."""
    if f0 < 0:
        raise ValueError("target frequency must be non-negative")
    f_max = 3600.0 * agg.f_max
    if f0 > f_max * (1 + 1e-12):
        raise InfeasibleError(f"target f0 = {f0:.6f}/h exceeds f_max = {f_max:.6f}/h")
    f = f0 / 3600.0
    m = _ceil(agg.T * f)
    dm = nearest(agg.dT * f / 2)
    if check and m > 0 and not feasible(agg.n0, agg.n1, agg.n2, m, dm):
        raise InfeasibleError(f"(m, dm) = ({m}, {dm}) lies outside the feasible polygon")
    return ControlPlan(f0, m, dm)


def feedback_fixed_m(m: int, T: float, dT: float) -> Tuple[int, float]:
    """Keep m, follow the observed T, dT: dm = nearest(m dT / (2 T)), f0 = m / T per hour."""
    if T <= 0:
        raise ValueError("observed T must be positive")
    return nearest(m * dT / (2.0 * T)), 3600.0 * m / T


def feedback_fixed_f(f0: float, T: float, dT: float) -> Tuple[int, int]:
    """Keep f0 (trains / hour): m = ceil(f0 T), dm = nearest(f0 dT / 2)."""
    f = f0 / 3600.0
    return _ceil(f * T), nearest(f * dT / 2.0)


# ---------------------------------------------------------------------------
# Headway required by the passenger charge
# ---------------------------------------------------------------------------

def required_and_feasible_headway(charges: Mapping[SegmentKey, float], kappa: float,
                                  h_min: float) -> Tuple[float, float]:
    """(h_req, h_fea) in seconds for charges in passengers / hour.

    A central segment needs kappa / c hours between trains, a branch
    segment kappa / (2 c) since each branch sees every other train.  With no
    charge anywhere h_req is inf.
    """
    if not kappa > 0:
        raise ValueError("train capacity kappa must be positive")
    h_req = INF
    for (u, _), c in charges.items():
        if c is None or c <= 0:
            continue
        need = 3600.0 * kappa / (c if u == 0 else 2.0 * c)
        h_req = min(h_req, need)
    return h_req, max(h_req, h_min)


def charges_of(topo: LineTopology) -> Dict[SegmentKey, float]:
    return {k: d.charge for k, d in topo.demand.items() if d.charge}


def plan_for_headway(h_req: float, agg: Aggregates, period: str = "") -> ControlPlan:
    """Clip the required headway at h_min and apply the demand feedback law."""
    h_fea = max(h_req, agg.h_min)
    f0 = 0.0 if math.isinf(h_fea) else 3600.0 / h_fea
    plan = feedback_demand(f0, agg)
    return ControlPlan(plan.f0, plan.m, plan.dm, h_req=h_req, h_fea=h_fea, period=period)


def control_table(rows: Iterable[Tuple[str, float]], agg: Aggregates) -> List[ControlPlan]:
    """One plan per (period, h_req) row."""
    return [plan_for_headway(h, agg, period) for period, h in rows]


CONTROL_HEADER = ["period", "f0_target", "h_req_s", "h_fea_s", "m", "dm"]


def _fmt(v: Optional[float]) -> str:
    if v is None:
        return ""
    return "inf" if math.isinf(v) else f"{v:.6f}"


def control_csv(plans: Sequence[ControlPlan], header_comment: Optional[str] = None) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(header_comment.rstrip("\n") + "\n")
    buf.write(f"# rounding: {ROUNDING}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONTROL_HEADER)
    for p in plans:
        w.writerow([p.period, _fmt(p.f0), _fmt(p.h_req), _fmt(p.h_fea), p.m, p.dm])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Passing order at the convergence
# ---------------------------------------------------------------------------

def passing_order_plan(delta_dm: int, start_k: int = 1, spacing: int = 2) -> List[OverrideSpec]:
    """One double pass per unit change of dm.

    Two consecutive trains from branch 2 lower dm = m2 - m1 by one (branch 2
    empties faster than the divergence refills it); two from branch 1 raise
    it.  Successive double passes start ``spacing`` convergence events apart.
    """
    if spacing < 2:
        raise ValueError("double passes need at least two events each")
    branch = 2 if delta_dm < 0 else 1
    return [OverrideSpec(start_k + i * spacing, branch) for i in range(abs(delta_dm))]


@dataclass(frozen=True)
class PerturbationPlan:
    """Passing-order response to a travel-time change on one branch."""

    dm_nominal: int
    dm_perturbed: int
    dm_recovered: int
    overrides: Tuple[OverrideSpec, ...] = field(default=())


def perturbation_plan(m: int, T: float, dT: float, shift: float,
                      k_start: int, k_recover: int) -> PerturbationPlan:
    """dm' from dT + shift (shift = -2 h0 for a delay on branch 1), dm'' back at dT.

    The overrides realize dm' - dm at central event ``k_start`` and
    dm'' - dm' at ``k_recover``.
    """
    dm0, _ = feedback_fixed_m(m, T, dT)
    dm1, _ = feedback_fixed_m(m, T, dT + shift)
    dm2, _ = feedback_fixed_m(m, T, dT)
    ov = passing_order_plan(dm1 - dm0, k_start) + passing_order_plan(dm2 - dm1, k_recover)
    return PerturbationPlan(dm0, dm1, dm2, tuple(ov))
