"""Reference scenarios built on the simulator.

Two studies live here:

* a travel-time incident on one branch of a junction line, run once with
  the plain one-over-two order at the convergence and once with the
  passing-order overrides derived from the observed branch delays;
* perturbed initial headways on the central ring under demand-dependent
  dwell times, with and without the gamma-weighted dwell shortening.

Both start from a regime the fixed-time dynamics would keep forever (the
eigen-regime of the lifted junction matrix, or a free-running timetable on
the ring), so every deviation measured afterwards is caused by the
perturbation itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .control import PerturbationPlan, perturbation_plan
from .line import LinearLine, LineTopology, Node, OccupancyVector, PerturbationSpec, aggregates
from .matrices import eigen_headway, eigen_history
from .simulate import (
    FIXED,
    DepartureLog,
    GammaSchedule,
    History,
    PassingOrder,
    constant_gamma,
    convergence_wait,
    linear_decay_gamma,
    simulate,
    simulate_harmonized,
)
from .steady_state import demand_travel

CENTRAL_IN: Node = (0, 0)


# ---------------------------------------------------------------------------
# Headway measures
# ---------------------------------------------------------------------------

def two_step_headway(log: DepartureLog, node: Node = CENTRAL_IN) -> Tuple[np.ndarray, np.ndarray]:
    """(t, h) with h^k = (d^k - d^(k-2)) / 2 stamped at t = d^k.

    Behind a junction consecutive central headways alternate between two
    values even in the periodic regime; their two-step mean is the one
    that settles at h0.
    """
    d = log.depart[node]
    return d[2:], (d[2:] - d[:-2]) / 2.0


def recovery_time(log: DepartureLog, h0: float, start: float, horizon: float,
                  tol: float = 0.02, node: Node = CENTRAL_IN) -> float:
    """Seconds from ``start`` to the last two-step headway off h0 by more than tol.

    Only events stamped in [start, start + horizon] count; 0 means the
    headway never left the band.
    """
    t, h = two_step_headway(log, node)
    sel = (t >= start) & (t <= start + horizon)
    bad = np.flatnonzero(sel & (np.abs(h - h0) > tol * h0))
    if bad.size == 0:
        return 0.0
    return float(t[bad[-1]] - start)


def exit_delays(log: DepartureLog, base: DepartureLog, branch: int) -> np.ndarray:
    """Per-train delay at the last node of a branch, against an unperturbed run."""
    last = max(j for u, j in log.nodes if u == branch)
    d, d0 = log.depart[(branch, last)], base.depart[(branch, last)]
    n = min(len(d), len(d0))
    return d[:n] - d0[:n]


# ---------------------------------------------------------------------------
# Branch incident under passing-order control
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IncidentStudy:
    h0: float                 # nominal central headway of the regime, s
    plan: PerturbationPlan
    recovery_plain: float     # s, one-over-two order kept
    recovery_controlled: float
    wait_plain: float         # total convergence waiting of the unaffected branch, s
    wait_controlled: float
    horizon: float
    plain: DepartureLog
    controlled: DepartureLog

    @property
    def recovers_sooner(self) -> bool:
        return self.recovery_controlled < self.recovery_plain

    @property
    def waits_less(self) -> bool:
        return self.wait_controlled < self.wait_plain


def incident_overrides(base: DepartureLog, plain: DepartureLog, branch: int,
                       m: int, T: float, dT: float, shift: float,
                       tol: float = 1.0) -> PerturbationPlan:
    """Passing-order plan for an incident seen as delays on ``branch``.

    The first double pass of the other branch is placed just before the
    first delayed train would reach the convergence; the restoring double
    pass of the affected branch follows the last delayed train, counted in
    the order already modified by the first.
    """
    delay = exit_delays(plain, base, branch)
    late = np.flatnonzero(delay > tol)
    if late.size == 0:
        raise ValueError(f"no delayed train on branch {branch}")
    # the first block of consecutive delayed trains; later ones are the
    # incident's wave coming round the loop
    stop = late.size
    for i in range(1, late.size):
        if late[i] != late[i - 1] + 1:
            stop = i
            break
    first_rank, last_rank = int(late[0]) + 1, int(late[stop - 1]) + 1
    nominal = PassingOrder()
    k_start = nominal.index_of(branch, first_rank) - 1
    draft = perturbation_plan(m, T, dT, shift, k_start, k_start + 2)
    n_first = abs(draft.dm_perturbed - draft.dm_nominal)
    shifted = PassingOrder(draft.overrides[:n_first])
    k_recover = shifted.index_of(branch, last_rank) + 1
    return perturbation_plan(m, T, dT, shift, k_start, k_recover)


def incident_study(topo: LineTopology, m: int, dm: int, delay: float = 303.0,
                   branch: int = 1, segments: Tuple[int, int] = (16, 20), count: int = 5,
                   start_time: float = 600.0, K: int = 60, tol: float = 0.02) -> IncidentStudy:
    """Delay ``count`` consecutive trains by ``delay`` s spread over a branch stretch.

    Recovery is measured at the central entry node over one loop of the
    line, the horizon beyond which the incident's own wave comes around
    again.
    """
    from .line import place_trains

    b = place_trains(topo, m, dm)
    hist = eigen_history(topo, b)
    h0 = float(eigen_headway(topo, b))
    agg = aggregates(topo)
    j_from, j_to = segments
    pert = PerturbationSpec(u=branch, j_from=j_from, j_to=j_to,
                            extra=delay / (j_to - j_from + 1), count=count, start_time=start_time)
    base = simulate(topo, b, FIXED, K=K, history=hist)
    plain = simulate(topo, b, FIXED, K=K, perturbations=[pert], history=hist)
    shift = -2.0 * h0 if branch == 1 else 2.0 * h0
    plan = incident_overrides(base, plain, branch, m, agg.T, agg.dT, shift)
    ctrl = simulate(topo, b, FIXED, K=K, perturbations=[pert], overrides=plan.overrides, history=hist)
    other = 3 - branch
    horizon = agg.T
    return IncidentStudy(
        h0=h0, plan=plan,
        recovery_plain=recovery_time(plain, h0, start_time, horizon, tol),
        recovery_controlled=recovery_time(ctrl, h0, start_time, horizon, tol),
        wait_plain=convergence_wait(plain, other),
        wait_controlled=convergence_wait(ctrl, other),
        horizon=horizon, plain=plain, controlled=ctrl,
    )


# ---------------------------------------------------------------------------
# Perturbed headways on the ring
# ---------------------------------------------------------------------------

def ring_timetable(ring: LinearLine, gaps: Sequence[float], travel: Optional[Dict] = None,
                   ) -> Tuple[OccupancyVector, History, Dict[Node, float]]:
    """Occupancy and history of trains running freely with given station gaps.

    ``gaps`` are the successive passing intervals at the first platform;
    the last gap closes the loop so the gaps must sum to less than the
    ring's travel time L, the remainder going to the closing interval.
    Every train runs at demand travel times (``travel`` defaults to
    r_nominal + X g_min), so d^0 at a node is its last passing at or
    before time 0.
    """
    tv = demand_travel(ring) if travel is None else travel
    n = ring.n
    t = np.array([tv[(0, j)] for j in range(1, n + 1)])
    L = float(t.sum())
    if sum(gaps) >= L:
        raise ValueError(f"gaps sum to {sum(gaps):.6f} s, not below the loop time {L:.6f} s")
    plats = [j for j in range(1, n + 1) if ring.seg(0, j).is_platform]
    jp = plats[0] if plats else 1
    # offset of each node from the reference platform, following the ring
    offset = {}
    acc = 0.0
    j = jp
    for _ in range(n):
        offset[j] = acc
        j = (j + 1) % n
        acc += t[j - 1] if j else t[n - 1]
    passing = np.concatenate(([0.0], np.cumsum(gaps)))  # trains at the reference platform
    d0 = {}
    for j in range(n):
        v = passing + offset[j]
        v = v - np.ceil(v / L) * L          # into (-L, 0]
        d0[(0, j)] = float(v.max())
    b = [0] * n
    for s in passing:
        # next node the train reaches strictly after time 0; a passing at
        # exactly 0 already counts as d^0 there
        nxt = min(range(n), key=lambda jj: (s + offset[jj]) % L or L)
        seg = nxt if nxt else n
        if b[seg - 1]:
            raise ValueError("two trains on one segment: gaps too short")
        b[seg - 1] = 1
    occ = OccupancyVector.from_parts(b, [], [])
    return occ, (lambda node, k: d0[node]), d0


def perturbed_gaps(m: int, L: float, pattern: Sequence[float] = (175.0, 191.0, 339.0, 96.0)) -> List[float]:
    """m - 1 station gaps: the pattern, then equal gaps filling the loop."""
    if m <= len(pattern):
        raise ValueError("need more trains than perturbed gaps")
    rest = (L - sum(pattern)) / (m - len(pattern))
    return list(pattern) + [rest] * (m - 1 - len(pattern))


def final_spread(log: DepartureLog, node: Node, m: int, until: float) -> float:
    """Standard deviation of the last m headways departed by ``until``."""
    d = log.depart[node]
    h = log.headways(node)[d <= until]
    return float(np.std(h[-m:]))


def pooled_spread(log: DepartureLog, nodes: Sequence[Node], m: int) -> np.ndarray:
    """Spread over all given nodes of a rolling window of m headways."""
    H = np.array([log.headways(nd) for nd in nodes])
    return np.array([H[:, k - m:k].std() for k in range(m, H.shape[1] + 1)])


def harmonization_index(spread: np.ndarray, reference: float,
                        fraction: float = 0.5) -> Optional[int]:
    """First window index at which the spread falls to ``fraction`` of ``reference``."""
    hit = np.flatnonzero(spread <= fraction * reference)
    return int(hit[0]) if hit.size else None


@dataclass(frozen=True)
class HarmonizationRun:
    label: str
    log: DepartureLog
    final_spread: float
    index: Optional[int]
    departures: int


@dataclass(frozen=True)
class HarmonizationStudy:
    initial_spread: float
    runs: Dict[str, HarmonizationRun]

    def reduction(self, label: str, reference: str = "none") -> float:
        """1 - spread(label) / spread(reference) over the final window."""
        ref = self.runs[reference].final_spread
        return 1.0 - self.runs[label].final_spread / ref if ref > 0 else 0.0


def harmonization_study(topo: LineTopology, m: int = 22, duration: float = 3600.0,
                        gamma: float = 0.2, decay: Tuple[float, int] = (0.5, 15),
                        pattern: Sequence[float] = (175.0, 191.0, 339.0, 96.0),
                        K: int = 60) -> HarmonizationStudy:
    """Central ring with m trains and perturbed gaps; gamma 0, constant and decaying."""
    ring = LinearLine.from_central(topo)
    tv = demand_travel(ring)
    L = sum(tv.values())
    occ, hist, _ = ring_timetable(ring, perturbed_gaps(m, L, pattern), tv)
    plats = [(0, j % ring.n) for j in range(1, ring.n + 1) if ring.seg(0, j).is_platform]
    first, last = plats[0], plats[-1]
    gaps = perturbed_gaps(m, L, pattern)
    spread0 = float(np.std(gaps + [L - sum(gaps)]))
    schedules: Dict[str, GammaSchedule] = {
        "none": constant_gamma(0.0),
        "constant": constant_gamma(gamma),
        "decay": linear_decay_gamma(*decay),
    }
    runs = {}
    for label, g in schedules.items():
        log = simulate_harmonized(ring, occ, g, K, history=hist)
        idx = harmonization_index(pooled_spread(log, plats, m), spread0)
        runs[label] = HarmonizationRun(
            label, log,
            final_spread=final_spread(log, last, m, duration),
            index=idx,
            departures=int(np.sum(log.depart[first] <= duration)),
        )
    return HarmonizationStudy(spread0, runs)
