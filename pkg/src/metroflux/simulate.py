"""Event simulation of the departure recursion.

Every departure is the maximum of a travel constraint (the train has
arrived and completed its dwell) and a safe-separation constraint (the
downstream segment has been cleared by the train ahead for long enough).

The engine reasons with *segment passings*: the i-th train to pass segment
sigma enters it at some departure of the upstream node and leaves it at some
departure of the downstream node.  Each node numbers its own departures;
central nodes use the central counter, branch nodes their own counter.  The
junction maps between the two:

* divergence: central departure k of (0, n0) enters branch 1 when k is odd
  and branch 2 when k is even;
* convergence: central departure k of (0, 0) takes a train from the branch
  named by the passing-order sequence L(k), which alternates 1, 2, 1, 2, ...
  unless an override lets two consecutive trains through from one branch.

With zero initial history these maps reproduce the out-of-junction,
divergence and convergence recursions with the doubled branch counters.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .line import (
    LinearLine,
    LineTopology,
    Node,
    OccupancyVector,
    OverrideSpec,
    PerturbationSpec,
    SegmentKey,
)

Line = Union[LineTopology, LinearLine]
GammaSchedule = Callable[[SegmentKey, int], float]
History = Callable[[Node, int], float]


class DeadlockError(RuntimeError):
    """No departure can fire: the recursion contains an implicit cycle."""

    def __init__(self, cycle: Sequence[Tuple[Node, int]]) -> None:
        self.cycle = list(cycle)
        text = " -> ".join(f"{n}#{k}" for n, k in self.cycle)
        super().__init__(f"deadlock: implicit dependency cycle {text}")


class InsufficientDataError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DwellRunLaw:
    """Travel-time law on each segment.

    variant: "fixed" (minimum times t = r_min + w_min), "demand" (dwell and
    run laws driven by the headway) or "harmonized" (demand law with the
    gamma-weighted dwell shortening).
    """

    variant: str = "fixed"
    gamma: Optional[GammaSchedule] = None

    def __post_init__(self) -> None:
        if self.variant not in ("fixed", "demand", "harmonized"):
            raise ValueError(f"unknown law variant {self.variant!r}")
        if self.variant == "harmonized" and self.gamma is None:
            raise ValueError("harmonized law needs a gamma schedule")


FIXED = DwellRunLaw("fixed")
DEMAND = DwellRunLaw("demand")


def constant_gamma(value: float) -> GammaSchedule:
    if not 0.0 <= value <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    return lambda key, k: value


def linear_decay_gamma(gamma0: float, K: int) -> GammaSchedule:
    """gamma(k) = gamma0 - (gamma0 / K) k, held at 0 past k = K."""
    if not 0.0 <= gamma0 <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    return lambda key, k: max(0.0, gamma0 - gamma0 / K * k)


def solve_demand_travel(q: float, x: float, r_nom: float, r_min: float,
                        h_min: float, w_bar: float) -> Tuple[float, float, float]:
    """Solve h = q + r(h) + w(h) for the departure headway h.

    r(h) = max(r_min, r_nom - x (h - h_min)), w(h) = min(x h, w_bar), and
    q is the upstream departure time relative to this node's previous
    departure.  The map is a contraction (slope at most x < 1), so the root
    is unique.  Returns (h, r, w).
    """
    for run_lin in (True, False):
        for dwell_lin in (True, False):
            # h = q + (a_r - c_r h) + (a_w + c_w h)
            a_r, c_r = (r_nom + x * h_min, x) if run_lin else (r_min, 0.0)
            a_w, c_w = (0.0, -x) if dwell_lin else (w_bar, 0.0)
            h = (q + a_r + a_w) / (1.0 + c_r + c_w)
            r = max(r_min, r_nom - x * (h - h_min))
            w = min(x * h, w_bar)
            if abs(q + r + w - h) <= 1e-9 * max(1.0, abs(h)):
                return h, r, w
    raise ArithmeticError("demand law fixed point not found")  # pragma: no cover


# ---------------------------------------------------------------------------
# Network description
# ---------------------------------------------------------------------------

@dataclass
class _Seg:
    key: SegmentKey
    up: Node
    down: Node
    b: int
    t_fixed: float
    s: float
    r_min: float
    r_nom: float
    x: float
    g: float
    w_bar: float
    h_min: float
    kind: str  # "plain", "div" or "conv"


class PassingOrder:
    """Branch of origin of each (0, 0) departure, with double-pass overrides.

    An override (k, X) inserts one extra train from branch X: departure k
    repeats X when departure k - 1 came from X, otherwise departure k + 1
    does.  Either way exactly two consecutive trains from X pass and the
    alternation then resumes, shifted by one.
    """

    def __init__(self, overrides: Iterable[OverrideSpec] = ()) -> None:
        self.pending: Dict[int, List[int]] = {}
        for ov in overrides:
            if ov.branch not in (1, 2):
                raise ValueError("override branch must be 1 or 2")
            if ov.k < 1:
                raise ValueError("override index must be positive")
            self.pending.setdefault(ov.k, []).append(ov.branch)
        self.labels: List[int] = [0]  # 1-based
        self.pos: Dict[int, List[int]] = {1: [], 2: []}
        self.rank: List[int] = [0]

    def _grow(self, k: int) -> None:
        while len(self.labels) <= k:
            kk = len(self.labels)
            prev = self.labels[-1] if kk > 1 else 2
            lab = 3 - prev
            waiting = self.pending.pop(kk, [])
            if waiting:
                want = waiting[0]
                if prev == want:
                    lab = want
                    waiting = waiting[1:]
                if waiting:
                    self.pending.setdefault(kk + 1, [])[:0] = waiting
            self.labels.append(lab)
            self.pos[lab].append(kk)
            self.rank.append(len(self.pos[lab]))

    def label(self, k: int) -> int:
        if k <= 0:
            return 1 if k % 2 else 2
        self._grow(k)
        return self.labels[k]

    def branch_rank(self, k: int) -> Tuple[int, int]:
        """(branch, i): departure k of (0, 0) is the i-th train from that branch."""
        if k <= 0:
            return (1, (k + 1) // 2) if k % 2 else (2, k // 2)
        self._grow(k)
        return self.labels[k], self.rank[k]

    def index_of(self, u: int, i: int) -> int:
        """Central index of the i-th (0, 0) departure coming from branch u."""
        if i <= 0:
            return 2 * i - 1 if u == 1 else 2 * i
        while len(self.pos[u]) < i:
            self._grow(len(self.labels) + 8)
        return self.pos[u][i - 1]


class _Network:
    def __init__(self, line: Line, b: OccupancyVector, law: DwellRunLaw,
                 order: PassingOrder, model: int) -> None:
        self.line = line
        self.law = law
        self.order = order
        self.model = model
        self.junction = isinstance(line, LineTopology)
        self.segs: Dict[SegmentKey, _Seg] = {}
        if self.junction:
            self.nodes = line.nodes()
            for (u, j) in line.segment_keys():
                up = line.canonical(u, j - 1)
                down = line.canonical(u, j)
                kind = "plain"
                if u and j == 1:
                    kind = "div"
                elif u and j == line.n_of(u):
                    kind = "conv"
                self.segs[(u, j)] = self._mkseg(line, b, (u, j), up, down, kind)
            self.n0 = line.n0
        else:
            n = line.n
            self.nodes = [(0, j) for j in range(n)]
            for (_, j) in line.segment_keys():
                self.segs[(0, j)] = self._mkseg(line, b, (0, j), (0, j - 1), (0, j % n), "plain")
            self.n0 = n
        self.is_branch = {nd: nd[0] != 0 for nd in self.nodes}

    @staticmethod
    def _mkseg(line, b, key, up, down, kind) -> _Seg:
        sp = line.seg(*key)
        x = line.x_of(*key)
        Xg = x / (1 - x) * sp.g_lo
        return _Seg(
            key=key, up=up, down=down, b=b[key], t_fixed=sp.t_min, s=sp.s_min,
            r_min=sp.r_min, r_nom=line.r_nominal(*key), x=x, g=sp.g_lo,
            w_bar=Xg + line.margin_of(*key), h_min=sp.g_lo / (1 - x), kind=kind,
        )

    # travel: the departure consumes the exit of its incoming segment
    def incoming(self, node: Node, k: int) -> Tuple[_Seg, int]:
        u, j = node
        if not self.junction:
            return self.segs[(0, j if j else self.n0)], k
        if node == (0, 0):
            br, i = self.order.branch_rank(k)
            return self.segs[(br, self.line.n_of(br))], i
        return self.segs[(u, j)], k

    # safety: the departure is the entry into its outgoing segment
    def outgoing(self, node: Node, k: int) -> Tuple[_Seg, int]:
        u, j = node
        if not self.junction:
            return self.segs[(0, j + 1)], k
        if node == (0, self.n0):
            if k % 2:
                return self.segs[(1, 1)], (k + 1) // 2
            return self.segs[(2, 1)], k // 2
        return self.segs[(u, j + 1)], k

    def entry_event(self, sg: _Seg, i: int) -> Tuple[Node, int]:
        if sg.kind == "div":
            return sg.up, (2 * i - 1 if sg.key[0] == 1 else 2 * i)
        return sg.up, i

    def exit_event(self, sg: _Seg, i: int) -> Tuple[Node, int]:
        if sg.kind == "conv":
            return sg.down, self.order.index_of(sg.key[0], i)
        return sg.down, i


# ---------------------------------------------------------------------------
# Log
# ---------------------------------------------------------------------------

@dataclass
class DepartureLog:
    """Departure table d^k per node (k = 1..len), with arrivals and bounds."""

    nodes: List[Node]
    depart: Dict[Node, np.ndarray]
    arrive: Dict[Node, np.ndarray]
    travel_bound: Dict[Node, np.ndarray]
    travel: Dict[Node, np.ndarray]  # travel time of the incoming segment
    origin: Dict[Node, np.ndarray]
    occupancy: OccupancyVector
    junction: bool
    history0: Dict[Node, float] = field(default_factory=dict)
    labels: Tuple[int, ...] = ()  # passing order at (0, 0), 1-based

    def d(self, node: Node) -> np.ndarray:
        return self.depart[node]

    def headways(self, node: Node) -> np.ndarray:
        """h^k = d^k - d^(k-1), with d^0 from the initial history."""
        d = self.depart[node]
        prev = np.concatenate(([self.history0.get(node, 0.0)], d[:-1]))
        return d - prev

    def dynamic_intervals(self, node: Node) -> np.ndarray:
        """g^k = a^k - d^(k-1)."""
        d = self.depart[node]
        prev = np.concatenate(([self.history0.get(node, 0.0)], d[:-1]))
        return self.arrive[node] - prev

    def dwell(self, node: Node) -> np.ndarray:
        return self.depart[node] - self.arrive[node]

    def waiting(self, node: Node) -> np.ndarray:
        """Time spent beyond the travel constraint (blocked by the train ahead)."""
        return self.depart[node] - self.travel_bound[node]

    def part_nodes(self, u: int) -> List[Node]:
        return [nd for nd in self.nodes if nd[0] == u]


def empirical_headway(log: DepartureLog, burn_in: float = 0.25,
                      min_points: int = 100) -> Dict[str, float]:
    """Least-squares slope of d^k against k per node, averaged per part.

    h1 and h2 are computed on the branch nodes' own counters, so in a
    junction line they approximate twice the central headway h0.
    """
    out = {}
    parts = (0, 1, 2) if log.junction else (0,)
    for u in parts:
        slopes = []
        for nd in log.part_nodes(u):
            d = log.depart[nd]
            start = int(math.floor(burn_in * len(d)))
            tail = d[start:]
            if len(tail) < min_points:
                raise InsufficientDataError(
                    f"node {nd}: {len(tail)} departures after burn-in, need {min_points}")
            k = np.arange(len(tail), dtype=float)
            slopes.append(np.polyfit(k, tail, 1)[0])
        if slopes:
            out[f"h{u}"] = float(np.mean(slopes))
    return out


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def _zero_history(node: Node, k: int) -> float:
    return 0.0


def simulate(line: Line, b: OccupancyVector, law: DwellRunLaw = FIXED, K: int = 200,
             model: int = 1, overrides: Iterable[OverrideSpec] = (),
             perturbations: Iterable[PerturbationSpec] = (),
             history: Optional[History] = None) -> DepartureLog:
    """Simulate K central departures per central node (K // 2 per branch node).

    ``history`` gives d^k for k <= 0 (default 0 everywhere: all trains start
    at time zero).  Raises DeadlockError when an implicit cycle blocks the
    recursion, and ValueError for an occupancy with no train or no space.
    """
    if b.m <= 0 or b.m >= b.n:
        raise ValueError(f"occupancy with m = {b.m} of n = {b.n}: dynamics are fully implicit")
    if model not in (1, 2):
        raise ValueError("convergence model must be 1 or 2")
    order = PassingOrder(overrides)
    net = _Network(line, b, law, order, model)
    hist = history or _zero_history
    perts = list(perturbations)
    for p in perts:
        if p.extra < 0:
            raise ValueError("perturbation extra time must be non-negative")
    pert_start: Dict[Tuple[int, SegmentKey], Optional[int]] = {}

    D: Dict[Node, List[float]] = {nd: [] for nd in net.nodes}
    A: Dict[Node, List[float]] = {nd: [] for nd in net.nodes}
    TB: Dict[Node, List[float]] = {nd: [] for nd in net.nodes}
    TT: Dict[Node, List[float]] = {nd: [] for nd in net.nodes}

    def get(nd: Node, k: int) -> float:
        if k <= 0:
            return hist(nd, k)
        return D[nd][k - 1]

    def extra_for(sg: _Seg, i: int, t_entry: float) -> float:
        tot = 0.0
        for idx, p in enumerate(perts):
            u, j = sg.key
            if u != p.u or not p.j_from <= j <= p.j_to:
                continue
            if p.start_k is not None:
                if p.start_k <= i < p.start_k + p.count:
                    tot += p.extra
                continue
            start = p.start_time if p.start_time is not None else 0.0
            key = (idx, sg.key)
            i0 = pert_start.get(key)
            if i0 is None and t_entry >= start:
                pert_start[key] = i0 = i
            if i0 is not None and i0 <= i < i0 + p.count:
                tot += p.extra
        return tot

    def deps(nd: Node, k: int) -> List[Tuple[Node, int]]:
        need = []
        if k > 1:
            need.append((nd, k - 1))
        sg, i = net.incoming(nd, k)
        need.append(net.entry_event(sg, i - sg.b))
        so, io_ = net.outgoing(nd, k)
        en, ex = net.exit_event(so, io_ - (1 - so.b))
        if model == 2 and so.kind == "conv":
            ex += 1
        need.append((en, ex))
        return need

    def fire(nd: Node, k: int) -> None:
        sg, i = net.incoming(nd, k)
        un, ue = net.entry_event(sg, i - sg.b)
        d_up = get(un, ue)
        d_prev = get(nd, k - 1)
        extra = extra_for(sg, i, d_up)
        if law.variant == "fixed" or sg.x == 0.0 and law.variant == "demand":
            r = sg.r_min if law.variant == "fixed" else sg.r_nom
            t = (sg.t_fixed if law.variant == "fixed" else sg.r_nom) + extra
            bound = d_up + t
        else:
            h, r, w = solve_demand_travel(d_up - d_prev, sg.x, sg.r_nom, sg.r_min, sg.h_min, sg.w_bar)
            t = r + w + extra
            bound = d_up + t
            if law.variant == "harmonized":
                gam = law.gamma(sg.key, k)
                if not 0.0 <= gam <= 1.0:
                    raise ValueError(f"gamma {gam} outside [0, 1] at {sg.key}, k={k}")
                delta = gam * sg.x / (1.0 + gam * sg.x)
                bound = (1.0 - delta) * bound + delta * d_prev
        so, io_ = net.outgoing(nd, k)
        en, ex = net.exit_event(so, io_ - (1 - so.b))
        if model == 2 and so.kind == "conv":
            ex += 1
        safe = get(en, ex) + so.s
        D[nd].append(max(bound, safe))
        A[nd].append(d_up + r)
        TB[nd].append(bound)
        TT[nd].append(t)

    def ensure(nd: Node, k: int) -> None:
        if len(D[nd]) >= k:
            return
        stack = [(nd, k)]
        on = {(nd, k)}
        while stack:
            cn, ck = stack[-1]
            if len(D[cn]) >= ck:
                stack.pop()
                on.discard((cn, ck))
                continue
            missing = [(pn, pk) for pn, pk in deps(cn, ck) if pk > len(D[pn])]
            if not missing:
                fire(cn, ck)
                stack.pop()
                on.discard((cn, ck))
                continue
            # descend into one prerequisite at a time so the stack is a path
            item = missing[0]
            if item in on:
                start = stack.index(item)
                raise DeadlockError(stack[start:] + [item])
            stack.append(item)
            on.add(item)

    branch_nodes = [nd for nd in net.nodes if net.is_branch[nd]]
    central_nodes = [nd for nd in net.nodes if not net.is_branch[nd]]
    for step in range(1, K + 1):
        for nd in central_nodes:
            ensure(nd, step)
        if step % 2 == 0:
            for nd in branch_nodes:
                ensure(nd, step // 2)

    # trim every node to its target length so logs are rectangular per part
    depart, arrive, tbound, travel, origin = {}, {}, {}, {}, {}
    for nd in net.nodes:
        kmax = K // 2 if net.is_branch[nd] else K
        depart[nd] = np.asarray(D[nd][:kmax])
        arrive[nd] = np.asarray(A[nd][:kmax])
        tbound[nd] = np.asarray(TB[nd][:kmax])
        travel[nd] = np.asarray(TT[nd][:kmax])
        origin[nd] = _origins(net, b, nd, kmax)
    labels = tuple(order.label(k) for k in range(1, K + 1)) if net.junction else ()
    return DepartureLog(
        nodes=list(net.nodes), depart=depart, arrive=arrive, travel_bound=tbound,
        travel=travel, origin=origin, occupancy=b, junction=net.junction,
        history0={nd: hist(nd, 0) for nd in net.nodes}, labels=labels,
    )


def _origins(net: _Network, b: OccupancyVector, nd: Node, kmax: int) -> np.ndarray:
    if not net.junction:
        return np.zeros(kmax, dtype=int)
    u, j = nd
    if u:
        return np.full(kmax, u, dtype=int)
    ahead = sum(b[(0, i)] for i in range(1, j + 1))
    return np.array([net.order.label(k - ahead) for k in range(1, kmax + 1)], dtype=int)


def simulate_harmonized(line: Line, b: OccupancyVector, gamma: GammaSchedule, K: int,
                        history: Optional[History] = None, **kw) -> DepartureLog:
    """Demand-dependent dynamics with the gamma-weighted dwell shortening."""
    return simulate(line, b, DwellRunLaw("harmonized", gamma), K, history=history, **kw)


# ---------------------------------------------------------------------------
# Junction bookkeeping
# ---------------------------------------------------------------------------

def junction_dm_series(log: DepartureLog) -> np.ndarray:
    """Delta m after each pair of central steps k = 2, 4, ...

    Counts branch entries at the divergence and branch exits at the
    convergence among the first k central departures.
    """
    b = log.occupancy
    dm0 = b.dm
    labels = np.asarray(log.labels, dtype=int)
    K = len(labels)
    ks = np.arange(1, K + 1)
    ent2 = np.cumsum(ks % 2 == 0)
    ent1 = np.cumsum(ks % 2 == 1)
    ex2 = np.cumsum(labels == 2)
    ex1 = np.cumsum(labels == 1)
    series = dm0 + (ent2 - ex2) - (ent1 - ex1)
    return series[1::2]


def apply_passing_order(overrides: Sequence[OverrideSpec]) -> PassingOrder:
    """Build the convergence passing order for a list of double-pass overrides."""
    return PassingOrder(overrides)


def convergence_wait(log: DepartureLog, branch: int) -> float:
    """Total waiting at the convergence node of trains coming from a branch."""
    node = (0, 0)
    w = log.waiting(node)
    mask = log.origin[node] == branch
    return float(np.sum(w[mask]))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

TRAJECTORY_HEADER = ["node_u", "node_j", "k", "depart_s", "arrive_s", "branch_origin"]


def trajectory_rows(log: Optional[DepartureLog]) -> List[List[str]]:
    rows = []
    if log is None:
        return rows
    for nd in log.nodes:
        d, a, o = log.depart[nd], log.arrive[nd], log.origin[nd]
        for k in range(len(d)):
            rows.append([str(nd[0]), str(nd[1]), str(k + 1), f"{d[k]:.6f}", f"{a[k]:.6f}", str(int(o[k]))])
    return rows


def trajectory_export(log: Optional[DepartureLog], header_comment: Optional[str] = None) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(header_comment.rstrip("\n") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    w.writerows(trajectory_rows(log))
    return buf.getvalue()
