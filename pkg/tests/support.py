"""Shared generators and independent oracles for the test-suite.

The oracles here are deliberately written without the package's own
solvers: Karp's algorithm on a unit-duration expansion and a brute-force
elementary-cycle enumeration, both in exact rational arithmetic.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from metroflux.line import DemandEntry, LineTopology, SegmentParams, feasible, load_config
from metroflux.maxplus import PolyMatrix

ROOT = Path(__file__).resolve().parents[1]
LINE13 = ROOT / "data" / "line13.cfg"
PROFILE13 = ROOT / "data" / "line13_profile.csv"


def line13() -> LineTopology:
    return load_config(LINE13.read_text())


# ---------------------------------------------------------------------------
# Random lines
# ---------------------------------------------------------------------------

def random_topology(rng: np.random.Generator, sizes: Sequence[int] = (4, 6, 8),
                    t_range=(10.0, 120.0), s_range=(5.0, 60.0), integer: bool = False,
                    n0: Optional[int] = None) -> LineTopology:
    """Junction line with every n_u drawn from ``sizes`` and travel/separation times uniform."""
    ns = [int(rng.choice(sizes)) for _ in range(3)]
    if n0 is not None:
        ns[0] = n0
    segs = {}
    for u, n_u in enumerate(ns):
        for j in range(1, n_u + 1):
            t = rng.uniform(*t_range)
            s = rng.uniform(*s_range)
            if integer:
                t, s = float(round(t)), float(round(s))
            segs[(u, j)] = SegmentParams(u, j, r_min=t, w_min=0.0, s_min=s)
    return LineTopology(ns[0], ns[1], ns[2], segs)


def random_occupancy(rng: np.random.Generator, topo: LineTopology,
                     parity: Optional[int] = None) -> Tuple[int, int]:
    """Random feasible (m, dm); ``parity`` fixes (m + dm) mod 2 when given."""
    cells = [(m, dm) for m in range(1, topo.n)
             for dm in range(-topo.n1, topo.n2 + 1)
             if feasible(topo.n0, topo.n1, topo.n2, m, dm)
             and (parity is None or (m + dm) % 2 == parity)]
    return cells[int(rng.integers(len(cells)))]


def random_demand_topology(rng: np.random.Generator, sizes=(4, 6), margin: float = 0.2,
                           x_range=(0.05, 0.3)) -> LineTopology:
    """Junction line in which about half the segments are platforms carrying demand."""
    base = random_topology(rng, sizes, t_range=(30.0, 90.0), s_range=(10.0, 40.0))
    segs = {}
    dem = {}
    for key, sp in base.segments.items():
        plat = bool(rng.random() < 0.5)
        w = float(rng.uniform(10.0, 25.0)) if plat else 0.0
        segs[key] = SegmentParams(sp.u, sp.j, sp.r_min, w, sp.s_min, is_platform=plat)
        if plat:
            x = rng.uniform(*x_range)
            share = rng.uniform(0.3, 0.7)
            dem[key] = DemandEntry(sp.u, sp.j, lambda_in=share * x, lambda_out=(1 - share) * x)
    return LineTopology(base.n0, base.n1, base.n2, segs, dem, run_margin=margin)


# ---------------------------------------------------------------------------
# Random polynomial matrices
# ---------------------------------------------------------------------------

def random_poly_matrix(rng: np.random.Generator, max_nodes: int = 8, max_degree: int = 3,
                       density: float = 0.35) -> PolyMatrix:
    """Rational weights, degrees 0..max_degree, degree-0 arcs only downward (G(A0) acyclic).

    A degree-1 ring through every node guarantees at least one cycle.
    """
    n = int(rng.integers(1, max_nodes + 1))
    entries: Dict[Tuple[int, int], Dict[int, Fraction]] = {}

    def put(i, j, d, w):
        poly = entries.setdefault((i, j), {})
        poly[d] = max(poly.get(d, w), w)

    for i in range(n):
        put((i + 1) % n, i, 1, Fraction(int(rng.integers(-20, 60)), int(rng.integers(1, 7))))
    for i in range(n):
        for j in range(n):
            for d in range(max_degree + 1):
                if d == 0 and i <= j:
                    continue
                if rng.random() < density / (d + 1):
                    put(i, j, d, Fraction(int(rng.integers(-30, 80)), int(rng.integers(1, 9))))
    return PolyMatrix(n, entries)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def enumerate_cycle_mean(A: PolyMatrix) -> Fraction:
    """Exhaustive maximum of weight / duration over elementary cycles.

    Parallel arcs between the same pair of nodes are resolved by trying
    every combination, since the ratio is not monotone in one arc alone.
    """
    arcs: Dict[Tuple[int, int], List[Tuple[Fraction, int]]] = {}
    for i, j, d, c in A.arcs():
        arcs.setdefault((j, i), []).append((Fraction(c), d))
    g = nx.DiGraph()
    g.add_nodes_from(range(A.dim))
    g.add_edges_from(arcs)
    best = None
    for cyc in nx.simple_cycles(g):
        pairs = list(zip(cyc, cyc[1:] + cyc[:1]))
        for choice in itertools.product(*(arcs[p] for p in pairs)):
            dur = sum(d for _, d in choice)
            if dur == 0:
                raise ValueError("zero-duration cycle")
            val = sum(w for w, _ in choice) / dur
            best = val if best is None or val > best else best
    if best is None:
        raise ValueError("no cycle")
    return best


def karp_cycle_mean(A: PolyMatrix) -> Fraction:
    """Karp's theorem on the unit-duration expansion of G(A).

    Degree-d arcs become chains of d unit arcs; degree-0 arcs (acyclic) are
    folded into the unit arcs they follow through the longest zero-duration
    path.  Every cycle of the result has the duration of the original.
    """
    unit: List[Tuple[int, int, Fraction]] = []
    zero: List[Tuple[int, int, Fraction]] = []
    n = A.dim
    extra = 0
    for i, j, d, c in A.arcs():
        c = Fraction(c)
        if d == 0:
            zero.append((j, i, c))
            continue
        chain = [j] + [n + extra + k for k in range(d - 1)] + [i]
        extra += d - 1
        unit.append((chain[0], chain[1], c))
        for a, b in zip(chain[1:], chain[2:]):
            unit.append((a, b, Fraction(0)))
    N = n + extra
    # longest zero-duration path closure (identity included), original nodes only
    closure: Dict[Tuple[int, int], Fraction] = {(v, v): Fraction(0) for v in range(N)}
    order = list(nx.topological_sort(nx.DiGraph([(a, b) for a, b, _ in zero]))) if zero else []
    succ: Dict[int, List[Tuple[int, Fraction]]] = {}
    for a, b, c in zero:
        succ.setdefault(a, []).append((b, c))
    for v in reversed(order):
        for b, c in succ.get(v, []):
            for (x, y), w in list(closure.items()):
                if x == b:
                    key = (v, y)
                    val = c + w
                    if key not in closure or val > closure[key]:
                        closure[key] = val
    W: Dict[Tuple[int, int], Fraction] = {}
    for a, b, c in unit:
        for (x, y), w in closure.items():
            if x == b:
                key = (a, y)
                if key not in W or c + w > W[key]:
                    W[key] = c + w
    # Karp on each strongly connected component
    g = nx.DiGraph()
    g.add_nodes_from(range(N))
    g.add_edges_from(W)
    best = None
    for comp in nx.strongly_connected_components(g):
        comp = sorted(comp)
        if len(comp) == 1 and (comp[0], comp[0]) not in W:
            continue
        idx = {v: k for k, v in enumerate(comp)}
        m = len(comp)
        D = [[None] * m for _ in range(m + 1)]
        D[0][0] = Fraction(0)
        for k in range(1, m + 1):
            for (a, b), w in W.items():
                if a in idx and b in idx and D[k - 1][idx[a]] is not None:
                    v = D[k - 1][idx[a]] + w
                    if D[k][idx[b]] is None or v > D[k][idx[b]]:
                        D[k][idx[b]] = v
        comp_best = None
        for v in range(m):
            if D[m][v] is None:
                continue
            worst = None
            for k in range(m):
                if D[k][v] is None:
                    continue
                r = (D[m][v] - D[k][v]) / (m - k)
                worst = r if worst is None or r < worst else worst
            if worst is not None and (comp_best is None or worst > comp_best):
                comp_best = worst
        if comp_best is not None and (best is None or comp_best > best):
            best = comp_best
    if best is None:
        raise ValueError("no cycle")
    return best
