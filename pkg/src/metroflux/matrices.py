"""Max-plus polynomial matrices of the junction line.

Two matrix forms are provided.

* The parity-dependent one-step matrices A1, A2, A', A'' and their
  four-step product B, over the nodes (0,0..n0), (1,1..n1-1), (2,1..n2-1)
  with the doubled branch counters.  Some junction shifts read 2b - 1, which
  is negative for particular occupancies; a one-step polynomial matrix cannot
  hold these, so such occupancies are rejected here and simulated only.
* A lifted matrix L over a period of two central steps, where every central
  node appears twice (an odd-step copy and an even-step copy) and the branch
  nodes once.  All its degrees are 0 or 1 for every occupancy, its maximal
  cycle mean is twice the central headway, and iterating it reproduces the
  simulator departure for departure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from .line import LineTopology, Node, OccupancyVector
from .maxplus import (
    EPS,
    EventGraph,
    PolyMatrix,
    degree0_is_acyclic,
    generalized_eigenpair,
    max_cycle_mean,
    nontrivial_components,
    strongly_connected_components,
)
from .simulate import FIXED, simulate


class NegativeDegreeError(ValueError):
    """A junction shift is negative for this occupancy."""


class OddSegmentCountError(ValueError):
    pass


def _weight(v: float, exact: bool):
    if not exact:
        return float(v)
    f = Fraction(v)
    return int(f) if f.denominator == 1 else f


# ---------------------------------------------------------------------------
# One-step matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepMatrices:
    A1: PolyMatrix
    A2: PolyMatrix
    Aprime: PolyMatrix
    Adouble: PolyMatrix
    B: Optional[PolyMatrix] = None

    def as_dict(self) -> Dict[str, PolyMatrix]:
        out = {"A1": self.A1, "A2": self.A2, "Aprime": self.Aprime, "Adouble": self.Adouble}
        if self.B is not None:
            out["B"] = self.B
        return out


# junction arc groups and the one-step matrices holding them
_GROUPS = {
    "conv_t1": ("A1", "Aprime"),
    "conv_s1": ("A1", "Aprime"),
    "div_s1": ("A1", "Adouble"),
    "div_t1": ("A1", "Adouble"),
    "conv_t2": ("A2", "Adouble"),
    "conv_s2": ("A2", "Adouble"),
    "div_s2": ("A2", "Aprime"),
    "div_t2": ("A2", "Aprime"),
}


def _arc_sets(t: LineTopology, b: OccupancyVector, exact: bool):
    """Common (out-of-junction) arcs and the eight junction groups.

    Each arc is (row_node, col_node, degree, weight, equation name).
    """
    for u in (0, 1, 2):
        if t.n_of(u) % 2:
            raise OddSegmentCountError(f"n{u} = {t.n_of(u)} must be even for the matrix form")
    bb = b.bbar
    tt = lambda u, j: _weight(t.seg(u, j).t_min, exact)
    ss = lambda u, j: _weight(t.seg(u, j).s_min, exact)
    common = []
    for j in range(1, t.n0 + 1):
        common.append(((0, j), (0, j - 1), b[(0, j)], tt(0, j), f"central travel ({0},{j})"))
        common.append(((0, j - 1), (0, j), bb(0, j), ss(0, j), f"central safety ({0},{j})"))
    for u in (1, 2):
        nu = t.n_of(u)
        for j in range(2, nu):
            common.append(((u, j), (u, j - 1), 2 * b[(u, j)], tt(u, j), f"branch travel ({u},{j})"))
        for j in range(1, nu - 1):
            common.append(((u, j), (u, j + 1), 2 * bb(u, j + 1), ss(u, j + 1), f"branch safety ({u},{j + 1})"))
    n0, n1, n2 = t.n0, t.n1, t.n2
    groups = {
        "conv_t1": ((0, 0), (1, n1 - 1), 2 * b[(1, n1)] - 1, tt(1, n1), "convergence travel from branch 1"),
        "div_s1": ((0, n0), (1, 1), 2 * bb(1, 1) - 1, ss(1, 1), "divergence safety towards branch 1"),
        "div_t1": ((1, 1), (0, n0), 2 * b[(1, 1)] + 1, tt(1, 1), "divergence travel into branch 1"),
        "conv_s1": ((1, n1 - 1), (0, 0), 2 * bb(1, n1) + 1, ss(1, n1), "convergence safety out of branch 1"),
        "conv_t2": ((0, 0), (2, n2 - 1), 2 * b[(2, n2)], tt(2, n2), "convergence travel from branch 2"),
        "div_s2": ((0, n0), (2, 1), 2 * bb(2, 1), ss(2, 1), "divergence safety towards branch 2"),
        "div_t2": ((2, 1), (0, n0), 2 * b[(2, 1)], tt(2, 1), "divergence travel into branch 2"),
        "conv_s2": ((2, n2 - 1), (0, 0), 2 * bb(2, n2), ss(2, n2), "convergence safety out of branch 2"),
    }
    return common, groups


def _assemble(labels: Sequence[Node], arcs) -> PolyMatrix:
    pos = {nd: i for i, nd in enumerate(labels)}
    entries: Dict[Tuple[int, int], Dict[int, object]] = {}
    for row, col, deg, w, name in arcs:
        if deg < 0:
            raise NegativeDegreeError(f"{name}: shift {deg} is negative for this occupancy")
        poly = entries.setdefault((pos[row], pos[col]), {})
        poly[deg] = w if deg not in poly else max(poly[deg], w)
    return PolyMatrix(len(labels), entries, labels)


def build_step_matrices(t: LineTopology, b: OccupancyVector, exact: bool = False) -> StepMatrices:
    common, groups = _arc_sets(t, b, exact)
    labels = t.nodes()
    mats = {}
    for name in ("A1", "A2", "Aprime", "Adouble"):
        arcs = list(common) + [groups[g] for g, holders in _GROUPS.items() if name in holders]
        mats[name] = _assemble(labels, arcs)
    return StepMatrices(**mats)


def junction_arc_groups(t: LineTopology, b: OccupancyVector) -> Dict[str, Tuple[Node, Node, int]]:
    """(row, col, degree) of each junction group, without any sign check."""
    _, groups = _arc_sets(t, b, exact=False)
    return {g: (r, c, d) for g, (r, c, d, _, _) in groups.items()}


def uses_parity_product(t: LineTopology, b: OccupancyVector) -> bool:
    """True when B = A1 A2 A2 A1, False when B = A' A'' A'' A'."""
    central = sum(b.part(0)) % 2
    return (t.n0 % 4 == 0 and central == 0) or (t.n0 % 4 == 2 and central == 1)


def build_B(t: LineTopology, b: OccupancyVector, exact: bool = False) -> StepMatrices:
    s = build_step_matrices(t, b, exact)
    if uses_parity_product(t, b):
        B = s.A1 @ s.A2 @ s.A2 @ s.A1
    else:
        B = s.Aprime @ s.Adouble @ s.Adouble @ s.Aprime
    return StepMatrices(s.A1, s.A2, s.Aprime, s.Adouble, B)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BPreconditions:
    scc_count: int
    nontrivial_sccs: int
    degree0_acyclic: bool
    occupancy_ok: Optional[bool]
    component_means: Tuple[object, ...]

    @property
    def ok(self) -> bool:
        return self.degree0_acyclic and self.occupancy_ok is not False and self.nontrivial_sccs > 0

    @property
    def means_agree(self) -> bool:
        ms = [float(m) for m in self.component_means]
        return bool(ms) and max(ms) - min(ms) <= 1e-9 * max(1.0, abs(max(ms)))

    def describe(self) -> str:
        parts = [f"SCCs={self.scc_count} (non-trivial {self.nontrivial_sccs})",
                 "G(B0) acyclic" if self.degree0_acyclic else "G(B0) cyclic: fully implicit"]
        if self.occupancy_ok is not None:
            parts.append("0 < m < n" if self.occupancy_ok else "m outside (0, n)")
        return ", ".join(parts)


def check_B_preconditions(B: PolyMatrix, b: Optional[OccupancyVector] = None) -> BPreconditions:
    G = EventGraph.from_matrix(B)
    comps, _ = strongly_connected_components(G)
    nontriv = nontrivial_components(G)
    acyclic = degree0_is_acyclic(B)
    means = []
    if acyclic:
        for comp in nontriv:
            idx = sorted(comp)
            pos = {v: k for k, v in enumerate(idx)}
            sub = PolyMatrix(len(idx), {(pos[i], pos[j]): p for (i, j), p in B.entries.items()
                                        if i in pos and j in pos})
            means.append(max_cycle_mean(EventGraph.from_matrix(sub)).mean)
    occ = None if b is None else 0 < b.m < b.n
    return BPreconditions(len(comps), len(nontriv), acyclic, occ, tuple(means))


# ---------------------------------------------------------------------------
# Lifted two-step matrix
# ---------------------------------------------------------------------------

def lifted_labels(t: LineTopology) -> List[Hashable]:
    return ([("odd", 0, j) for j in range(t.n0 + 1)]
            + [("even", 0, j) for j in range(t.n0 + 1)]
            + [("br", 1, j) for j in range(1, t.n1)]
            + [("br", 2, j) for j in range(1, t.n2)])


def lifted_matrix(t: LineTopology, b: OccupancyVector, exact: bool = False) -> PolyMatrix:
    """Period-two lift: state at p holds central steps 2p-1, 2p and branch step p.

    Convergence model 1 only (model 2 needs a negative shift in this form).
    """
    labels = lifted_labels(t)
    pos = {lab: i for i, lab in enumerate(labels)}
    entries: Dict[Tuple[int, int], Dict[int, object]] = {}

    def add(row, col, deg, w):
        poly = entries.setdefault((pos[row], pos[col]), {})
        poly[deg] = w if deg not in poly else max(poly[deg], w)

    def central_src(parity: str, j: int, shift: int):
        """Central node j at step l - shift, seen from a step of the given parity."""
        if shift == 0:
            return ("odd" if parity == "odd" else "even", 0, j), 0
        # one step back: odd 2p-1 -> even 2(p-1); even 2p -> odd 2p-1
        return (("even", 0, j), 1) if parity == "odd" else (("odd", 0, j), 0)

    def node(u, j):
        """Branch-node label, with the junction aliases resolved to central copies."""
        return ("br", u, j)

    tt = lambda u, j: _weight(t.seg(u, j).t_min, exact)
    ss = lambda u, j: _weight(t.seg(u, j).s_min, exact)
    n0, n1, n2 = t.n0, t.n1, t.n2
    bb = b.bbar

    for par in ("odd", "even"):
        for j in range(1, n0 + 1):
            src, deg = central_src(par, j - 1, b[(0, j)])
            add((par, 0, j), src, deg, tt(0, j))
            src, deg = central_src(par, j, bb(0, j))
            add((par, 0, j - 1), src, deg, ss(0, j))
    # divergence safety: odd steps wait on (1,1), even steps on (2,1), at p - bbar
    add(("odd", 0, n0), node(1, 1), bb(1, 1), ss(1, 1))
    add(("even", 0, n0), node(2, 1), bb(2, 1), ss(2, 1))
    # divergence travel into the branches
    add(node(1, 1), ("odd", 0, n0), b[(1, 1)], tt(1, 1))
    add(node(2, 1), ("even", 0, n0), b[(2, 1)], tt(2, 1))
    # convergence travel into (0,0)
    add(("odd", 0, 0), node(1, n1 - 1), b[(1, n1)], tt(1, n1))
    add(("even", 0, 0), node(2, n2 - 1), b[(2, n2)], tt(2, n2))
    # convergence safety out of the branches (model 1)
    add(node(1, n1 - 1), ("odd", 0, 0), bb(1, n1), ss(1, n1))
    add(node(2, n2 - 1), ("even", 0, 0), bb(2, n2), ss(2, n2))
    for u, nu in ((1, n1), (2, n2)):
        for j in range(2, nu):
            add(node(u, j), node(u, j - 1), b[(u, j)], tt(u, j))
        for j in range(1, nu - 1):
            add(node(u, j), node(u, j + 1), bb(u, j + 1), ss(u, j + 1))
    return PolyMatrix(len(labels), entries, labels)


def eigen_headway(t: LineTopology, b: OccupancyVector, exact: bool = False):
    """Central headway from the lifted matrix: half its generalized eigenvalue."""
    L = lifted_matrix(t, b, exact)
    res = generalized_eigenpair(L)
    return res.mu / 2


def iterate_lifted(L: PolyMatrix, K: int) -> List[List[object]]:
    """delta(p) = L0 delta(p) (+) L1 delta(p-1), p = 1..K, from delta(p <= 0) = 0."""
    if L.max_degree > 1:
        raise ValueError("iterate_lifted expects degrees 0 and 1 only")
    g = nx.DiGraph()
    g.add_nodes_from(range(L.dim))
    deg0: Dict[int, List[Tuple[int, object]]] = {i: [] for i in range(L.dim)}
    deg1: Dict[int, List[Tuple[int, object]]] = {i: [] for i in range(L.dim)}
    for i, j, d, c in L.arcs():
        (deg0 if d == 0 else deg1)[i].append((j, c))
        if d == 0:
            g.add_edge(j, i)
    order = list(nx.topological_sort(g))
    prev: List[object] = [0] * L.dim
    out = [prev]
    for _ in range(K):
        cur: List[object] = [EPS] * L.dim
        for i in order:
            best = EPS
            for j, c in deg1[i]:
                v = prev[j] + c
                best = v if best is EPS or v > best else best
            for j, c in deg0[i]:
                v = cur[j] + c
                best = v if best is EPS or v > best else best
            cur[i] = best
        out.append(cur)
        prev = cur
    return out


def verify_matrix_vs_simulation(t: LineTopology, b: OccupancyVector, K: int,
                                exact: bool = False) -> float:
    """Largest |matrix - simulator| departure over K lifted steps (2K central steps)."""
    if not 0 < b.m < b.n:
        raise ValueError("verification needs 0 < m < n")
    L = lifted_matrix(t, b, exact)
    states = iterate_lifted(L, K)
    if K == 0:
        return 0.0
    log = simulate(t, b, FIXED, K=2 * K)
    labels = L.labels
    worst = 0.0
    for p in range(1, K + 1):
        vec = states[p]
        for idx, lab in enumerate(labels):
            kind, u, j = lab
            if kind == "br":
                sim = log.depart[(u, j)][p - 1]
            else:
                k = 2 * p - 1 if kind == "odd" else 2 * p
                sim = log.depart[(0, j)][k - 1]
            worst = max(worst, abs(float(vec[idx]) - float(sim)))
    return worst


def dump_dot(mats: Mapping[str, PolyMatrix]) -> str:
    return "".join(EventGraph.from_matrix(M).to_dot(name) for name, M in mats.items())


def eigen_history(t: LineTopology, b: OccupancyVector):
    """Departure history of the periodic regime d(p) = v + p mu, for p <= 0.

    Times are shifted so the last event of step 0 is at time 0.  Starting
    the simulator from this history puts the line in its stationary regime
    at once: central headways then alternate between two
    values summing to mu = 2 h0.
    """
    L = lifted_matrix(t, b)
    res = generalized_eigenpair(L)
    if res.v is None:
        raise ValueError("lifted matrix is reducible: no global eigenvector")
    mu = float(res.mu)
    val = {lab: float(x) for lab, x in zip(L.labels, res.v)}
    # shift so the latest event of step p = 0 happens at time 0
    top = max(val.values())
    val = {lab: x - top for lab, x in val.items()}

    def hist(node: Node, k: int) -> float:
        u, j = node
        if u:
            return val[("br", u, j)] + k * mu
        p = (k + 1) // 2                    # central k = 2p - 1 (odd) or 2p (even)
        kind = "odd" if k % 2 else "even"
        return val[(kind, 0, j)] + p * mu

    return hist
