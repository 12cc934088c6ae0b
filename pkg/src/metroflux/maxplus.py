"""Max-plus scalars, polynomial matrices in the backshift operator, and spectral solvers.

The semiring is (R u {eps}, max, +).  A polynomial matrix ``A(gamma)`` maps each
entry (row, col) to a polynomial ``{degree: coefficient}``; the degree is the
backshift in the event counter, so the recursion it encodes reads

    x^k_row = max over (col, degree) of  coefficient + x^(k - degree)_col .

The associated event graph has one arc ``col -> row`` per stored coefficient,
with weight = coefficient and duration = degree.  Its maximum cycle mean
(total weight over total duration) is the generalized eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Dict, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------

class _Epsilon:
    """The bottom element of the semiring (behaves as minus infinity)."""

    _instance: Optional["_Epsilon"] = None

    def __new__(cls) -> "_Epsilon":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EPS"

    def __reduce__(self):
        return (_Epsilon, ())

    def __lt__(self, other) -> bool:
        return not is_eps(other)

    def __le__(self, other) -> bool:
        return True

    def __gt__(self, other) -> bool:
        return False

    def __ge__(self, other) -> bool:
        return is_eps(other)

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("maxplus-epsilon")


EPS = _Epsilon()

Number = Union[int, float, Fraction]
Scalar = Union[int, float, Fraction, _Epsilon]


def is_eps(a: object) -> bool:
    return a is EPS


def mp_add(a: Scalar, b: Scalar) -> Scalar:
    """a (+) b = max(a, b), with EPS neutral."""
    if a is EPS:
        return b
    if b is EPS:
        return a
    return a if a >= b else b


def mp_mul(a: Scalar, b: Scalar) -> Scalar:
    """a (x) b = a + b, with EPS absorbing."""
    if a is EPS or b is EPS:
        return EPS
    return a + b


def mp_sum(values: Iterable[Scalar]) -> Scalar:
    out: Scalar = EPS
    for v in values:
        out = mp_add(out, v)
    return out


def to_float(a: Scalar) -> float:
    return float("-inf") if a is EPS else float(a)


def scalar_to_text(a: Scalar) -> str:
    """Serialize a scalar; finite floats use repr() so they round-trip exactly."""
    if a is EPS:
        return "eps"
    if isinstance(a, Fraction):
        return f"{a.numerator}/{a.denominator}"
    if isinstance(a, int):
        return str(a)
    return repr(float(a))


def scalar_from_text(text: str) -> Scalar:
    text = text.strip()
    if text == "eps":
        return EPS
    if "/" in text:
        return Fraction(text)
    try:
        return int(text)
    except ValueError:
        return float(text)


def _is_exact(x: object) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


# ---------------------------------------------------------------------------
# Polynomial matrices
# ---------------------------------------------------------------------------

Poly = Mapping[int, Number]


class PolyMatrix:
    """Sparse square matrix whose entries are max-plus polynomials in gamma.

    Immutable once built.  Absent entries and absent degrees are EPS.
    """

    __slots__ = ("_dim", "_entries", "_labels")

    def __init__(
        self,
        dim: int,
        entries: Mapping[Tuple[int, int], Mapping[int, Scalar]],
        labels: Optional[Sequence[Hashable]] = None,
    ) -> None:
        if dim < 0:
            raise ValueError("dimension must be non-negative")
        if labels is not None and len(labels) != dim:
            raise ValueError("labels must match the dimension")
        clean: Dict[Tuple[int, int], Mapping[int, Number]] = {}
        for (i, j), poly in entries.items():
            if not (0 <= i < dim and 0 <= j < dim):
                raise IndexError(f"entry ({i}, {j}) outside a {dim}x{dim} matrix")
            kept: Dict[int, Number] = {}
            for deg, coeff in poly.items():
                if not isinstance(deg, int) or isinstance(deg, bool):
                    raise TypeError(f"degree {deg!r} is not an integer")
                if deg < 0:
                    raise ValueError(f"negative degree {deg} at entry ({i}, {j})")
                if coeff is EPS:
                    continue
                prev = kept.get(deg)
                kept[deg] = coeff if prev is None else max(prev, coeff)
            if kept:
                clean[(i, j)] = MappingProxyType(dict(sorted(kept.items())))
        self._dim = dim
        self._entries = MappingProxyType(clean)
        self._labels = tuple(labels) if labels is not None else tuple(range(dim))

    # -- construction helpers ------------------------------------------------
    @classmethod
    def identity(cls, dim: int, labels: Optional[Sequence[Hashable]] = None) -> "PolyMatrix":
        return cls(dim, {(i, i): {0: 0} for i in range(dim)}, labels)

    @classmethod
    def zero(cls, dim: int, labels: Optional[Sequence[Hashable]] = None) -> "PolyMatrix":
        return cls(dim, {}, labels)

    # -- accessors -------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self._dim

    @property
    def labels(self) -> Tuple[Hashable, ...]:
        return self._labels

    @property
    def entries(self) -> Mapping[Tuple[int, int], Poly]:
        return self._entries

    def __getitem__(self, key: Tuple[int, int]) -> Poly:
        return self._entries.get(key, MappingProxyType({}))

    def coefficient(self, i: int, j: int, degree: int) -> Scalar:
        return self._entries.get((i, j), {}).get(degree, EPS)

    def arcs(self) -> Iterator[Tuple[int, int, int, Number]]:
        """Yield (row, col, degree, coefficient) for every stored coefficient."""
        for (i, j), poly in sorted(self._entries.items()):
            for deg, c in poly.items():
                yield i, j, deg, c

    def degree_part(self, degree: int) -> "PolyMatrix":
        return PolyMatrix(
            self._dim,
            {key: {degree: poly[degree]} for key, poly in self._entries.items() if degree in poly},
            self._labels,
        )

    @property
    def max_degree(self) -> int:
        return max((d for _, _, d, _ in self.arcs()), default=0)

    def index(self, label: Hashable) -> int:
        return self._labels.index(label)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self._dim == other._dim and {k: dict(v) for k, v in self._entries.items()} == {
            k: dict(v) for k, v in other._entries.items()
        }

    def __repr__(self) -> str:
        return f"PolyMatrix(dim={self._dim}, arcs={sum(len(p) for p in self._entries.values())})"

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        return poly_mat_mul(self, other)


def poly_mat_mul(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    """Max-plus product of polynomial matrices; degrees add, coefficients add."""
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {B.dim}")
    rows_of_b: Dict[int, List[Tuple[int, Poly]]] = {}
    for (k, j), poly in B.entries.items():
        rows_of_b.setdefault(k, []).append((j, poly))
    out: Dict[Tuple[int, int], Dict[int, Number]] = {}
    for (i, k), pa in A.entries.items():
        for j, pb in rows_of_b.get(k, ()):
            cell = out.setdefault((i, j), {})
            for d1, c1 in pa.items():
                for d2, c2 in pb.items():
                    d = d1 + d2
                    v = c1 + c2
                    old = cell.get(d)
                    if old is None or v > old:
                        cell[d] = v
    return PolyMatrix(A.dim, out, A.labels)


def poly_mat_add(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {B.dim}")
    out: Dict[Tuple[int, int], Dict[int, Number]] = {k: dict(v) for k, v in A.entries.items()}
    for key, poly in B.entries.items():
        cell = out.setdefault(key, {})
        for d, c in poly.items():
            cell[d] = c if d not in cell else max(cell[d], c)
    return PolyMatrix(A.dim, out, A.labels)


def poly_eval(A: PolyMatrix, mu: Number) -> List[List[Scalar]]:
    """Evaluate A at gamma = mu^{-1}: entry = max_l (c_l - l * mu)."""
    M: List[List[Scalar]] = [[EPS] * A.dim for _ in range(A.dim)]
    for (i, j), poly in A.entries.items():
        M[i][j] = mp_sum(c - d * mu for d, c in poly.items())
    return M


def mat_vec(M: Sequence[Sequence[Scalar]], v: Sequence[Scalar]) -> List[Scalar]:
    return [mp_sum(mp_mul(a, b) for a, b in zip(row, v)) for row in M]


# ---------------------------------------------------------------------------
# Event graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    src: int
    dst: int
    duration: int
    weight: Number


@dataclass(frozen=True)
class EventGraph:
    """Arcs col -> row, one per stored coefficient of the source matrix."""

    nodes: Tuple[Hashable, ...]
    arcs: Tuple[Arc, ...]

    @classmethod
    def from_matrix(cls, A: PolyMatrix) -> "EventGraph":
        return cls(A.labels, tuple(Arc(j, i, d, c) for i, j, d, c in A.arcs()))

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.nodes)))
        g.add_edges_from((a.src, a.dst) for a in self.arcs)
        return g

    def to_dot(self, name: str = "") -> str:
        lines = [f"digraph {name + ' ' if name else ''}{{"]
        for a in self.arcs:
            lines.append(
                f'  "{_label(self.nodes[a.src])}" -> "{_label(self.nodes[a.dst])}" '
                f'[label="{_fmt_weight(a.weight)}/{a.duration}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


def _label(node: Hashable) -> str:
    if isinstance(node, tuple):
        return "(" + ",".join(str(p) for p in node) + ")"
    return str(node)


def _fmt_weight(w: Number) -> str:
    if isinstance(w, float):
        return f"{w:g}"
    return str(w)


def strongly_connected_components(G: EventGraph) -> Tuple[List[frozenset], bool]:
    """SCC partition (as sets of node indices) and whether G is strongly connected."""
    comps = [frozenset(c) for c in nx.strongly_connected_components(G.digraph())]
    comps.sort(key=min)
    return comps, len(comps) == 1 and len(G.nodes) > 0


def nontrivial_components(G: EventGraph) -> List[frozenset]:
    """SCCs carrying at least one cycle (more than one node, or a self-loop)."""
    loops = {a.src for a in G.arcs if a.src == a.dst}
    return [c for c in strongly_connected_components(G)[0] if len(c) > 1 or next(iter(c)) in loops]


# ---------------------------------------------------------------------------
# Maximum cycle mean: Howard policy iteration
# ---------------------------------------------------------------------------

class NoCycleError(ValueError):
    """The graph has no cycle with positive duration: no eigenvalue exists."""


class ImplicitSystemError(ValueError):
    """A cycle of zero total duration: the recursion is fully implicit."""


@dataclass(frozen=True)
class CycleMeanResult:
    mean: Number
    cycle: Tuple[Arc, ...]
    node_means: Tuple[Optional[Number], ...] = field(repr=False)
    bias: Tuple[Optional[Number], ...] = field(repr=False)


def _expand(G: EventGraph):
    """Row-picks-column choice lists with duration-l arcs split into unit arcs.

    Returns (choices, origin) where choices[i] is a list of (j, weight, duration)
    and origin maps (i, position) to the original arc for witness recovery.
    """
    n = len(G.nodes)
    choices: List[List[Tuple[int, Number, int]]] = [[] for _ in range(n)]
    origin: Dict[Tuple[int, int], Arc] = {}
    for arc in G.arcs:
        i, j, ell, w = arc.dst, arc.src, arc.duration, arc.weight
        if ell <= 1:
            origin[(i, len(choices[i]))] = arc
            choices[i].append((j, w, ell))
            continue
        chain = list(range(len(choices), len(choices) + ell - 1))
        choices.extend([] for _ in chain)
        origin[(i, len(choices[i]))] = arc
        choices[i].append((chain[0], w, 1))
        for a, b in zip(chain, chain[1:]):
            choices[a].append((b, 0, 1))
        choices[chain[-1]].append((j, 0, 1))
    return n, choices, origin


def max_cycle_mean(G: EventGraph, tol: Optional[float] = None) -> CycleMeanResult:
    """Maximum over cycles of weight/duration, by Howard policy iteration.

    Exact (Fraction) arithmetic is used when every weight is an int or
    Fraction; otherwise floats with a relative tolerance.
    """
    n_orig, choices, origin = _expand(G)
    exact = all(_is_exact(a.weight) for a in G.arcs)
    if tol is None:
        scale = max((abs(float(a.weight)) for a in G.arcs), default=1.0) or 1.0
        tol = 0 if exact else 1e-12 * scale * max(1, len(choices))
    if exact:
        tol = 0  # an int keeps Fraction comparisons exact (0.0 would coerce to float)
    N = len(choices)

    # Keep only nodes that can be continued forever (they reach a cycle).
    alive = [bool(c) for c in choices]
    changed = True
    while changed:
        changed = False
        for i in range(N):
            if alive[i] and not any(alive[j] for j, _, _ in choices[i]):
                alive[i] = False
                changed = True
    if not any(alive):
        raise NoCycleError("the event graph has no cycle")
    opts = [[c for c in choices[i] if alive[c[0]]] if alive[i] else [] for i in range(N)]

    def ratio(w, d):
        if exact:
            return Fraction(w, d) if isinstance(w, int) else Fraction(w) / d
        return w / d

    policy = [max(range(len(o)), key=lambda k: o[k][1]) if o else -1 for o in opts]
    eta: List[Optional[Number]] = [None] * N
    x: List[Optional[Number]] = [None] * N

    for _ in range(10 * N + 1000):
        # -- value determination ------------------------------------------------
        new_eta: List[Optional[Number]] = [None] * N
        new_x: List[Optional[Number]] = [None] * N
        state = [0] * N  # 0 unseen, 1 on current walk, 2 done
        for start in range(N):
            if not alive[start] or state[start]:
                continue
            walk = []
            v = start
            while alive[v] and state[v] == 0:
                state[v] = 1
                walk.append(v)
                v = opts[v][policy[v]][0]
            if state[v] == 1:
                k = walk.index(v)
                cyc = walk[k:]
                W = sum(opts[u][policy[u]][1] for u in cyc)
                D = sum(opts[u][policy[u]][2] for u in cyc)
                if D == 0:
                    raise ImplicitSystemError("cycle of zero duration (implicit recursion)")
                mu = ratio(W, D)
                root = v
                new_eta[root] = mu
                new_x[root] = x[root] if x[root] is not None else 0
                for u in _cycle_back_order(cyc, root):
                    j, w, d = opts[u][policy[u]]
                    new_eta[u] = mu
                    new_x[u] = w - mu * d + new_x[j]
                for u in cyc:
                    state[u] = 2
                walk = walk[:k]
            for u in reversed(walk):
                j, w, d = opts[u][policy[u]]
                new_eta[u] = new_eta[j]
                new_x[u] = w - new_eta[j] * d + new_x[j]
                state[u] = 2
        eta, x = new_eta, new_x

        # -- policy improvement, first on the means --------------------------------
        improved = False
        for i in range(N):
            if not alive[i]:
                continue
            best_k, best = policy[i], eta[opts[i][policy[i]][0]]
            for k, (j, _, _) in enumerate(opts[i]):
                if eta[j] > best + tol:
                    best_k, best = k, eta[j]
            if best_k != policy[i]:
                policy[i] = best_k
                improved = True
        if improved:
            continue
        # -- then on the bias --------------------------------------------------------
        for i in range(N):
            if not alive[i]:
                continue
            best_k, best = policy[i], x[i]
            for k, (j, w, d) in enumerate(opts[i]):
                if abs(eta[j] - eta[i]) > tol:
                    continue
                val = w - eta[i] * d + x[j]
                if val > best + tol:
                    best_k, best = k, val
            if best_k != policy[i]:
                policy[i] = best_k
                improved = True
        if not improved:
            break
    else:  # pragma: no cover - defensive
        raise RuntimeError("policy iteration did not converge")

    top = max(e for e in eta if e is not None)
    # witness: the policy cycle through a node attaining the top mean
    start = next(i for i in range(N) if eta[i] is not None and eta[i] >= top - tol)
    seen = {}
    v = start
    while v not in seen:
        seen[v] = len(seen)
        v = opts[v][policy[v]][0]
    cyc_nodes = list(seen)[seen[v]:]
    witness: List[Arc] = []
    for u in cyc_nodes:
        if u < n_orig:
            k_orig = choices[u].index(opts[u][policy[u]])
            witness.append(origin[(u, k_orig)])
    node_means = tuple(eta[:n_orig])
    return CycleMeanResult(top, tuple(witness), node_means, tuple(x[:n_orig]))


def _cycle_back_order(cyc: List[int], root: int) -> List[int]:
    """Members of a policy cycle ordered so each one's successor is already valued.

    ``cyc`` lists nodes in policy order (u -> next).  Starting just before root
    and moving backwards guarantees the successor was assigned first.
    """
    k = cyc.index(root)
    rot = cyc[k:] + cyc[:k]  # root first, then successors along the policy
    return rot[1:][::-1]


# ---------------------------------------------------------------------------
# Generalized eigenpair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenResult:
    mu: Number
    v: Optional[Tuple[Number, ...]]
    irreducible: bool
    components: Tuple[Tuple[frozenset, Number], ...]


def degree0_is_acyclic(A: PolyMatrix) -> bool:
    g = nx.DiGraph()
    g.add_nodes_from(range(A.dim))
    g.add_edges_from((j, i) for i, j, d, _ in A.arcs() if d == 0)
    return nx.is_directed_acyclic_graph(g)


def generalized_eigenpair(A: PolyMatrix) -> EigenResult:
    """mu = maximum cycle mean of G(A) and v with A(mu^{-1}) (x) v = v.

    For a reducible matrix each non-trivial SCC is solved separately; the
    eigenvector is then only reported when the whole matrix is irreducible.
    """
    if not degree0_is_acyclic(A):
        raise ImplicitSystemError("G(A_0) has a cycle: the system is fully implicit")
    G = EventGraph.from_matrix(A)
    comps, irreducible = strongly_connected_components(G)
    if irreducible:
        res = max_cycle_mean(G)
        return EigenResult(res.mean, tuple(res.bias), True, ((comps[0], res.mean),))
    per: List[Tuple[frozenset, Number]] = []
    for comp in nontrivial_components(G):
        idx = sorted(comp)
        pos = {v: k for k, v in enumerate(idx)}
        sub = PolyMatrix(
            len(idx),
            {(pos[i], pos[j]): p for (i, j), p in A.entries.items() if i in pos and j in pos},
            [A.labels[i] for i in idx],
        )
        per.append((comp, max_cycle_mean(EventGraph.from_matrix(sub)).mean))
    if not per:
        raise NoCycleError("the event graph has no cycle")
    return EigenResult(max(m for _, m in per), None, False, tuple(per))
