"""Line description: topology, timing parameters, demand data and train placement.

Parts are indexed u = 0 (central part), 1 and 2 (branches).  Segment (u, j)
joins node (u, j-1) to node (u, j).  The junction nodes are shared:
(1, 0) = (2, 0) = (0, n0) is the divergence and (1, n1) = (2, n2) = (0, 0)
is the convergence.  All times are stored in seconds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

Node = Tuple[int, int]
SegmentKey = Tuple[int, int]


class ConfigError(ValueError):
    """Raised with every schema or invariant violation found in a document."""

    def __init__(self, problems: Sequence[str]) -> None:
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class SegmentParams:
    u: int
    j: int
    r_min: float
    w_min: float
    s_min: float
    g_min: Optional[float] = None
    g_max: Optional[float] = None
    is_platform: bool = False
    run_margin: Optional[float] = None  # per-segment override of the line fraction

    @property
    def t_min(self) -> float:
        return self.r_min + self.w_min

    @property
    def g_lo(self) -> float:
        """Minimum dynamic interval, defaulting to s_min + r_min."""
        return self.s_min + self.r_min if self.g_min is None else self.g_min

    @property
    def g_hi(self) -> float:
        return self.g_lo if self.g_max is None else self.g_max

    def problems(self) -> List[str]:
        out = []
        tag = f"segment ({self.u}, {self.j})"
        if not self.r_min > 0:
            out.append(f"{tag}: r must be positive")
        if self.w_min < 0:
            out.append(f"{tag}: w must be non-negative")
        if self.s_min < 0:
            out.append(f"{tag}: s must be non-negative")
        if self.w_min > 0 and not self.is_platform:
            out.append(f"{tag}: positive dwell time requires a platform")
        if self.is_platform and self.w_min == 0:
            out.append(f"{tag}: platform node needs a positive dwell time")
        if self.g_lo < 0:
            out.append(f"{tag}: g_min must be non-negative")
        if self.g_hi < self.g_lo:
            out.append(f"{tag}: g_max must not be below g_min")
        if self.run_margin is not None and self.run_margin < 0:
            out.append(f"{tag}: run_margin must be non-negative")
        return out


@dataclass(frozen=True)
class DemandEntry:
    u: int
    j: int
    lambda_in: float = 0.0   # passengers / s
    lambda_out: float = 0.0  # passengers / s
    alpha_in: float = 1.0    # passengers / s
    alpha_out: float = 1.0   # passengers / s
    charge: Optional[float] = None  # passengers on board (per hour) for headway requirements

    @property
    def x(self) -> float:
        x = 0.0
        if self.lambda_out:
            x += self.lambda_out / self.alpha_out
        if self.lambda_in:
            x += self.lambda_in / self.alpha_in
        return x

    def problems(self) -> List[str]:
        out = []
        tag = f"demand ({self.u}, {self.j})"
        for name in ("lambda_in", "lambda_out", "alpha_in", "alpha_out"):
            if getattr(self, name) < 0:
                out.append(f"{tag}: {name} must be non-negative")
        if self.lambda_in > 0 and self.alpha_in <= 0:
            out.append(f"{tag}: alpha_in must be positive where lambda_in > 0")
        if self.lambda_out > 0 and self.alpha_out <= 0:
            out.append(f"{tag}: alpha_out must be positive where lambda_out > 0")
        if self.charge is not None and self.charge < 0:
            out.append(f"{tag}: charge must be non-negative")
        return out


@dataclass(frozen=True)
class LineTopology:
    n0: int
    n1: int
    n2: int
    segments: Mapping[SegmentKey, SegmentParams]
    demand: Mapping[SegmentKey, DemandEntry] = field(default_factory=dict)
    run_margin: float = 0.0
    kappa: Optional[float] = None

    def __post_init__(self) -> None:
        problems = validate_topology(self)
        if problems:
            raise ConfigError(problems)

    # -- structure -------------------------------------------------------------
    def n_of(self, u: int) -> int:
        return (self.n0, self.n1, self.n2)[u]

    @property
    def n(self) -> int:
        return self.n0 + self.n1 + self.n2

    def seg(self, u: int, j: int) -> SegmentParams:
        return self.segments[(u, j)]

    def segment_keys(self) -> List[SegmentKey]:
        return [(u, j) for u in (0, 1, 2) for j in range(1, self.n_of(u) + 1)]

    def nodes(self) -> List[Node]:
        """Matrix node order: (0,0..n0), (1,1..n1-1), (2,1..n2-1)."""
        return (
            [(0, j) for j in range(self.n0 + 1)]
            + [(1, j) for j in range(1, self.n1)]
            + [(2, j) for j in range(1, self.n2)]
        )

    def canonical(self, u: int, j: int) -> Node:
        """Resolve the junction aliases to their central-part names."""
        if u and j == 0:
            return (0, self.n0)
        if u and j == self.n_of(u):
            return (0, 0)
        return (u, j)

    # -- demand-dependent quantities -------------------------------------------
    def margin_of(self, u: int, j: int) -> float:
        """Run time margin Delta r (seconds) on segment (u, j)."""
        sp = self.seg(u, j)
        rho = self.run_margin if sp.run_margin is None else sp.run_margin
        return rho * sp.r_min

    def r_nominal(self, u: int, j: int) -> float:
        return self.seg(u, j).r_min + self.margin_of(u, j)

    def x_of(self, u: int, j: int) -> float:
        d = self.demand.get((u, j))
        return 0.0 if d is None else d.x

    def with_margin(self, rho: float) -> "LineTopology":
        segs = {k: replace(v, run_margin=None) for k, v in self.segments.items()}
        return replace(self, segments=segs, run_margin=rho)

    def with_demand_scale(self, factor: float) -> "LineTopology":
        dem = {
            k: replace(d, lambda_in=d.lambda_in * factor, lambda_out=d.lambda_out * factor)
            for k, d in self.demand.items()
        }
        return replace(self, demand=dem)


def validate_topology(t: LineTopology) -> List[str]:
    problems: List[str] = []
    for name in ("n0", "n1", "n2"):
        v = getattr(t, name)
        if not isinstance(v, int) or v < 0:
            problems.append(f"{name} must be a non-negative integer")
    if problems:
        return problems
    if t.n0 < 2:
        problems.append("n0 must be at least 2")
    elif t.n0 % 2:
        problems.append("n0 must be even")
    for u, nu in ((1, t.n1), (2, t.n2)):
        if nu == 0:
            problems.append(f"branch {u} is empty (n{u} = 0): the junction requires both branches")
        elif nu < 2:
            problems.append(f"n{u} must be at least 2")
    for (u, j), sp in t.segments.items():
        if (sp.u, sp.j) != (u, j):
            problems.append(f"segment key ({u}, {j}) does not match its record")
        if u not in (0, 1, 2):
            problems.append(f"segment ({u}, {j}): part must be 0, 1 or 2")
        elif not 1 <= j <= t.n_of(u):
            problems.append(f"segment ({u}, {j}): index outside 1..n{u}")
        problems.extend(sp.problems())
    for u in (0, 1, 2):
        missing = [j for j in range(1, t.n_of(u) + 1) if (u, j) not in t.segments]
        for j in missing:
            problems.append(f"({u}, {j}) gap: missing segment record")
    for (u, j), d in t.demand.items():
        if u not in (0, 1, 2) or not 1 <= j <= t.n_of(u):
            problems.append(f"demand ({u}, {j}): no such segment")
        problems.extend(d.problems())
        if d.x >= 1:
            problems.append(f"demand ({u}, {j}): x = {d.x:.6f} >= 1 saturates the platform")
    if t.run_margin < 0:
        problems.append("run_margin must be non-negative")
    if t.kappa is not None and t.kappa <= 0:
        problems.append("kappa must be positive")
    return problems


# ---------------------------------------------------------------------------
# Aggregates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Aggregates:
    n0: int
    n1: int
    n2: int
    T0: float
    T1: float
    T2: float
    S0: float
    S1: float
    S2: float
    h_min: float

    @property
    def n(self) -> int:
        return self.n0 + self.n1 + self.n2

    @property
    def dn(self) -> int:
        return self.n2 - self.n1

    @property
    def T(self) -> float:
        return (2 * self.T0 + self.T1 + self.T2) / 2

    @property
    def dT(self) -> float:
        return self.T2 - self.T1

    @property
    def S(self) -> float:
        return (2 * self.S0 + self.S1 + self.S2) / 2

    @property
    def dS(self) -> float:
        return self.S2 - self.S1

    @property
    def f_max(self) -> float:
        """Maximum frequency in trains per second."""
        return 1.0 / self.h_min

    def as_dict(self) -> Dict[str, float]:
        return {
            "T0": self.T0, "T1": self.T1, "T2": self.T2,
            "S0": self.S0, "S1": self.S1, "S2": self.S2,
            "T": self.T, "dT": self.dT, "S": self.S, "dS": self.dS,
            "n": self.n, "dn": self.dn, "h_min": self.h_min,
        }


def segment_travel(t: LineTopology, demand: bool = False) -> Dict[SegmentKey, float]:
    """Per-segment travel time: t_min, or r_nominal + X * g_min with demand."""
    out = {}
    for u, j in t.segment_keys():
        sp = t.seg(u, j)
        if demand:
            x = t.x_of(u, j)
            out[(u, j)] = t.r_nominal(u, j) + x / (1 - x) * sp.g_lo
        else:
            out[(u, j)] = sp.t_min
    return out


def aggregates(t: LineTopology, travel: Optional[Mapping[SegmentKey, float]] = None) -> Aggregates:
    """Sums per part plus the minimum-headway term (travel overridable)."""
    tv = travel if travel is not None else segment_travel(t)
    T = [sum(tv[(u, j)] for j in range(1, t.n_of(u) + 1)) for u in (0, 1, 2)]
    S = [sum(t.seg(u, j).s_min for j in range(1, t.n_of(u) + 1)) for u in (0, 1, 2)]
    h_min = max(tv[(0, j)] + t.seg(0, j).s_min for j in range(1, t.n0 + 1))
    for u in (1, 2):
        for j in range(1, t.n_of(u)):  # j = n_u excluded
            h_min = max(h_min, (tv[(u, j)] + t.seg(u, j).s_min) / 2)
    return Aggregates(t.n0, t.n1, t.n2, T[0], T[1], T[2], S[0], S[1], S[2], h_min)


# ---------------------------------------------------------------------------
# Occupancy and train placement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OccupancyVector:
    n0: int
    n1: int
    n2: int
    b: Mapping[SegmentKey, int]

    def __getitem__(self, key: SegmentKey) -> int:
        return self.b[key]

    def bbar(self, u: int, j: int) -> int:
        return 1 - self.b[(u, j)]

    def m_of(self, u: int) -> int:
        n_u = (self.n0, self.n1, self.n2)[u]
        return sum(self.b[(u, j)] for j in range(1, n_u + 1))

    @property
    def m(self) -> int:
        return sum(self.b.values())

    @property
    def dm(self) -> int:
        return self.m_of(2) - self.m_of(1)

    @property
    def n(self) -> int:
        return self.n0 + self.n1 + self.n2

    @property
    def mbar(self) -> int:
        return self.n - self.m

    @property
    def dmbar(self) -> int:
        return (self.n2 - self.m_of(2)) - (self.n1 - self.m_of(1))

    def part(self, u: int) -> Tuple[int, ...]:
        n_u = (self.n0, self.n1, self.n2)[u]
        return tuple(self.b[(u, j)] for j in range(1, n_u + 1))

    @classmethod
    def from_parts(cls, b0: Sequence[int], b1: Sequence[int], b2: Sequence[int]) -> "OccupancyVector":
        b = {}
        for u, part in enumerate((b0, b1, b2)):
            for j, v in enumerate(part, start=1):
                if v not in (0, 1):
                    raise ValueError("occupancy entries must be 0 or 1")
                b[(u, j)] = int(v)
        return cls(len(b0), len(b1), len(b2), b)


class InfeasibleError(ValueError):
    """The requested (m, dm) lies outside the open feasible polygon."""


def feasible(n0: int, n1: int, n2: int, m: int, dm: int) -> bool:
    """Strict interior of the polygon ABCDEF: every headway denominator positive."""
    n = n0 + n1 + n2
    mbar, dmbar = n - m, (n2 - n1) - dm
    return (
        0 < m < n
        and m - dm > 0 and m + dm > 0
        and mbar - dmbar > 0 and mbar + dmbar > 0
        and n2 - dm > 0 and n1 + dm > 0
    )


def spread(n_u: int, m_u: int) -> Tuple[int, ...]:
    """Evenly spaced 0/1 pattern with m_u ones over n_u slots, low index first."""
    b = [0] * n_u
    for i in range(m_u):
        b[(i * n_u) // m_u] = 1
    return tuple(b)


def split_counts(n0: int, n1: int, n2: int, m: int, dm: int) -> Tuple[int, int, int]:
    """Per-part counts (m0, m1, m2) with m2 - m1 = dm, closest to uniform density."""
    n = n0 + n1 + n2
    rho = m / n
    best = None
    for m1 in range(0, n1 + 1):
        m2 = m1 + dm
        m0 = m - m1 - m2
        if not (0 <= m2 <= n2 and 0 <= m0 <= n0):
            continue
        cost = (m0 - rho * n0) ** 2 + (m1 - rho * n1) ** 2 + (m2 - rho * n2) ** 2
        if best is None or cost < best[0] - 1e-12:
            best = (cost, m0, m1, m2)
    if best is None:
        raise InfeasibleError(f"no split of m={m} with dm={dm} fits the line")
    return best[1], best[2], best[3]


def place_trains(t, m: int, dm: int) -> OccupancyVector:
    """Deterministic placement of m trains with m2 - m1 = dm.

    ``t`` may be a LineTopology or an (n0, n1, n2) tuple.
    """
    n0, n1, n2 = (t.n0, t.n1, t.n2) if hasattr(t, "n0") else t
    n = n0 + n1 + n2
    if m <= 0:
        raise InfeasibleError("m = 0: the dynamics are fully implicit (no train)")
    if m >= n:
        raise InfeasibleError("m = n: the dynamics are fully implicit (no free segment)")
    if not feasible(n0, n1, n2, m, dm):
        raise InfeasibleError(f"(m={m}, dm={dm}) lies outside the feasible polygon")
    m0, m1, m2 = split_counts(n0, n1, n2, m, dm)
    return OccupancyVector.from_parts(spread(n0, m0), spread(n1, m1), spread(n2, m2))


# ---------------------------------------------------------------------------
# Config documents
# ---------------------------------------------------------------------------

_SECTION = re.compile(r"^\[(?P<name>[a-z_]+)(?P<attrs>[^\]]*)\](?P<rest>.*)$")
_TIME = re.compile(r"^(?P<v>[-+0-9.eE]+)\s*(?P<unit>s|min)?$")
_RATE = re.compile(r"^(?P<v>[-+0-9.eE]+)\s*(?:/(?P<unit>s|h|min))?$")

SEGMENT_KEYS = {"r", "w", "s", "g_min", "g_max", "platform", "run_margin"}
DEMAND_KEYS = {"lambda_in", "lambda_out", "alpha_in", "alpha_out", "charge"}
LINE_KEYS = {"n0", "n1", "n2", "run_margin", "kappa"}
PERTURBATION_KEYS = {"u", "j_from", "j_to", "extra", "count", "start_k", "start_time"}
OVERRIDE_KEYS = {"k", "branch"}
RUN_KEYS = {"m", "dm", "K", "law", "convergence", "burn_in"}


def parse_time(text: str) -> float:
    mt = _TIME.match(text.strip())
    if not mt:
        raise ValueError(f"bad time value {text!r}")
    v = float(mt.group("v"))
    return v * 60.0 if mt.group("unit") == "min" else v


def parse_rate(text: str) -> float:
    mt = _RATE.match(text.strip())
    if not mt:
        raise ValueError(f"bad rate value {text!r}")
    v = float(mt.group("v"))
    return v / {"s": 1.0, None: 1.0, "min": 60.0, "h": 3600.0}[mt.group("unit")]


def _tokens(text: str) -> List[str]:
    return [tok for tok in text.split() if tok]


@dataclass(frozen=True)
class PerturbationSpec:
    u: int
    j_from: int
    j_to: int
    extra: float
    count: int
    start_k: Optional[int] = None
    start_time: Optional[float] = None


@dataclass(frozen=True)
class OverrideSpec:
    k: int       # convergence departure index (central counter at (0,0))
    branch: int  # branch letting two consecutive trains pass


@dataclass(frozen=True)
class Scenario:
    topology: LineTopology
    perturbations: Tuple[PerturbationSpec, ...] = ()
    overrides: Tuple[OverrideSpec, ...] = ()
    run: Mapping[str, str] = field(default_factory=dict)


def _parse_sections(text: str):
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        mt = _SECTION.match(line)
        if mt:
            current = [mt.group("name"), lineno, {}, []]
            for tok in _tokens(mt.group("attrs")):
                if "=" not in tok:
                    raise ConfigError([f"line {lineno}: bad section attribute {tok!r}"])
                k, v = tok.split("=", 1)
                current[2][k] = v
            sections.append(current)
            line = mt.group("rest").strip()
            if not line:
                continue
        if current is None:
            raise ConfigError([f"line {lineno}: content before the first section"])
        for tok in _tokens(line):
            current[3].append((lineno, tok))
    return sections


def load_scenario(text: str) -> Scenario:
    problems: List[str] = []
    line_vals: Dict[str, str] = {}
    segs: Dict[SegmentKey, SegmentParams] = {}
    dem: Dict[SegmentKey, DemandEntry] = {}
    perts: List[PerturbationSpec] = []
    overs: List[OverrideSpec] = []
    run: Dict[str, str] = {}
    seen_line = False

    for name, lineno, attrs, toks in _parse_sections(text):
        kv: Dict[str, str] = {}
        flags = set()
        for ln, tok in toks:
            if "=" in tok:
                k, v = tok.split("=", 1)
                kv[k] = v
            else:
                flags.add((ln, tok))
        where = f"line {lineno}"
        try:
            if name == "line":
                seen_line = True
                for k in kv:
                    if k not in LINE_KEYS:
                        problems.append(f"{where}: unknown key {k!r} in [line]")
                for ln, f in flags:
                    problems.append(f"line {ln}: unknown flag {f!r} in [line]")
                line_vals.update(kv)
            elif name == "segment":
                u, j = int(attrs["u"]), int(attrs["j"])
                for k in kv:
                    if k not in SEGMENT_KEYS:
                        problems.append(f"{where}: unknown key {k!r} in segment ({u}, {j})")
                is_platform = False
                for ln, f in flags:
                    if f == "platform":
                        is_platform = True
                    else:
                        problems.append(f"line {ln}: unknown flag {f!r} in segment ({u}, {j})")
                for req in ("r", "s"):
                    if req not in kv:
                        problems.append(f"{where}: segment ({u}, {j}) lacks {req}=")
                if (u, j) in segs:
                    problems.append(f"{where}: duplicate segment ({u}, {j})")
                segs[(u, j)] = SegmentParams(
                    u, j,
                    r_min=parse_time(kv.get("r", "0")),
                    w_min=parse_time(kv.get("w", "0")),
                    s_min=parse_time(kv.get("s", "0")),
                    g_min=parse_time(kv["g_min"]) if "g_min" in kv else None,
                    g_max=parse_time(kv["g_max"]) if "g_max" in kv else None,
                    is_platform=is_platform,
                    run_margin=float(kv["run_margin"]) if "run_margin" in kv else None,
                )
            elif name == "demand":
                u, j = int(attrs["u"]), int(attrs["j"])
                for k in kv:
                    if k not in DEMAND_KEYS:
                        problems.append(f"{where}: unknown key {k!r} in demand ({u}, {j})")
                for ln, f in flags:
                    problems.append(f"line {ln}: unknown flag {f!r} in demand ({u}, {j})")
                dem[(u, j)] = DemandEntry(
                    u, j,
                    lambda_in=parse_rate(kv.get("lambda_in", "0")),
                    lambda_out=parse_rate(kv.get("lambda_out", "0")),
                    alpha_in=parse_rate(kv.get("alpha_in", "1")),
                    alpha_out=parse_rate(kv.get("alpha_out", "1")),
                    charge=float(kv["charge"]) if "charge" in kv else None,
                )
            elif name == "perturbation":
                allk = {**attrs, **kv}
                for k in allk:
                    if k not in PERTURBATION_KEYS:
                        problems.append(f"{where}: unknown key {k!r} in [perturbation]")
                perts.append(PerturbationSpec(
                    u=int(allk["u"]), j_from=int(allk["j_from"]), j_to=int(allk["j_to"]),
                    extra=parse_time(allk["extra"]), count=int(allk["count"]),
                    start_k=int(allk["start_k"]) if "start_k" in allk else None,
                    start_time=parse_time(allk["start_time"]) if "start_time" in allk else None,
                ))
            elif name == "override":
                allk = {**attrs, **kv}
                for k in allk:
                    if k not in OVERRIDE_KEYS:
                        problems.append(f"{where}: unknown key {k!r} in [override]")
                overs.append(OverrideSpec(k=int(allk["k"]), branch=int(allk["branch"])))
            elif name == "run":
                allk = {**attrs, **kv}
                for k in allk:
                    if k not in RUN_KEYS:
                        problems.append(f"{where}: unknown key {k!r} in [run]")
                run.update(allk)
            else:
                problems.append(f"{where}: unknown section [{name}]")
        except KeyError as exc:
            problems.append(f"{where}: missing attribute {exc.args[0]!r} in [{name}]")
        except ValueError as exc:
            problems.append(f"{where}: {exc}")

    if not seen_line:
        problems.append("missing [line] section")
    for req in ("n0", "n1", "n2"):
        if seen_line and req not in line_vals:
            problems.append(f"[line] lacks {req}=")
    if problems:
        raise ConfigError(problems)
    try:
        topo = LineTopology(
            n0=int(line_vals["n0"]), n1=int(line_vals["n1"]), n2=int(line_vals["n2"]),
            segments=segs, demand=dem,
            run_margin=float(line_vals.get("run_margin", "0")),
            kappa=float(line_vals["kappa"]) if "kappa" in line_vals else None,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError([str(exc)]) from exc
    return Scenario(topo, tuple(perts), tuple(overs), run)


def load_config(text: str) -> LineTopology:
    """Parse and validate a line document (raises ConfigError)."""
    return load_scenario(text).topology


def _num(v: float) -> str:
    return repr(float(v))


def save_config(t: LineTopology) -> str:
    """Serialize a topology; load_config(save_config(t)) == t."""
    head = f"[line] n0={t.n0} n1={t.n1} n2={t.n2} run_margin={_num(t.run_margin)}"
    if t.kappa is not None:
        head += f" kappa={_num(t.kappa)}"
    out = [head]
    for key in t.segment_keys():
        sp = t.segments[key]
        line = f"[segment u={sp.u} j={sp.j}] r={_num(sp.r_min)}s w={_num(sp.w_min)}s s={_num(sp.s_min)}s"
        if sp.g_min is not None:
            line += f" g_min={_num(sp.g_min)}s"
        if sp.g_max is not None:
            line += f" g_max={_num(sp.g_max)}s"
        if sp.run_margin is not None:
            line += f" run_margin={_num(sp.run_margin)}"
        if sp.is_platform:
            line += " platform"
        out.append(line)
    for key in sorted(t.demand):
        d = t.demand[key]
        line = (
            f"[demand u={d.u} j={d.j}] lambda_in={_num(d.lambda_in)}/s lambda_out={_num(d.lambda_out)}/s"
            f" alpha_in={_num(d.alpha_in)}/s alpha_out={_num(d.alpha_out)}/s"
        )
        if d.charge is not None:
            line += f" charge={_num(d.charge)}"
        out.append(line)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Linear (ring) line
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearLine:
    """A closed single-track ring of n segments, nodes (0, 0..n-1).

    Segment (0, j) joins node (0, j-1) to node (0, j mod n).  This is the
    linear line of the demand chapter, and the central-part model used for
    headway harmonization.
    """

    segments: Tuple[SegmentParams, ...]
    demand: Mapping[SegmentKey, DemandEntry] = field(default_factory=dict)
    run_margin: float = 0.0

    def __post_init__(self) -> None:
        problems = []
        if len(self.segments) < 2:
            problems.append("a ring needs at least 2 segments")
        for j, sp in enumerate(self.segments, start=1):
            if (sp.u, sp.j) != (0, j):
                problems.append(f"ring segment {j} carries key ({sp.u}, {sp.j})")
            problems.extend(sp.problems())
        for d in self.demand.values():
            problems.extend(d.problems())
            if d.x >= 1:
                problems.append(f"demand ({d.u}, {d.j}): x >= 1 saturates the platform")
        if problems:
            raise ConfigError(problems)

    @property
    def n(self) -> int:
        return len(self.segments)

    def seg(self, u: int, j: int) -> SegmentParams:
        return self.segments[j - 1]

    def segment_keys(self) -> List[SegmentKey]:
        return [(0, j) for j in range(1, self.n + 1)]

    def nodes(self) -> List[Node]:
        return [(0, j) for j in range(self.n)]

    def margin_of(self, u: int, j: int) -> float:
        sp = self.seg(u, j)
        rho = self.run_margin if sp.run_margin is None else sp.run_margin
        return rho * sp.r_min

    def r_nominal(self, u: int, j: int) -> float:
        return self.seg(u, j).r_min + self.margin_of(u, j)

    def x_of(self, u: int, j: int) -> float:
        d = self.demand.get((u, j))
        return 0.0 if d is None else d.x

    @classmethod
    def from_times(cls, t: Sequence[float], s: Sequence[float]) -> "LinearLine":
        """Ring with fixed travel times t (all run time) and separations s."""
        segs = tuple(
            SegmentParams(0, j, r_min=float(tj), w_min=0.0, s_min=float(sj))
            for j, (tj, sj) in enumerate(zip(t, s), start=1)
        )
        return cls(segs)

    @classmethod
    def from_central(cls, topo: LineTopology) -> "LinearLine":
        """Close the central part of a junction line on itself."""
        segs = tuple(topo.seg(0, j) for j in range(1, topo.n0 + 1))
        dem = {k: v for k, v in topo.demand.items() if k[0] == 0}
        return cls(segs, dem, topo.run_margin)
