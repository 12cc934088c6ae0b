"""Command-line front end: ``metroflux <command> CONFIG [options]``.

Commands
    validate   parse a line document and check the B-matrix preconditions
    headway    closed-form asymptotic headway for an occupancy (m, dm)
    diagram    (m, dm) sweep, demand sweep or run-margin sweep as CSV
    simulate   run a scenario or one of the reference studies
    control    macroscopic control plans (profile, target or observations)

Every CSV and report starts with ``# metroflux <version> <command> <hash>``
where the hash is the first 12 hex digits of the config's SHA-256; data rows
carry no timestamps so reruns are byte-identical.

Exit codes: 0 ok, 2 config error, 3 infeasible request, 4 simulation deadlock.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import math
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .control import (
    _ceil as ceil_trains,
    SaturationError,
    control_csv,
    feedback_demand,
    feedback_fixed_f,
    feedback_fixed_m,
    passing_order_plan,
    plan_for_headway,
    required_and_feasible_headway,
)
from .line import (
    Aggregates,
    ConfigError,
    InfeasibleError,
    LinearLine,
    LineTopology,
    Scenario,
    aggregates,
    load_scenario,
    place_trains,
)
from .matrices import (
    NegativeDegreeError,
    OddSegmentCountError,
    build_B,
    check_B_preconditions,
    dump_dot,
    eigen_headway,
    eigen_history,
    lifted_matrix,
)
from .phases import classify, full_grid, sweep, sweep_csv
from .scenarios import (
    harmonization_study,
    incident_overrides,
    incident_study,
    pooled_spread,
    recovery_time,
)
from .simulate import (
    DEMAND,
    FIXED,
    DeadlockError,
    DwellRunLaw,
    InsufficientDataError,
    constant_gamma,
    convergence_wait,
    empirical_headway,
    linear_decay_gamma,
    simulate,
    trajectory_export,
)
from .steady_state import HeadwayReport, demand_aggregates, demand_travel, headway_junction

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_DEADLOCK = 0, 2, 3, 4


class UsageError(ValueError):
    """Bad flag combination; reported like a config error."""


# ---------------------------------------------------------------------------
# Plumbing
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class RunContext:
    command: str
    config_path: str
    text: str
    out: Optional[str]

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()[:12]

    @property
    def header(self) -> str:
        return f"# metroflux {__version__} {self.command} {self.digest}"

    def emit(self, body: str, stdout: bool = True) -> None:
        """Write ``body`` to --out when given, else to stdout."""
        if self.out:
            with open(self.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(body)
        elif stdout:
            sys.stdout.write(body)


def fmt(v: float) -> str:
    """Fixed six-decimal rendering; inf stays inf."""
    if v is None:
        return ""
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{float(v):.6f}"


def fmt_s_min(v: float) -> str:
    if math.isinf(v):
        return "inf s"
    return f"{v:.6f} s ({v / 60:.6f} min)"


def _load(path: str) -> Tuple[str, Scenario]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror}"]) from exc
    return text, load_scenario(text)


def _override_aggregates(agg: Aggregates, T: Optional[float], dT: Optional[float],
                         h_min: Optional[float]) -> Aggregates:
    """Replace T, dT (seconds) or h_min while keeping the other sums."""
    T1, T2, T0 = agg.T1, agg.T2, agg.T0
    if dT is not None:
        T2 = T1 + dT
    if T is not None or dT is not None:
        target = agg.T if T is None else T
        T0 = target - (T1 + T2) / 2
    return dataclasses.replace(agg, T0=T0, T2=T2,
                               h_min=agg.h_min if h_min is None else h_min)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args, ctx: RunContext, scen: Scenario) -> int:
    topo = scen.topology
    agg = aggregates(topo)
    m, dm = topo.n // 2, (topo.n2 - topo.n1) // 2
    lines = [ctx.header,
             f"config: {ctx.config_path}",
             f"parts: n0={topo.n0} n1={topo.n1} n2={topo.n2}; platforms with demand: {len(topo.demand)}",
             f"T={fmt_s_min(agg.T)} dT={fmt_s_min(agg.dT)} h_min={fmt_s_min(agg.h_min)}"]
    try:
        b = place_trains(topo, m, dm)
    except InfeasibleError as exc:
        lines.append(f"reference occupancy ({m}, {dm}): {exc}")
        sys.stdout.write("\n".join(lines) + "\n")
        return EXIT_INFEASIBLE
    mats: Dict[str, object] = {}
    try:
        steps = build_B(topo, b)
        mats = {"A1": steps.A1, "A2": steps.A2, "Aprime": steps.Aprime,
                "Adouble": steps.Adouble, "B": steps.B}
        target, name = steps.B, "B"
    except (NegativeDegreeError, OddSegmentCountError) as exc:
        lines.append(f"B not polynomial for the reference occupancy ({exc}); checking the lifted matrix")
        target, name = lifted_matrix(topo, b), "lifted"
        mats = {"lifted": target}
    pre = check_B_preconditions(target, b)
    lines.append(f"reference occupancy m={m} dm={dm}: {name}: {pre.describe()}")
    lines.append("valid" if pre.ok else "invalid: preconditions fail")
    report = "\n".join(lines) + "\n"
    if args.dump_graphs:
        with open(args.dump_graphs, "w", encoding="utf-8") as fh:
            fh.write(dump_dot(mats))
    ctx.emit(report)
    return EXIT_OK if pre.ok else EXIT_CONFIG


# ---------------------------------------------------------------------------
# headway
# ---------------------------------------------------------------------------

def headway_report(topo: LineTopology, m: int, dm: int, demand: bool = False,
                   margin: Optional[float] = None) -> HeadwayReport:
    """The library call behind ``metroflux headway``."""
    if demand or margin is not None:
        return headway_junction(demand_aggregates(topo, margin=margin), m, dm)
    return headway_junction(aggregates(topo), m, dm)


HEADWAY_FIELDS = ("h_fw", "h_min", "h_bw", "h_br", "h0", "f0")


def cmd_headway(args, ctx: RunContext, scen: Scenario) -> int:
    topo = scen.topology
    m, dm = args.m, args.dm
    if args.demand or args.margin is not None:
        agg = demand_aggregates(topo, margin=args.margin)
    else:
        agg = aggregates(topo)
    rep = headway_junction(agg, m, dm)
    phase = classify(m, dm, agg)
    model = "demand" if (args.demand or args.margin is not None) else "fixed"
    lines = [ctx.header, f"m={m} dm={dm} model={model}"]
    if rep.binding == "zero":
        lines.append(f"zero flow: (m, dm) = ({m}, {dm}) admits no train movement (f0 = 0)")
    for name in ("h_fw", "h_min", "h_bw", "h_br"):
        lines.append(f"{name}={fmt_s_min(getattr(rep, name))}")
    lines.append(f"h0={fmt_s_min(rep.h0)}")
    lines.append(f"h1=h2={fmt_s_min(2 * rep.h0)}")
    lines.append(f"f0={fmt(rep.f0)}/h f1=f2={fmt(rep.f0 / 2)}/h")
    lines.append(f"binding={rep.binding}")
    lines.append(f"phase={phase.label}")
    if (m + dm) % 2 and rep.binding != "zero":
        lines.append("note: m + dm is odd; the simulated headway may lie below this bound")
    if args.eigen and 0 < m < topo.n:
        b = place_trains(topo, m, dm)
        lines.append(f"h0_eigen={fmt_s_min(float(eigen_headway(topo, b)))}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        buf = io.StringIO()
        buf.write(ctx.header + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "dm", "model", *HEADWAY_FIELDS, "binding", "phase"])
        w.writerow([m, dm, model, *(fmt(getattr(rep, f)) for f in HEADWAY_FIELDS),
                    rep.binding, phase.label])
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# diagram
# ---------------------------------------------------------------------------

def _parse_range(text: Optional[str], default: range) -> range:
    if not text:
        return default
    parts = [int(p) for p in text.split(":")]
    if len(parts) == 2:
        return range(parts[0], parts[1] + 1)
    if len(parts) == 3:
        return range(parts[0], parts[1] + 1, parts[2])
    raise UsageError(f"range {text!r}: expected lo:hi or lo:hi:step")


def _parse_floats(text: str) -> List[float]:
    if ":" in text:
        lo, hi, step = (float(p) for p in text.split(":"))
        n = int(round((hi - lo) / step))
        return [round(lo + i * step, 12) for i in range(n + 1)]
    return [float(p) for p in text.split(",") if p.strip()]


def _binding_segment(line, tv) -> Tuple[float, Tuple[int, int]]:
    """Largest t + s (halved on branches, which see every other train)."""
    best, key = -math.inf, None
    for u, j in line.segment_keys():
        if u and j == line.n_of(u):
            continue
        v = (tv[(u, j)] + line.seg(u, j).s_min) / (2 if u else 1)
        if v > best:
            best, key = v, (u, j)
    return best, key


def _part_line(topo: LineTopology, part: str):
    if part == "central":
        return LinearLine.from_central(topo)
    if part == "line":
        return topo
    raise UsageError(f"part {part!r}: expected central or line")


def _loop_time(line, tv) -> float:
    if isinstance(line, LinearLine):
        return float(sum(tv.values()))
    return aggregates(line, tv).T


def demand_sweep_rows(topo: LineTopology, scales: Sequence[float], margin: Optional[float] = None,
                      part: str = "central"):
    """(scale, loop time, h_min, f_max per hour, bottleneck segment) per demand level."""
    rows = []
    for s in scales:
        line = _part_line(topo.with_demand_scale(s), part)
        tv = demand_travel(line, margin=margin)
        h, key = _binding_segment(line, tv)
        rows.append((s, _loop_time(line, tv), h, 3600.0 / h, key))
    return rows


def margin_sweep_rows(topo: LineTopology, margins: Sequence[float], f_target: float,
                      part: str = "central"):
    """(margin, loop time, m needed for f_target per hour, h_min) per run-time margin."""
    line = _part_line(topo, part)
    rows = []
    for rho in margins:
        tv = demand_travel(line, margin=rho)
        T = _loop_time(line, tv)
        rows.append((rho, T, ceil_trains(T * f_target / 3600.0), _binding_segment(line, tv)[0]))
    return rows


def cmd_diagram(args, ctx: RunContext, scen: Scenario) -> int:
    topo = scen.topology
    buf = io.StringIO()
    if args.demand_sweep:
        buf.write(ctx.header + "\n")
        buf.write(f"# part: {args.part}\n")
        buf.write("scale,T_s,h_min_s,f_max_trains_per_hour,bottleneck_u,bottleneck_j\n")
        for s, T, h, f, (u, j) in demand_sweep_rows(topo, _parse_floats(args.demand_sweep), args.margin,
                                                     args.part):
            buf.write(f"{fmt(s)},{fmt(T)},{fmt(h)},{fmt(f)},{u},{j}\n")
    elif args.margin_sweep:
        buf.write(ctx.header + "\n")
        buf.write(f"# part: {args.part}\n")
        buf.write(f"# target frequency: {fmt(args.target_f)} trains/h\n")
        buf.write("margin,T_s,m_required,h_min_s\n")
        for rho, T, m, h in margin_sweep_rows(topo, _parse_floats(args.margin_sweep), args.target_f,
                                             args.part):
            buf.write(f"{fmt(rho)},{fmt(T)},{m},{fmt(h)}\n")
    else:
        agg = demand_aggregates(topo, margin=args.margin) if (args.demand or args.margin is not None) \
            else aggregates(topo)
        m_full, dm_full = full_grid(agg)
        rows = sweep(agg, _parse_range(args.m_range, m_full), _parse_range(args.dm_range, dm_full))
        buf.write(sweep_csv(rows, ctx.header))
    ctx.emit(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _run_value(scen: Scenario, args, key: str, cast: Callable, default):
    v = getattr(args, key, None)
    if v is not None:
        return v
    if key in scen.run:
        try:
            return cast(scen.run[key])
        except ValueError as exc:
            raise ConfigError([f"[run] {key}={scen.run[key]!r}: {exc}"]) from exc
    return default


def _law(name: str, gamma: Optional[str]) -> DwellRunLaw:
    if name == "fixed":
        return FIXED
    if name == "demand":
        return DEMAND
    if name == "harmonized":
        if gamma is None or gamma == "":
            raise UsageError("law harmonized needs --gamma (a value or 'decay:g0:K')")
        return DwellRunLaw("harmonized", gamma_schedule(gamma))
    raise UsageError(f"unknown law {name!r} (fixed, demand, harmonized)")


def gamma_schedule(text: str):
    if text.startswith("decay"):
        _, g0, K = text.split(":")
        return linear_decay_gamma(float(g0), int(K))
    return constant_gamma(float(text))


def _simulate_summary(ctx: RunContext, topo: LineTopology, scen: Scenario, args) -> Tuple[str, object]:
    m = _run_value(scen, args, "m", int, None)
    dm = _run_value(scen, args, "dm", int, None)
    if m is None or dm is None:
        raise UsageError("simulate needs m and dm ([run] section or --m/--dm)")
    K = _run_value(scen, args, "K", int, 200)
    law_name = _run_value(scen, args, "law", str, "fixed")
    gamma = args.gamma if args.gamma is not None else scen.run.get("gamma")
    burn = _run_value(scen, args, "burn_in", float, 0.25)
    order = _run_value(scen, args, "convergence", str, "alternate")
    if order not in ("alternate", "controlled"):
        raise UsageError(f"convergence={order!r}: expected alternate or controlled")
    law = _law(law_name, gamma)
    b = place_trains(topo, m, dm)
    hist = eigen_history(topo, b) if args.history == "eigen" else None
    overrides = list(scen.overrides)
    if order == "controlled":
        if not scen.perturbations:
            raise UsageError("convergence=controlled needs a [perturbation] section")
        agg = aggregates(topo)
        base = simulate(topo, b, law, K=K, history=hist)
        plain = simulate(topo, b, law, K=K, perturbations=scen.perturbations, history=hist)
        p = scen.perturbations[0]
        h0 = float(eigen_headway(topo, b))
        shift = (-2.0 if p.u == 1 else 2.0) * h0
        overrides += list(incident_overrides(base, plain, p.u, m, agg.T, agg.dT, shift).overrides)
    log = simulate(topo, b, law, K=K, overrides=overrides, perturbations=scen.perturbations,
                   history=hist)
    lines = [ctx.header, f"m={m} dm={dm} K={K} law={law_name} convergence={order} history={args.history}"]
    if overrides:
        lines.append("overrides: " + " ".join(f"k={o.k}:branch{o.branch}" for o in overrides))
    try:
        emp = empirical_headway(log, burn_in=burn, min_points=args.min_points)
        for key in ("h0", "h1", "h2"):
            if key in emp:
                lines.append(f"{key}_empirical={fmt_s_min(emp[key])}")
    except InsufficientDataError as exc:
        lines.append(f"empirical headway skipped: {exc}")
    for u in (1, 2):
        w = convergence_wait(log, u)
        flag = "yes" if w > 1e-9 else "no"
        lines.append(f"convergence_wait_branch{u}={fmt(w)} s waited={flag}")
    if scen.perturbations:
        h0 = float(eigen_headway(topo, b))
        start = min((p.start_time or 0.0) for p in scen.perturbations)
        rec = recovery_time(log, h0, start, aggregates(topo).T)
        lines.append(f"recovery_within_2pct={fmt_s_min(rec)} (nominal h0 {fmt(h0)} s)")
    return "\n".join(lines) + "\n", log


def cmd_simulate(args, ctx: RunContext, scen: Scenario) -> int:
    topo = scen.topology
    if args.study == "incident":
        st = incident_study(topo, args.m or 34, 1 if args.dm is None else args.dm, K=args.K or 60)
        ov = " ".join(f"k={o.k}:branch{o.branch}" for o in st.plan.overrides)
        text = "\n".join([
            ctx.header,
            f"nominal h0={fmt_s_min(st.h0)}",
            f"plan: dm {st.plan.dm_nominal} -> {st.plan.dm_perturbed} -> {st.plan.dm_recovered}; overrides {ov}",
            f"recovery_plain={fmt_s_min(st.recovery_plain)}",
            f"recovery_controlled={fmt_s_min(st.recovery_controlled)}",
            f"convergence_wait_plain={fmt(st.wait_plain)} s waited={'yes' if st.wait_plain > 0 else 'no'}",
            f"convergence_wait_controlled={fmt(st.wait_controlled)} s "
            f"waited={'yes' if st.wait_controlled > 0 else 'no'}",
        ]) + "\n"
        sys.stdout.write(text)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(trajectory_export(st.controlled, ctx.header))
        return EXIT_OK
    if args.study == "harmonization":
        hs = harmonization_study(topo, K=args.K or 60)
        ring = LinearLine.from_central(topo)
        plats = [(0, j % ring.n) for j in range(1, ring.n + 1) if ring.seg(0, j).is_platform]
        series = {k: pooled_spread(r.log, plats, 22) for k, r in hs.runs.items()}
        n = min(len(s) for s in series.values())
        buf = io.StringIO()
        buf.write(ctx.header + "\n")
        buf.write(f"# initial gap spread {fmt(hs.initial_spread)} s; "
                  + "; ".join(f"{k}: final {fmt(r.final_spread)} s, index {r.index}, departures {r.departures}"
                              for k, r in hs.runs.items()) + "\n")
        buf.write("window,spread_gamma0_s,spread_gamma_const_s,spread_gamma_decay_s\n")
        for i in range(n):
            buf.write(f"{i},{fmt(series['none'][i])},{fmt(series['constant'][i])},{fmt(series['decay'][i])}\n")
        ctx.emit(buf.getvalue())
        return EXIT_OK
    summary, log = _simulate_summary(ctx, topo, scen, args)
    sys.stdout.write(summary)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(trajectory_export(log, ctx.header))
    return EXIT_OK


# ---------------------------------------------------------------------------
# control
# ---------------------------------------------------------------------------

def read_profile(path: str, kappa: Optional[float], h_min: float) -> List[Tuple[str, float]]:
    """(period, h_req) rows from a CSV with h_req_s, or with a charge column."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        for rec in reader:
            period = rec.get("period", "")
            if rec.get("h_req_s"):
                rows.append((period, float(rec["h_req_s"])))
            elif rec.get("charge"):
                if not kappa:
                    raise UsageError("charge profile needs kappa (config [line] kappa= or --kappa)")
                h_req, _ = required_and_feasible_headway({(0, 1): float(rec["charge"])}, kappa, h_min)
                rows.append((period, h_req))
            else:
                raise UsageError(f"{path}: row {period!r} has neither h_req_s nor charge")
    return rows


PERTURB_HEADER = ["mode", "m", "dm_nominal", "dm_new", "f0_per_hour", "observed_T_s",
                  "observed_dT_s", "overrides"]


def cmd_control(args, ctx: RunContext, scen: Scenario) -> int:
    topo = scen.topology
    base = demand_aggregates(topo) if args.demand else aggregates(topo)
    agg = _override_aggregates(base, args.T, args.dT, args.h_min)
    kappa = args.kappa if args.kappa is not None else topo.kappa
    if args.profile:
        plans = [plan_for_headway(h, agg, period) for period, h in read_profile(args.profile, kappa, agg.h_min)]
        ctx.emit(control_csv(plans, ctx.header))
        return EXIT_OK
    if args.target_f is not None:
        plan = feedback_demand(args.target_f, agg)
        ctx.emit(control_csv([dataclasses.replace(plan, period="target")], ctx.header))
        return EXIT_OK
    if args.observed_T is None and args.observed_dT is None:
        raise UsageError("control needs --profile, --target-f or --observed-T/--observed-dT")
    T_obs = agg.T if args.observed_T is None else args.observed_T
    dT_obs = agg.dT if args.observed_dT is None else args.observed_dT
    mode = args.mode
    if mode == "fixed-f":
        if args.f0 is None:
            raise UsageError("mode fixed-f needs --f0")
        m_new, dm_new = feedback_fixed_f(args.f0, T_obs, dT_obs)
        m_nom, dm_nom = feedback_fixed_f(args.f0, agg.T, agg.dT)
        f0, overrides = args.f0, []
    else:
        if args.m is None:
            raise UsageError(f"mode {mode} needs --m")
        m_nom = m_new = args.m
        dm_nom, _ = feedback_fixed_m(args.m, agg.T, agg.dT)
        dm_new, f0 = feedback_fixed_m(args.m, T_obs, dT_obs)
        overrides = passing_order_plan(dm_new - dm_nom, args.k_start) if mode == "perturbation" else []
    buf = io.StringIO()
    buf.write(ctx.header + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PERTURB_HEADER)
    w.writerow([mode, m_new if mode == "fixed-f" else m_nom, dm_nom, dm_new, fmt(f0), fmt(T_obs),
                fmt(dT_obs), ";".join(f"{o.k}:{o.branch}" for o in overrides)])
    ctx.emit(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metroflux", description="Max-plus metro line with one junction.")
    p.add_argument("--version", action="version", version=f"metroflux {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="line document")
        sp.add_argument("--out", help="write the CSV / report here")
        sp.add_argument("--dump-graphs", metavar="PATH", help="write the matrices' graphs as DOT text")
        return sp

    common(sub.add_parser("validate", help="check a line document"))

    h = common(sub.add_parser("headway", help="closed-form asymptotic headway"))
    h.add_argument("--m", type=int, required=True)
    h.add_argument("--dm", type=int, required=True)
    h.add_argument("--demand", action="store_true", help="demand-dependent travel times")
    h.add_argument("--margin", type=float, help="run-time margin fraction (implies --demand)")
    h.add_argument("--eigen", action="store_true", help="also print the exact eigenvalue headway")

    d = common(sub.add_parser("diagram", help="phase diagram and parameter sweeps"))
    d.add_argument("--m-range", help="lo:hi[:step], default the full grid")
    d.add_argument("--dm-range", help="lo:hi[:step], default the full grid")
    d.add_argument("--demand", action="store_true")
    d.add_argument("--margin", type=float)
    d.add_argument("--demand-sweep", metavar="SCALES", help="lo:hi:step or comma list of demand levels")
    d.add_argument("--margin-sweep", metavar="MARGINS", help="lo:hi:step or comma list of margins")
    d.add_argument("--target-f", type=float, default=30.0, help="trains/h for --margin-sweep")
    d.add_argument("--part", choices=("central", "line"), default="central",
                   help="sweep the central ring alone or the whole junction line")

    s = common(sub.add_parser("simulate", help="run a scenario"))
    s.add_argument("--m", type=int)
    s.add_argument("--dm", type=int)
    s.add_argument("--K", type=int)
    s.add_argument("--law", choices=("fixed", "demand", "harmonized"))
    s.add_argument("--gamma", help="value, or decay:g0:K")
    s.add_argument("--convergence", choices=("alternate", "controlled"))
    s.add_argument("--burn-in", dest="burn_in", type=float)
    s.add_argument("--history", choices=("zero", "eigen"), default="zero")
    s.add_argument("--min-points", type=int, default=100)
    s.add_argument("--study", choices=("incident", "harmonization"),
                   help="run a reference study on the config's line instead")

    c = common(sub.add_parser("control", help="macroscopic control plans"))
    c.add_argument("--profile", help="CSV with period and h_req_s (or charge) columns")
    c.add_argument("--target-f", type=float, help="target central frequency, trains/h")
    c.add_argument("--observed-T", type=float, help="observed T in seconds")
    c.add_argument("--observed-dT", type=float, help="observed dT in seconds")
    c.add_argument("--mode", choices=("fixed-m", "fixed-f", "perturbation"), default="perturbation")
    c.add_argument("--m", type=int)
    c.add_argument("--f0", type=float, help="trains/h kept by mode fixed-f")
    c.add_argument("--k-start", type=int, default=1, help="first override index")
    c.add_argument("--demand", action="store_true")
    c.add_argument("--T", type=float, help="replace the config's T (s)")
    c.add_argument("--dT", type=float, help="replace the config's dT (s)")
    c.add_argument("--h-min", dest="h_min", type=float, help="replace h_min (s)")
    c.add_argument("--kappa", type=float)
    return p


COMMANDS = {
    "validate": cmd_validate,
    "headway": cmd_headway,
    "diagram": cmd_diagram,
    "simulate": cmd_simulate,
    "control": cmd_control,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, scen = _load(args.config)
        ctx = RunContext(args.command, args.config, text, args.out)
        return COMMANDS[args.command](args, ctx, scen)
    except ConfigError as exc:
        for msg in exc.problems:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleError, SaturationError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except DeadlockError as exc:
        print(f"deadlock: {exc}", file=sys.stderr)
        return EXIT_DEADLOCK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
