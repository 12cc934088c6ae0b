"""Command-line front end: exit codes, headers, determinism and library identity."""

import contextlib
import io
import re

import numpy as np
import pytest

from support import LINE13, PROFILE13, random_occupancy, random_topology

from metroflux import __version__, cli
from metroflux.line import aggregates, save_config
from metroflux.simulate import DeadlockError

HEADER = re.compile(r"^# metroflux \S+ (\w+) [0-9a-f]{12}$")
CFG = str(LINE13)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(list(argv))
    return code, out.getvalue(), err.getvalue()


def values(text):
    """key=value pairs of a summary, numbers as printed (seconds part only)."""
    out = {}
    for tok in text.split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_line13():
    code, out, _ = run("validate", CFG)
    assert code == 0 and out.rstrip().endswith("valid")
    assert HEADER.match(out.splitlines()[0]).group(1) == "validate"


def test_validate_odd_n0(tmp_path):
    text = LINE13.read_text().replace("n0=80", "n0=79")
    p = tmp_path / "odd.cfg"
    p.write_text(text)
    code, _, err = run("validate", str(p))
    assert code == 2 and "n0 must be even" in err


def test_validate_gap(tmp_path):
    text = "\n".join(ln for ln in LINE13.read_text().splitlines() if "[segment u=2 j=5]" not in ln)
    p = tmp_path / "gap.cfg"
    p.write_text(text)
    code, _, err = run("validate", str(p))
    assert code == 2 and "(2, 5) gap" in err


def test_dump_graphs(tmp_path):
    dot = tmp_path / "g.dot"
    code, _, _ = run("validate", CFG, "--dump-graphs", str(dot))
    assert code == 0 and dot.read_text().startswith("digraph")


# ---------------------------------------------------------------------------
# headway
# ---------------------------------------------------------------------------

def test_headway_peak_row():
    code, out, _ = run("headway", CFG, "--m", "55", "--dm", "2")
    v = values(out)
    assert code == 0
    assert v["h0"] == "92.600000" and v["f0"].startswith("38.876890") and v["binding"] == "min"


def test_headway_zero_flow_notice():
    code, out, _ = run("headway", CFG, "--m", "0", "--dm", "0")
    assert code == 0 and "zero flow" in out and values(out)["phase"] == "IV-b"


@pytest.mark.parametrize("seed", range(5))
def test_headway_equals_library(tmp_path, seed):
    rng = np.random.default_rng(seed)
    t = random_topology(rng)
    m, dm = random_occupancy(rng, t)
    p = tmp_path / "line.cfg"
    p.write_text(save_config(t))
    code, out, _ = run("headway", str(p), "--m", str(m), "--dm", str(dm))
    rep = cli.headway_report(t, m, dm)
    assert code == 0
    assert values(out)["h0"] == cli.fmt(rep.h0)
    assert float(values(out)["h0"]) == pytest.approx(rep.h0, abs=5e-7)
    assert rep == cli.headway_report(t, m, dm)


def test_headway_csv(tmp_path):
    out_csv = tmp_path / "h.csv"
    code, _, _ = run("headway", CFG, "--m", "34", "--dm", "1", "--out", str(out_csv))
    lines = out_csv.read_text().splitlines()
    assert code == 0 and HEADER.match(lines[0])


# ---------------------------------------------------------------------------
# diagram
# ---------------------------------------------------------------------------

def test_full_grid_row_bound(tmp_path):
    out_csv = tmp_path / "d.csv"
    code, _, _ = run("diagram", CFG, "--out", str(out_csv))
    lines = [ln for ln in out_csv.read_text().splitlines() if not ln.startswith("#")]
    agg = aggregates(cli._load(CFG)[1].topology)
    assert code == 0 and lines[0] == "m,dm,f0_trains_per_hour,h0_s,phase"
    assert len(lines) - 1 <= (agg.n + 1) * (2 * max(agg.n1, agg.n2) + 1)


def _rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    head = body[0].split(",")
    return [dict(zip(head, ln.split(","))) for ln in body[1:]]


def test_demand_sweep_kink():
    # [PAPER] the bottleneck switches near 80% of peak demand
    code, out, _ = run("diagram", CFG, "--demand-sweep", "0.5:1.0:0.05", "--part", "line")
    rows = _rows(out)
    where = [(float(r["scale"]), (r["bottleneck_u"], r["bottleneck_j"])) for r in rows]
    switches = [s for (s, b), (_, b0) in zip(where[1:], where[:-1]) if b != b0]
    assert code == 0 and len(switches) == 1 and 0.7 <= switches[0] <= 0.9
    f = [float(r["f_max_trains_per_hour"]) for r in rows]
    assert all(a >= b for a, b in zip(f, f[1:]))


def test_margin_sweep_adds_about_three_trains():
    # [PAPER] about 3 more trains from 5% to 15% at f = 30
    code, out, _ = run("diagram", CFG, "--margin-sweep", "0.05,0.15", "--target-f", "30")
    rows = _rows(out)
    extra = int(rows[1]["m_required"]) - int(rows[0]["m_required"])
    assert code == 0 and 2 <= extra <= 4


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_summary_and_trajectory(tmp_path):
    traj = tmp_path / "t.csv"
    code, out, _ = run("simulate", CFG, "--m", "34", "--dm", "1", "--K", "300", "--out", str(traj))
    v = values(out)
    assert code == 0 and "waited" in v
    assert float(v["h0_empirical"]) == pytest.approx(148.59, rel=2e-3)
    lines = traj.read_text().splitlines()
    assert HEADER.match(lines[0]) and lines[1].startswith("node_u,node_j,k")


def test_simulate_incident_study():
    code, out, _ = run("simulate", CFG, "--study", "incident")
    v = values(out)
    assert code == 0
    assert v["waited"] in ("yes", "no") and "recovery_controlled" in v
    assert float(v["recovery_controlled"]) <= float(v["recovery_plain"])


def test_simulate_harmonization_spread_decreases(tmp_path):
    out_csv = tmp_path / "h.csv"
    code, _, _ = run("simulate", CFG, "--study", "harmonization", "--out", str(out_csv))
    rows = _rows(out_csv.read_text())
    spread = np.array([float(r["spread_gamma_const_s"]) for r in rows])
    assert code == 0 and spread[-1] < spread[0]


def test_simulate_infeasible_exit():
    code, _, err = run("simulate", CFG, "--m", "134", "--dm", "0", "--K", "10")
    assert code == 3 and "infeasible" in err


def test_deadlock_exit(monkeypatch):
    def boom(*a, **k):
        raise DeadlockError([((0, 1), 3), ((0, 2), 3)])
    monkeypatch.setitem(cli.COMMANDS, "simulate", boom)
    code, _, err = run("simulate", CFG, "--m", "34", "--dm", "1")
    assert code == 4 and "deadlock" in err


# ---------------------------------------------------------------------------
# control
# ---------------------------------------------------------------------------

def test_control_profile():
    code, out, _ = run("control", CFG, "--profile", str(PROFILE13))
    rows = _rows(out)
    assert code == 0 and len(rows) == 8
    assert [(r["m"], r["dm"]) for r in rows][5] == ("55", "2")


def test_control_perturbation_mode():
    # dT - 2 h0 lowers dm by one and asks for one branch-2 double pass
    code, out, _ = run("control", CFG, "--m", "34", "--observed-dT", str(348 - 2 * 148.588235))
    r = _rows(out)[0]
    assert code == 0 and (r["dm_nominal"], r["dm_new"]) == ("1", "0") and r["overrides"] == "1:2"


def test_control_identity_observation():
    code, out, _ = run("control", CFG, "--m", "34", "--observed-T", "5052", "--observed-dT", "348")
    r = _rows(out)[0]
    assert code == 0 and r["dm_nominal"] == r["dm_new"] and r["overrides"] == ""


def test_control_needs_a_request():
    code, _, err = run("control", CFG)
    assert code == 2 and "control needs" in err


def test_control_target_above_capacity():
    code, _, _ = run("control", CFG, "--target-f", "45")
    assert code == 3


# ---------------------------------------------------------------------------
# Determinism
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ("validate", CFG),
    ("headway", CFG, "--m", "40", "--dm", "2", "--demand"),
    ("diagram", CFG, "--m-range", "30:40", "--dm-range", "0:3"),
    ("simulate", CFG, "--m", "30", "--dm", "1", "--K", "120"),
    ("control", CFG, "--profile", str(PROFILE13)),
])
def test_reruns_are_byte_identical(argv):
    first = run(*argv)
    assert first[0] == 0
    assert run(*argv) == first
    assert HEADER.match(first[1].splitlines()[0]).group(1) == argv[0]
    assert __version__ in first[1].splitlines()[0]
