"""Line documents, validation, aggregates and train placement."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from support import LINE13, line13, random_demand_topology, random_topology

from metroflux.line import (
    ConfigError,
    InfeasibleError,
    LinearLine,
    OccupancyVector,
    aggregates,
    feasible,
    load_config,
    load_scenario,
    parse_rate,
    parse_time,
    place_trains,
    save_config,
    segment_travel,
    split_counts,
    spread,
)

SMALL = """
[line] n0=4 n1=2 n2=2
[segment u=0 j=1] r=60s s=20s
[segment u=0 j=2] r=50s w=20s s=20s platform
[segment u=0 j=3] r=1min s=20s
[segment u=0 j=4] r=40s s=20s
[segment u=1 j=1] r=30s s=10s
[segment u=1 j=2] r=30s s=10s
[segment u=2 j=1] r=35s s=10s
[segment u=2 j=2] r=35s s=10s
"""


def _errors(text):
    with pytest.raises(ConfigError) as exc:
        load_config(text)
    return exc.value.problems


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def test_units():
    assert parse_time("1.5min") == 90.0 and parse_time("12 s") == 12.0 and parse_time("3") == 3.0
    assert parse_rate("36/h") == pytest.approx(0.01) and parse_rate("2/min") == pytest.approx(1 / 30)
    with pytest.raises(ValueError):
        parse_time("fast")


def test_small_document():
    t = load_config(SMALL)
    assert (t.n0, t.n1, t.n2) == (4, 2, 2)
    assert t.seg(0, 3).r_min == 60.0
    assert t.seg(0, 2).is_platform and t.seg(0, 2).t_min == 70.0


def test_missing_segment_reported_as_gap():
    text = SMALL.replace("[segment u=1 j=2] r=30s s=10s\n", "")
    assert any("(1, 2) gap" in p for p in _errors(text))


def test_odd_central_count_rejected():
    text = SMALL.replace("n0=4", "n0=3").replace("[segment u=0 j=4] r=40s s=20s\n", "")
    assert any("n0 must be even" in p for p in _errors(text))


def test_empty_branch_rejected():
    text = "\n".join(ln for ln in SMALL.splitlines() if "u=2" not in ln).replace("n2=2", "n2=0")
    assert any("branch 2 is empty" in p for p in _errors(text))


def test_every_problem_collected():
    text = SMALL.replace("r=30s s=10s", "r=-1s s=10s colour=red").replace("[line]", "[line] speed=3")
    probs = _errors(text)
    assert any("unknown key 'speed'" in p for p in probs)
    assert any("unknown key 'colour'" in p for p in probs)
    invariant = _errors(SMALL.replace("r=30s s=10s", "r=-1s s=-2s"))
    assert any("(1, 1): r must be positive" in p for p in invariant)
    assert any("(1, 2): s must be non-negative" in p for p in invariant)


def test_dwell_needs_platform():
    text = SMALL.replace("r=50s w=20s s=20s platform", "r=50s w=20s s=20s")
    assert any("requires a platform" in p for p in _errors(text))


def test_saturated_demand_rejected():
    text = SMALL + "[demand u=0 j=2] lambda_in=0.6/s lambda_out=0.5/s\n"
    assert any("saturates" in p for p in _errors(text))


def test_scenario_sections():
    text = SMALL + ("[perturbation u=1 j_from=1 j_to=2 extra=30s count=2 start_time=60s]\n"
                    "[override k=5 branch=2]\n[run m=4 dm=0 K=100]\n")
    sc = load_scenario(text)
    assert sc.perturbations[0].extra == 30.0 and sc.perturbations[0].start_time == 60.0
    assert sc.overrides[0].k == 5 and sc.overrides[0].branch == 2
    assert sc.run["K"] == "100"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9))
def test_config_round_trip(seed):
    t = random_demand_topology(np.random.default_rng(seed))
    assert load_config(save_config(t)) == t


# ---------------------------------------------------------------------------
# Aggregates of the reference line
# ---------------------------------------------------------------------------

def test_line13_aggregates():
    agg = aggregates(line13())
    assert (agg.n0, agg.n1, agg.n2) == (80, 22, 32)
    assert agg.T == pytest.approx(84.2 * 60)
    assert agg.dT == pytest.approx(5.8 * 60)
    assert agg.h_min == pytest.approx(92.6)


def test_aggregate_identities():
    t = random_topology(np.random.default_rng(3))
    agg = aggregates(t)
    tv = segment_travel(t)
    assert agg.T0 == pytest.approx(sum(tv[(0, j)] for j in range(1, t.n0 + 1)))
    assert agg.T == pytest.approx(agg.T0 + (agg.T1 + agg.T2) / 2)
    assert agg.S == pytest.approx(agg.S0 + (agg.S1 + agg.S2) / 2)
    assert agg.f_max == pytest.approx(1 / agg.h_min)


def test_demand_travel_adds_dwell_extension():
    t = load_config(LINE13.read_text())
    fixed, dem = segment_travel(t), segment_travel(t, demand=True)
    for key in t.segment_keys():
        x = t.x_of(*key)
        want = t.r_nominal(*key) + x / (1 - x) * t.seg(*key).g_lo
        assert dem[key] == pytest.approx(want)
        assert dem[key] >= fixed[key] - t.seg(*key).w_min


# ---------------------------------------------------------------------------
# Feasibility and placement
# ---------------------------------------------------------------------------

def test_feasible_corners():
    # vertices of the polygon are excluded, the centre is inside
    assert not feasible(4, 2, 2, 0, 0)
    assert not feasible(4, 2, 2, 8, 0)
    assert feasible(4, 2, 2, 4, 0)
    assert not feasible(4, 2, 2, 4, 2)   # branch 2 full


def test_spread_pattern():
    assert spread(6, 3) == (1, 0, 1, 0, 1, 0)
    assert spread(4, 0) == (0, 0, 0, 0)
    assert sum(spread(9, 4)) == 4


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 8).map(lambda v: 2 * (v // 2) or 2), st.integers(2, 8), st.integers(2, 8),
       st.data())
def test_place_trains_invariants(n0, n1, n2, data):
    n = n0 + n1 + n2
    m = data.draw(st.integers(1, n - 1))
    dm = data.draw(st.integers(-n1, n2))
    if not feasible(n0, n1, n2, m, dm):
        with pytest.raises(InfeasibleError):
            place_trains((n0, n1, n2), m, dm)
        return
    b = place_trains((n0, n1, n2), m, dm)
    assert b.m == m and b.dm == dm
    assert b.mbar == n - m and b.dmbar == (n2 - n1) - dm
    m0, m1, m2 = split_counts(n0, n1, n2, m, dm)
    assert (b.m_of(0), b.m_of(1), b.m_of(2)) == (m0, m1, m2)


def test_place_trains_rejects_empty_and_full():
    with pytest.raises(InfeasibleError):
        place_trains((4, 2, 2), 0, 0)
    with pytest.raises(InfeasibleError):
        place_trains((4, 2, 2), 8, 0)


def test_occupancy_entries_are_binary():
    with pytest.raises(ValueError):
        OccupancyVector.from_parts([2, 0], [0, 0], [0, 0])


def test_ring_from_central():
    t = line13()
    ring = LinearLine.from_central(t)
    assert ring.n == t.n0 and ring.nodes()[0] == (0, 0)
    assert set(ring.demand) <= set(ring.segment_keys())
    with pytest.raises(ConfigError):
        LinearLine.from_times([10.0], [5.0])
