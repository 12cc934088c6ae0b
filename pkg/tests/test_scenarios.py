"""Incident and harmonization studies, and their measures."""

import numpy as np
import pytest

from support import line13

from metroflux.line import LinearLine
from metroflux.scenarios import (
    harmonization_index,
    harmonization_study,
    incident_study,
    perturbed_gaps,
    pooled_spread,
    recovery_time,
    ring_timetable,
    two_step_headway,
)
from metroflux.simulate import DEMAND, simulate
from metroflux.steady_state import demand_travel


@pytest.fixture(scope="module")
def incident():
    return incident_study(line13(), 34, 1)


@pytest.fixture(scope="module")
def harmonization():
    return harmonization_study(line13())


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

class _Log:
    def __init__(self, d):
        self.depart = {(0, 0): np.asarray(d, dtype=float)}


def test_two_step_headway_and_recovery():
    d = [0, 100, 200, 300, 450, 520, 600, 700, 800]
    t, h = two_step_headway(_Log(d))
    assert list(t) == [200, 300, 450, 520, 600, 700, 800]
    assert list(h) == [100, 100, 125, 110, 75, 90, 100]
    # off by more than 2% from 100 until t = 700
    assert recovery_time(_Log(d), 100.0, 0.0, 1000.0) == 700.0
    assert recovery_time(_Log(d), 100.0, 0.0, 250.0) == 0.0


def test_harmonization_index():
    spread = np.array([10.0, 8.0, 5.0, 4.0, 6.0])
    assert harmonization_index(spread, 10.0) == 2
    assert harmonization_index(spread, 5.0) is None


def test_perturbed_gaps():
    gaps = perturbed_gaps(22, 4000.0)
    assert len(gaps) == 21 and gaps[:4] == [175.0, 191.0, 339.0, 96.0]
    closing = 4000.0 - sum(gaps)
    assert closing == pytest.approx(gaps[-1])
    with pytest.raises(ValueError):
        perturbed_gaps(3, 4000.0)


def test_equal_gaps_stay_equal():
    ring = LinearLine.from_central(line13())
    tv = demand_travel(ring)
    L = sum(tv.values())
    m = 20
    occ, hist, _ = ring_timetable(ring, [L / m] * (m - 1), tv)
    assert occ.m == m
    log = simulate(ring, occ, DEMAND, K=40, history=hist)
    nodes = [(0, j) for j in range(ring.n)]
    assert pooled_spread(log, nodes, m).max() < 1e-6
    with pytest.raises(ValueError):
        ring_timetable(ring, [L] * 2, tv)


# ---------------------------------------------------------------------------
# Incident on branch 1
# ---------------------------------------------------------------------------

def test_incident_plan(incident):
    # [DERIVED] overrides from the observed branch-1 delays on line 13, (m, dm) = (34, 1)
    assert incident.h0 == pytest.approx(5052.0 / 34)
    p = incident.plan
    assert (p.dm_nominal, p.dm_perturbed, p.dm_recovered) == (1, 0, 1)
    assert [(o.k, o.branch) for o in p.overrides] == [(6, 2), (19, 1)]


def test_incident_waiting_drops(incident):
    assert incident.waits_less
    assert incident.wait_plain == pytest.approx(869.4, abs=0.1)
    assert incident.wait_controlled == pytest.approx(0.0, abs=1e-6)


def test_incident_recovery_measured_over_one_loop(incident):
    # both runs settle within the loop time; see the notes on why they tie
    assert incident.horizon == pytest.approx(5052.0)
    assert 0 < incident.recovery_plain <= incident.horizon
    assert incident.recovery_controlled <= incident.recovery_plain
    assert incident.recovery_plain / 60 == pytest.approx(39.44, abs=0.01)


# ---------------------------------------------------------------------------
# Harmonization on the central ring
# ---------------------------------------------------------------------------

def test_harmonization_frozen(harmonization):
    # [DERIVED] values of the reference study on the bundled line
    st = harmonization
    none, const, decay = (st.runs[k] for k in ("none", "constant", "decay"))
    assert none.final_spread == pytest.approx(41.14, abs=0.01)
    assert const.final_spread == pytest.approx(30.81, abs=0.01)
    assert decay.final_spread == pytest.approx(20.92, abs=0.01)
    assert (none.index, const.index, decay.index) == (None, 5, 1)
    assert (none.departures, const.departures, decay.departures) == (21, 23, 22)


def test_harmonization_properties(harmonization):
    st = harmonization
    assert st.runs["none"].final_spread > 0.1 * st.initial_spread
    assert st.runs["constant"].final_spread < st.runs["none"].final_spread
    assert st.runs["decay"].final_spread < st.runs["constant"].final_spread
    assert 0 < st.reduction("constant") < 1
    assert st.reduction("none") == 0.0
