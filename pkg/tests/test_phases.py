"""Phase planes, polygon geometry and the optimal dm."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from support import line13, random_topology

from metroflux.line import aggregates, feasible
from metroflux.phases import (
    PHASES,
    classify,
    full_grid,
    optimal_dm,
    plane_values,
    plateau_interval,
    polygon_points,
    sweep,
    sweep_csv,
)
from metroflux.steady_state import headway_junction


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_phase_frequency_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    agg = aggregates(random_topology(rng))
    for _ in range(20):
        m = int(rng.integers(0, agg.n + 1))
        dm = int(rng.integers(-agg.n1, agg.n2 + 1))
        ph = classify(m, dm, agg)
        assert ph.label in PHASES
        assert ph.f0 == pytest.approx(headway_junction(agg, m, dm).f0, abs=1e-9)
        if not feasible(agg.n0, agg.n1, agg.n2, m, dm):
            assert ph.label == "IV-b"


def test_polygon_points_lie_on_their_lines():
    agg = aggregates(line13())
    geo = polygon_points(agg)
    on = {
        "A": ("AB", "FA", "AG"), "B": ("AB", "BC", "BH"), "C": ("BC", "CD", "CI"),
        "D": ("CD", "DE", "DJ"), "E": ("DE", "EF", "EK"), "F": ("EF", "FA", "FL"),
        "G": ("GH", "LG", "AG"), "H": ("GH", "HI", "BH"), "I": ("HI", "IJ", "CI"),
        "J": ("IJ", "JK", "DJ"), "K": ("JK", "KL", "EK"), "L": ("KL", "LG", "FL"),
    }
    for p, lines in on.items():
        for name in lines:
            assert geo.lines[name].contains(geo[p]), (p, name)


def test_plateau_points_reach_capacity():
    agg = aggregates(line13())
    geo = polygon_points(agg)
    for p in "GHIJKL":
        assert headway_junction(agg, *geo[p]).h0 == pytest.approx(agg.h_min)


def test_optimal_dm_line13():
    # [PAPER] dm* = 2 where free flow meets the plateau (about m = 50)
    # and 10 where the plateau meets congestion (about m = 110)
    agg = aggregates(line13())
    geo = polygon_points(agg)
    m_g, m_j = geo["G"][0], geo["J"][0]
    assert 45 <= m_g <= 60 and 100 <= m_j <= 120
    assert optimal_dm(m_g, agg).rounded() == 2
    assert optimal_dm(m_j, agg).rounded() == 10
    lo, hi = plateau_interval(80, agg)
    best = optimal_dm(80, agg)
    assert lo <= hi and not best.unique and best.lo == lo


def test_optimal_dm_maximizes_frequency():
    agg = aggregates(line13())
    for m in (20, 40, 52, 120):
        opt = optimal_dm(m, agg).rounded()
        f_opt = headway_junction(agg, m, opt).f0
        f_all = max(headway_junction(agg, m, dm).f0 for dm in range(-agg.n1, agg.n2 + 1))
        assert f_opt == pytest.approx(f_all, rel=2e-2)


def test_sweep_csv_shape():
    agg = aggregates(line13())
    rows = sweep(agg, range(50, 53), range(0, 3))
    text = sweep_csv(rows, "# head")
    lines = text.splitlines()
    assert lines[0] == "# head" and lines[1] == "m,dm,f0_trains_per_hour,h0_s,phase"
    assert len(lines) == 2 + 9
    ms, dms = full_grid(agg)
    assert ms[0] == 0 and ms[-1] == agg.n and dms[0] == -agg.n1 and dms[-1] == agg.n2


def test_planes_at_origin():
    agg = aggregates(line13())
    vals = plane_values(agg, 0, 0)
    assert vals["I-a"] == 0.0 and vals["I-b"] == 0.0
    assert vals["IV-a"] == pytest.approx(1 / agg.h_min)
