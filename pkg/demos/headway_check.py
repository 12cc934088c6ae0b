"""Closed form, max-plus eigenvalue and simulation side by side on the bundled line."""

from pathlib import Path

from metroflux.line import aggregates, load_config, place_trains
from metroflux.matrices import eigen_headway
from metroflux.simulate import simulate
from metroflux.steady_state import headway_junction

ROOT = Path(__file__).resolve().parents[1]
topo = load_config((ROOT / "data" / "line13.cfg").read_text())
agg = aggregates(topo)

print(f"{'m':>4} {'dm':>4} {'closed':>9} {'eigen':>9} {'sim':>9}  binding")
for m, dm in [(20, 0), (34, 1), (44, 2), (55, 2), (80, 6), (110, 10)]:
    b = place_trains(topo, m, dm)
    rep = headway_junction(agg, m, dm)
    h_eig = float(eigen_headway(topo, b))
    log = simulate(topo, b, K=400)
    d = log.depart[(0, 0)]
    h_sim = (d[-1] - d[200]) / (len(d) - 1 - 200)
    print(f"{m:4d} {dm:4d} {rep.h0:9.2f} {h_eig:9.2f} {h_sim:9.2f}  {rep.binding}")
