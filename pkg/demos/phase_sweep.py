"""Frequency over the (m, dm) plane and the best branch split per train count."""

from collections import Counter
from pathlib import Path

from metroflux.line import aggregates, load_config
from metroflux.phases import full_grid, optimal_dm, polygon_points, sweep

ROOT = Path(__file__).resolve().parents[1]
agg = aggregates(load_config((ROOT / "data" / "line13.cfg").read_text()))

rows = sweep(agg, *full_grid(agg))
print("grid points per phase:", dict(sorted(Counter(r.phase for r in rows).items())))

geo = polygon_points(agg)
for p in "GHIJKL":
    m, dm = geo[p]
    print(f"{p}: m={m:7.2f} dm={dm:7.2f}")

for m in range(10, agg.n, 20):
    opt = optimal_dm(m, agg)
    print(f"m={m:3d}  dm* in [{opt.lo:6.2f}, {opt.hi:6.2f}] -> {opt.rounded()}")
