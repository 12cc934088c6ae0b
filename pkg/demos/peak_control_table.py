"""Train count and branch split for each half hour of the morning peak."""

from pathlib import Path

from metroflux.control import control_csv, control_table
from metroflux.line import aggregates, load_config
from metroflux.cli import read_profile

ROOT = Path(__file__).resolve().parents[1]
topo = load_config((ROOT / "data" / "line13.cfg").read_text())
agg = aggregates(topo)

rows = read_profile(str(ROOT / "data" / "line13_profile.csv"), None, agg.h_min)
print(control_csv(control_table(rows, agg)), end="")
