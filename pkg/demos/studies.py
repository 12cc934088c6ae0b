"""Branch incident under passing-order control, then dwell harmonization on the ring."""

from pathlib import Path

from metroflux.line import load_config
from metroflux.scenarios import harmonization_study, incident_study

ROOT = Path(__file__).resolve().parents[1]
topo = load_config((ROOT / "data" / "line13.cfg").read_text())

inc = incident_study(topo, 34, 1)
print("overrides:", [(o.k, o.branch) for o in inc.plan.overrides])
print(f"recovery  plain {inc.recovery_plain / 60:6.2f} min   controlled {inc.recovery_controlled / 60:6.2f} min")
print(f"branch-2 waiting  plain {inc.wait_plain:7.1f} s   controlled {inc.wait_controlled:7.1f} s")

st = harmonization_study(topo)
print(f"\ninitial gap spread {st.initial_spread:.2f} s")
for label, run in st.runs.items():
    print(f"{label:>8}: final spread {run.final_spread:6.2f} s  index {run.index}  "
          f"departures {run.departures}  reduction {st.reduction(label):.0%}")
