"""Max-plus model of a metro line with one junction.

The modules build on each other in this order: ``maxplus`` (semiring,
polynomial matrices, cycle means), ``line`` (topology and config parsing),
``matrices`` (step matrices of the recursion), ``simulate`` (event
simulation), ``steady_state`` (closed-form headways), ``phases`` (the
eight traffic phases), ``control`` (demand laws and feedback control),
``scenarios`` (reference studies) and ``cli``.
"""

__version__ = "0.1.0"

from .line import (  # noqa: E402
    Aggregates,
    ConfigError,
    InfeasibleError,
    LinearLine,
    LineTopology,
    OccupancyVector,
    OverrideSpec,
    PerturbationSpec,
    aggregates,
    load_config,
    load_scenario,
    place_trains,
)
from .steady_state import headway_junction, headway_linear  # noqa: E402
from .simulate import DeadlockError, simulate  # noqa: E402

__all__ = [
    "__version__", "Aggregates", "ConfigError", "InfeasibleError", "LinearLine", "LineTopology",
    "OccupancyVector", "OverrideSpec", "PerturbationSpec", "aggregates", "load_config",
    "load_scenario", "place_trains", "headway_junction", "headway_linear", "DeadlockError", "simulate",
]
