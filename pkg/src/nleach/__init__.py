"""Grid-resolving partial-equilibrium simulator for nitrogen-leaching mitigation policies."""

__version__ = "0.1.0"

from .analysis import (MitigationReport, best_policy_map, cumulative_curve, reduction_ratio_table,  # noqa: E402
                       state_aggregate)
from .bmp import BmpSettings, CdrTable, MonthlyClimate, WetlandParams  # noqa: E402
from .calibration import CalibratedEconomy, calibrate  # noqa: E402
from .equilibrium import (EquilibriumSolution, SolverOptions, excess_demands, solve,  # noqa: E402
                          target_price_closure)
from .grid_data import BaselineEconomy, GridCell, MarketParams, generate_synthetic, load_baseline  # noqa: E402
from .scenarios import (PolicyScenario, combine, scenario_A, scenario_B, scenario_C,  # noqa: E402
                        scenario_D)
from .transfer import TransferFunction  # noqa: E402
