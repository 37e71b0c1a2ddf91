"""Load-imbalance metrics and simulation under multifractal traffic.

The package splits into synthetic traffic generation (`traffic`), scaling
estimators (`fractal`), the imbalance metric suite (`metrics`), a
discrete-time cluster simulator (`simulation`), and the config/CLI shell
(`config`, `cli`). The most used names are re-exported here.
"""

from .errors import (
    CalibrationError,
    ConfigError,
    DegenerateSeriesError,
    DomainError,
    EstimationError,
    InsufficientDataError,
)
from .fractal import (
    DEFAULT_Q_GRID,
    HurstEstimate,
    HurstMethod,
    MultifractalSpectrum,
    estimate_hurst_dfa,
    estimate_hurst_rs,
    mfdfa,
    structure_function,
)
from .metrics import (
    ImbalanceReport,
    ResourceUtilization,
    ServerSpec,
    SystemAverages,
    WeightTriple,
    average_utilization,
    default_weights,
    efficiency,
    full_report,
    resource_imbalance,
    server_sil,
    system_averages,
    system_sil,
    total_imbalance,
)
from .simulation import (
    CalibrationTarget,
    ClusterState,
    DemandParams,
    Policy,
    PolicyKind,
    ScenarioConfig,
    ServiceClass,
    Task,
    arrivals_from_traffic,
    dispatch,
    homogeneous_cluster,
    rebalance,
    reference_cluster,
    run_scenario,
    step,
)
from .traffic import (
    GeneratorKind,
    GeneratorMeta,
    TrafficSeries,
    calibrate,
    generate_cascade,
    generate_composite,
    generate_fgn,
    generate_from_meta,
    measure_scaling,
    read_series_csv,
    write_series_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "ConfigError",
    "DegenerateSeriesError",
    "DomainError",
    "EstimationError",
    "InsufficientDataError",
    "DEFAULT_Q_GRID",
    "HurstEstimate",
    "HurstMethod",
    "MultifractalSpectrum",
    "estimate_hurst_dfa",
    "estimate_hurst_rs",
    "mfdfa",
    "structure_function",
    "ImbalanceReport",
    "ResourceUtilization",
    "ServerSpec",
    "SystemAverages",
    "WeightTriple",
    "average_utilization",
    "default_weights",
    "efficiency",
    "full_report",
    "resource_imbalance",
    "server_sil",
    "system_averages",
    "system_sil",
    "total_imbalance",
    "CalibrationTarget",
    "ClusterState",
    "DemandParams",
    "Policy",
    "PolicyKind",
    "ScenarioConfig",
    "ServiceClass",
    "Task",
    "arrivals_from_traffic",
    "dispatch",
    "homogeneous_cluster",
    "reference_cluster",
    "rebalance",
    "run_scenario",
    "step",
    "GeneratorKind",
    "GeneratorMeta",
    "TrafficSeries",
    "calibrate",
    "generate_cascade",
    "generate_composite",
    "generate_fgn",
    "generate_from_meta",
    "measure_scaling",
    "read_series_csv",
    "write_series_csv",
    "__version__",
]
