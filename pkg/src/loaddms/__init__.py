"""Short-term load forecasting with Q-learning based dynamic model selection.

A pool of ten forecasters (MLPs, SVRs, boosted trees, a random forest) is
trained once; small tabular Q-learning agents then pick which model serves
each dispatch interval, retrained on a moving window of recent errors.
"""

__version__ = "0.1.0"

from .accel import USE_NUMBA
from .backtest import DmsResult, WindowConfig, run_dms
from .dataio import (Dataset, SplitSpec, SynthConfig, build_features,
                     generate_synthetic, load_dataset, two_year_split,
                     write_dataset)
from .errors import ConfigError, DataError, LoadDmsError, TrainingError
from .metrics import EvalReport, evaluate_run, improvement, mape, nmae
from .pool import (ForecastMatrix, ModelPool, default_pool_specs,
                   forecast_matrix, load_pool, save_pool, train_pool)
from .qlearn import AgentConfig, AgentResult, epsilon_at, train_agent

__all__ = [
    "__version__", "USE_NUMBA",
    "Dataset", "SplitSpec", "SynthConfig", "build_features",
    "generate_synthetic", "load_dataset", "write_dataset", "two_year_split",
    "ConfigError", "DataError", "LoadDmsError", "TrainingError",
    "ModelPool", "ForecastMatrix", "default_pool_specs", "train_pool",
    "forecast_matrix", "save_pool", "load_pool",
    "AgentConfig", "AgentResult", "train_agent", "epsilon_at",
    "WindowConfig", "DmsResult", "run_dms",
    "EvalReport", "evaluate_run", "mape", "nmae", "improvement",
]
