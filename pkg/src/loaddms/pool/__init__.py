"""Forecasting model pool: MLP, SVR, GBM and random forest regressors."""

from .spec import ModelSpec, default_pool_specs
from .pool import (ForecastMatrix, ModelPool, forecast_matrix, load_pool,
                   save_pool, train_model, train_pool)

__all__ = [
    "ModelSpec", "default_pool_specs", "ModelPool", "ForecastMatrix",
    "train_model", "train_pool", "forecast_matrix", "save_pool", "load_pool",
]
