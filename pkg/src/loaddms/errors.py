"""Exception types shared across the package."""


class LoadDmsError(Exception):
    """Base class for all loaddms errors."""


class DataError(LoadDmsError):
    """Malformed, inconsistent or unusable input data."""


class ConfigError(LoadDmsError):
    """Invalid or incomplete run configuration."""


class TrainingError(LoadDmsError):
    """Model training failed (divergence, non-convergence, bad inputs)."""

    def __init__(self, message: str, model_id: str | None = None):
        if model_id is not None:
            message = f"[{model_id}] {message}"
        super().__init__(message)
        self.model_id = model_id
