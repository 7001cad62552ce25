"""Logging utilities for the sdforest runtime."""

import os
import logging

import numpy as np

ARRAY_INLINE_LIMIT = 8
LOG_FORMAT = '[%(levelname)s] %(asctime)s %(name)s: %(message)s'


def compact_value(value):
    """Render large numpy arrays as a one-line summary, pass everything else through."""
    if isinstance(value, np.ndarray) and value.size > ARRAY_INLINE_LIMIT:
        if value.size and np.issubdtype(value.dtype, np.number):
            return f"ndarray(shape={value.shape}, dtype={value.dtype}, min={value.min():.4g}, max={value.max():.4g})"
        return f"ndarray(shape={value.shape}, dtype={value.dtype})"
    return value


class CompactingFormatter(logging.Formatter):
    """Formatter that keeps matrices and long vectors out of log lines."""

    def format(self, record):
        """Format log record for output."""
        if record.args:
            if isinstance(record.args, dict):
                record.args = {k: compact_value(v) for k, v in record.args.items()}
            else:
                record.args = tuple(compact_value(a) for a in record.args)
        return super().format(record)


class ProjectLogger:
    """Custom logger for the sdforest runtime."""
    _instances = {}

    def __new__(cls, name="SDForest"):
        """Create a new logger instance."""
        if name not in cls._instances:
            instance = super().__new__(cls)
            instance._init_logger(name)
            cls._instances[name] = instance
        return cls._instances[name]

    def _init_logger(self, name):
        """Initialize the logger backend."""
        self.logger = logging.getLogger(name)
        if not self.logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(CompactingFormatter(LOG_FORMAT))
            self.logger.addHandler(handler)
            self.logger.propagate = False

            stage = os.getenv("STAGE", "prod").lower()
            log_level = os.getenv("SDFOREST_LOG_LEVEL", os.getenv("LOG_LEVEL", "INFO")).upper()
            self.logger.setLevel(self.resolve_level(log_level, stage))

    @staticmethod
    def resolve_level(log_level: str, stage: str = "prod") -> int:
        """Map a level name to a logging level; outside dev, DEBUG is clamped to INFO."""
        allowed_levels = {"INFO", "WARNING", "ERROR", "CRITICAL"}
        if stage == "dev":
            return getattr(logging, log_level.upper(), logging.INFO)
        if log_level.upper() in allowed_levels:
            return getattr(logging, log_level.upper())
        return logging.INFO

    @classmethod
    def set_level(cls, log_level: str) -> None:
        """Apply a level to every logger created so far (CLI --log-level)."""
        level = getattr(logging, log_level.upper(), logging.INFO)
        for instance in cls._instances.values():
            instance.logger.setLevel(level)

    def get_logger(self):
        """Return the logger instance."""
        return self.logger
