"""Decorator utilities for CLI command handlers."""

from functools import wraps

import numpy as np
import scipy.linalg
from pydantic import ValidationError

from sdforest.com.errors import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, SDForestError
from sdforest.com.logging_utils import ProjectLogger

logger = ProjectLogger(__name__).get_logger()


def exit_codes(func):
    """Decorator mapping a command's outcome to the documented process exit codes."""

    @wraps(func)
    def wrapper(args):
        """Runs the command and converts known errors to exit codes."""
        try:
            result = func(args)
            return EXIT_OK if result is None else int(result)
        except SDForestError as exc:
            logger.error(f"{type(exc).__name__}: {exc}")
            return exc.exit_code
        except ValidationError as exc:
            logger.error(f"Invalid configuration: {exc}")
            return EXIT_INPUT
        except (FileNotFoundError, IsADirectoryError) as exc:
            logger.error(f"File error: {exc}")
            return EXIT_INPUT
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, FloatingPointError) as exc:
            logger.error(f"Numerical failure: {type(exc).__name__}: {exc}")
            return EXIT_NUMERICAL

    return wrapper
