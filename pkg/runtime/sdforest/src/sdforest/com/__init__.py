"""Common helpers: logging, errors, base models and small utilities."""
