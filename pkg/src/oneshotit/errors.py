"""Semantic exception hierarchy.

Every error carries a stable machine-readable ``code`` (e.g. ``NOT_NORMALIZED``,
``SIZE_CONSTRAINT``) so callers and the CLI can branch without parsing messages.
"""

from __future__ import annotations


class OneshotError(Exception):
    """Base class for all package errors."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class PmfError(OneshotError):
    """Construction or algebra on joint pmfs / kernels failed."""


class DensityError(OneshotError):
    """Information/entropy density evaluation failed."""


class BoundError(OneshotError):
    """A bound evaluator rejected its inputs."""


class SimError(OneshotError):
    """Codec simulation failed."""


class GeometryError(OneshotError):
    """Gaussian-region computation rejected its inputs."""


class ConfigError(OneshotError):
    """Scenario configuration parsing or validation failed."""
