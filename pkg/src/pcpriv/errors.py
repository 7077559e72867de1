"""Shared exception base so the CLI and service can map failures uniformly."""


class WorkbenchError(Exception):
    """Base class for all domain errors raised by this package."""
