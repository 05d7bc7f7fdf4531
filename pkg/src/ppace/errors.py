"""Shared exception base for the ppace pipeline.

Every error raised by the package derives from PpaceError so the CLI can
report a stable, machine-readable error class name on failure.
"""


class PpaceError(Exception):
    """Base class; ``code`` is the stable class name used in reports."""

    @property
    def code(self) -> str:
        return type(self).__name__


class UnwritableDirectoryError(PpaceError):
    pass
