"""ppace: grant-abstract classification pipeline, SFT dataset builder, and
annotation review service."""

__version__ = "0.1.0"
