"""ReliefE subcommand plugin package."""

__all__ = []
