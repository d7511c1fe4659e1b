"""Command-line interface for quartonsim."""

from quartonsim.cli.main import main

__all__ = ["main"]
