"""CLI commands for Jubilee."""

from jubilee.cli.main import cli

__all__ = ["cli"]
