"""Command-line interface."""

from src.cli.main import build_parser, exit_code_for, main, parse_grid

__all__ = ["build_parser", "exit_code_for", "main", "parse_grid"]
