"""Configuration, command line and report plumbing."""
from .config import RunConfig, parse_config, render_config
from .report import emit_report

__all__ = ["RunConfig", "parse_config", "render_config", "emit_report"]
