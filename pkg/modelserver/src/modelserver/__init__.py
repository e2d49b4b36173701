"""Inference sidecar exposing /nli, /embed, and /extract over HTTP+JSON."""

__version__ = "0.1.0"

from modelserver.app import create_app

__all__ = ["__version__", "create_app"]
