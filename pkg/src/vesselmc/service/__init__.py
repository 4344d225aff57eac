"""HTTP service wrapping the simulator; the app factory lives in .app."""

from .app import app, create_app

__all__ = ["app", "create_app"]
