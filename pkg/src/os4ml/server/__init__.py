"""REST gateway, domain records, and single-process service wiring."""

from .records import DocumentStore
from .service import PlatformServices
from .app import create_app

__all__ = ["DocumentStore", "PlatformServices", "create_app"]
