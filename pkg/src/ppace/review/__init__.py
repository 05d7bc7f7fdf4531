from .store import ReviewStore
from .app import create_app

__all__ = ["ReviewStore", "create_app"]
