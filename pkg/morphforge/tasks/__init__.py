# morphforge/tasks/__init__.py

from .pool import run_tasks

__all__ = ["run_tasks"]
