# tests/__init__.py

"""Tests package."""
