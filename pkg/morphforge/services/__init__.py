# morphforge/services/__init__.py

"""Services package."""
