"""Context-aware inference and adaptation engine for adaptive AR interfaces."""

__version__ = "0.1.0"
