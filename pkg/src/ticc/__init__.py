"""Capability-aware Monte-Carlo planning for human-robot shopping collaboration."""

__version__ = "0.1.0"
