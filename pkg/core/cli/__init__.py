"""CLI adapters."""
