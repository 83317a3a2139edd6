"""Logging infrastructure for poe-sim."""
