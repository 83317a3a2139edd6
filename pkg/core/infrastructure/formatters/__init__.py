"""Artifact writers (JSON summaries, CSV tables)."""
