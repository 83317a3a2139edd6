"""JSON schemas and validation artifacts package."""
