"""Configuration infrastructure package."""
