"""Domain layer: value types, errors and contracts."""
