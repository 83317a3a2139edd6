"""poe-sim core package."""
