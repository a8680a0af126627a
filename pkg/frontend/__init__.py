"""Frontend package."""
