"""Config-to-engine builders and artifact writers."""
