"""Backend package for rough-clt: settings, experiment schemas, services and CLI."""
