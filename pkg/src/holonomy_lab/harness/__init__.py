"""Statistics utilities, persistence, the acceptance suite and the command line."""
