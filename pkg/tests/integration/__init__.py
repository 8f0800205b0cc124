"""Command-line tests for kackit."""
