"""Unit tests for kackit."""
