"""Test package for kackit."""
