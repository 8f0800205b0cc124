"""Core property suites.

Acceptance-level properties over randomized and enumerated zoos. These are
the tests that must pass for any commit.
"""
