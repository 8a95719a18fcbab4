"""Viewer utilities."""
