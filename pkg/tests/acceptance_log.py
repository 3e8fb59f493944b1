"""Collects the one-line acceptance results so conftest can print them at the end."""

LINES: list[str] = []
