"""Shared pytest configuration; keeps tests/ importable for oracle helpers."""
