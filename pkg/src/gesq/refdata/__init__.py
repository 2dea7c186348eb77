"""Bundled reference tables (published values with tolerance classes)."""
