"""Shipped experiment configs (flat key = value text)."""
