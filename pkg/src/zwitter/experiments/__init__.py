"""Numerical experiments built on the zwitter core."""
