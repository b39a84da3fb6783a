"""Signed exponential random graph models (SERGM) for signed networks."""
