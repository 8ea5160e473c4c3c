"""Solver and verification tools for a frictional marriage market with pre-marital skill investment."""
