"""Stabilizer Renyi entropy of critical Ising chains with boundaries and topological defects."""
from __future__ import annotations

__version__ = "0.1.0"
