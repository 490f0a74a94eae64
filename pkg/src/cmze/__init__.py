"""Combinatorial memory-kernel toolkit: exact word/tree calculus for
self-consistent Mori-Zwanzig expansions, finite-dimensional operator oracles,
and Volterra solvers for the resulting equations of motion."""

__version__ = "0.1.0"
