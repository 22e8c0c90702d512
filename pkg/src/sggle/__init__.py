"""Spectral Galerkin simulator for the stochastic generalized Ginzburg-Landau equation with jump noise."""

__version__ = "0.1.0"
