"""Discrete-time quantum walks on dynamical percolation graphs."""

__version__ = "0.1.0"
