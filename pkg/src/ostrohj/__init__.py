"""Hamilton-Jacobi treatment of singular second-order Lagrangians."""
__version__ = "0.1.0"
