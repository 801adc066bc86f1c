"""camsel: best-view camera selection for synchronized multi-view recordings."""

__version__ = "0.1.0"
