"""Linear feasibility by relaxation on the sphere."""

__version__ = "0.1.0"
