"""Publication-style figures from error-rate sweep CSVs."""

from sweepfig.render import FigureSpec, render

__all__ = ["FigureSpec", "render"]

__version__ = "0.1.0"
