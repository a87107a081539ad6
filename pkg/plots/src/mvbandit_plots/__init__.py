"""Figure rendering for mvbandit experiment CSVs."""

__version__ = "0.1.0"

from .render import FigureSpec, RenderError, render

__all__ = ["FigureSpec", "RenderError", "render"]
