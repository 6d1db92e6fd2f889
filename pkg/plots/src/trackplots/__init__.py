"""Figure rendering for itstrack result tables."""

from .render import (KINDS, SCHEME_STYLES, FigureSpec, RenderError, load_aoa,
                     load_nmse, load_se, render)

__all__ = ["KINDS", "SCHEME_STYLES", "FigureSpec", "RenderError", "load_aoa",
           "load_nmse", "load_se", "render"]
