"""Rendering layer for sqvdp pipeline artifacts.

Consumes the CSV/JSON files written by ``sqvdp fig <n>`` (never the
simulation code itself) and renders the seven standard figures.  Inputs
without provenance headers are refused; no physics is recomputed here
beyond axis transforms.
"""

__version__ = "0.1.0"

from .render import FigureSpec, load_manifest, render

__all__ = ["__version__", "FigureSpec", "load_manifest", "render"]
