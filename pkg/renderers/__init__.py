"""
Plot renderers module for qrmax.

Exports the renderer abstraction layer and implementations.
"""
from renderers.base import (
    PlotRenderer,
    RendererFactory,
    render_plot,
)

# Import implementations to register them
from renderers.svg_renderer import SVGRenderer
from renderers.png_renderer import PNGRenderer

__all__ = [
    'PlotRenderer',
    'RendererFactory',
    'render_plot',
    'SVGRenderer',
    'PNGRenderer',
]
