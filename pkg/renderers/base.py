"""
Plot renderer abstraction layer for qrmax.

Renders the planar overlay of target-set samples and extracted maximum
modulus set samples through interchangeable backends:
- svg (matplotlib, deterministic vector output)
- png (Pillow, raster preview)
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.constants import PLOT_HEIGHT, PLOT_WIDTH


class PlotRenderer(ABC):
    """
    Abstract base class for overlay renderers.

    All renderer implementations must inherit from this class
    and implement the required methods.
    """

    def __init__(self, width: int = PLOT_WIDTH, height: int = PLOT_HEIGHT):
        """
        Initialize the renderer.

        Args:
            width: Image width in pixels
            height: Image height in pixels
        """
        self.width = width
        self.height = height

    @abstractmethod
    def is_available(self) -> bool:
        """
        Check if the renderer is available (dependencies installed).

        Returns:
            True if renderer can be used
        """
        pass

    @abstractmethod
    def render(
        self,
        target_points: np.ndarray,
        mms_points: np.ndarray,
        output_path: Path,
        title: str = "",
    ) -> Path:
        """
        Draw T samples and M-set samples in the plane.

        Args:
            target_points: (k, 2) samples of T
            mms_points: (m, 2) argmax samples
            output_path: Output file path
            title: Plot title

        Returns:
            Path to created file
        """
        pass

    @staticmethod
    def bounds(*point_sets: np.ndarray) -> Tuple[float, float, float, float]:
        """Square bounding box (xmin, xmax, ymin, ymax) around all points, with margin."""
        pts = [np.atleast_2d(p) for p in point_sets if p is not None and np.size(p)]
        if not pts:
            return -1.0, 1.0, -1.0, 1.0
        stacked = np.vstack(pts)
        half = max(float(np.max(np.abs(stacked))), 1e-12) * 1.05
        return -half, half, -half, half


class RendererFactory:
    """Factory for creating plot renderers."""

    _renderers: Dict[str, type] = {}

    @classmethod
    def register(cls, name: str, renderer_class: type) -> None:
        """
        Register a renderer.

        Args:
            name: Renderer name
            renderer_class: Renderer class (must inherit from PlotRenderer)
        """
        if not issubclass(renderer_class, PlotRenderer):
            raise ValueError(f"{renderer_class} must inherit from PlotRenderer")
        cls._renderers[name] = renderer_class

    @classmethod
    def create(cls, backend: str, **kwargs) -> PlotRenderer:
        """
        Create a renderer instance.

        Args:
            backend: Renderer name ("svg", "png")
            **kwargs: Additional arguments for renderer

        Returns:
            PlotRenderer instance
        """
        if backend not in cls._renderers:
            available = ", ".join(sorted(cls._renderers))
            raise ValueError(f"Unknown renderer: {backend}. Available: {available}")
        renderer = cls._renderers[backend](**kwargs)
        if not renderer.is_available():
            raise RuntimeError(f"Renderer '{backend}' is not available")
        return renderer

    @classmethod
    def list_available(cls) -> List[str]:
        """
        List all available renderers.

        Returns:
            List of renderer names that are available
        """
        return [name for name, renderer_class in sorted(cls._renderers.items()) if renderer_class().is_available()]


def render_plot(
    target_points: np.ndarray,
    mms_points: np.ndarray,
    output_path: Path,
    backend: str = "svg",
    title: str = "",
    **kwargs: Any,
) -> Optional[Path]:
    """
    Convenience function to render an overlay.

    Returns:
        Path to created file
    """
    renderer = RendererFactory.create(backend, **kwargs)
    return renderer.render(target_points, mms_points, output_path, title)


if __name__ == "__main__":
    # Test renderer factory
    import renderers  # noqa: F401

    print(f"Available renderers: {RendererFactory.list_available()}")
