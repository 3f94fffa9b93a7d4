"""
Pillow PNG preview renderer.

Fast raster preview of the planar overlay; no plotting stack needed.
"""
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from config.constants import PLOT_MMS_RGB, PLOT_TARGET_RGB
from renderers.base import PlotRenderer, RendererFactory

BACKGROUND_RGB = (255, 255, 255)
AXIS_RGB = (204, 204, 204)


class PNGRenderer(PlotRenderer):
    """Raster overlay drawn with PIL.ImageDraw."""

    def is_available(self) -> bool:
        return True

    def _to_pixels(self, points: np.ndarray, box) -> np.ndarray:
        xmin, xmax, ymin, ymax = box
        px = (points[:, 0] - xmin) / (xmax - xmin) * (self.width - 1)
        py = (ymax - points[:, 1]) / (ymax - ymin) * (self.height - 1)
        return np.column_stack([px, py])

    def render(self, target_points: np.ndarray, mms_points: np.ndarray, output_path: Path, title: str = "") -> Path:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        box = self.bounds(target_points, mms_points)
        img = Image.new("RGB", (self.width, self.height), BACKGROUND_RGB)
        draw = ImageDraw.Draw(img)
        origin = self._to_pixels(np.zeros((1, 2)), box)[0]
        draw.line([(0, origin[1]), (self.width, origin[1])], fill=AXIS_RGB)
        draw.line([(origin[0], 0), (origin[0], self.height)], fill=AXIS_RGB)
        for points, color, radius in ((target_points, PLOT_TARGET_RGB, 1), (mms_points, PLOT_MMS_RGB, 2)):
            if points is None or not np.size(points):
                continue
            for x, y in self._to_pixels(np.atleast_2d(points), box):
                draw.ellipse([x - radius, y - radius, x + radius, y + radius], fill=color)
        if title:
            draw.text((10, 10), title, fill=(0, 0, 0))
        img.save(output_path, "PNG")
        return output_path


RendererFactory.register("png", PNGRenderer)
