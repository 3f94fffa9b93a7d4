"""
Matplotlib SVG renderer.

Output is reproducible: the SVG backend runs headless (Agg), the date
metadata is dropped and element ids are salted with a fixed string.
"""
from pathlib import Path

import numpy as np

from config.constants import PLOT_MMS_COLOR, PLOT_TARGET_COLOR
from renderers.base import PlotRenderer, RendererFactory

SVG_HASH_SALT = "qrmax"


class SVGRenderer(PlotRenderer):
    """Vector overlay written with matplotlib."""

    def is_available(self) -> bool:
        try:
            import matplotlib  # noqa: F401
            return True
        except ImportError:
            return False

    def render(self, target_points: np.ndarray, mms_points: np.ndarray, output_path: Path, title: str = "") -> Path:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        xmin, xmax, ymin, ymax = self.bounds(target_points, mms_points)
        with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
            fig, ax = plt.subplots(figsize=(self.width / 100.0, self.height / 100.0), dpi=100)
            try:
                if target_points is not None and np.size(target_points):
                    ax.scatter(target_points[:, 0], target_points[:, 1], s=2, c=PLOT_TARGET_COLOR, label="T samples")
                if mms_points is not None and np.size(mms_points):
                    ax.scatter(mms_points[:, 0], mms_points[:, 1], s=4, c=PLOT_MMS_COLOR, marker="x", label="M-set samples")
                ax.set_xlim(xmin, xmax)
                ax.set_ylim(ymin, ymax)
                ax.set_aspect("equal")
                ax.axhline(0.0, color="#cccccc", linewidth=0.5)
                ax.axvline(0.0, color="#cccccc", linewidth=0.5)
                if title:
                    ax.set_title(title)
                ax.legend(loc="upper right", fontsize="small")
                fig.savefig(output_path, format="svg", metadata={"Date": None})
            finally:
                plt.close(fig)
        return output_path


RendererFactory.register("svg", SVGRenderer)
