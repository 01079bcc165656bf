"""Heatmaps of phase-space fields as binary PPM images."""
import logging
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

logger = logging.getLogger(__name__)

OUTLINE = (0, 0, 0)


def joint_scale(fields):
    """Symmetric colour range shared by all panels."""
    scale = max(field.max_abs for field in fields)
    return scale if scale > 0 else 1.0


def diverging_rgb(values, scale):
    """White at zero, red for positive values and blue for negative ones."""
    t = np.clip(values / scale, -1.0, 1.0)
    fade = np.rint(255.0 * (1.0 - np.abs(t))).astype(np.uint8)
    full = np.full_like(fade, 255)
    red = np.where(t < 0, fade, full)
    blue = np.where(t > 0, fade, full)
    return np.stack([red, fade, blue], axis=-1)


def to_pixel(grid, q, p, zoom=1):
    """Pixel coordinates of (q, p); momentum increases upwards."""
    x = (q - grid.q_min) / grid.dq
    y = (grid.p_max - p) / grid.dp
    return x * zoom, y * zoom


def reference_box(grid, center=None, area_hbar=4.0):
    """Square of area `area_hbar` hbar around center (grid centre by default), in phase-space units."""
    side = np.sqrt(area_hbar * grid.hbar)
    if center is None:
        center = (0.5 * (grid.q_min + grid.q_max), 0.5 * (grid.p_min + grid.p_max))
    qc, pc = center
    return qc - side / 2, pc - side / 2, qc + side / 2, pc + side / 2


def render(field, scale, zoom=2, box=None):
    """Image of one field; columns are q, rows are p from p_max at the top."""
    rgb = diverging_rgb(field.values.T[::-1, :], scale)
    image = Image.fromarray(rgb)
    if zoom > 1:
        image = image.resize((image.width * zoom, image.height * zoom), Image.Resampling.NEAREST)
    if box is not None:
        q0, p0, q1, p1 = box
        x0, y1 = to_pixel(field.grid, q0, p0, zoom)
        x1, y0 = to_pixel(field.grid, q1, p1, zoom)
        ImageDraw.Draw(image).rectangle(
            [int(round(x0)), int(round(y0)), int(round(x1)), int(round(y1))], outline=OUTLINE
        )
    return image


def write_ppm(image, path):
    image.save(Path(path), format="PPM")
    logger.debug(f"image {path} written ({image.width}x{image.height})")


def write_panels(fields, names, output_dir, zoom=2, box_area_hbar=4.0, box_center=None):
    """One PPM per field with a joint palette and the same reference box on each."""
    scale = joint_scale(fields)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for field, name in zip(fields, names):
        box = reference_box(field.grid, box_center, box_area_hbar)
        path = out / f"{name}.ppm"
        write_ppm(render(field, scale, zoom, box), path)
        paths.append(path)
    return paths, scale
