import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw

from app.core.config import settings
from app.models import Image, QuadraticMap

logger = logging.getLogger(__name__)

INTERIOR = 0
# escaped pixels shade from 255 (fast) down to 64 (slow)
SHADE_RANGE = 191


def escape_times(
    qmap: QuadraticMap, z: np.ndarray, max_iter: int, escape_radius: float
) -> np.ndarray:
    """Iterations until |z| exceeds the escape radius; -1 where the orbit stays bounded."""
    z = np.array(z, dtype=np.complex128)
    counts = np.full(z.shape, -1, dtype=np.int64)
    flat_z = z.ravel()
    flat_counts = counts.ravel()
    flat_counts[np.abs(flat_z) > escape_radius] = 0
    alive = np.flatnonzero(flat_counts < 0)
    w = flat_z[alive]
    lam = qmap.lam
    for n in range(1, max_iter + 1):
        if not alive.size:
            break
        w = lam * w + w * w
        escaped = np.abs(w) > escape_radius
        flat_counts[alive[escaped]] = n
        alive, w = alive[~escaped], w[~escaped]
    return flat_counts.reshape(z.shape)


def shade(counts: np.ndarray, max_iter: int) -> np.ndarray:
    pixels = np.full(counts.shape, INTERIOR, dtype=np.uint8)
    escaped = counts >= 0
    scale = SHADE_RANGE / math.log1p(max_iter)
    pixels[escaped] = 255 - np.floor(np.log1p(counts[escaped]) * scale).astype(np.int64)
    return pixels


def pixel_grid(center: complex, span: float, width: int, height: int, rows: range) -> np.ndarray:
    size = span / width
    xs = center.real + (np.arange(width) + 0.5 - width / 2) * size
    ys = center.imag - (np.arange(rows.start, rows.stop) + 0.5 - height / 2) * size
    return xs[None, :] + 1j * ys[:, None]


def render_julia(
    qmap: QuadraticMap,
    width: int,
    height: int,
    center: complex = 0j,
    span: float = 4.0,
    max_iter: int | None = None,
    escape_radius: float | None = None,
    threads: int | None = None,
) -> Image:
    """Escape-time raster of the filled Julia set, rendered in row bands."""
    max_iter = settings.MAX_ITER if max_iter is None else max_iter
    escape_radius = settings.ESCAPE_RADIUS if escape_radius is None else escape_radius
    if escape_radius < 3.0:
        raise ValueError(f"escape radius must be at least 3, got {escape_radius}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be positive, got {max_iter}")
    if width <= 0 or height <= 0 or span <= 0:
        logger.warning(f"degenerate viewport {width}x{height} span {span}: empty image")
        return Image(
            width=0, height=0, center=center, span=span, pixels=np.zeros((0, 0), dtype=np.uint8)
        )

    workers = max(1, min(threads or settings.threads, height))
    bounds = [height * i // workers for i in range(workers + 1)]
    bands = [range(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]

    def render_band(rows: range) -> np.ndarray:
        grid = pixel_grid(center, span, width, height, rows)
        return shade(escape_times(qmap, grid, max_iter, escape_radius), max_iter)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        pixels = np.vstack(list(pool.map(render_band, bands)))
    logger.info(f"rendered {width}x{height} Julia set of {qmap.label}, max_iter {max_iter}")
    return Image(width=width, height=height, center=center, span=span, pixels=pixels)


def overlay(image: Image, polylines: Sequence[Sequence[complex]], value: int = 0) -> Image:
    """Draw plane polylines onto a copy of the image."""
    if not image.width or not image.height:
        return image
    canvas = PILImage.fromarray(image.pixels)
    draw = ImageDraw.Draw(canvas)
    for line in polylines:
        xy = [image.plane_to_pixel(z) for z in line]
        if len(xy) >= 2:
            draw.line(xy, fill=value, width=1)
    return image.model_copy(update={"pixels": np.asarray(canvas, dtype=np.uint8).copy()})
