"""Binary PPM heatmaps of |field|."""

from __future__ import annotations

import numpy as np

from .fields import Field, adapted_grid, ess_sup
from .grid import DiskGrid

# (position, r, g, b); dark blue -> teal -> yellow
_ANCHORS = (
    (0, 13, 8, 135),
    (64, 84, 2, 163),
    (128, 33, 145, 140),
    (192, 134, 213, 73),
    (255, 253, 231, 37),
)


def _build_colormap() -> np.ndarray:
    table = np.zeros((256, 3), dtype=np.uint8)
    for (p0, *c0), (p1, *c1) in zip(_ANCHORS, _ANCHORS[1:]):
        for p in range(p0, p1 + 1):
            t = (p - p0) / (p1 - p0)
            table[p] = [int(round(a + (b - a) * t)) for a, b in zip(c0, c1)]
    return table


COLORMAP = _build_colormap()
OUTSIDE = np.array([0, 0, 0], dtype=np.uint8)


def render_ppm(field: Field, res: int = 512, vmax: float | None = None,
               grid: DiskGrid | None = None) -> bytes:
    """P6 image of ``|field|`` over the bounding square of its domain.

    Intensity maps ``|field|`` linearly from 0 to ``vmax`` (default: the
    grid sup). Pixels outside the domain and at excluded points are black.
    """
    if res < 1:
        raise ValueError("res must be positive")
    if vmax is None:
        grid = grid or DiskGrid(n_rad=32, n_ang=128)
        vmax = ess_sup(field, adapted_grid(field, grid))
    dom = field.domain
    t = (np.arange(res) + 0.5) / res * 2.0 - 1.0
    x = dom.center.real + dom.radius * t
    y = dom.center.imag - dom.radius * t  # first row is the top
    z = x[None, :] + 1j * y[:, None]
    inside = np.abs(z - dom.center) < dom.radius
    img = np.empty((res, res, 3), dtype=np.uint8)
    img[:] = OUTSIDE
    vals = field._values(z[inside])
    mag = np.abs(vals)
    ok = np.isfinite(mag)
    if vmax > 0:
        idx = np.clip(np.floor(mag[ok] / vmax * 255.0 + 0.5), 0, 255).astype(int)
    else:
        idx = np.zeros(int(ok.sum()), dtype=int)
    colors = np.tile(OUTSIDE, (mag.size, 1))
    colors[ok] = COLORMAP[idx]
    img[inside] = colors
    header = f"P6\n{res} {res}\n255\n".encode()
    return header + img.tobytes()
