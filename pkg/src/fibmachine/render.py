"""Escape-time rasterization of the fibered Julia set over a complex window.

A GridSpec names the window and resolution, scan_grid runs the shared escape
kernel over every pixel center (optionally in row bands across threads, with
bit-identical output), and the writers serialize the resulting level buffer
as binary PPM, CSV text, or PNG.
"""

from __future__ import annotations

import colorsys
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, ConfigError
from .probseq import ProbSeq
from .spectrum import INSIDE, EscapeConfig, escape_levels

#: Hard cap on pixels per scan.
PIXEL_BUDGET = 10**8

#: Successive hues advance by the golden-ratio conjugate, so nearby escape
#: levels land on well-separated colors.
HUE_STEP = 0.6180339887498949


@dataclass(frozen=True)
class GridSpec:
    """A complex-plane window sampled at pixel centers, rows growing downward."""

    center: complex = 0j
    width: float = 5.0
    height: float = 5.0
    pixels_x: int = 800
    pixels_y: int = 800

    def __post_init__(self) -> None:
        if not (self.width > 0.0 and self.height > 0.0):
            raise ValueError("grid width and height must be positive")
        if self.pixels_x < 1 or self.pixels_y < 1:
            raise ValueError("pixel counts must be at least 1")

    def pixel(self, i: int, j: int) -> complex:
        """Center of pixel column i, row j."""
        x = ((i + 0.5) / self.pixels_x - 0.5) * self.width
        y = ((j + 0.5) / self.pixels_y - 0.5) * self.height
        return (self.center + x) + 1j * y

    def lam_array(self) -> np.ndarray:
        """All pixel centers as one (pixels_y, pixels_x) complex array."""
        i = np.arange(self.pixels_x, dtype=np.float64)
        j = np.arange(self.pixels_y, dtype=np.float64)
        x = ((i + 0.5) / self.pixels_x - 0.5) * self.width
        y = ((j + 0.5) / self.pixels_y - 0.5) * self.height
        return (self.center + x[None, :]) + 1j * y[:, None]


@dataclass(eq=False)
class IterBuffer:
    """Escape levels per pixel; INSIDE (-1) marks cells that never escaped."""

    width: int
    height: int
    cells: np.ndarray

    def __post_init__(self) -> None:
        self.cells = np.asarray(self.cells, dtype=np.int32)
        if self.cells.shape != (self.height, self.width):
            raise ValueError(
                f"cells shape {self.cells.shape} does not match "
                f"{(self.height, self.width)}"
            )

    def inside_count(self) -> int:
        return int(np.count_nonzero(self.cells == INSIDE))

    def same_cells(self, other: "IterBuffer") -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and bool(np.array_equal(self.cells, other.cells))
        )


def scan_grid(
    grid: GridSpec, p: ProbSeq, cfg: EscapeConfig, workers: int = 1
) -> IterBuffer:
    """Rasterize escape levels over the grid.

    The lambda array is built once; worker bands are disjoint row slices of
    it, and the kernel is elementwise, so any worker count produces the same
    cells as the sequential scan.
    """
    if grid.pixels_x * grid.pixels_y > PIXEL_BUDGET:
        raise BudgetExceeded(
            f"{grid.pixels_x}x{grid.pixels_y} exceeds the {PIXEL_BUDGET} pixel budget"
        )
    if workers < 1:
        raise ValueError("workers must be at least 1")
    lam = grid.lam_array()
    if workers == 1:
        cells = escape_levels(lam, p, cfg)
        return IterBuffer(grid.pixels_x, grid.pixels_y, cells)
    rows = grid.pixels_y
    bounds = [rows * k // workers for k in range(workers + 1)]
    cells = np.empty((rows, grid.pixels_x), dtype=np.int32)

    def run_band(j0: int, j1: int) -> None:
        cells[j0:j1] = escape_levels(lam[j0:j1], p, cfg)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(run_band, j0, j1)
            for j0, j1 in zip(bounds, bounds[1:])
            if j1 > j0
        ]
        for f in futures:
            f.result()
    return IterBuffer(grid.pixels_x, grid.pixels_y, cells)


# ---------------------------------------------------------------------------
# serialization


@dataclass(frozen=True)
class PaletteSpec:
    """Maps INSIDE and each escape level to an RGB triple."""

    inside_rgb: tuple[int, int, int] = (0, 0, 0)
    hue_step: float = HUE_STEP
    saturation: float = 0.85
    value: float = 1.0

    def color(self, level: int) -> tuple[int, int, int]:
        if level == INSIDE:
            return self.inside_rgb
        hue = (level * self.hue_step) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, self.saturation, self.value)
        return (int(round(r * 255)), int(round(g * 255)), int(round(b * 255)))


DEFAULT_PALETTE = PaletteSpec()


def _rgb_cells(buf: IterBuffer, palette: PaletteSpec) -> np.ndarray:
    top = int(buf.cells.max())
    lut = np.zeros((max(top, -1) + 2, 3), dtype=np.uint8)
    lut[0] = palette.inside_rgb
    for level in range(0, top + 1):
        lut[level + 1] = palette.color(level)
    return lut[buf.cells + 1]


def write_ppm(buf: IterBuffer, palette: PaletteSpec = DEFAULT_PALETTE) -> bytes:
    """Binary PPM (P6): header then row-major RGB triples; byte-exact."""
    header = f"P6\n{buf.width} {buf.height}\n255\n".encode("ascii")
    return header + _rgb_cells(buf, palette).tobytes()


def write_png(buf: IterBuffer, palette: PaletteSpec = DEFAULT_PALETTE) -> bytes:
    """PNG bytes via Pillow; raises ConfigError when Pillow is missing."""
    try:
        from PIL import Image
    except ImportError as exc:
        raise ConfigError("PNG output requires the optional Pillow dependency") from exc
    image = Image.fromarray(_rgb_cells(buf, palette), mode="RGB")
    out = io.BytesIO()
    image.save(out, format="PNG")
    return out.getvalue()


def write_csv(buf: IterBuffer) -> str:
    """Row-major "x,y,value" lines; INSIDE encoded as -1."""
    lines = []
    for j in range(buf.height):
        row = buf.cells[j]
        for i in range(buf.width):
            lines.append(f"{i},{j},{int(row[i])}")
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> IterBuffer:
    """Rebuild a buffer from write_csv output."""
    entries = {}
    for lineno, line in enumerate(text.strip().splitlines(), start=1):
        parts = line.strip().split(",")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected x,y,value")
        i, j, v = (int(s) for s in parts)
        entries[(i, j)] = v
    if not entries:
        raise ValueError("no cells in CSV text")
    width = max(i for i, _ in entries) + 1
    height = max(j for _, j in entries) + 1
    if len(entries) != width * height:
        raise ValueError("CSV text does not cover a full grid")
    cells = np.empty((height, width), dtype=np.int32)
    for (i, j), v in entries.items():
        cells[j, i] = v
    return IterBuffer(width, height, cells)
