"""Boolean rasters of compact planar sets.

Pixel ``(row, col)`` of a mask covers the square whose center is
``x = xmin + (col + 0.5) / resolution``, ``y = ymax - (row + 0.5) / resolution``;
row 0 is the top of the box, as in image files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ContractError

__all__ = ["RegionMask", "DEFAULT_PIXELS", "DEFAULT_MARGIN"]

DEFAULT_PIXELS = 512
DEFAULT_MARGIN = 0.1

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Rasterized compact subset of the complex plane.

    ``provenance`` records how the set was obtained: ``"analytic"`` (known
    support of a closed-form measure), ``"sampled"`` (quadrature nodes),
    ``"hull"`` (filled numerical ranges) or ``"derived"`` (result of an
    operation on other masks).
    """

    xmin: float
    ymax: float
    resolution: float
    grid: np.ndarray
    provenance: str = "derived"

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=bool)
        if g.ndim != 2 or g.size == 0:
            raise ContractError("mask grid must be a non-empty 2-D array")
        if not (self.resolution > 0 and math.isfinite(self.resolution)):
            raise ContractError("resolution must be positive")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)

    # -- frames -----------------------------------------------------------

    @classmethod
    def frame(cls, center: complex, half_width: float, pixels: int = DEFAULT_PIXELS,
              provenance: str = "derived") -> "RegionMask":
        """Empty square mask of ``pixels x pixels`` centered at ``center``."""
        if half_width <= 0:
            raise ContractError("frame half-width must be positive")
        res = pixels / (2 * half_width)
        return cls(center.real - half_width, center.imag + half_width, res,
                   np.zeros((pixels, pixels), dtype=bool), provenance)

    @classmethod
    def frame_for(cls, points, pixels: int = DEFAULT_PIXELS, margin: float = DEFAULT_MARGIN,
                  provenance: str = "derived") -> "RegionMask":
        """Empty square frame around ``points`` with a relative margin on each side."""
        pts = np.asarray(points, dtype=complex).ravel()
        if pts.size == 0:
            raise ContractError("cannot frame an empty point set")
        x0, x1 = pts.real.min(), pts.real.max()
        y0, y1 = pts.imag.min(), pts.imag.max()
        extent = max(x1 - x0, y1 - y0)
        if extent == 0:
            extent = max(1.0, abs(pts[0]))
        half = extent * (0.5 + margin)
        return cls.frame(complex((x0 + x1) / 2, (y0 + y1) / 2), half, pixels, provenance)

    def blank(self, provenance: str | None = None) -> "RegionMask":
        return self.with_grid(np.zeros_like(self.grid), provenance)

    def with_grid(self, grid: np.ndarray, provenance: str | None = None) -> "RegionMask":
        return RegionMask(self.xmin, self.ymax, self.resolution, grid,
                          provenance or self.provenance)

    # -- geometry ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    @property
    def box(self) -> tuple[float, float, float, float]:
        rows, cols = self.shape
        return (self.xmin, self.xmin + cols / self.resolution,
                self.ymax - rows / self.resolution, self.ymax)

    @property
    def pixel_size(self) -> float:
        return 1.0 / self.resolution

    @property
    def area(self) -> float:
        return float(self.grid.sum()) / self.resolution**2

    def same_frame(self, other: "RegionMask") -> bool:
        return (self.shape == other.shape and self.xmin == other.xmin
                and self.ymax == other.ymax and self.resolution == other.resolution)

    def _require_frame(self, other: "RegionMask") -> None:
        if not self.same_frame(other):
            raise ContractError("masks are defined on different frames")

    def pixel_centers(self) -> np.ndarray:
        rows, cols = self.shape
        x = self.xmin + (np.arange(cols) + 0.5) / self.resolution
        y = self.ymax - (np.arange(rows) + 0.5) / self.resolution
        return x[None, :] + 1j * y[:, None]

    def to_pixel(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Row and column indices (possibly outside the grid) of the pixels containing ``z``."""
        z = np.asarray(z, dtype=complex)
        col = np.floor((z.real - self.xmin) * self.resolution).astype(np.int64)
        row = np.floor((self.ymax - z.imag) * self.resolution).astype(np.int64)
        return row, col

    def contains(self, z) -> np.ndarray:
        """Whether each point falls in a set pixel (points off the grid are outside)."""
        row, col = self.to_pixel(z)
        rows, cols = self.shape
        inside = (row >= 0) & (row < rows) & (col >= 0) & (col < cols)
        out = np.zeros(np.shape(row), dtype=bool)
        out[inside] = self.grid[row[inside], col[inside]]
        return out

    # -- drawing ----------------------------------------------------------

    def with_points(self, points, dilate: int = 1, provenance: str | None = None) -> "RegionMask":
        """Add the pixels hit by ``points``, then grow by ``dilate`` pixels (8-neighbour)."""
        pts = np.asarray(points, dtype=complex).ravel()
        row, col = self.to_pixel(pts)
        rows, cols = self.shape
        keep = (row >= 0) & (row < rows) & (col >= 0) & (col < cols)
        if not np.all(keep):
            raise ContractError("points fall outside the mask frame")
        hit = np.zeros(self.shape, dtype=bool)
        hit[row, col] = True
        if dilate > 0:
            hit = ndimage.binary_dilation(hit, structure=_EIGHT, iterations=dilate)
        return self.with_grid(self.grid | hit, provenance)

    def with_polyline(self, points, closed: bool = True, provenance: str | None = None) -> "RegionMask":
        """Add the pixels crossed by a polyline (edges sampled at half-pixel spacing)."""
        pts = np.asarray(points, dtype=complex).ravel()
        if closed and pts.size > 1:
            pts = np.append(pts, pts[0])
        samples = [pts[:1]]
        for a, b in zip(pts[:-1], pts[1:]):
            count = max(1, int(math.ceil(abs(b - a) * self.resolution * 2)))
            t = np.arange(1, count + 1) / count
            samples.append(a + (b - a) * t)
        return self.with_points(np.concatenate(samples), dilate=0, provenance=provenance)

    def with_convex_polygon(self, vertices, provenance: str | None = None) -> "RegionMask":
        """Add the pixels whose centers lie in the convex hull of ``vertices``.

        Degenerate polygons (points, segments) still mark the pixels their
        edges cross, so no vertex is ever dropped.
        """
        pts = np.asarray(vertices, dtype=complex).ravel()
        grid = self.grid.copy()
        rows, cols = self.shape
        if pts.size >= 3:
            ring = np.append(pts, pts[0])
            ys = self.ymax - (np.arange(rows) + 0.5) / self.resolution
            lo = np.full(rows, np.inf)
            hi = np.full(rows, -np.inf)
            for a, b in zip(ring[:-1], ring[1:]):
                y0, y1 = a.imag, b.imag
                if y0 == y1:
                    sel = ys == y0
                    lo[sel] = np.minimum(lo[sel], min(a.real, b.real))
                    hi[sel] = np.maximum(hi[sel], max(a.real, b.real))
                    continue
                ya, yb = min(y0, y1), max(y0, y1)
                sel = (ys >= ya) & (ys <= yb)
                x = a.real + (ys[sel] - y0) * (b.real - a.real) / (y1 - y0)
                lo[sel] = np.minimum(lo[sel], x)
                hi[sel] = np.maximum(hi[sel], x)
            xs = self.xmin + (np.arange(cols) + 0.5) / self.resolution
            for r in np.nonzero(lo <= hi)[0]:
                grid[r] |= (xs >= lo[r]) & (xs <= hi[r])
        out = self.with_grid(grid, provenance)
        return out.with_polyline(pts, closed=True, provenance=provenance)

    def with_disk(self, center: complex, radius: float, provenance: str | None = None) -> "RegionMask":
        """Add pixels whose centers lie in the closed disk."""
        z = self.pixel_centers()
        return self.with_grid(self.grid | (np.abs(z - center) <= radius), provenance)

    # -- set operations ---------------------------------------------------

    def union(self, other: "RegionMask") -> "RegionMask":
        self._require_frame(other)
        return self.with_grid(self.grid | other.grid, "derived")

    def subset_of(self, other: "RegionMask") -> bool:
        self._require_frame(other)
        return not np.any(self.grid & ~other.grid)

    def inflate(self, pixels: int = 1) -> "RegionMask":
        if pixels <= 0:
            return self
        g = ndimage.binary_dilation(self.grid, structure=_EIGHT, iterations=pixels)
        return self.with_grid(g, "derived")

    def erode(self, pixels: int = 1) -> "RegionMask":
        if pixels <= 0:
            return self
        g = ndimage.binary_erosion(self.grid, structure=_EIGHT, iterations=pixels, border_value=0)
        return self.with_grid(g, "derived")

    def symmetric_difference(self, other: "RegionMask") -> np.ndarray:
        self._require_frame(other)
        return self.grid ^ other.grid

    # -- serialization ----------------------------------------------------

    def to_pgm(self) -> bytes:
        """Binary PGM (P5), set pixels white (255)."""
        rows, cols = self.shape
        header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
        return header + (self.grid.astype(np.uint8) * 255).tobytes()

    @classmethod
    def from_pgm(cls, data: bytes, xmin: float, ymax: float, resolution: float,
                 provenance: str = "derived") -> "RegionMask":
        tokens = []
        pos = 0
        while len(tokens) < 4:
            while data[pos:pos + 1].isspace():
                pos += 1
            if data[pos:pos + 1] == b"#":
                pos = data.index(b"\n", pos) + 1
                continue
            end = pos
            while not data[end:end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
        if tokens[0] != b"P5":
            raise ContractError("not a binary PGM (P5) image")
        cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
        if maxval > 255:
            raise ContractError("16-bit PGM images are not supported")
        pixels = np.frombuffer(data[pos + 1:pos + 1 + rows * cols], dtype=np.uint8)
        return cls(xmin, ymax, resolution, pixels.reshape(rows, cols) > maxval // 2, provenance)

    def to_rle(self) -> dict:
        """Run lengths of the row-major grid, starting with a run of unset pixels."""
        flat = self.grid.ravel()
        change = np.flatnonzero(np.diff(flat.astype(np.int8))) + 1
        bounds = np.concatenate(([0], change, [flat.size]))
        runs = np.diff(bounds).tolist()
        if flat[0]:
            runs = [0] + runs
        return {
            "format": "rle-row-major",
            "shape": list(self.shape),
            "xmin": self.xmin,
            "ymax": self.ymax,
            "resolution": self.resolution,
            "provenance": self.provenance,
            "runs": runs,
        }

    @classmethod
    def from_rle(cls, data: dict | str) -> "RegionMask":
        if isinstance(data, str):
            data = json.loads(data)
        rows, cols = data["shape"]
        flat = np.zeros(rows * cols, dtype=bool)
        pos, value = 0, False
        for run in data["runs"]:
            flat[pos:pos + run] = value
            pos += run
            value = not value
        if pos != rows * cols:
            raise ContractError("run lengths do not cover the grid")
        return cls(data["xmin"], data["ymax"], data["resolution"],
                   flat.reshape(rows, cols), data.get("provenance", "derived"))
