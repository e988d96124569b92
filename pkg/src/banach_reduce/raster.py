"""Rasterized compact sets: bit masks over a uniform grid with a margin.

A :class:`RasterDomain` represents a compact subset of R^1 or R^2 as the
union of grid cells whose centers satisfy a predicate. The outermost
``margin`` cells of the bounding box are kept empty, so the unbounded
complement component is always the border-touching one.
"""

import json

import numpy as np

from .errors import NotSubset


class RasterDomain:
    __slots__ = ("d", "h", "origin", "shape", "margin", "mask", "_cell_index")

    def __init__(self, d, h, origin, shape, margin, mask):
        if d not in (1, 2):
            raise ValueError("d must be 1 or 2")
        self.d = d
        self.h = float(h)
        self.origin = tuple(float(v) for v in origin)
        self.shape = tuple(int(v) for v in shape)
        self.margin = int(margin)
        if self.margin < 2:
            raise ValueError("margin must be at least 2 cells")
        mask = np.ascontiguousarray(mask, dtype=bool)
        if mask.shape != self.shape:
            raise ValueError("mask shape mismatch")
        ring = self._margin_ring()
        if (mask & ring).any():
            raise ValueError("mask cells inside the margin ring")
        mask.setflags(write=False)
        self.mask = mask
        self._cell_index = None

    # ------------------------------------------------------------ geometry

    def _margin_ring(self):
        ring = np.ones(self.shape, dtype=bool)
        m = self.margin
        if self.d == 1:
            ring[m:self.shape[0] - m] = False
        else:
            ring[m:self.shape[0] - m, m:self.shape[1] - m] = False
        return ring

    @property
    def bbox(self):
        if self.d == 1:
            return (self.origin[0], self.origin[0] + self.shape[0] * self.h)
        return (self.origin[0], self.origin[0] + self.shape[1] * self.h,
                self.origin[1], self.origin[1] + self.shape[0] * self.h)

    def same_grid(self, other):
        return (self.d == other.d and self.shape == other.shape
                and abs(self.h - other.h) < 1e-15 * (1 + abs(self.h))
                and all(abs(a - b) < 1e-12 * (1 + abs(a)) for a, b in zip(self.origin, other.origin)))

    def centers(self):
        """Cell-center coordinates: x array (d=1) or complex x+iy grid (d=2)."""
        if self.d == 1:
            return self.origin[0] + (np.arange(self.shape[0]) + 0.5) * self.h
        x = self.origin[0] + (np.arange(self.shape[1]) + 0.5) * self.h
        y = self.origin[1] + (np.arange(self.shape[0]) + 0.5) * self.h
        return x[None, :] + 1j * y[:, None]

    def points(self):
        """Centers of mask cells in row-major order."""
        return self.centers()[self.mask]

    @property
    def npoints(self):
        return int(self.mask.sum())

    def cell_index(self):
        """Grid-shaped map from cell to spectrum index (-1 off the mask)."""
        if self._cell_index is None:
            idx = np.full(self.shape, -1, dtype=np.int64)
            idx[self.mask] = np.arange(self.npoints)
            idx.setflags(write=False)
            self._cell_index = idx
        return self._cell_index

    def mask_cells(self):
        """(npoints, d) integer cell coordinates of mask cells, row-major."""
        return np.argwhere(self.mask)

    def with_mask(self, mask):
        mask = np.asarray(mask, dtype=bool) & ~self._margin_ring()
        return RasterDomain(self.d, self.h, self.origin, self.shape, self.margin, mask)

    def is_subset_of(self, other):
        if not self.same_grid(other):
            raise NotSubset("rasters live on different grids")
        return bool(np.all(other.mask[self.mask]))

    # --------------------------------------------------------- construction

    @classmethod
    def build(cls, bounds, h, predicate, margin=2):
        """Rasterize ``predicate`` over cell centers of a grid covering ``bounds``.

        ``bounds`` is (xmin, xmax) for d=1 or ((xmin, xmax), (ymin, ymax))
        for d=2; the grid is enlarged by ``margin`` empty cells per side.
        ``predicate`` receives cell centers (vectorized) and returns bools.
        """
        h = float(h)
        if np.isscalar(bounds[0]):
            xmin, xmax = bounds
            n = int(np.ceil((xmax - xmin) / h))
            origin = (xmin - margin * h,)
            shape = (n + 2 * margin,)
            dom = cls(1, h, origin, shape, margin, np.zeros(shape, dtype=bool))
            mask = np.asarray(predicate(dom.centers()), dtype=bool)
        else:
            (xmin, xmax), (ymin, ymax) = bounds
            nx = int(np.ceil((xmax - xmin) / h))
            ny = int(np.ceil((ymax - ymin) / h))
            origin = (xmin - margin * h, ymin - margin * h)
            shape = (ny + 2 * margin, nx + 2 * margin)
            dom = cls(2, h, origin, shape, margin, np.zeros(shape, dtype=bool))
            mask = np.asarray(predicate(dom.centers()), dtype=bool)
        return dom.with_mask(mask)

    @classmethod
    def annulus(cls, r_inner, r_outer, h, margin=2):
        pad = 2 * h
        b = r_outer + pad
        return cls.build(((-b, b), (-b, b)), h,
                         lambda z: (np.abs(z) >= r_inner) & (np.abs(z) <= r_outer), margin)

    @classmethod
    def disk(cls, radius, h, center=0.0, margin=2):
        pad = 2 * h
        c = complex(center)
        bounds = ((c.real - radius - pad, c.real + radius + pad),
                  (c.imag - radius - pad, c.imag + radius + pad))
        return cls.build(bounds, h, lambda z: np.abs(z - c) <= radius, margin)

    @classmethod
    def interval_union(cls, intervals, h, margin=2):
        lo = min(a for a, _ in intervals)
        hi = max(b for _, b in intervals)
        pad = 2 * h

        def pred(x):
            m = np.zeros(x.shape, dtype=bool)
            for a, b in intervals:
                m |= (x >= a) & (x <= b)
            return m

        return cls.build((lo - pad, hi + pad), h, pred, margin)

    # -------------------------------------------------------- serialization

    def to_json(self):
        rows = self.mask.reshape(self.shape[0], -1) if self.d == 2 else self.mask[None, :]
        rle_rows = []
        for row in rows:
            runs = []
            flips = np.flatnonzero(np.diff(row.astype(np.int8)))
            start = 0
            val = bool(row[0])
            for f in flips:
                runs.append([int(val), int(f + 1 - start)])
                start = f + 1
                val = not val
            runs.append([int(val), int(row.size - start)])
            rle_rows.append(runs)
        return {
            "format": "banach-reduce/mask-v1",
            "d": self.d,
            "h": self.h,
            "origin": list(self.origin),
            "shape": list(self.shape),
            "margin": self.margin,
            "rows": rle_rows,
        }

    @classmethod
    def from_json(cls, doc):
        if doc.get("format") != "banach-reduce/mask-v1":
            raise ValueError("not a mask document")
        shape = tuple(doc["shape"])
        width = shape[-1]
        rows = []
        for runs in doc["rows"]:
            row = np.zeros(width, dtype=bool)
            pos = 0
            for val, length in runs:
                if val:
                    row[pos:pos + length] = True
                pos += length
            rows.append(row)
        mask = np.stack(rows) if doc["d"] == 2 else rows[0]
        return cls(doc["d"], doc["h"], tuple(doc["origin"]), shape, doc["margin"], mask.reshape(shape))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))
