"""Uniform-grid nearest-neighbor index over trajectory via-points.

The live scoring loop asks "which via-point is closest to the hand" for
every incoming sample, so the query path has to stay cheap. Points are
hashed into cubic cells; a query scans the 3x3x3 block around its cell
(precomputed per occupied cell) and falls back to growing Chebyshev rings
until no farther ring can beat the best candidate. Results are exactly
those of an exhaustive scan, including ties resolved toward the lowest
via-point index.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Trajectory, as_points

#: Fallback cell edge when no spacing/CI information is available.
DEFAULT_CELL = 0.05


class SpatialIndex:
    """Nearest-via-point queries over a fixed set of points."""

    def __init__(self, points: np.ndarray, cell: float):
        if cell <= 0:
            raise ValueError("cell size must be positive")
        self.points = as_points(points)
        if len(self.points) < 1:
            raise ValueError("index needs at least one point")
        self.cell = float(cell)

        coords = np.floor(self.points / self.cell).astype(np.int64)
        cells: dict[tuple[int, int, int], list[int]] = {}
        for i, key in enumerate(map(tuple, coords)):
            cells.setdefault(key, []).append(i)
        self._cells = {k: np.array(v, dtype=np.int64) for k, v in cells.items()}
        self._lo = coords.min(axis=0)
        self._hi = coords.max(axis=0)

        # Per occupied cell, the merged candidate list of its 3x3x3 block.
        # Covers rings 0 and 1, which is the hot path for on-tunnel queries.
        self._blocks: dict[tuple[int, int, int], np.ndarray] = {}
        for key in self._cells:
            block = []
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for dz in (-1, 0, 1):
                        hit = self._cells.get((key[0] + dx, key[1] + dy, key[2] + dz))
                        if hit is not None:
                            block.append(hit)
            self._blocks[key] = np.sort(np.concatenate(block))

    def __len__(self) -> int:
        return len(self.points)

    def query(self, p) -> tuple[int, float]:
        """Return ``(via_index, distance)`` of the nearest point to *p*.

        Ties are broken toward the lowest index, matching an exhaustive
        argmin scan.
        """
        q = np.asarray(p, dtype=np.float64)
        h = self.cell
        ckey = (int(math.floor(q[0] / h)), int(math.floor(q[1] / h)),
                int(math.floor(q[2] / h)))

        best_i = -1
        best_d2 = math.inf

        block = self._blocks.get(ckey)
        if block is not None:
            best_i, best_d2 = self._scan(block, q, best_i, best_d2)
            # Anything in ring >= 2 is at least one full cell away.
            if best_d2 < h * h:
                return self._result(best_i, q)
            start_ring = 2
        else:
            # Empty neighborhood: jump straight to the first ring that can
            # intersect the occupied bounding box.
            start_ring = max(0, self._box_ring(ckey))

        r = start_ring
        max_ring = self._max_ring(ckey)
        while r <= max_ring:
            idx = self._ring_candidates(ckey, r)
            if idx is not None:
                best_i, best_d2 = self._scan(idx, q, best_i, best_d2)
            # Points in ring r+1 are at least r*h away.
            if best_i >= 0 and best_d2 < (r * h) ** 2:
                break
            r += 1
        return self._result(best_i, q)

    # -- internals ----------------------------------------------------------

    def _result(self, i: int, q: np.ndarray) -> tuple[int, float]:
        d = self.points[i] - q
        return i, float(np.sqrt(np.sum(d * d)))

    def _scan(self, idx: np.ndarray, q: np.ndarray, best_i: int,
              best_d2: float) -> tuple[int, float]:
        diff = self.points[idx] - q
        d2 = np.einsum("ij,ij->i", diff, diff)
        m = d2.min()
        if m < best_d2:
            return int(idx[d2 == m].min()), float(m)
        if m == best_d2:
            cand = int(idx[d2 == m].min())
            if cand < best_i:
                return cand, best_d2
        return best_i, best_d2

    def _box_ring(self, ckey) -> int:
        """Chebyshev distance from *ckey* to the occupied bounding box."""
        d = 0
        for a in range(3):
            if ckey[a] < self._lo[a]:
                d = max(d, int(self._lo[a] - ckey[a]))
            elif ckey[a] > self._hi[a]:
                d = max(d, int(ckey[a] - self._hi[a]))
        return d

    def _max_ring(self, ckey) -> int:
        """Chebyshev distance from *ckey* to the farthest occupied cell."""
        d = 0
        for a in range(3):
            d = max(d, abs(int(self._lo[a]) - ckey[a]), abs(int(self._hi[a]) - ckey[a]))
        return d

    def _ring_candidates(self, ckey, r: int) -> np.ndarray | None:
        """Indices in all occupied cells at Chebyshev distance *r*."""
        cx, cy, cz = ckey
        found = []
        for ix in range(max(cx - r, int(self._lo[0])), min(cx + r, int(self._hi[0])) + 1):
            adx = abs(ix - cx)
            for iy in range(max(cy - r, int(self._lo[1])), min(cy + r, int(self._hi[1])) + 1):
                ady = abs(iy - cy)
                if max(adx, ady) < r:
                    lo_z, hi_z = (cz - r, cz + r)
                    z_range = [z for z in (lo_z, hi_z)
                               if self._lo[2] <= z <= self._hi[2]]
                else:
                    z_range = range(max(cz - r, int(self._lo[2])),
                                    min(cz + r, int(self._hi[2])) + 1)
                for iz in z_range:
                    hit = self._cells.get((ix, iy, iz))
                    if hit is not None:
                        found.append(hit)
        if not found:
            return None
        return np.concatenate(found)


def build_spatial_index(traj, ci=None, cell: float | None = None) -> SpatialIndex:
    """Build the nearest-neighbor index for a trajectory (or raw points).

    Cell edge defaults to max(CI diameter, 2 * spacing): at least one tunnel
    diameter so an on-tunnel query nearly always resolves in the 3x3x3
    block.
    """
    if isinstance(traj, Trajectory):
        points = traj.via_points
        spacing = traj.spacing
    else:
        points = np.atleast_2d(np.asarray(traj, dtype=np.float64))
        spacing = None
    if cell is None:
        diam = ci.diameter if ci is not None else 0.0
        cell = max(diam, 2.0 * spacing if spacing else 0.0) or DEFAULT_CELL
    return SpatialIndex(points, cell)


def nearest_via_point(index: SpatialIndex, p) -> tuple[int, float]:
    """Nearest via-point index and Euclidean distance for a query point."""
    return index.query(p)
