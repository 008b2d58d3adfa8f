"""
Hexagonal-lattice constellations, their neighbor geometry and ML decision regions.

Every HQAM point is an integer combination of the lattice basis

    v1 = [d/2,  sqrt(3) d/2],    v2 = [d/2, -sqrt(3) d/2]

plus an offset chosen so that the constellation is zero-mean.  Constellations
are stored both as lattice indices (exact) and as energy-normalized
coordinates (mean squared norm of one).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np
from scipy import sparse
from scipy.spatial import Delaunay, cKDTree

from .errors import ShapeUnavailable, UnsupportedOrder, ValidationError

__all__ = [
    "SUPPORTED_ORDERS",
    "ConstellationKind",
    "LatticeIndex",
    "Constellation",
    "NeighborStats",
    "DecisionRegion",
    "build_constellation",
    "neighbor_stats",
    "decision_regions",
    "lattice_point",
    "write_points_csv",
    "write_regions_csv",
]

SQRT3 = math.sqrt(3.0)
SUPPORTED_ORDERS = (3, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048)

# relative tolerance for "same distance" decisions on lattice geometry
DIST_RTOL = 1e-9


class ConstellationKind(str, Enum):
    REGULAR = "regular"
    IRREGULAR = "irregular"
    THREE_PSK = "3psk"

    @classmethod
    def parse(cls, value: Union[str, "ConstellationKind"]) -> "ConstellationKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        aliases = {
            "regular": cls.REGULAR, "r": cls.REGULAR, "rhqam": cls.REGULAR,
            "irregular": cls.IRREGULAR, "i": cls.IRREGULAR, "ihqam": cls.IRREGULAR,
            "3psk": cls.THREE_PSK, "threepsk": cls.THREE_PSK, "psk3": cls.THREE_PSK,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValidationError(
                f"unknown constellation kind {value!r}; expected one of "
                "'regular', 'irregular', '3psk'") from None


@dataclass(frozen=True, order=True)
class LatticeIndex:
    n1: int
    n2: int

    def point(self, d: float = 1.0) -> np.ndarray:
        return lattice_point(self.n1, self.n2, d)


def lattice_point(n1, n2, d: float = 1.0) -> np.ndarray:
    """Map integer coefficients to the plane, ``n1*v1 + n2*v2`` (no offset)."""
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    return np.stack([0.5 * d * (n1 + n2), 0.5 * SQRT3 * d * (n1 - n2)], axis=-1)


@dataclass(frozen=True, eq=False)
class Constellation:
    """A set of M distinct points in the plane.

    ``points`` has shape (M, 2).  For lattice constellations ``indices`` holds
    the integer lattice coefficients of each point (unit lattice spacing) and
    ``scale`` the factor that maps the zero-mean lattice coordinates to
    ``points``.
    """

    points: np.ndarray
    kind: Optional[ConstellationKind] = None
    indices: Optional[np.ndarray] = None
    scale: float = 1.0
    d_min: float = field(init=False)
    avg_energy: float = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValidationError("points must have shape (M, 2) with M >= 2")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.indices is not None:
            idx = np.array(self.indices, dtype=np.int64)
            idx.setflags(write=False)
            object.__setattr__(self, "indices", idx)
        dists, _ = cKDTree(pts).query(pts, k=2)
        d_min = float(dists[:, 1].min())
        if not d_min > 0:
            raise ValidationError("constellation points must be distinct")
        object.__setattr__(self, "d_min", d_min)
        object.__setattr__(self, "avg_energy", float(np.mean(np.sum(pts**2, axis=1))))

    @property
    def M(self) -> int:
        return len(self.points)

    @property
    def name(self) -> str:
        if self.kind is None:
            return f"{self.M}-point"
        if self.kind is ConstellationKind.THREE_PSK:
            return "3-PSK"
        return f"{self.M}-{'R' if self.kind is ConstellationKind.REGULAR else 'I'}-HQAM"

    @classmethod
    def from_points(cls, points, kind: Optional[ConstellationKind] = None,
                    normalize: bool = True) -> "Constellation":
        """Wrap arbitrary points; with ``normalize`` they are centered and
        scaled to unit average energy."""
        if np.iscomplexobj(points):
            z = np.asarray(points)
            pts = np.column_stack([z.real, z.imag])
        else:
            pts = np.asarray(points, dtype=float)
        if normalize:
            pts = pts - pts.mean(axis=0)
            pts = pts / math.sqrt(np.mean(np.sum(pts**2, axis=1)))
        return cls(pts, kind=kind)

    def scaled(self, factor: float) -> "Constellation":
        return Constellation(self.points * factor, kind=self.kind,
                             indices=self.indices, scale=self.scale * factor)

    def __repr__(self) -> str:
        return (f"Constellation({self.name}, d_min={self.d_min:.6g}, "
                f"avg_energy={self.avg_energy:.6g})")


@dataclass(frozen=True)
class NeighborStats:
    """Nearest-neighbor counts and the SNR scale factor of a constellation.

    ``A`` and ``A_c`` are exact rationals: the mean number of nearest
    neighbors per symbol and the mean number of nearest-neighbor pairs that
    are themselves nearest neighbors.
    """

    A: Fraction
    A_c: Fraction
    alpha: float
    n_edges: int
    n_triangles: int


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------

def _zigzag_rows(rows: Sequence[tuple]) -> np.ndarray:
    """Lattice indices for horizontal rows; ``rows[r] = (first_column, count)``.

    Row r sits at height r*sqrt(3)/2 and odd rows are shifted right by 1/2,
    i.e. the square (or cross) QAM grid with alternate rows offset.
    """
    out = []
    for r, (start, count) in enumerate(rows):
        for k in range(start, start + count):
            # x = k + (r % 2)/2, y = r*sqrt(3)/2  ->  n1 = x + y/sqrt(3), n2 = x - y/sqrt(3)
            half = (r % 2 + r) // 2
            out.append((k + half, k + half - r))
    return np.array(out, dtype=np.int64)


def _regular_indices(M: int) -> np.ndarray:
    if M == 8:
        # 7 lattice triangles are required to match the published B value,
        # which no point-symmetric 8-point set has; use the compact shape.
        return _energy_minimal_indices(M)
    side = math.isqrt(M)
    if side * side == M:
        return _zigzag_rows([(0, side)] * side)
    corner = math.isqrt(M // 32)
    if 32 * corner * corner != M:
        raise ShapeUnavailable(f"no regular HQAM shape for M={M}")
    side = 6 * corner
    short = (corner, side - 2 * corner)
    return _zigzag_rows([short] * corner + [(0, side)] * (side - 2 * corner) + [short] * corner)


# Candidate selection centers, in units of d: a lattice point, the center of
# a lattice triangle and the midpoint of a lattice edge.
_CENTERS = ((0.0, 0.0), (0.5, SQRT3 / 6.0), (0.25, SQRT3 / 4.0))


def _lattice_patch(M: int) -> np.ndarray:
    radius = int(math.ceil(math.sqrt(M))) + 4
    n = np.arange(-radius, radius + 1)
    n1, n2 = np.meshgrid(n, n, indexing="ij")
    return np.column_stack([n1.ravel(), n2.ravel()])


def _nearest_to(center, patch: np.ndarray, M: int) -> np.ndarray:
    xy = lattice_point(patch[:, 0], patch[:, 1]) - np.asarray(center)
    r2 = np.round(np.sum(xy**2, axis=1), 9)
    angle = np.round(np.mod(np.arctan2(xy[:, 1], xy[:, 0]), 2 * np.pi), 9)
    order = np.lexsort((patch[:, 1], patch[:, 0], angle, r2))
    return patch[order[:M]]


def _energy_about_centroid(idx: np.ndarray) -> float:
    xy = lattice_point(idx[:, 0], idx[:, 1])
    return float(np.mean(np.sum((xy - xy.mean(axis=0)) ** 2, axis=1)))


def _energy_minimal_indices(M: int) -> np.ndarray:
    patch = _lattice_patch(M)
    best, best_energy = None, math.inf
    for center in _CENTERS:
        idx = _nearest_to(center, patch, M)
        energy = _energy_about_centroid(idx)
        if energy < best_energy - 1e-12:
            best, best_energy = idx, energy
    return best


def build_constellation(M: int, kind: Union[str, ConstellationKind] = "regular") -> Constellation:
    """Build an energy-normalized HQAM or 3-PSK constellation.

    Parameters
    ----------
    M : int
        Number of symbols, one of ``SUPPORTED_ORDERS``.
    kind : {'regular', 'irregular', '3psk'}
        ``regular`` shapes are the square (M = 4**k) or cross (M = 2 * 4**k)
        QAM grids with every other row shifted by d/2; they are symmetric
        under reflection through the origin.  ``irregular`` shapes take the
        M lattice points closest to a selection center, trying a lattice
        point, a triangle center and an edge midpoint and keeping the
        lowest-energy result.  Ties at equal distance are broken by angle,
        then n1, then n2.

    Returns
    -------
    Constellation
        Zero-mean points with unit average energy.
    """
    kind = ConstellationKind.parse(kind)
    if M not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"M={M} is not supported; choose from {SUPPORTED_ORDERS}")
    if kind is ConstellationKind.THREE_PSK:
        if M != 3:
            raise UnsupportedOrder(f"3-PSK requires M=3, got M={M}")
        idx = np.array([(0, 0), (1, 0), (1, 1)], dtype=np.int64)
    elif kind is ConstellationKind.REGULAR:
        if M == 3:
            raise ShapeUnavailable("three points cannot be point-symmetric")
        idx = _regular_indices(M)
    else:
        idx = _energy_minimal_indices(M)

    xy = lattice_point(idx[:, 0], idx[:, 1])
    xy = xy - xy.mean(axis=0)
    scale = 1.0 / math.sqrt(np.mean(np.sum(xy**2, axis=1)))
    return Constellation(xy * scale, kind=kind, indices=idx, scale=scale)


# --------------------------------------------------------------------------
# neighbor statistics
# --------------------------------------------------------------------------

def nearest_neighbor_graph(c: Constellation) -> sparse.csr_matrix:
    """Symmetric boolean adjacency of symbol pairs at distance d_min."""
    pairs = cKDTree(c.points).query_pairs(c.d_min * (1.0 + DIST_RTOL), output_type="ndarray")
    M = c.M
    data = np.ones(2 * len(pairs), dtype=np.int64)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    return sparse.csr_matrix((data, (rows, cols)), shape=(M, M))


def neighbor_stats(c: Constellation) -> NeighborStats:
    """Average NN count A, adjacent-NN pair count A_c and alpha = d_min^2/(2 E)."""
    adj = nearest_neighbor_graph(c)
    n_edges = int(adj.sum()) // 2
    # trace(adj^3) counts each triangle six times
    closed_walks = int((adj @ adj).multiply(adj).sum())
    n_triangles = closed_walks // 6
    M = c.M
    return NeighborStats(
        A=Fraction(2 * n_edges, M),
        A_c=Fraction(3 * n_triangles, M),
        alpha=c.d_min**2 / (2.0 * c.avg_energy),
        n_edges=n_edges,
        n_triangles=n_triangles,
    )


# --------------------------------------------------------------------------
# decision regions
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DecisionRegion:
    """Convex ML decision cell of one symbol.

    ``vertices`` are ordered counter-clockwise.  A bounded cell has no
    ``unbounded_directions``.  An open cell has two unit directions: the
    boundary leaves ``vertices[-1]`` to infinity along the first and returns
    from infinity to ``vertices[0]`` along the reverse of the second.
    ``edge_neighbors[i]`` is the symbol whose bisector carries the edge that
    starts at ``vertices[i]`` (the final entry of an open cell is the
    neighbor of the outgoing ray; ``ray_in_neighbor`` that of the incoming).
    """

    symbol_index: int
    vertices: np.ndarray
    unbounded_directions: np.ndarray
    edge_neighbors: tuple
    ray_in_neighbor: Optional[int] = None

    @property
    def bounded(self) -> bool:
        return len(self.unbounded_directions) == 0

    def contains(self, xy, tol: float = 0.0) -> np.ndarray:
        """Membership test for points of shape (..., 2)."""
        xy = np.asarray(xy, dtype=float)
        inside = np.ones(xy.shape[:-1], dtype=bool)
        for start, direction in self._boundary_lines():
            normal = np.array([direction[1], -direction[0]])  # outward for CCW
            inside &= (xy - start) @ normal <= tol
        return inside

    def _boundary_lines(self):
        v = self.vertices
        if self.bounded:
            for i in range(len(v)):
                yield v[i], v[(i + 1) % len(v)] - v[i]
            return
        for i in range(len(v) - 1):
            yield v[i], v[i + 1] - v[i]
        yield v[-1], self.unbounded_directions[0]
        yield v[0], -self.unbounded_directions[1]


_BOX = 1.0e4


def _clip(poly, labels, normal, offset, label):
    """Clip a CCW polygon by ``normal . x <= offset``.

    ``labels[k]`` names the line carrying edge ``poly[k] -> poly[k+1]``
    (-1 for the bounding box); the new edge gets ``label``.
    """
    out, out_labels = [], []
    n = len(poly)
    side = [float(np.dot(normal, p) - offset) for p in poly]
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        sp, sq = side[k], side[(k + 1) % n]
        if sp < 0:
            out.append(p)
            out_labels.append(labels[k])
            if sq > 0:
                out.append(p + (sp / (sp - sq)) * (q - p))
                out_labels.append(label)
        elif sp == 0:
            out.append(p)
            out_labels.append(label if sq > 0 else labels[k])
        elif sq < 0:
            out.append(p + (sp / (sp - sq)) * (q - p))
            out_labels.append(labels[k])
    return out, out_labels


def _cell_polygon(points: np.ndarray, i: int, candidates: Iterable[int], extent: float):
    """Cell of symbol i clipped to a large box, in coordinates relative to it."""
    s = points[i]
    box = _BOX * extent
    poly = [np.array(v) for v in ((-box, -box), (box, -box), (box, box), (-box, box))]
    labels = [-1, -1, -1, -1]
    lines = {}
    for j in candidates:
        j = int(j)
        delta = points[j] - s
        length = float(np.linalg.norm(delta))
        normal = delta / length
        lines[j] = (normal, 0.5 * length)
        poly, labels = _clip(poly, labels, normal, 0.5 * length, j)
    return poly, labels, lines


def _intersect(line_a, line_b) -> np.ndarray:
    (na, ca), (nb, cb) = line_a, line_b
    return np.linalg.solve(np.array([na, nb]), np.array([ca, cb]))


def _region(points, i, poly, labels, lines) -> DecisionRegion:
    s = points[i]
    n = len(poly)
    if -1 not in labels:
        verts = [s + _intersect(lines[labels[k - 1]], lines[labels[k]]) for k in range(n)]
        verts, edge_nb = _merge_coincident(verts, list(labels), closed=True)
        return DecisionRegion(i, np.array(verts), np.zeros((0, 2)), tuple(edge_nb))
    # the box edges form one run; start at the box point where the cell re-enters
    k0 = next(k for k in range(n) if labels[k - 1] == -1 and labels[k] != -1)
    seq = [(k0 + m) % n for m in range(n)]
    run = [k for k in seq if labels[k] != -1]
    if len(run) < 2 or any(labels[k] == -1 for k in seq[:len(run)]):
        raise ValidationError("collinear or degenerate constellations are not supported")
    verts = [s + _intersect(lines[labels[a]], lines[labels[b]]) for a, b in zip(run, run[1:])]
    verts, edge_nb = _merge_coincident(verts, [labels[k] for k in run[1:]], closed=False)

    def ray(label, toward):
        normal = lines[label][0]
        direction = np.array([-normal[1], normal[0]])
        return direction if np.dot(direction, toward) > 0 else -direction

    k_in, k_out = run[0], run[-1]
    out_dir = ray(labels[k_out], poly[(k_out + 1) % n] - poly[k_out])
    in_dir = ray(labels[k_in], poly[k_in] - poly[(k_in + 1) % n])
    return DecisionRegion(i, np.array(verts), np.array([out_dir, in_dir]),
                          tuple(edge_nb), ray_in_neighbor=labels[k_in])


def _merge_coincident(verts, edge_labels, closed):
    """Drop zero-length edges, left behind when more than three bisectors
    meet at one vertex (cocircular symbols)."""
    scale = max(float(np.max(np.abs(verts))), 1.0)
    k = 0
    while len(verts) > 1 and k < len(verts) - (0 if closed else 1):
        nxt = (k + 1) % len(verts)
        if np.linalg.norm(verts[nxt] - verts[k]) <= 1e-12 * scale:
            del verts[nxt]
            del edge_labels[k]
            continue
        k += 1
    return verts, edge_labels


def _delaunay_neighbors(points: np.ndarray) -> list:
    indptr, indices = Delaunay(points).vertex_neighbor_vertices
    return [indices[indptr[k]:indptr[k + 1]] for k in range(len(points))]


def decision_regions(c: Constellation) -> list:
    """ML (nearest-point) decision cells of every symbol, in symbol order."""
    points = c.points
    if c.M == 2:
        raise ValidationError("at least three non-collinear points are required")
    extent = float(np.max(np.abs(points))) + c.d_min
    neighbors = _delaunay_neighbors(points)
    regions = []
    for i in range(c.M):
        region = _region(points, i, *_cell_polygon(points, i, neighbors[i], extent))
        if not _cell_is_exact(points, i, region):
            others = [j for j in range(c.M) if j != i]
            region = _region(points, i, *_cell_polygon(points, i, others, extent))
        regions.append(region)
    return regions


def _cell_is_exact(points, i, region: DecisionRegion) -> bool:
    """Check the cell against every symbol, not just the Delaunay neighbors."""
    s = points[i]
    tol = 1e-9 * float(np.max(np.abs(points)))
    d_own = np.sum((region.vertices - s) ** 2, axis=1)
    d_all = np.sum((region.vertices[:, None, :] - points[None, :, :]) ** 2, axis=2)
    if np.any(d_all.min(axis=1) < d_own - tol):
        return False
    for u in region.unbounded_directions:
        if np.any((points - s) @ u > tol):
            return False
    return True


# --------------------------------------------------------------------------
# CSV dumps
# --------------------------------------------------------------------------

def write_points_csv(c: Constellation, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["index", "x", "y"])
    for k, (x, y) in enumerate(c.points):
        writer.writerow([k, repr(float(x)), repr(float(y))])


def write_regions_csv(regions: Sequence[DecisionRegion], out: TextIO) -> None:
    """One row per vertex; open cells add two ``vertex_ordinal = -1`` rows
    holding the outgoing and incoming ray directions, in that order."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["symbol_index", "vertex_ordinal", "x", "y"])
    for region in regions:
        for k, (x, y) in enumerate(region.vertices):
            writer.writerow([region.symbol_index, k, repr(float(x)), repr(float(y))])
        for x, y in region.unbounded_directions:
            writer.writerow([region.symbol_index, -1, repr(float(x)), repr(float(y))])


def points_csv(c: Constellation) -> str:
    buf = io.StringIO()
    write_points_csv(c, buf)
    return buf.getvalue()
