import csv
import io
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial import cKDTree

from hexsep.errors import ShapeUnavailable, UnsupportedOrder, ValidationError
from hexsep.lattice import (SUPPORTED_ORDERS, Constellation, ConstellationKind, LatticeIndex,
                            build_constellation, decision_regions, lattice_point,
                            nearest_neighbor_graph, neighbor_stats,
                            write_points_csv, write_regions_csv)

ORDERS = [M for M in SUPPORTED_ORDERS if M != 3]
SMALL = [(3, "3psk"), (4, "regular"), (8, "irregular"), (16, "regular"), (16, "irregular"),
         (32, "regular"), (64, "irregular")]


def test_basis_vectors():
    np.testing.assert_allclose(lattice_point(1, 0, 2.0), [1.0, math.sqrt(3.0)])
    np.testing.assert_allclose(lattice_point(0, 1, 2.0), [1.0, -math.sqrt(3.0)])
    np.testing.assert_allclose(LatticeIndex(1, 1).point(), [1.0, 0.0])


@pytest.mark.parametrize("M", ORDERS)
@pytest.mark.parametrize("kind", ["regular", "irregular"])
def test_normalized_lattice_subset(M, kind):
    c = build_constellation(M, kind)
    assert c.M == M
    np.testing.assert_allclose(c.points.mean(axis=0), 0.0, atol=1e-12)
    assert c.avg_energy == pytest.approx(1.0, rel=1e-12)
    # every point is a lattice point up to the common offset and scale
    lattice = lattice_point(c.indices[:, 0], c.indices[:, 1]) * c.scale
    offset = c.points - lattice
    np.testing.assert_allclose(offset, offset[:1].repeat(M, axis=0), atol=1e-12)
    assert c.d_min == pytest.approx(c.scale, rel=1e-12)
    assert len({tuple(i) for i in c.indices}) == M


def test_three_psk_is_equilateral():
    c = build_constellation(3, "3psk")
    d = np.linalg.norm(c.points[:, None] - c.points[None], axis=-1)[np.triu_indices(3, 1)]
    np.testing.assert_allclose(d, d[0], rtol=1e-12)
    s = neighbor_stats(c)
    assert (s.A, s.A_c) == (2, 1)
    assert s.alpha == pytest.approx(c.d_min**2 / 2.0)
    assert s.alpha == pytest.approx(1.5)


@pytest.mark.parametrize("M", [SUPPORTED_ORDERS[k] for k in (1, 3, 5, 7, 9)])
def test_regular_is_point_symmetric(M):
    pts = build_constellation(M, "regular").points
    tree = cKDTree(pts)
    dist, _ = tree.query(-pts)
    assert dist.max() < 1e-12


def test_rhombus_counts():
    s = neighbor_stats(build_constellation(4, "regular"))
    assert s.A == Fraction(5, 2) and s.A_c == Fraction(3, 2)
    assert (s.n_edges, s.n_triangles) == (5, 2)


def test_sixteen_regular_counts():
    s = neighbor_stats(build_constellation(16, "regular"))
    assert float(s.A_c) == pytest.approx(4.4948 / 1.3318, abs=1e-3)


def test_square_qam_alpha():
    c = Constellation.from_points([(1, 1), (-1, 1), (-1, -1), (1, -1)])
    assert c.d_min == pytest.approx(math.sqrt(2.0))
    assert neighbor_stats(c).alpha == pytest.approx(1.0)


def test_from_points_accepts_complex():
    c = Constellation.from_points(np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]))
    assert c.avg_energy == pytest.approx(1.0)


@pytest.mark.parametrize("M", ORDERS)
@pytest.mark.parametrize("kind", ["regular", "irregular"])
def test_A_bounded_by_kissing_number(M, kind):
    s = neighbor_stats(build_constellation(M, kind))
    assert 0 < s.A <= 6
    assert 0 <= s.A_c <= 6


@pytest.mark.parametrize("M,kind", SMALL)
@pytest.mark.parametrize("factor", [0.5, 3.7])
def test_scale_invariance(M, kind, factor):
    c = build_constellation(M, kind)
    a, b = neighbor_stats(c), neighbor_stats(c.scaled(factor))
    assert (a.A, a.A_c) == (b.A, b.A_c)
    assert a.alpha == pytest.approx(b.alpha, rel=1e-12)


@pytest.mark.parametrize("M", [4, 8, 16, 32])
@pytest.mark.parametrize("kind", ["regular", "irregular"])
def test_small_order_B_matches_published(M, kind):
    from hexsep.analytic import B_TABLE
    s = neighbor_stats(build_constellation(M, kind))
    assert 1.3318 * float(s.A_c) == pytest.approx(B_TABLE[(M, ConstellationKind(kind))], abs=1e-3)


def test_large_order_B_deviation_is_reported(capsys):
    from hexsep.analytic import B_TABLE
    worst = 0.0
    for (M, kind), published in sorted(B_TABLE.items()):
        if M < 64:
            continue
        geometric = 1.3318 * float(neighbor_stats(build_constellation(M, kind)).A_c)
        worst = max(worst, abs(geometric - published))
        print(f"B {M:5d} {kind.value:9s} geometric {geometric:.4f} published {published:.4f}")
    print(f"largest |B_geometric - B_published| for M >= 64: {worst:.4f}")
    assert worst < 0.1


def test_kind_and_order_validation():
    with pytest.raises(UnsupportedOrder):
        build_constellation(7)
    with pytest.raises(UnsupportedOrder):
        build_constellation(4, "3psk")
    with pytest.raises(ShapeUnavailable):
        build_constellation(3, "regular")
    with pytest.raises(ValidationError):
        build_constellation(16, "octagonal")
    assert ConstellationKind.parse("I-HQAM") is ConstellationKind.IRREGULAR
    with pytest.raises(ValidationError):
        Constellation(np.zeros((3, 2)))


def test_deterministic_construction():
    a, b = build_constellation(256, "irregular"), build_constellation(256, "irregular")
    np.testing.assert_array_equal(a.points, b.points)


# ---- decision regions -----------------------------------------------------

def test_three_psk_cells_are_wedges():
    c = build_constellation(3, "3psk")
    regions = decision_regions(c)
    for r in regions:
        assert not r.bounded
        assert len(r.vertices) == 1
        np.testing.assert_allclose(r.vertices[0], 0.0, atol=1e-12)
        out_dir, in_dir = r.unbounded_directions
        angle = math.acos(np.clip(out_dir @ in_dir, -1, 1))
        assert angle == pytest.approx(2 * math.pi / 3, abs=1e-12)


def test_sixteen_interior_cells_are_regular_hexagons():
    c = build_constellation(16, "regular")
    degree = np.asarray(nearest_neighbor_graph(c).sum(axis=1)).ravel()
    interior = [r for r in decision_regions(c) if degree[r.symbol_index] == 6]
    assert len(interior) == 4
    for r in interior:
        assert r.bounded
        assert len(r.vertices) == 6
        v = r.vertices
        edges = np.roll(v, -1, axis=0) - v
        np.testing.assert_allclose(np.linalg.norm(edges, axis=1), c.d_min / math.sqrt(3), rtol=1e-9)
        for k in range(6):
            a, b = -edges[k - 1], edges[k]
            angle = math.acos(a @ b / np.linalg.norm(a) / np.linalg.norm(b))
            assert angle == pytest.approx(2 * math.pi / 3, abs=1e-9)


@pytest.mark.parametrize("M,kind", SMALL + [(256, "regular")])
def test_each_symbol_strictly_inside_its_cell(M, kind):
    c = build_constellation(M, kind)
    for r, s in zip(decision_regions(c), c.points):
        assert r.contains(s, tol=-1e-9 * c.d_min)


@pytest.mark.parametrize("M,kind", SMALL)
def test_cells_match_nearest_symbol(M, kind):
    c = build_constellation(M, kind)
    rng = np.random.default_rng(2024)
    xy = rng.uniform(-2.5, 2.5, size=(10_000, 2))
    nearest = cKDTree(c.points).query(xy)[1]
    member = np.stack([r.contains(xy) for r in decision_regions(c)], axis=1)
    # points sitting on a boundary would be ambiguous; none are drawn here
    assert np.all(member.sum(axis=1) == 1)
    np.testing.assert_array_equal(member.argmax(axis=1), nearest)


def test_csv_dumps():
    c = build_constellation(3, "3psk")
    buf = io.StringIO()
    write_points_csv(c, buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["index", "x", "y"] and len(rows) == 4
    assert float(rows[1][1]) == c.points[0, 0]
    buf = io.StringIO()
    write_regions_csv(decision_regions(c), buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["symbol_index", "vertex_ordinal", "x", "y"]
    assert sum(1 for r in rows[1:] if r[1] == "-1") == 6
