import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_sampler.geometry import (Box, Circle, MeshError, MeshTarget, Polygon, SignUnreliableError,
                                       Sphere, TriMesh, active_cells, chamfer_distance, eval_sdf,
                                       extract_levelset, koch_snowflake, load_mesh, normalize_shape,
                                       parse_target, write_obj)
from spectral_sampler.geometry.cells import cell_centers
from spectral_sampler.geometry.marching import sample_grid
from spectral_sampler.geometry.mesh import box_mesh, uv_sphere


# -- independent oracles --------------------------------------------------------

def _segment_dist(p, a, b):
    ab = b - a
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
    return np.linalg.norm(p - (a + t[:, None] * ab), axis=1)


def point_triangle_distance(p, a, b, c):
    """Plane projection if it lands inside the triangle, else the nearest edge (rows = faces)."""
    n = np.cross(b - a, c - a)
    n = n / np.linalg.norm(n, axis=1, keepdims=True)
    h = np.einsum("ij,ij->i", p - a, n)
    q = p - h[:, None] * n

    # barycentric coordinates by signed sub-triangle areas
    def area2(u, v, w):
        return np.einsum("ij,ij->i", np.cross(v - u, w - u), n)

    total = area2(a, b, c)
    lam = np.stack([area2(q, b, c), area2(a, q, c), area2(a, b, q)]) / total
    edge = np.minimum(np.minimum(_segment_dist(p, a, b), _segment_dist(p, b, c)), _segment_dist(p, c, a))
    return np.where(lam.min(axis=0) >= 0, np.abs(h), edge)


def winding_number(p, a, b, c):
    """Generalized winding number from signed solid angles."""
    a, b, c = a - p, b - p, c - p
    la, lb, lc = (np.linalg.norm(v, axis=1) for v in (a, b, c))

    def dot(u, v):
        return np.einsum("ij,ij->i", u, v)

    num = dot(a, np.cross(b, c))
    den = la * lb * lc + dot(a, b) * lc + dot(b, c) * la + dot(c, a) * lb
    return float(np.sum(2.0 * np.arctan2(num, den))) / (4.0 * math.pi)


def brute_mesh_sdf(p, verts, faces):
    a, b, c = (verts[faces[:, k]] for k in range(3))
    pp = np.broadcast_to(p, a.shape)
    d = point_triangle_distance(pp, a, b, c).min()
    return -d if winding_number(pp, a, b, c) > 0.5 else d


# -- mesh SDF ------------------------------------------------------------------------

def test_uv_sphere_has_500_triangles_and_is_closed():
    v, f = uv_sphere()
    mesh = TriMesh(v, f)
    assert len(f) == 500 and mesh.watertight


def test_mesh_sdf_matches_brute_force():
    v, f = uv_sphere()
    mesh = TriMesh(v, f)
    rng = np.random.default_rng(0)
    q = rng.uniform(-1, 1, size=(1000, 3))
    # bias a share of the queries close to the surface where sign errors happen
    q[:300] = mesh.sample_surface(300, rng) + rng.normal(scale=1e-3, size=(300, 3))
    got = mesh.sdf(q)
    want = np.array([brute_mesh_sdf(p, v, f) for p in q])
    assert np.max(np.abs(got - want)) < 1e-9


def test_box_mesh_agrees_with_analytic_box():
    mesh = MeshTarget(TriMesh(*box_mesh(0.5)))
    box = Box([0.5, 0.5, 0.5])
    q = np.random.default_rng(1).uniform(-1, 1, size=(500, 3))
    np.testing.assert_allclose(mesh.sdf(q), box.sdf(q), atol=1e-12)


def test_uv_sphere_close_to_analytic_sphere():
    v, f = uv_sphere(0.5, 40, 80)
    q = np.random.default_rng(2).uniform(-1, 1, size=(300, 3))
    diff = np.abs(TriMesh(v, f).sdf(q) - Sphere(0.5).sdf(q))
    # chordal sagitta of the coarsest latitude band bounds the error
    assert diff.max() < 0.5 * (1 - math.cos(math.pi / 40)) + 1e-12


def test_sphere_and_box_values():
    assert eval_sdf(Sphere(0.5), [0, 0, 0]) == -0.5
    assert eval_sdf(Sphere(0.5), [1, 0, 0]) == 0.5
    assert eval_sdf(Box([0.5, 0.5, 0.5]), [1, 1, 0]) == pytest.approx(math.sqrt(0.5))
    assert eval_sdf(Circle(0.5), [0.0, 0.0]) == -0.5
    np.testing.assert_allclose(eval_sdf(Circle(0.5), np.array([[1.0, 0.0], [0.0, 0.25]])), [0.5, -0.25])


# -- OBJ ------------------------------------------------------------------------------

def test_cube_obj_normalizes_to_unit_box(tmp_path):
    v, f = box_mesh(0.5)
    path = tmp_path / "cube.obj"
    write_obj(path, (v + 0.5) * 10.0, f)
    mesh = load_mesh(path)
    np.testing.assert_array_equal(mesh.vertices.min(axis=0), [-1, -1, -1])
    np.testing.assert_array_equal(mesh.vertices.max(axis=0), [1, 1, 1])


def test_normalize_is_idempotent():
    v, f = uv_sphere()
    v = v * 3.7 + np.array([0.3, -2.0, 5.0])
    once = normalize_shape(MeshTarget(TriMesh(v, f)))
    twice = normalize_shape(once)
    np.testing.assert_array_equal(once.mesh.vertices, twice.mesh.vertices)
    poly = koch_snowflake(2)
    np.testing.assert_array_equal(normalize_shape(poly).vertices, poly.vertices)


def test_open_sheet_is_sign_unreliable(tmp_path):
    path = tmp_path / "sheet.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n")
    mesh = load_mesh(path)
    assert not mesh.watertight
    with pytest.raises(SignUnreliableError):
        mesh.sdf([[0, 0, 0.5]])
    # normalized onto [-1, 1]^2 at z = 0
    assert mesh.unsigned_distance([[0, 0, 0.5]])[0] == pytest.approx(0.5)


def test_obj_errors(tmp_path):
    quad = tmp_path / "quad.obj"
    quad.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(MeshError):
        load_mesh(quad)
    empty = tmp_path / "empty.obj"
    empty.write_text("# nothing\n")
    with pytest.raises(MeshError):
        load_mesh(empty)
    with pytest.raises(MeshError):
        load_mesh(tmp_path / "missing.obj")


def test_obj_ignores_other_records(tmp_path):
    v, f = box_mesh(0.5)
    path = tmp_path / "cube.obj"
    write_obj(path, v, f)
    path.write_text("# comment\nvn 0 0 1\nvt 0 0\n" + path.read_text().replace("f ", "f ", 1))
    assert load_mesh(path).watertight


# -- polygon / Koch -----------------------------------------------------------------

@pytest.mark.parametrize("k,edges", [(0, 3), (1, 12), (2, 48), (3, 192)])
def test_koch_edge_count(k, edges):
    poly = koch_snowflake(k)
    assert poly.edge_count == edges
    assert np.all(np.abs(poly.vertices) <= 1.0)
    ext = poly.vertices.max(axis=0) - poly.vertices.min(axis=0)
    assert ext.max() == 2.0


def test_koch_rejects_degree():
    with pytest.raises(ValueError):
        koch_snowflake(4)


def test_koch_contains_center_and_excludes_corners():
    poly = koch_snowflake(3)
    s = poly.sdf(np.array([[0.0, 0.0], [0.99, 0.99], [-0.99, -0.99]]))
    assert s[0] < 0 and s[1] > 0 and s[2] > 0


def test_regular_polygon_approximates_circle():
    t = 2 * np.pi * np.arange(512) / 512
    poly = Polygon(0.5 * np.column_stack([np.cos(t), np.sin(t)]))
    q = np.random.default_rng(3).uniform(-1, 1, size=(400, 2))
    sagitta = 0.5 * (1 - math.cos(math.pi / 512))
    assert np.max(np.abs(poly.sdf(q) - Circle(0.5).sdf(q))) <= sagitta + 1e-12


def test_parse_target():
    assert isinstance(parse_target("circle:0.5"), Circle)
    assert parse_target("koch:2").edge_count == 48
    assert parse_target("signal:sin4").dim == 1
    assert parse_target("sphere:0.4").dim == 3
    with pytest.raises(ValueError):
        parse_target("torus:1")


# -- Lipschitz ------------------------------------------------------------------------

TARGETS = [Circle(0.5), Sphere(0.4), Box([0.5, 0.3]), koch_snowflake(2),
           MeshTarget(TriMesh(*uv_sphere()))]


@settings(max_examples=60, deadline=None)
@given(i=st.integers(0, len(TARGETS) - 1), seed=st.integers(0, 10_000))
def test_sdf_is_one_lipschitz(i, seed):
    target = TARGETS[i]
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(-1, 1, size=(2, target.dim))
    t = np.linspace(0, 1, 17)[:, None]
    seg = x + t * (y - x)
    s = target.sdf(seg)
    step = np.linalg.norm(y - x) / 16
    assert np.all(np.abs(np.diff(s)) <= step + 1e-9)


# -- active cells ---------------------------------------------------------------------

def brute_sign_change_cells(target, res, per_cell=5):
    edge = 2.0 / res
    offs = (np.arange(per_cell) + 0.5) / per_cell * edge
    local = np.stack(np.meshgrid(*([offs] * target.dim), indexing="ij"), -1).reshape(-1, target.dim)
    mask = np.zeros((res,) * target.dim, dtype=bool)
    corners = -1.0 + (np.argwhere(np.ones_like(mask)) * edge)
    for idx, lo in zip(np.argwhere(np.ones_like(mask)), corners):
        s = target.sdf(lo + local)
        mask[tuple(idx)] = s.min() < 0 < s.max()
    return mask


def test_active_cells_cover_brute_force_sphere():
    target = Sphere(0.5)
    grid = active_cells(target, 20)
    brute = brute_sign_change_cells(target, 20)
    assert brute.any()
    assert not np.any(brute & ~grid.active)
    assert grid.count >= brute.sum()


def test_active_cells_koch():
    grid = active_cells(koch_snowflake(3), 20)
    brute = brute_sign_change_cells(koch_snowflake(3), 20)
    assert not np.any(brute & ~grid.active)


def test_active_cells_single_cell():
    assert active_cells(Circle(0.1), 1).count == 1


def test_active_cells_reject_signal():
    with pytest.raises(ValueError):
        active_cells(parse_target("signal:sin1"))


def test_cell_grid_membership():
    grid = active_cells(Circle(0.5), 20)
    pts = grid.sample_uniform(2000, np.random.default_rng(0))
    assert grid.contains(pts).all()
    assert cell_centers(4, 2).shape == (16, 2)


# -- marching -------------------------------------------------------------------------

def test_circle_contour_within_cell_diagonal():
    c = extract_levelset(Circle(0.5), 128, 2)
    assert not c.empty
    r = np.linalg.norm(c.vertices, axis=1)
    assert np.max(np.abs(r - 0.5)) <= 2 * math.sqrt(2) / 128


def test_constant_field_gives_empty_contour():
    assert extract_levelset(lambda p: np.ones(len(p)), 16, 2).empty
    assert extract_levelset(lambda p: np.ones(len(p)), 8, 3).empty


def test_sphere_area():
    m = extract_levelset(Sphere(0.5), 64, 3)
    assert m.area == pytest.approx(4 * math.pi * 0.25, rel=0.1)


def test_marching_vertices_on_sign_changing_edges():
    field = Circle(0.37, center=(0.05, -0.11))
    res = 40
    c = extract_levelset(field, res, 2)
    h = 2.0 / res
    g = (c.vertices + 1.0) / h
    on_line = np.isclose(g, np.round(g), atol=1e-9)
    assert np.all(on_line.any(axis=1))
    for v, ol in zip(c.vertices, on_line):
        axis = 0 if ol[0] else 1
        other = 1 - axis
        lo = v.copy()
        hi = v.copy()
        lo[other] = -1.0 + math.floor((v[other] + 1.0) / h) * h
        hi[other] = lo[other] + h
        sl, sh = field.sdf(np.array([lo, hi]))
        assert sl * sh <= 0


def test_sample_grid_shape():
    vals = sample_grid(Circle(0.5), 4, 2)
    assert vals.shape == (5, 5)
    assert vals[2, 2] == -0.5


def test_contour_exports():
    c = extract_levelset(Circle(0.5), 16, 2)
    assert c.to_csv().startswith("x,y")
    assert c.to_svg().lstrip().startswith("<svg")


# -- chamfer ---------------------------------------------------------------------------

def test_chamfer_identity_and_unit():
    a = np.random.default_rng(0).normal(size=(50, 3))
    assert chamfer_distance(a, a) == 0.0
    assert chamfer_distance([[0, 0, 0]], [[1, 0, 0]]) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_chamfer_tree_equals_brute(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-1, 1, size=(100, 3)), rng.uniform(-1, 1, size=(100, 3))
    assert chamfer_distance(a, b, "tree") == chamfer_distance(a, b, "brute")


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 40), m=st.integers(1, 40))
def test_chamfer_symmetric(seed, n, m):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(n, 2)), rng.normal(size=(m, 2))
    assert chamfer_distance(a, b) == pytest.approx(chamfer_distance(b, a), rel=1e-15)
    assert chamfer_distance(a, np.concatenate([a, a])) == 0.0


def test_chamfer_rejects_empty():
    with pytest.raises(ValueError):
        chamfer_distance(np.zeros((0, 3)), np.zeros((2, 3)))
