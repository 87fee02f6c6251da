"""Triangle-mesh signed distance with angle-weighted pseudo-normals."""

from __future__ import annotations

import numpy as np

# closest-feature codes returned by closest_point_on_triangles
FACE, VERT_A, VERT_B, VERT_C, EDGE_AB, EDGE_BC, EDGE_CA = range(7)


class MeshError(ValueError):
    pass


class SignUnreliableError(MeshError):
    """Signed distance requested on a mesh that is not watertight."""


def closest_point_on_triangles(p, a, b, c):
    """Closest points of ``p`` (n,3) on triangles ``a, b, c`` (m,3) for every pair.

    Returns ``(points (n,m,3), feature (n,m))`` using the Voronoi-region walk
    from Ericson's *Real-Time Collision Detection*.
    """
    p = p[:, None, :]
    ab, ac = b - a, c - a
    ap = p - a
    d1 = np.einsum("nmk,mk->nm", ap, ab)
    d2 = np.einsum("nmk,mk->nm", ap, ac)
    bp = p - b
    d3 = np.einsum("nmk,mk->nm", bp, ab)
    d4 = np.einsum("nmk,mk->nm", bp, ac)
    cp = p - c
    d5 = np.einsum("nmk,mk->nm", cp, ab)
    d6 = np.einsum("nmk,mk->nm", cp, ac)

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    shape = d1.shape
    feature = np.full(shape, FACE, dtype=np.int8)
    s = np.zeros(shape)  # weight on ab
    t = np.zeros(shape)  # weight on ac
    done = np.zeros(shape, dtype=bool)

    with np.errstate(divide="ignore", invalid="ignore"):
        m = (d1 <= 0) & (d2 <= 0)
        feature[m] = VERT_A
        done |= m

        m = ~done & (d3 >= 0) & (d4 <= d3)
        feature[m] = VERT_B
        s[m] = 1.0
        done |= m

        m = ~done & (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        feature[m] = EDGE_AB
        s[m] = (d1 / (d1 - d3))[m]
        done |= m

        m = ~done & (d6 >= 0) & (d5 <= d6)
        feature[m] = VERT_C
        t[m] = 1.0
        done |= m

        m = ~done & (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        feature[m] = EDGE_CA
        t[m] = (d2 / (d2 - d6))[m]
        done |= m

        m = ~done & (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0)
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        feature[m] = EDGE_BC
        s[m] = (1.0 - w)[m]
        t[m] = w[m]
        done |= m

        m = ~done
        denom = 1.0 / (va + vb + vc)
        s[m] = (vb * denom)[m]
        t[m] = (vc * denom)[m]

    q = a[None] + s[..., None] * ab[None] + t[..., None] * ac[None]
    return q, feature


def _face_normals(vertices, faces):
    tri = vertices[faces]
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    area2 = np.linalg.norm(n, axis=1)
    return n / np.where(area2 > 0, area2, 1.0)[:, None], 0.5 * area2


def _edge_key(i, j):
    return (i, j) if i < j else (j, i)


class TriMesh:
    """Triangle mesh SDF target.  Sign is only defined when ``watertight``."""

    dim = 3

    def __init__(self, vertices, faces):
        vertices = np.asarray(vertices, dtype=np.float64)
        faces = np.asarray(faces, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3 or len(vertices) == 0:
            raise MeshError("mesh needs a non-empty (n, 3) vertex array")
        if faces.ndim != 2 or faces.shape[1] != 3 or len(faces) == 0:
            raise MeshError("mesh needs a non-empty (m, 3) triangle array")
        if faces.min() < 0 or faces.max() >= len(vertices):
            raise MeshError("face index out of range")
        self.vertices = vertices
        self.faces = faces
        self.face_normals, self.face_areas = _face_normals(vertices, faces)

        # edge -> adjacent faces
        edges: dict[tuple[int, int], list[int]] = {}
        for fi, (i, j, k) in enumerate(faces.tolist()):
            for e in (_edge_key(i, j), _edge_key(j, k), _edge_key(k, i)):
                edges.setdefault(e, []).append(fi)
        self.watertight = all(len(f) == 2 for f in edges.values())

        # per-face edge pseudo-normals in the order ab, bc, ca
        edge_normals = np.zeros((len(faces), 3, 3))
        for fi, (i, j, k) in enumerate(faces.tolist()):
            for slot, e in enumerate((_edge_key(i, j), _edge_key(j, k), _edge_key(k, i))):
                edge_normals[fi, slot] = self.face_normals[edges[e]].sum(axis=0)
        self.edge_normals = edge_normals

        # angle-weighted vertex pseudo-normals
        tri = vertices[faces]
        vert_normals = np.zeros_like(vertices)
        for corner in range(3):
            u = tri[:, (corner + 1) % 3] - tri[:, corner]
            v = tri[:, (corner + 2) % 3] - tri[:, corner]
            cosang = np.einsum("ij,ij->i", u, v) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1) + 1e-300)
            ang = np.arccos(np.clip(cosang, -1.0, 1.0))
            np.add.at(vert_normals, faces[:, corner], ang[:, None] * self.face_normals)
        self.vertex_normals = vert_normals

    def closest(self, points, chunk_pairs: int = 2_000_000):
        """Unsigned distance, closest point, face index and feature code per query."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        a, b, c = (self.vertices[self.faces[:, k]] for k in range(3))
        n = len(pts)
        dist = np.empty(n)
        closest = np.empty((n, 3))
        face = np.empty(n, dtype=np.int64)
        feature = np.empty(n, dtype=np.int8)
        step = max(1, chunk_pairs // len(self.faces))
        for s in range(0, n, step):
            p = pts[s:s + step]
            q, feat = closest_point_on_triangles(p, a, b, c)
            d2 = np.sum((p[:, None, :] - q) ** 2, axis=2)
            idx = np.argmin(d2, axis=1)
            rows = np.arange(len(p))
            dist[s:s + step] = np.sqrt(d2[rows, idx])
            closest[s:s + step] = q[rows, idx]
            face[s:s + step] = idx
            feature[s:s + step] = feat[rows, idx]
        return dist, closest, face, feature

    def pseudo_normal(self, face, feature):
        normals = self.face_normals[face].copy()
        for code, corner in ((VERT_A, 0), (VERT_B, 1), (VERT_C, 2)):
            m = feature == code
            normals[m] = self.vertex_normals[self.faces[face[m], corner]]
        for code, slot in ((EDGE_AB, 0), (EDGE_BC, 1), (EDGE_CA, 2)):
            m = feature == code
            normals[m] = self.edge_normals[face[m], slot]
        return normals

    def unsigned_distance(self, points):
        return self.closest(points)[0]

    def sdf(self, points):
        if not self.watertight:
            raise SignUnreliableError("mesh is not watertight; sign is undefined")
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        dist, q, face, feature = self.closest(pts)
        normals = self.pseudo_normal(face, feature)
        side = np.einsum("ij,ij->i", pts - q, normals)
        return np.where(side < 0, -dist, dist)

    def sample_surface(self, count, rng):
        prob = self.face_areas / self.face_areas.sum()
        fi = rng.choice(len(self.faces), size=count, p=prob)
        r1, r2 = rng.random(count), rng.random(count)
        flip = r1 + r2 > 1
        r1[flip], r2[flip] = 1 - r1[flip], 1 - r2[flip]
        tri = self.vertices[self.faces[fi]]
        return tri[:, 0] + r1[:, None] * (tri[:, 1] - tri[:, 0]) + r2[:, None] * (tri[:, 2] - tri[:, 0])

    def normalized(self) -> "TriMesh":
        v = normalize_points(self.vertices)
        return self if v is self.vertices else TriMesh(v, self.faces)


def normalize_points(vertices: np.ndarray) -> np.ndarray:
    """Center the bounding box and scale its longest axis to [-1, 1].

    Returns the input array itself when it is already normalized, so the
    operation is idempotent.
    """
    lo, hi = vertices.min(axis=0), vertices.max(axis=0)
    extent = float(np.max(hi - lo))
    if extent <= 0:
        raise MeshError("degenerate bounding box")
    axis = int(np.argmax(hi - lo))
    center = 0.5 * (lo + hi)
    if lo[axis] == -1.0 and hi[axis] == 1.0 and np.all(np.abs(center) <= 4 * np.finfo(float).eps):
        return vertices
    out = (vertices - center) * (2.0 / extent)
    # pin the longest axis exactly onto [-1, 1]
    out[:, axis] = np.clip(out[:, axis], -1.0, 1.0)
    out[np.argmin(vertices[:, axis]), axis] = -1.0
    out[np.argmax(vertices[:, axis]), axis] = 1.0
    return out


def load_obj(path) -> tuple[np.ndarray, np.ndarray]:
    verts, faces = [], []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "v":
                    verts.append([float(c) for c in parts[1:4]])
                elif parts[0] == "f":
                    idx = [int(tok.split("/")[0]) for tok in parts[1:]]
                    if len(idx) != 3:
                        raise MeshError(f"{path}:{lineno}: only triangular faces are supported")
                    faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
    except (OSError, UnicodeDecodeError) as exc:
        raise MeshError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"malformed OBJ {path}: {exc}") from exc
    if not verts or not faces:
        raise MeshError(f"{path}: empty mesh")
    return np.array(verts, dtype=np.float64), np.array(faces, dtype=np.int64)


def load_mesh(path, normalize: bool = True) -> TriMesh:
    v, f = load_obj(path)
    mesh = TriMesh(v, f)
    return mesh.normalized() if normalize else mesh


def write_obj(path, vertices, faces) -> None:
    with open(path, "w") as fh:
        for v in vertices:
            fh.write("v {:.9g} {:.9g} {:.9g}\n".format(*v))
        for f in faces:
            fh.write("f {} {} {}\n".format(*(int(i) + 1 for i in f)))


def uv_sphere(radius=0.5, n_lat=11, n_lon=25):
    """Closed latitude/longitude sphere with ``2 * n_lon * (n_lat - 1)`` triangles."""
    verts = [[0.0, 0.0, radius]]
    for i in range(1, n_lat):
        th = np.pi * i / n_lat
        for j in range(n_lon):
            ph = 2 * np.pi * j / n_lon
            verts.append([radius * np.sin(th) * np.cos(ph), radius * np.sin(th) * np.sin(ph),
                          radius * np.cos(th)])
    verts.append([0.0, 0.0, -radius])
    south = len(verts) - 1
    faces = []

    def ring(i, j):
        return 1 + (i - 1) * n_lon + (j % n_lon)

    for j in range(n_lon):
        faces.append([0, ring(1, j), ring(1, j + 1)])
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            faces += [[a, c, d], [a, d, b]]
    for j in range(n_lon):
        faces.append([south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)])
    return np.array(verts), np.array(faces)


def box_mesh(half=0.5):
    """Axis-aligned cube with 12 outward-facing triangles."""
    h = half
    v = np.array([[x, y, z] for x in (-h, h) for y in (-h, h) for z in (-h, h)], dtype=np.float64)
    # vertex index = 4*ix + 2*iy + iz
    f = [
        [0, 1, 3], [0, 3, 2],  # -x
        [4, 6, 7], [4, 7, 5],  # +x
        [0, 4, 5], [0, 5, 1],  # -y
        [2, 3, 7], [2, 7, 6],  # +y
        [0, 2, 6], [0, 6, 4],  # -z
        [1, 5, 7], [1, 7, 3],  # +z
    ]
    return v, np.array(f)
