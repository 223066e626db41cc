#!/usr/bin/env python3
"""Generate the shipped mesh files under data/meshes/:

  annulus_0..3.mesh        quasi-uniform curved triangle meshes of the unit
                           disc with a circular hole (r=0.4 at (0.25,0.25)),
                           boundary edges marked as arcs, h halving per level
  annulus_0_straight.mesh  same coarse mesh without the arc markers
  voronoi_64.mesh          Lloyd-relaxed Voronoi polygons of the unit square
  square_1.mesh            the unit square as a single polygon

Triangle meshes come from a distmesh-style force equilibrium; boundary
vertices are projected exactly onto their circles before writing.
"""
import sys

import numpy as np
from scipy.spatial import Delaunay, Voronoi

OUT = "data/meshes"

HOLE_C = np.array([0.25, 0.25])
HOLE_R = 0.4


def fd_annulus(p):
    d_out = np.linalg.norm(p, axis=1) - 1.0
    d_hole = np.linalg.norm(p - HOLE_C, axis=1) - HOLE_R
    return np.maximum(d_out, -d_hole)


def project_boundary(p):
    """Snap points near either circle exactly onto it."""
    q = p.copy()
    d_out = np.abs(np.linalg.norm(q, axis=1) - 1.0)
    d_hole = np.abs(np.linalg.norm(q - HOLE_C, axis=1) - HOLE_R)
    on_out = d_out <= d_hole
    r = np.linalg.norm(q, axis=1)
    q[on_out] = q[on_out] / r[on_out, None]
    v = q[~on_out] - HOLE_C
    q[~on_out] = HOLE_C + HOLE_R * v / np.linalg.norm(v, axis=1)[:, None]
    return q


def distmesh_annulus(h0, seed=5):
    rng = np.random.default_rng(seed)
    # hexagonal seed lattice over the bounding box
    x, y = np.meshgrid(np.arange(-1.05, 1.05, h0),
                       np.arange(-1.05, 1.05, h0 * np.sqrt(3) / 2))
    x[1::2] += h0 / 2
    p = np.c_[x.ravel(), y.ravel()]
    p = p[fd_annulus(p) < 0.4 * h0]
    p += 1e-3 * h0 * rng.standard_normal(p.shape)
    geps = 1e-3 * h0
    deps = np.sqrt(np.finfo(float).eps) * h0

    pold = p + 1e9
    for _ in range(400):
        if np.max(np.linalg.norm(p - pold, axis=1)) > 0.1 * h0:
            pold = p.copy()
            tri = Delaunay(p).simplices
            cent = p[tri].mean(axis=1)
            tri = tri[fd_annulus(cent) < -geps]
            bars = np.unique(np.sort(np.concatenate(
                [tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1), axis=0)
        vec = p[bars[:, 0]] - p[bars[:, 1]]
        L = np.linalg.norm(vec, axis=1)
        L0 = 1.2 * np.sqrt((L ** 2).sum() / len(L))
        F = np.maximum(L0 - L, 0.0)
        Fvec = (F / L)[:, None] * vec
        move = np.zeros_like(p)
        np.add.at(move, bars[:, 0], Fvec)
        np.add.at(move, bars[:, 1], -Fvec)
        p = p + 0.2 * move
        # pull escaped points back to the boundary
        d = fd_annulus(p)
        out = d > 0
        if out.any():
            dgx = (fd_annulus(p[out] + [deps, 0]) - d[out]) / deps
            dgy = (fd_annulus(p[out] + [0, deps]) - d[out]) / deps
            p[out] -= d[out][:, None] * np.c_[dgx, dgy]
        interior = d < -geps
        if np.max(np.linalg.norm((p - pold)[interior], axis=1)) < 1e-3 * h0:
            break

    # exact boundary snap and final triangulation
    d = fd_annulus(p)
    bnd = np.abs(d) < 0.2 * h0
    p[bnd] = project_boundary(p[bnd])
    tri = Delaunay(p).simplices
    cent = p[tri].mean(axis=1)
    tri = tri[fd_annulus(cent) < -1e-10]

    # drop unused points, orient CCW
    used = np.unique(tri)
    remap = -np.ones(len(p), dtype=int)
    remap[used] = np.arange(len(used))
    p = p[used]
    tri = remap[tri]
    for t in tri:
        a, b, c = p[t]
        if np.cross(b - a, c - a) < 0:
            t[1], t[2] = t[2], t[1]
    return p, tri


def classify_arcs(p, tri):
    """Boundary (single-owner) edges become arcs of the circle that carries
    both endpoints; returns the arc list and sanity statistics."""
    from collections import defaultdict
    owners = defaultdict(list)
    for ci, t in enumerate(tri):
        for i in range(3):
            a, b = int(t[i]), int(t[(i + 1) % 3])
            owners[(min(a, b), max(a, b))].append(ci)
    arcs = []
    tol = 1e-11
    for (a, b), own in owners.items():
        if len(own) > 2:
            raise SystemExit("edge with more than two owners")
        if len(own) == 2:
            continue
        on_out = abs(np.linalg.norm(p[a]) - 1) < tol and abs(np.linalg.norm(p[b]) - 1) < tol
        on_hole = (abs(np.linalg.norm(p[a] - HOLE_C) - HOLE_R) < tol
                   and abs(np.linalg.norm(p[b] - HOLE_C) - HOLE_R) < tol)
        if on_out == on_hole:
            raise SystemExit(f"boundary edge ({a},{b}) not on a unique circle")
        arcs.append((a, b, 0 if on_out else 1))
    # no cell may own two arcs of the same circle (cap triangles)
    per_cell = defaultdict(set)
    for (a, b, g) in arcs:
        ci = owners[(min(a, b), max(a, b))][0]
        if g in per_cell[ci]:
            raise SystemExit(f"cell {ci} carries two arcs of circle {g}")
        per_cell[ci].add(g)
    return arcs


def triangle_quality(p, tri):
    q = []
    for t in tri:
        a, b, c = p[t]
        el = [np.linalg.norm(b - a), np.linalg.norm(c - b), np.linalg.norm(a - c)]
        s = sum(el) / 2
        area = abs(np.cross(b - a, c - a)) / 2
        q.append(4 * np.sqrt(3) * area / sum(e * e for e in el))
    return np.array(q)


def write_mesh(path, pts, cells, geoms=(), arcs=()):
    with open(path, "w") as f:
        f.write(f"vertices {len(pts)}\n")
        for x, y in pts:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        f.write(f"geometries {len(geoms)}\n")
        for cx, cy, r in geoms:
            f.write(f"circle {float(cx)!r} {float(cy)!r} {float(r)!r}\n")
        f.write(f"cells {len(cells)}\n")
        for c in cells:
            f.write(str(len(c)) + " " + " ".join(str(int(v)) for v in c) + "\n")
        f.write(f"arcs {len(arcs)}\n")
        for a, b, g in arcs:
            f.write(f"{a} {b} {g}\n")


def gen_annulus():
    geoms = [(0.0, 0.0, 1.0), (HOLE_C[0], HOLE_C[1], HOLE_R)]
    for lvl, h0 in enumerate([0.2, 0.1, 0.05, 0.025]):
        for seed in range(5, 60):
            try:
                p, tri = distmesh_annulus(h0, seed)
                arcs = classify_arcs(p, tri)
                q = triangle_quality(p, tri)
                if q.min() < 0.35:
                    raise SystemExit(f"min quality {q.min():.2f}")
                break
            except SystemExit as e:
                print(f"  level {lvl} seed {seed} rejected: {e}")
        else:
            raise RuntimeError(f"no valid mesh at level {lvl}")
        hmax = 0.0
        for t in tri:
            a, b, c = p[t]
            hmax = max(hmax, np.linalg.norm(b - a), np.linalg.norm(c - b),
                       np.linalg.norm(a - c))
        print(f"annulus_{lvl}: {len(tri)} cells, {len(p)} vertices, "
              f"h={hmax:.4f}, min quality {q.min():.2f}, arcs {len(arcs)}")
        write_mesh(f"{OUT}/annulus_{lvl}.mesh", p, tri, geoms, arcs)
        if lvl == 0:
            write_mesh(f"{OUT}/annulus_0_straight.mesh", p, tri, geoms, [])


def gen_voronoi(n=64, iters=80, seed=3):
    from shapely.geometry import Polygon, box
    from shapely.geometry.polygon import orient
    square = box(0, 0, 1, 1)
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))

    def clipped_cells(seeds):
        # mirror the seeds across the four sides so every Voronoi cell of an
        # interior seed is bounded, then clip to the square
        mirrored = [seeds]
        for dim, val in [(0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)]:
            m = seeds.copy()
            m[:, dim] = 2 * val - m[:, dim]
            mirrored.append(m)
        vor = Voronoi(np.concatenate(mirrored))
        cells = []
        for i in range(len(seeds)):
            reg = vor.regions[vor.point_region[i]]
            poly = Polygon(vor.vertices[reg]).intersection(square)
            cells.append(orient(poly, 1.0))
        return cells

    for _ in range(iters):
        cells = clipped_cells(pts)
        pts = np.array([np.asarray(c.centroid.coords[0]) for c in cells])
    cells = clipped_cells(pts)

    vid = {}
    verts = []
    loops = []
    for c in cells:
        loop = []
        for x, y in list(c.exterior.coords)[:-1]:
            key = (round(x, 12), round(y, 12))
            if key not in vid:
                vid[key] = len(verts)
                verts.append(key)
            loop.append(vid[key])
        loops.append(loop)
    print(f"voronoi_{n}: {len(loops)} cells, {len(verts)} vertices")
    write_mesh(f"{OUT}/voronoi_{n}.mesh", verts, loops)


def gen_square():
    write_mesh(f"{OUT}/square_1.mesh", [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
               [[0, 1, 2, 3]])


if __name__ == "__main__":
    np.random.seed(0)
    gen_square()
    gen_voronoi()
    gen_annulus()
    print("done", file=sys.stderr)
