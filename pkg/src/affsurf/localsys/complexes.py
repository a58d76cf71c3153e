"""Triangulated oriented surfaces with boundary, as plain index lists.

A SurfaceComplex is the combinatorial model of a punctured surface: each
puncture is a boundary circle, so compactly supported cohomology becomes
relative cohomology of the pair (K, boundary).  Everything downstream needs
coherent orientation, so the validator insists that every interior edge is
traversed once in each direction by its two triangles.

Standard complexes ship for genus <= 2 with at most 4 boundary circles:
    genus 0, b = 0      octahedron
    genus 0, b >= 1     triangulated grid square, holes punched by removing
                        an interior vertex star (the link becomes a hexagon
                        boundary circle)
    genus 1             diagonally split N x N grid torus with marked loops
                        a (row 0) and b (column 0); holes as above, kept off
                        the marked rows
    genus 2, b = 0      two grid tori glued along a removed triangle
    genus 2, b >= 1     barycentric subdivision of the closed surface with
                        face-star holes
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidComplex
from ..jsonio import check_fields


@dataclass(frozen=True)
class SurfaceComplex:
    n_vertices: int
    triangles: tuple          # oriented (i, j, k) vertex triples
    boundary_cycles: tuple    # tuples of edge indices (into self.edges)
    marked_loops: tuple = ()  # (name, vertex cycle) pairs; not serialized

    @property
    def edges(self):
        return _edge_list(self.triangles)

    def edge_index(self):
        return {e: k for k, e in enumerate(self.edges)}

    def counts(self):
        return self.n_vertices, len(self.edges), len(self.triangles)

    def euler_characteristic(self):
        v, e, t = self.counts()
        return v - e + t

    def genus(self):
        b = len(self.boundary_cycles)
        chi = self.euler_characteristic()
        g2 = 2 - chi - b
        assert g2 % 2 == 0 and g2 >= 0
        return g2 // 2


def _edge_list(triangles):
    seen = set()
    for a, b, c in triangles:
        seen.add((min(a, b), max(a, b)))
        seen.add((min(b, c), max(b, c)))
        seen.add((min(a, c), max(a, c)))
    return tuple(sorted(seen))


def _directed_boundary(triangles, edge_index):
    """Directed boundary edges, each in the direction its unique triangle
    traverses it.  Returns {tail: (head, edge index)}."""
    count = {}
    for tri in triangles:
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(u, v), max(u, v))
            count.setdefault(key, []).append((u, v))
    out = {}
    for key, occurrences in count.items():
        if len(occurrences) == 1:
            u, v = occurrences[0]
            if u in out:
                raise InvalidComplex(
                    f"vertex {u} has two outgoing boundary edges; the "
                    "boundary is not a disjoint union of circles")
            out[u] = (v, edge_index[key])
    return out


def derive_boundary_cycles(triangles, edge_index):
    """Boundary circles as tuples of edge indices, following the direction
    induced by the triangle orientations."""
    outgoing = _directed_boundary(triangles, edge_index)
    remaining = dict(outgoing)
    cycles = []
    while remaining:
        start = min(remaining)
        cycle, vertex = [], start
        while True:
            head, e = remaining.pop(vertex)
            cycle.append(e)
            vertex = head
            if vertex == start:
                break
            if vertex not in remaining:
                raise InvalidComplex("boundary walk left the boundary; "
                                     "the complex is not a surface")
        cycles.append(tuple(cycle))
    return tuple(cycles)


def boundary_vertex_loops(complex_):
    """Each boundary circle as an oriented vertex cycle (closing edge
    implicit), in the same order as complex_.boundary_cycles."""
    edge_index = complex_.edge_index()
    outgoing = _directed_boundary(complex_.triangles, edge_index)
    by_edge = {e: (tail, head) for tail, (head, e) in outgoing.items()}
    loops = []
    for cycle in complex_.boundary_cycles:
        verts = [by_edge[cycle[0]][0]]
        for e in cycle:
            tail, head = by_edge[e]
            assert tail == verts[-1]
            verts.append(head)
        assert verts[-1] == verts[0]
        loops.append(tuple(verts[:-1]))
    return tuple(loops)


def validate_complex(complex_):
    """Raise InvalidComplex unless the data describes a connected compact
    oriented surface whose declared boundary matches the derived one."""
    n = complex_.n_vertices
    if n <= 0:
        raise InvalidComplex("complex needs at least one vertex")
    seen_tris = set()
    for tri in complex_.triangles:
        if len(tri) != 3 or len(set(tri)) != 3:
            raise InvalidComplex(f"triangle {tri} is degenerate")
        if not all(isinstance(v, int) and 0 <= v < n for v in tri):
            raise InvalidComplex(f"triangle {tri} has a vertex out of range")
        key = frozenset(tri)
        if key in seen_tris:
            raise InvalidComplex(f"triangle {set(tri)} occurs twice")
        seen_tris.add(key)

    edge_index = complex_.edge_index()
    directed = {}
    for tri in complex_.triangles:
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            directed.setdefault((min(u, v), max(u, v)), []).append((u, v))
    for key, occ in directed.items():
        if len(occ) > 2:
            raise InvalidComplex(f"edge {key} lies in {len(occ)} triangles")
        if len(occ) == 2 and occ[0] == occ[1]:
            raise InvalidComplex(
                f"edge {key} is traversed twice in the same direction; "
                "orientation is not coherent")

    derived = derive_boundary_cycles(complex_.triangles, edge_index)
    declared = {frozenset(c) for c in complex_.boundary_cycles}
    if {frozenset(c) for c in derived} != declared:
        raise InvalidComplex("declared boundary cycles do not match the "
                             "edges lying in a single triangle")
    if len(declared) != len(complex_.boundary_cycles):
        raise InvalidComplex("duplicate boundary cycle declared")

    boundary_vertices = set()
    for key, occ in directed.items():
        if len(occ) == 1:
            boundary_vertices.update(key)

    # vertex links: a single circle at interior vertices, a single arc at
    # boundary vertices; anything else is a pinch point
    link = {v: [] for v in range(n)}
    for tri in complex_.triangles:
        for v, a, b in ((tri[0], tri[1], tri[2]),
                        (tri[1], tri[2], tri[0]),
                        (tri[2], tri[0], tri[1])):
            link[v].append((a, b))
    for v in range(n):
        arcs = link[v]
        if not arcs:
            raise InvalidComplex(f"vertex {v} lies in no triangle")
        degree = {}
        for a, b in arcs:
            degree[a] = degree.get(a, 0) + 1
            degree[b] = degree.get(b, 0) + 1
        if v in boundary_vertices:
            odd = [w for w, d in degree.items() if d == 1]
            if len(odd) != 2 or any(d > 2 for d in degree.values()):
                raise InvalidComplex(f"boundary vertex {v} has a pinched link")
        else:
            if any(d != 2 for d in degree.values()):
                raise InvalidComplex(f"interior vertex {v} has a pinched link")
        # connectivity of the link
        adjacency = {}
        for a, b in arcs:
            adjacency.setdefault(a, set()).add(b)
            adjacency.setdefault(b, set()).add(a)
        stack, reached = [arcs[0][0]], {arcs[0][0]}
        while stack:
            for w in adjacency[stack.pop()]:
                if w not in reached:
                    reached.add(w)
                    stack.append(w)
        if reached != set(adjacency):
            raise InvalidComplex(f"the link of vertex {v} is disconnected")

    # connectivity of the surface
    adjacency = {v: set() for v in range(n)}
    for u, v in edge_index:
        adjacency[u].add(v)
        adjacency[v].add(u)
    stack, reached = [0], {0}
    while stack:
        for w in adjacency[stack.pop()]:
            if w not in reached:
                reached.add(w)
                stack.append(w)
    if len(reached) != n:
        raise InvalidComplex("complex is disconnected")

    chi = complex_.euler_characteristic()
    g2 = 2 - chi - len(complex_.boundary_cycles)
    if g2 < 0 or g2 % 2:
        raise InvalidComplex(
            f"Euler characteristic {chi} with {len(complex_.boundary_cycles)} "
            "boundary circles is not a surface genus")
    return complex_


def _with_derived_boundary(n, triangles, marked=()):
    triangles = tuple(tuple(t) for t in triangles)
    edge_index = {e: k for k, e in enumerate(_edge_list(triangles))}
    cycles = derive_boundary_cycles(triangles, edge_index)
    return validate_complex(SurfaceComplex(n, triangles, cycles, tuple(marked)))


def _octahedron():
    tris = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1),
            (5, 2, 1), (5, 3, 2), (5, 4, 3), (5, 1, 4)]
    return _with_derived_boundary(6, tris)


def _grid_triangles(n, vid, wrap):
    tris = []
    for r in range(n):
        for c in range(n):
            r1 = (r + 1) % n if wrap else r + 1
            c1 = (c + 1) % n if wrap else c + 1
            tris.append((vid(r, c), vid(r1, c), vid(r1, c1)))
            tris.append((vid(r, c), vid(r1, c1), vid(r, c1)))
    return tris


def _punch_holes(n_vertices, triangles, hole_vertices, marked):
    removed = set(hole_vertices)
    tris = [t for t in triangles if not removed & set(t)]
    used = sorted(set(v for t in tris for v in t))
    if len(used) != n_vertices - len(removed):
        raise InvalidComplex("a punched hole isolated a vertex")
    renum = {v: k for k, v in enumerate(used)}
    tris = [tuple(renum[v] for v in t) for t in tris]
    marked = [(name, tuple(renum[v] for v in loop)) for name, loop in marked]
    return _with_derived_boundary(len(used), tris, marked)


def _disk_with_holes(holes):
    n = 8
    vid = lambda r, c: r * (n + 1) + c
    tris = _grid_triangles(n, vid, wrap=False)
    centers = [(2, 2), (2, 5), (5, 2)][:holes]
    return _punch_holes((n + 1) ** 2, tris, [vid(r, c) for r, c in centers], [])


def _torus_with_holes(holes):
    n = 3 if holes == 0 else 7
    vid = lambda r, c: (r % n) * n + (c % n)
    tris = _grid_triangles(n, vid, wrap=True)
    marked = [("a", tuple(vid(0, c) for c in range(n))),
              ("b", tuple(vid(r, 0) for r in range(n)))]
    centers = [(2, 2), (2, 5), (5, 2), (5, 5)][:holes]
    return _punch_holes(n * n, tris, [vid(r, c) for r, c in centers], marked)


def _genus2_closed():
    n = 3
    vid = lambda r, c: (r % n) * n + (c % n)
    tris = _grid_triangles(n, vid, wrap=True)
    cut = (vid(1, 1), vid(2, 2), vid(1, 2))  # the upper triangle of cell (1,1)
    tris_a = [t for t in tris if set(t) != set(cut)]
    # the second torus carries the opposite orientation so the seam glues
    # coherently; its seam vertices are identified with the first torus
    seam = {cut[0]: cut[0], cut[1]: cut[1], cut[2]: cut[2]}
    fresh = {}
    def relabel(v):
        if v in seam:
            return seam[v]
        if v not in fresh:
            fresh[v] = 9 + len(fresh)
        return fresh[v]
    tris_b = [tuple(relabel(v) for v in reversed(t))
              for t in tris if set(t) != set(cut)]
    marked = [("a1", tuple(vid(0, c) for c in range(n))),
              ("b1", tuple(vid(r, 0) for r in range(n))),
              ("a2", tuple(relabel(vid(0, c)) for c in range(n))),
              ("b2", tuple(relabel(vid(r, 0)) for r in range(n)))]
    return _with_derived_boundary(9 + len(fresh), tris_a + tris_b, marked)


def _genus2_with_holes(holes):
    base = _genus2_closed()
    refined, maps = barycentric_refine(base)
    # face-star holes only delete corner-to-center edges, so the marked
    # loops (which run through corners and edge midpoints) survive; the
    # chosen faces just have to be pairwise vertex-disjoint to keep their
    # hexagon links disjoint
    chosen, used = [], set()
    for t, tri in enumerate(base.triangles):
        if len(chosen) == holes:
            break
        if not used & set(tri):
            chosen.append(maps.triangle_center[t])
            used.update(tri)
    assert len(chosen) == holes
    return _punch_holes(refined.n_vertices, refined.triangles, chosen,
                        refined.marked_loops)


def standard_complex(genus, boundary):
    """A shipped triangulation of the (genus, boundary circles) surface;
    marked_loops carries an H1 basis beyond the boundary circles."""
    assert genus >= 0 and boundary >= 0
    if genus > 2 or boundary > 4:
        raise ValueError(
            f"no standard triangulation for genus {genus} with {boundary} "
            "boundary circles; supply a complex as JSON instead")
    if genus == 0:
        return _octahedron() if boundary == 0 else _disk_with_holes(boundary - 1)
    if genus == 1:
        return _torus_with_holes(boundary)
    if boundary == 0:
        return _genus2_closed()
    return _genus2_with_holes(boundary)


# --- barycentric refinement ----------------------------------------------

@dataclass(frozen=True)
class RefinementMaps:
    edge_midpoint: tuple    # edge index -> new vertex
    triangle_center: tuple  # triangle index -> new vertex

    def refine_loop(self, complex_, loop):
        edge_index = complex_.edge_index()
        out = []
        for i, u in enumerate(loop):
            v = loop[(i + 1) % len(loop)]
            out.append(u)
            out.append(self.edge_midpoint[edge_index[(min(u, v), max(u, v))]])
        return tuple(out)


def barycentric_refine(complex_):
    """One barycentric subdivision; old vertices keep their indices.
    Returns (refined complex, RefinementMaps)."""
    v0, e0, t0 = complex_.counts()
    edges = complex_.edges
    edge_index = complex_.edge_index()
    mid = tuple(v0 + k for k in range(e0))
    center = tuple(v0 + e0 + k for k in range(t0))
    tris = []
    for t, (a, b, c) in enumerate(complex_.triangles):
        z = center[t]
        m_ab = mid[edge_index[(min(a, b), max(a, b))]]
        m_bc = mid[edge_index[(min(b, c), max(b, c))]]
        m_ca = mid[edge_index[(min(c, a), max(c, a))]]
        tris += [(a, m_ab, z), (m_ab, b, z), (b, m_bc, z),
                 (m_bc, c, z), (c, m_ca, z), (m_ca, a, z)]
    maps = RefinementMaps(mid, center)
    marked = [(name, maps.refine_loop(complex_, loop))
              for name, loop in complex_.marked_loops]
    refined = _with_derived_boundary(v0 + e0 + t0, tris, marked)
    return refined, maps


def refinement_vertex_parent(complex_):
    """For every vertex of the refined complex, an original vertex carrying
    its fiber: old vertices map to themselves, edge midpoints to their lower
    endpoint, face centers to their smallest corner."""
    parent = list(range(complex_.n_vertices))
    for e, (u, _) in enumerate(complex_.edges):
        parent.append(u)
    for a, b, c in complex_.triangles:
        parent.append(min(a, b, c))
    return parent


# --- JSON format -----------------------------------------------------------

def complex_from_json(obj):
    check_fields(obj, "complex", required=("vertices", "triangles",
                                           "boundary_cycles"))
    n = obj["vertices"]
    if not isinstance(n, int) or isinstance(n, bool) or n <= 0:
        raise ValueError("complex.vertices: expected a positive integer")
    for name in ("triangles", "boundary_cycles"):
        if not isinstance(obj[name], list):
            raise ValueError(f"complex.{name}: expected a list")
    tris = []
    for k, t in enumerate(obj["triangles"]):
        if (not isinstance(t, list) or len(t) != 3
                or not all(isinstance(v, int) and not isinstance(v, bool)
                           for v in t)):
            raise ValueError(f"complex.triangles[{k}]: expected 3 vertex indices")
        tris.append(tuple(t))
    cycles = []
    for k, c in enumerate(obj["boundary_cycles"]):
        if (not isinstance(c, list)
                or not all(isinstance(e, int) and not isinstance(e, bool)
                           for e in c)):
            raise ValueError(f"complex.boundary_cycles[{k}]: expected edge indices")
        cycles.append(tuple(c))
    out = SurfaceComplex(n, tuple(tris), tuple(cycles))
    n_edges = len(out.edges)
    for c in cycles:
        for e in c:
            if not 0 <= e < n_edges:
                raise ValueError(f"boundary edge index {e} out of range")
    return validate_complex(out)


def complex_to_json(complex_):
    return {
        "vertices": complex_.n_vertices,
        "triangles": [list(t) for t in complex_.triangles],
        "boundary_cycles": [list(c) for c in complex_.boundary_cycles],
    }
