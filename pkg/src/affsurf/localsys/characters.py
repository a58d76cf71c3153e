"""Rank-1 local systems on a SurfaceComplex.

The system is stored as one nonzero transport per edge, taken in the
low-to-high vertex direction; walking an edge the other way applies the
inverse.  Flatness means transports compose consistently inside every
triangle, t(i->k) = t(i->j) t(j->k), which is exactly what makes the twisted
coboundary square to zero.  A character in the group-theory sense (a value
per homology class) is recovered as the product of transports around a loop.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..errors import NonFlatCharacter
from ..jsonio import as_complex, check_fields, pair

_FLATNESS_TOL = 1e-9
_EDGE_KEY = re.compile(r"^e(\d+)-(\d+)$")


@dataclass(frozen=True)
class Character:
    """Edge transports of a flat complex line bundle over a fixed complex."""

    complex: object          # SurfaceComplex
    edge_values: tuple       # transport along each edge, low -> high vertex

    def __post_init__(self):
        edges = self.complex.edges
        assert len(self.edge_values) == len(edges)
        if any(v == 0 or not np.isfinite(v) for v in self.edge_values):
            raise NonFlatCharacter("edge transports must be nonzero and finite")
        defect = flatness_defect(self.complex, self.edge_values)
        if defect > _FLATNESS_TOL:
            raise NonFlatCharacter(
                f"transports fail to compose around a triangle "
                f"(defect {defect:.2e})")

    @classmethod
    def trivial(cls, complex_):
        return cls(complex_, (1.0 + 0j,) * len(complex_.edges))

    @classmethod
    def from_edge_values(cls, complex_, mapping):
        """mapping: {(u, v): transport} on low-to-high vertex pairs; exactly
        the edges of the complex, no more, no less."""
        edges = complex_.edges
        unknown = sorted(set(mapping) - set(edges))
        if unknown:
            raise ValueError(f"transports given for non-edges {unknown[:3]}")
        values = []
        for u, v in edges:
            if (u, v) not in mapping:
                raise ValueError(f"no transport given for edge ({u}, {v})")
            values.append(complex(mapping[(u, v)]))
        return cls(complex_, tuple(values))

    @classmethod
    def from_loops(cls, complex_, loops, values):
        """Flat transports realizing given loop products.

        Solves for edge logs: flatness is linear there, and each loop pins
        its log-product to a branch of log(value).  Pass an independent
        family (for b boundary circles, at most b-1 of them; the last
        product is forced).  Dependent families can be rejected as
        NonFlatCharacter even when multiplicatively consistent, because
        log branches may not align.
        """
        edges = complex_.edges
        index = complex_.edge_index()
        rows, rhs = [], []
        for a, b, c in complex_.triangles:
            i, j, k = sorted((a, b, c))
            row = np.zeros(len(edges), dtype=complex)
            row[index[(i, j)]] += 1
            row[index[(j, k)]] += 1
            row[index[(i, k)]] -= 1
            rows.append(row)
            rhs.append(0j)
        for loop, value in zip(loops, values):
            value = complex(value)
            if value == 0:
                raise NonFlatCharacter("loop value must be nonzero")
            row = np.zeros(len(edges), dtype=complex)
            for i, u in enumerate(loop):
                v = loop[(i + 1) % len(loop)]
                e = index.get((min(u, v), max(u, v)))
                assert e is not None, f"loop step ({u}, {v}) is not an edge"
                row[e] += 1 if u < v else -1
            rows.append(row)
            rhs.append(np.log(value))
        logs = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)[0]
        chi = cls(complex_, tuple(np.exp(logs)))
        for loop, value in zip(loops, values):
            got = chi.loop_value(loop)
            if abs(got - complex(value)) > 1e-8 * abs(value):
                raise NonFlatCharacter(
                    f"requested loop values are inconsistent: wanted {value}, "
                    f"achieved {got}")
        return chi

    def loop_value(self, loop):
        index = self.complex.edge_index()
        out = 1.0 + 0j
        for i, u in enumerate(loop):
            v = loop[(i + 1) % len(loop)]
            e = index.get((min(u, v), max(u, v)))
            assert e is not None, f"loop step ({u}, {v}) is not an edge"
            out = out * self.edge_values[e] if u < v else out / self.edge_values[e]
        return out

    def inverse(self):
        return Character(self.complex, tuple(1.0 / v for v in self.edge_values))

    def conjugate(self):
        return Character(self.complex, tuple(np.conj(v) for v in self.edge_values))

    def is_unitary(self, tol=1e-9):
        return all(abs(abs(v) - 1.0) <= tol for v in self.edge_values)

    def is_trivial(self, tol=1e-9):
        """Whether the induced character of H1 is identically 1, decided on
        the fundamental cycles of a spanning tree."""
        for cycle in _fundamental_cycles(self.complex):
            if abs(self.loop_value(cycle) - 1.0) > tol:
                return False
        return True


def refine_character(chi, refined):
    """The same local system on the barycentric refinement of chi's complex:
    each new vertex borrows the fiber of an original parent vertex, and new
    edge transports are the old transports between parents (1 when the
    parents coincide)."""
    from .complexes import refinement_vertex_parent

    old = chi.complex
    parent = refinement_vertex_parent(old)
    index = old.edge_index()
    values = []
    for p, q in refined.edges:
        rp, rq = parent[p], parent[q]
        if rp == rq:
            values.append(1.0 + 0j)
            continue
        t = chi.edge_values[index[(min(rp, rq), max(rp, rq))]]
        values.append(t if rp < rq else 1.0 / t)
    return Character(refined, tuple(values))


def flatness_defect(complex_, edge_values):
    index = complex_.edge_index()
    t = np.asarray(edge_values)
    worst = 0.0
    for a, b, c in complex_.triangles:
        i, j, k = sorted((a, b, c))
        lhs = t[index[(i, j)]] * t[index[(j, k)]]
        rhs = t[index[(i, k)]]
        worst = max(worst, abs(lhs / rhs - 1.0))
    return worst


def _fundamental_cycles(complex_):
    """One vertex loop per non-tree edge: tree path to u, the edge, tree
    path back from v."""
    adjacency = {v: [] for v in range(complex_.n_vertices)}
    for u, v in complex_.edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    parent = {0: None}
    order = [0]
    for w in order:
        for x in adjacency[w]:
            if x not in parent:
                parent[x] = w
                order.append(x)
    tree = {(min(u, v), max(u, v)) for u, v in parent.items() if v is not None}

    def path_to_root(v):
        out = [v]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        return out

    cycles = []
    for u, v in complex_.edges:
        if (u, v) in tree:
            continue
        up, down = path_to_root(u), path_to_root(v)
        # strip the common tail so the loop has no backtracking
        while len(up) > 1 and len(down) > 1 and up[-2] == down[-2]:
            up.pop()
            down.pop()
        cycles.append(tuple(reversed(up)) + tuple(down[:-1]))
    return cycles


# --- JSON format -----------------------------------------------------------

def character_from_json(complex_, obj):
    check_fields(obj, "character", required=("edge_values",))
    if not isinstance(obj["edge_values"], dict):
        raise ValueError("character.edge_values: expected an object")
    mapping = {}
    for key, raw in obj["edge_values"].items():
        m = _EDGE_KEY.match(key)
        if m:
            u, v = int(m.group(1)), int(m.group(2))
        elif re.fullmatch(r"e\d\d", key):
            u, v = int(key[1]), int(key[2])
        else:
            raise ValueError(f"character edge key {key!r}: expected 'e<u>-<v>'")
        if not u < v:
            raise ValueError(f"character edge key {key!r}: vertices must be "
                             "ordered low-high")
        mapping[(u, v)] = as_complex(raw, f"character.edge_values[{key!r}]")
    extra = set(mapping) - set(complex_.edges)
    if extra:
        raise ValueError(f"character has values for non-edges {sorted(extra)}")
    return Character.from_edge_values(complex_, mapping)


def character_to_json(chi):
    return {"edge_values": {f"e{u}-{v}": pair(t)
                            for (u, v), t in zip(chi.complex.edges,
                                                 chi.edge_values)}}
