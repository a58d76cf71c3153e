"""Local systems on triangulated surfaces.

Covers complex validation, flat characters, twisted and compactly
supported cohomology against the homotopy-type dimension count, duality,
barycentric refinement, and the Hermitian cup-product form.
"""

import numpy as np
import pytest

from affsurf.errors import (
    DegeneratePairing,
    InvalidComplex,
    NonFlatCharacter,
    NonUnitaryCharacter,
)
from affsurf.localsys import (
    Character,
    SurfaceComplex,
    barycentric_refine,
    boundary_vertex_loops,
    character_from_json,
    character_to_json,
    coboundaries,
    compact_support_cohomology,
    complex_from_json,
    complex_to_json,
    cup_evaluate,
    derive_boundary_cycles,
    refine_character,
    standard_complex,
    twisted_cohomology,
    validate_complex,
    veech_pairing,
)
from oracles import character_cohomology_dims

ALL_SHAPES = [(g, b) for g in range(3) for b in range(5)]


def build(n, triangles, marked=()):
    """Assemble and validate a complex, deriving its boundary cycles."""
    triangles = tuple(tuple(t) for t in triangles)
    edge_index = {e: k for k, e in
                  enumerate(SurfaceComplex(n, triangles, ()).edges)}
    cycles = derive_boundary_cycles(triangles, edge_index)
    return validate_complex(SurfaceComplex(n, triangles, cycles,
                                           tuple(marked)))


def free_loops(complex_):
    # 2g marked handle loops plus all boundary circles except the last,
    # whose character value is determined by the others
    loops = [loop for _, loop in complex_.marked_loops]
    if complex_.boundary_cycles:
        loops.extend(boundary_vertex_loops(complex_)[:-1])
    return loops


def unitary_character(complex_, seed):
    loops = free_loops(complex_)
    if not loops:
        return None
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.4, 2.6, len(loops))
    return Character.from_loops(complex_, loops, np.exp(1j * phases))


def scaled_character(complex_, seed):
    loops = free_loops(complex_)
    if not loops:
        return None
    rng = np.random.default_rng(seed)
    values = (rng.uniform(1.3, 2.0, len(loops))
              * np.exp(1j * rng.uniform(0.4, 2.6, len(loops))))
    return Character.from_loops(complex_, loops, values)


def relative_cochain(complex_, seed):
    """A random 0-cochain vanishing on every boundary vertex."""
    rng = np.random.default_rng(seed)
    n_v = complex_.counts()[0]
    f = rng.standard_normal(n_v) + 1j * rng.standard_normal(n_v)
    for loop in boundary_vertex_loops(complex_):
        for v in loop:
            f[v] = 0.0
    return f


class TestSurfaceComplexes:

    @pytest.mark.parametrize("genus,boundary", ALL_SHAPES)
    def test_standard_shapes_validate(self, genus, boundary):
        k = standard_complex(genus, boundary)
        assert k.euler_characteristic() == 2 - 2 * genus - boundary
        assert k.genus() == genus
        assert len(k.boundary_cycles) == boundary
        loops = boundary_vertex_loops(k)
        assert len(loops) == boundary
        seen = set()
        edge_set = set(k.edges)
        for loop in loops:
            assert not seen & set(loop), "boundary circles share a vertex"
            seen.update(loop)
            for i, u in enumerate(loop):
                v = loop[(i + 1) % len(loop)]
                assert (min(u, v), max(u, v)) in edge_set

    def test_octahedron_counts(self):
        assert standard_complex(0, 0).counts() == (6, 12, 8)

    def test_genus_two_closed_counts(self):
        assert standard_complex(2, 0).counts() == (15, 51, 34)

    @pytest.mark.parametrize("genus,names", [(1, ("a", "b")),
                                             (2, ("a1", "b1", "a2", "b2"))])
    def test_marked_loops_are_edge_paths(self, genus, names):
        for boundary in range(3):
            k = standard_complex(genus, boundary)
            marked = dict(k.marked_loops)
            assert tuple(marked) == names
            edge_set = set(k.edges)
            for loop in marked.values():
                assert len(loop) >= 3
                for i, u in enumerate(loop):
                    v = loop[(i + 1) % len(loop)]
                    assert (min(u, v), max(u, v)) in edge_set

    def test_single_triangle_is_a_disk(self):
        k = build(3, [(0, 1, 2)])
        assert k.genus() == 0 and len(k.boundary_cycles) == 1
        assert twisted_cohomology(k, Character.trivial(k)).dims == (1, 0, 0)

    def test_degenerate_triangle_rejected(self):
        with pytest.raises(InvalidComplex):
            build(3, [(0, 1, 1)])

    def test_repeated_triangle_rejected(self):
        with pytest.raises(InvalidComplex):
            build(3, [(0, 1, 2), (1, 2, 0)])

    def test_incoherent_orientation_rejected(self):
        # both triangles traverse the shared edge 0 -> 1
        with pytest.raises(InvalidComplex):
            build(4, [(0, 1, 2), (0, 1, 3)])

    def test_edge_in_three_triangles_rejected(self):
        with pytest.raises(InvalidComplex):
            build(5, [(0, 1, 2), (1, 0, 3), (0, 1, 4)])

    def test_pinched_vertex_rejected(self):
        with pytest.raises(InvalidComplex):
            build(5, [(0, 1, 2), (0, 3, 4)])

    def test_disconnected_complex_rejected(self):
        with pytest.raises(InvalidComplex):
            build(6, [(0, 1, 2), (3, 4, 5)])

    def test_vertex_out_of_range_rejected(self):
        with pytest.raises(InvalidComplex):
            validate_complex(SurfaceComplex(3, ((0, 1, 5),), ()))

    def test_misdeclared_boundary_rejected(self):
        with pytest.raises(InvalidComplex):
            validate_complex(SurfaceComplex(3, ((0, 1, 2),), ()))

    def test_unsupported_shape_rejected(self):
        with pytest.raises(ValueError):
            standard_complex(3, 0)
        with pytest.raises(ValueError):
            standard_complex(0, 5)


class TestComplexJson:

    def test_round_trip(self):
        k = standard_complex(1, 2)
        k2 = complex_from_json(complex_to_json(k))
        assert k2.counts() == k.counts()
        assert k2.triangles == k.triangles
        assert k2.boundary_cycles == k.boundary_cycles
        assert k2.marked_loops == ()   # names are not serialized

    def test_missing_field_rejected(self):
        with pytest.raises(ValueError):
            complex_from_json({"vertices": 3, "triangles": [[0, 1, 2]]})

    def test_bad_vertex_count_rejected(self):
        with pytest.raises(ValueError):
            complex_from_json({"vertices": 0, "triangles": [],
                               "boundary_cycles": []})

    def test_short_triangle_rejected(self):
        with pytest.raises(ValueError):
            complex_from_json({"vertices": 3, "triangles": [[0, 1]],
                               "boundary_cycles": []})

    def test_boundary_edge_out_of_range_rejected(self):
        obj = complex_to_json(build(3, [(0, 1, 2)]))
        obj["boundary_cycles"] = [[0, 1, 99]]
        with pytest.raises(ValueError):
            complex_from_json(obj)

    def test_tampered_boundary_cycles_rejected(self):
        obj = complex_to_json(standard_complex(0, 0))
        obj["boundary_cycles"] = [[0, 1, 2]]
        with pytest.raises(InvalidComplex):
            complex_from_json(obj)


class TestCharacters:

    def test_from_loops_achieves_requested_values(self):
        k = standard_complex(1, 2)
        marked = dict(k.marked_loops)
        circles = boundary_vertex_loops(k)
        loops = [marked["a"], marked["b"], circles[0]]
        values = [np.exp(0.4j), np.exp(-0.9j), np.exp(1.3j)]
        chi = Character.from_loops(k, loops, values)
        for loop, value in zip(loops, values):
            assert chi.loop_value(loop) == pytest.approx(value, abs=1e-10)
        # the last boundary value is forced: the circles together bound
        assert chi.loop_value(circles[1]) == pytest.approx(
            np.exp(-1.3j), abs=1e-10)

    def test_forced_boundary_value_on_sphere(self):
        k = standard_complex(0, 3)
        circles = boundary_vertex_loops(k)
        chi = Character.from_loops(k, circles[:2], [-1.0, -1.0])
        assert chi.loop_value(circles[2]) == pytest.approx(1.0, abs=1e-10)

    def test_dependent_loop_family_rejected(self):
        k = standard_complex(0, 3)
        circles = boundary_vertex_loops(k)
        with pytest.raises(NonFlatCharacter):
            Character.from_loops(k, list(circles), [-1.0, -1.0, 1.0])

    def test_contradictory_repeated_loop_rejected(self):
        k = standard_complex(1, 1)
        a = dict(k.marked_loops)["a"]
        with pytest.raises(NonFlatCharacter):
            Character.from_loops(k, [a, a], [2.0, 3.0])

    def test_flatness_enforced_on_construction(self):
        k = build(3, [(0, 1, 2)])
        with pytest.raises(NonFlatCharacter):
            Character.from_edge_values(
                k, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 2.0})

    def test_edge_coverage_enforced(self):
        k = build(3, [(0, 1, 2)])
        with pytest.raises(ValueError):
            Character.from_edge_values(k, {(0, 1): 1.0, (1, 2): 1.0})
        with pytest.raises(ValueError):
            Character.from_edge_values(
                k, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0, (0, 3): 1.0})

    def test_inverse_conjugate_and_reversal(self):
        k = standard_complex(1, 1)
        chi = unitary_character(k, 5)
        a = dict(k.marked_loops)["a"]
        va = chi.loop_value(a)
        assert chi.inverse().loop_value(a) == pytest.approx(1 / va)
        assert chi.loop_value(tuple(reversed(a))) == pytest.approx(1 / va)
        # unitary: conjugate and inverse transports coincide
        assert np.allclose(np.asarray(chi.conjugate().edge_values),
                           np.asarray(chi.inverse().edge_values))
        assert chi.is_unitary()
        assert not scaled_character(k, 6).is_unitary()

    def test_gauge_coboundary_character_is_trivial(self):
        # edge values s(v)/s(u) differ from 1 yet every loop product is 1
        k = standard_complex(1, 1)
        s = np.exp(0.1j * np.arange(k.counts()[0]))
        chi = Character.from_edge_values(
            k, {(u, v): s[v] / s[u] for (u, v) in k.edges})
        assert chi.is_trivial()
        assert not unitary_character(k, 7).is_trivial()
        assert Character.trivial(k).is_trivial()

    def test_character_json_round_trip(self):
        k = standard_complex(0, 3)
        chi = unitary_character(k, 9)
        chi2 = character_from_json(k, character_to_json(chi))
        assert np.allclose(np.asarray(chi2.edge_values),
                           np.asarray(chi.edge_values))

    def test_character_json_rejects_malformed_input(self):
        k = build(3, [(0, 1, 2)])
        chi = Character.trivial(k)
        obj = character_to_json(chi)
        del obj["edge_values"]["e0-1"]
        with pytest.raises(ValueError):
            character_from_json(k, obj)
        obj = character_to_json(chi)
        obj["edge_values"]["e0-3"] = [1.0, 0.0]
        with pytest.raises(ValueError):
            character_from_json(k, obj)
        obj = character_to_json(chi)
        obj["edge_values"]["e0-2"] = [2.0, 0.0]
        with pytest.raises(NonFlatCharacter):
            character_from_json(k, obj)
        with pytest.raises(ValueError):
            character_from_json(k, {"edge_values": {"edge(0,1)": [1.0, 0.0]}})

    def test_character_json_accepts_compact_keys(self):
        k = build(3, [(0, 1, 2)])
        obj = {"edge_values": {"e01": [1.0, 0.0], "e12": [1.0, 0.0],
                               "e02": [1.0, 0.0]}}
        assert character_from_json(k, obj).is_trivial()


class TestTwistedCohomology:

    @pytest.mark.parametrize("genus,boundary", ALL_SHAPES)
    def test_dims_match_homotopy_count(self, genus, boundary):
        k = standard_complex(genus, boundary)
        cases = [(Character.trivial(k), True),
                 (unitary_character(k, 11 + genus + 10 * boundary), False),
                 (scaled_character(k, 313 + genus + 10 * boundary), False)]
        for chi, trivial in cases:
            if chi is None:
                continue
            want = character_cohomology_dims(genus, boundary, trivial)
            assert twisted_cohomology(k, chi).dims == want
            assert compact_support_cohomology(k, chi).dims == want[::-1]

    @pytest.mark.parametrize("genus,boundary", ALL_SHAPES)
    def test_euler_characteristic_identity(self, genus, boundary):
        k = standard_complex(genus, boundary)
        chi = unitary_character(k, 23) or Character.trivial(k)
        for rep in (twisted_cohomology(k, chi),
                    compact_support_cohomology(k, chi)):
            h0, h1, h2 = rep.dims
            assert h0 - h1 + h2 == k.euler_characteristic()

    def test_punctured_torus_doubling_character(self):
        k = standard_complex(1, 1)
        marked = dict(k.marked_loops)
        chi = Character.from_loops(k, [marked["a"], marked["b"]], [2.0, 1.0])
        assert twisted_cohomology(k, chi).dims == (0, 1, 0)

    def test_three_punctured_sphere_half_turns(self):
        k = standard_complex(0, 3)
        circles = boundary_vertex_loops(k)
        chi = Character.from_loops(k, circles[:2], [-1.0, -1.0])
        assert twisted_cohomology(k, chi).dims == (0, 1, 0)

    def test_four_punctured_sphere_quarter_turns(self):
        k = standard_complex(0, 4)
        circles = boundary_vertex_loops(k)
        chi = Character.from_loops(k, circles[:3], [1j, 1j, -1j])
        assert chi.loop_value(circles[3]) == pytest.approx(-1j, abs=1e-10)
        assert compact_support_cohomology(k, chi).dims[1] == 2

    def test_closed_trivial_dims(self):
        torus = standard_complex(1, 0)
        assert twisted_cohomology(torus, Character.trivial(torus)).dims \
            == (1, 2, 1)
        genus2 = standard_complex(2, 0)
        rep = twisted_cohomology(genus2, Character.trivial(genus2))
        assert rep.dims == (1, 4, 1)
        # no boundary to strike, so compact support changes nothing
        repc = compact_support_cohomology(genus2,
                                          Character.trivial(genus2))
        assert repc.dims == rep.dims

    @pytest.mark.parametrize("genus,boundary,seed", [(0, 3, 41), (1, 2, 43),
                                                     (2, 1, 47)])
    def test_duality_against_inverse_character(self, genus, boundary, seed):
        k = standard_complex(genus, boundary)
        chi = scaled_character(k, seed)
        direct = compact_support_cohomology(k, chi).dims
        dual = twisted_cohomology(k, chi.inverse()).dims
        assert direct == dual[::-1]

    def test_coboundaries_compose_to_zero(self):
        for genus, boundary in [(0, 4), (1, 1), (2, 2)]:
            k = standard_complex(genus, boundary)
            chi = unitary_character(k, 29)
            d0, d1 = coboundaries(k, chi)
            n_v, n_e, n_t = k.counts()
            assert d0.shape == (n_e, n_v) and d1.shape == (n_t, n_e)
            assert np.max(np.abs(d1 @ d0)) < 1e-12

    def test_harmonic_basis_consists_of_cocycles(self):
        k = standard_complex(1, 2)
        chi = unitary_character(k, 31)
        d0, d1 = coboundaries(k, chi)
        rep = twisted_cohomology(k, chi)
        assert rep.basis1.shape[1] == rep.dims[1]
        assert np.max(np.abs(d1 @ rep.basis1)) < 1e-9
        assert np.max(np.abs(d0.conj().T @ rep.basis1)) < 1e-9
        gram = rep.basis1.conj().T @ rep.basis1
        assert np.allclose(gram, np.eye(rep.dims[1]), atol=1e-10)

    def test_compact_classes_vanish_on_the_boundary(self):
        k = standard_complex(1, 2)
        chi = unitary_character(k, 37)
        rep = compact_support_cohomology(k, chi)
        assert rep.compact
        d0, d1 = coboundaries(k, chi)
        assert np.max(np.abs(d1 @ rep.basis1)) < 1e-9
        boundary_edges = sorted({e for c in k.boundary_cycles for e in c})
        assert np.max(np.abs(rep.basis1[boundary_edges])) < 1e-12

    def test_dims_stable_under_barycentric_refinement(self):
        k = standard_complex(1, 1)
        chi = unitary_character(k, 53)
        refined, _ = barycentric_refine(k)
        chi_r = refine_character(chi, refined)
        assert twisted_cohomology(refined, chi_r).dims \
            == twisted_cohomology(k, chi).dims
        assert compact_support_cohomology(refined, chi_r).dims \
            == compact_support_cohomology(k, chi).dims

    def test_refined_character_keeps_loop_values(self):
        k = standard_complex(1, 1)
        chi = unitary_character(k, 59)
        refined, maps = barycentric_refine(k)
        chi_r = refine_character(chi, refined)
        for name, loop in k.marked_loops:
            assert chi_r.loop_value(maps.refine_loop(k, loop)) \
                == pytest.approx(chi.loop_value(loop), abs=1e-10)


class TestCupPairing:

    @pytest.mark.parametrize("genus,boundary", [(0, 4), (1, 2), (2, 1)])
    def test_coboundaries_pair_to_zero(self, genus, boundary):
        """Stokes: relative coboundaries are orthogonal to cocycles."""
        k = standard_complex(genus, boundary)
        chi = unitary_character(k, 61)
        d0, _ = coboundaries(k, chi)
        f = relative_cochain(k, 67)
        g = relative_cochain(k, 71)
        absolute = twisted_cohomology(k, chi).basis1
        compact = compact_support_cohomology(k, chi).basis1
        for col in range(absolute.shape[1]):
            assert abs(cup_evaluate(k, chi, d0 @ f, absolute[:, col])) < 1e-10
        for col in range(compact.shape[1]):
            assert abs(cup_evaluate(k, chi, compact[:, col], d0 @ g)) < 1e-10

    def test_four_punctured_sphere_form(self):
        k = standard_complex(0, 4)
        circles = boundary_vertex_loops(k)
        chi = Character.from_loops(k, circles[:3], [1j, 1j, -1j])
        rep = veech_pairing(k, chi)
        assert rep.matrix.shape == (2, 2)
        assert np.max(np.abs(rep.matrix - rep.matrix.conj().T)) < 1e-12
        assert rep.signature == (1, 1)
        assert rep.margin > 0.03
        value = cup_evaluate(k, chi, rep.basis[:, 0], rep.basis[:, 1])
        assert value == pytest.approx(rep.matrix[0, 1], abs=1e-13)

    def test_closed_genus_two_form(self):
        k = standard_complex(2, 0)
        marked = dict(k.marked_loops)
        loops = [marked[n] for n in ("a1", "b1", "a2", "b2")]
        chi = Character.from_loops(
            k, loops, np.exp(1j * np.array([0.37, -1.1, 2.0, 0.9])))
        rep = veech_pairing(k, chi)
        assert rep.matrix.shape == (2, 2)
        assert np.max(np.abs(rep.matrix - rep.matrix.conj().T)) < 1e-12
        assert rep.signature == (1, 1)
        assert rep.margin > 0.4

    def test_closed_torus_trivial_form(self):
        k = standard_complex(1, 0)
        rep = veech_pairing(k, Character.trivial(k))
        assert rep.signature == (1, 1)
        assert rep.margin > 0.5

    def test_twice_punctured_torus_form(self):
        k = standard_complex(1, 2)
        marked = dict(k.marked_loops)
        circles = boundary_vertex_loops(k)
        chi = Character.from_loops(
            k, [marked["a"], marked["b"], circles[0]],
            [np.exp(0.4j), np.exp(-0.9j), np.exp(1.3j)])
        rep = veech_pairing(k, chi)
        assert rep.signature == (1, 1)
        assert rep.margin > 0.2

    def test_boundary_trivial_character_degenerates(self):
        # on the once-punctured torus every character is trivial around
        # the puncture, so compact classes come from the boundary and the
        # form vanishes identically
        k = standard_complex(1, 1)
        marked = dict(k.marked_loops)
        chi = Character.from_loops(k, [marked["a"], marked["b"]],
                                   [np.exp(0.7j), np.exp(-0.3j)])
        with pytest.raises(DegeneratePairing):
            veech_pairing(k, chi)

    def test_non_unitary_character_rejected(self):
        k = standard_complex(0, 4)
        chi = scaled_character(k, 73)
        with pytest.raises(NonUnitaryCharacter):
            veech_pairing(k, chi)

    def test_signature_stable_under_refinement(self):
        k = standard_complex(0, 4)
        circles = boundary_vertex_loops(k)
        chi = Character.from_loops(k, circles[:3], [1j, 1j, -1j])
        refined, _ = barycentric_refine(k)
        rep = veech_pairing(refined, refine_character(chi, refined))
        assert rep.signature == (1, 1)
        assert np.max(np.abs(rep.matrix - rep.matrix.conj().T)) < 1e-12
