from __future__ import annotations

import numpy as np
import pytest

from affsurf.errors import (
    EvaluationAtConePoint,
    InvalidSpec,
    ResidueSumNonzero,
)
from affsurf.numerics import Quadrature, circle_segments, continuous_log, integrate
from affsurf.surface import (
    AffineSurfaceSpec,
    NodeGluing,
    check_node_gluing,
    connection_form,
    exponential_action,
    flat_multiplier,
    integral_pole_indices,
    spec_from_json,
    spec_to_json,
    validate,
)


def _g0(*pairs):
    return AffineSurfaceSpec.genus0(list(pairs))


def test_validate_accepts_basic_specs():
    assert validate(_g0((0, -1), (1, -1))).ok
    assert validate(AffineSurfaceSpec.genus1(0.3 + 1.1j, 0.7j, [(0, 1), (0.5, -1)])).ok
    assert validate(AffineSurfaceSpec.genus1(2j, 0.1, [])).ok


def test_validate_rejects_wrong_order_sum():
    rep = validate(_g0((0, 1), (1, 1)))
    assert not rep.ok and any("orders sum" in p for p in rep.problems)


def test_validate_rejects_coincident_points():
    rep = validate(_g0((0, -1), (1e-12, -1)))
    assert not rep.ok
    # congruent mod lattice counts as coincident at genus 1
    tau = 0.2 + 1.3j
    rep1 = validate(AffineSurfaceSpec.genus1(tau, 0.0, [(0, 1), (1 + tau, -1)]))
    assert not rep1.ok


def test_validate_genus1_needs_moduli_and_normalization():
    assert not validate(AffineSurfaceSpec(1, ())).ok
    assert not validate(AffineSurfaceSpec.genus1(0.5 - 1j, 0.0, [(0, 0)])).ok
    rep = validate(AffineSurfaceSpec.genus1(1j, 0.0, [(0.3, 1), (0.6, -1)]))
    assert not rep.ok and any("first cone point" in p for p in rep.problems)


def test_validate_genus0_rejects_moduli():
    spec = AffineSurfaceSpec(0, (), tau=1j, lam=0j)
    assert not validate(spec).ok


def test_connection_form_partial_fractions():
    spec = _g0((0, -1), (1, -1))
    gamma = connection_form(spec)
    rng = np.random.default_rng(3)
    for z in rng.standard_normal(5) + 1j * rng.standard_normal(5) + 3:
        assert abs(gamma(z) - (1.0 / z + 1.0 / (z - 1))) <= 1e-12


def test_connection_form_cone_point_guard():
    gamma = connection_form(_g0((0, -1), (1, -1)))
    with pytest.raises(EvaluationAtConePoint):
        gamma(np.array([0.5, 1.0 + 1e-13j]))


def test_connection_form_constant_at_genus1_no_zeros():
    lam = 0.37 - 0.6j
    gamma = connection_form(AffineSurfaceSpec.genus1(1.2j, lam, [(0, 0)]))
    vals = gamma(np.array([0.3 + 0.4j, 0.7 + 0.9j]))
    assert np.allclose(vals, lam, atol=1e-12)


def test_connection_form_is_elliptic():
    tau = 0.25 + 1.15j
    spec = AffineSurfaceSpec.genus1(tau, 0.4 + 0.2j, [(0, 0.5), (0.4 + 0.5j, -0.5)])
    gamma = connection_form(spec)
    rng = np.random.default_rng(4)
    z = 0.21 + 0.33j + 0.1 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    assert np.max(np.abs(gamma(z + 1) - gamma(z))) <= 1e-10
    assert np.max(np.abs(gamma(z + tau) - gamma(z))) <= 1e-10


def test_big_circle_counts_angle_defect():
    # (1/2 pi i) * contour integral of Gamma over a circle containing all
    # cone points equals 2 at genus 0, however wild the orders.
    spec = _g0((0, 0.5 + 0.2j), (1.3j, -1.7), (-2, -0.8 - 0.2j))
    gamma = connection_form(spec)
    val = integrate(gamma, circle_segments(0, 8.0)) / (2j * np.pi)
    assert abs(val - 2.0) <= 1e-10


def test_flat_multiplier_matches_product_formula():
    spec = _g0((0, -1), (1, -1))
    got = flat_multiplier(spec, [2.0, 3.0])
    want = (1.0 / (3.0 * 2.0)) / (1.0 / (2.0 * 1.0))
    assert abs(got - want) <= 1e-9
    assert flat_multiplier(spec, [2.0]) == 1


def test_flat_multiplier_branch_tracked_product_oracle():
    # Against Prod (z - c_j)^{m_j} with branches tracked along the same path.
    spec = _g0((0, 0.5), (1j, 0.5), (2, -3))
    path = np.linspace(0, 1, 400) * (1.5 + 2.2j) + (3.0 - 1j)
    got = flat_multiplier(spec, path)
    want = 1.0
    for p in spec.cone_points:
        logs = continuous_log(path - p.position)
        want *= np.exp(p.order * (logs[-1] - logs[0]))
    assert abs(got - want) <= 1e-9 * abs(want)


def test_flat_multiplier_homotopy_invariance():
    spec = _g0((0, 0.5), (1j, 0.5), (2, -3))
    direct = flat_multiplier(spec, [3.0, 4.0 + 1j])
    detour = flat_multiplier(spec, [3.0, 3.5 - 2j, 5.0 - 1j, 4.0 + 1j])
    assert abs(direct - detour) <= 1e-9 * abs(direct)


def test_flat_multiplier_exponential_at_genus1():
    lam = 0.3 + 0.1j
    spec = AffineSurfaceSpec.genus1(1.1j, lam, [(0, 0)])
    z0, z1 = 0.2 + 0.2j, 0.5 + 0.7j
    got = flat_multiplier(spec, [z0, z1])
    assert abs(got - np.exp(-lam * (z1 - z0))) <= 1e-10


def test_exponential_action_shifts_orders():
    spec = _g0((0, -1), (1, -1))
    out = exponential_action(spec, [1, -1])
    assert out.orders.tolist() == [0, -2]
    with pytest.raises(ResidueSumNonzero):
        exponential_action(spec, [1, 1])
    with pytest.raises(InvalidSpec):
        exponential_action(spec, [1])


def test_exponential_action_is_additive():
    spec = AffineSurfaceSpec.genus1(1.3j, 0.5, [(0, 1), (0.4, -1)])
    one = exponential_action(exponential_action(spec, [0.2, -0.2], 0.1j),
                             [0.3, -0.3], 0.2)
    both = exponential_action(spec, [0.5, -0.5], 0.1j + 0.2)
    assert np.allclose(one.orders, both.orders, atol=1e-14)
    assert abs(one.lam - both.lam) <= 1e-14


def test_exponential_action_can_reach_translation_gauge():
    spec = AffineSurfaceSpec.genus1(1.3j, 0.5 + 0.2j, [(0, 0)])
    out = exponential_action(spec, [0], a0=spec.lam)
    assert out.lam == 0


def test_integral_pole_detection():
    spec = _g0((0, 0.5), (1, 0.5), (2, 1), (3, -2), (4, -1 - 1e-12j))
    assert integral_pole_indices(spec) == [3, 4]
    assert integral_pole_indices(_g0((0, -1.5), (1, -0.5))) == []


def test_node_gluing_is_exact():
    assert check_node_gluing(NodeGluing(-1, -1))
    assert check_node_gluing(NodeGluing(3, -5))
    assert check_node_gluing(NodeGluing(-0.5, -1.5))
    assert check_node_gluing(NodeGluing(0.25 + 0.5j, -2.25 - 0.5j))
    assert not check_node_gluing(NodeGluing(0, 0))
    assert not check_node_gluing(NodeGluing(-1, -1 + 1e-15j))


def test_json_round_trip():
    spec = AffineSurfaceSpec.genus1(0.3 + 1.1j, 0.7j, [(0, 1), (0.5, -1)])
    again = spec_from_json(spec_to_json(spec))
    assert again == spec
    g0 = _g0((0, -1), (1, -1))
    assert spec_from_json(spec_to_json(g0)) == g0


def test_json_rejects_malformed_input():
    good = spec_to_json(_g0((0, -1), (1, -1)))
    bad = dict(good)
    bad["extra"] = 1
    with pytest.raises(ValueError):
        spec_from_json(bad)
    bad2 = dict(good)
    bad2["tau"] = [0.0, 1.0]
    with pytest.raises(ValueError):
        spec_from_json(bad2)
    bad3 = {"genus": 1, "cone_points": []}
    with pytest.raises(ValueError):
        spec_from_json(bad3)
    bad4 = dict(good)
    bad4["cone_points"] = [{"z": [0, 0], "order": [1, 0], "label": "x"}]
    with pytest.raises(ValueError):
        spec_from_json(bad4)
    bad5 = dict(good)
    bad5["cone_points"] = [{"z": "0", "order": [1, 0]}]
    with pytest.raises(ValueError):
        spec_from_json(bad5)
