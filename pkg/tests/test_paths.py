import json
import math

import numpy as np
import pytest

from branchspace import (
    BranchedPath,
    EndpointMismatch,
    InsufficientResolution,
    NotAJunction,
    PathSegment,
    compose,
    jet_match,
    make_split_loop,
    validate_branched,
)
from branchspace.paths import (
    branched_path_from_dict,
    branched_path_to_dict,
    branched_path_to_dot,
    default_test_functions,
    fd_weights,
    segment_image_distance,
    segments_compatible,
)

FX = lambda q: float(q[0])
FY = lambda q: float(q[1])


def line(a, b, m=64):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return PathSegment.from_function(lambda t: a + t * (b - a), m)


# ---------------------------------------------------------------------------
# segments and composition
# ---------------------------------------------------------------------------

def test_segment_grid_and_endpoints():
    g = PathSegment.from_function(lambda t: (t, t * t), 16)
    assert g.intervals == 16
    assert g.alpha.tolist() == [0.0, 0.0]
    assert g.omega.tolist() == [1.0, 1.0]
    assert np.allclose(g.at(0.5), [0.5, 0.25], atol=1e-12)


def test_segment_minimum_resolution():
    with pytest.raises(ValueError):
        PathSegment(np.zeros((5, 2)))


def test_compose_constant_segments():
    p = [2.0, -1.0]
    g = PathSegment.from_function(lambda t: p, 8)
    out = compose(g, g)
    assert np.allclose(out.values, p, atol=0.0)


def test_compose_concatenates_lines():
    g1 = PathSegment.from_function(lambda t: (t, 0.0), 32)
    g2 = PathSegment.from_function(lambda t: (1.0 + t, 0.0), 32)
    out = compose(g1, g2)
    assert out.alpha.tolist() == [0.0, 0.0]
    assert out.omega.tolist() == [2.0, 0.0]
    assert np.allclose(out.at(0.5), [1.0, 0.0], atol=0.0)
    # sample-level: first half is g1's samples, second half g2's
    assert np.allclose(out.values[: 32 + 1], g1.values, atol=0.0)
    assert np.allclose(out.values[32:], g2.values, atol=0.0)


def test_compose_endpoint_mismatch():
    g1 = line((0.0, 0.0), (1.0, 0.0))
    g2 = line((1.5, 0.0), (2.0, 0.0))
    with pytest.raises(EndpointMismatch) as err:
        compose(g1, g2)
    assert err.value.gap == pytest.approx(0.5)


def test_compose_endpoint_algebra():
    g1 = line((0.0, 1.0), (2.0, 2.0))
    g2 = line((2.0, 2.0), (0.0, 5.0))
    out = compose(g1, g2)
    assert np.array_equal(out.alpha, g1.alpha)
    assert np.array_equal(out.omega, g2.omega)


def test_compose_associativity_on_images():
    g1 = line((0.0, 0.0), (1.0, 0.0))
    g2 = PathSegment.from_function(lambda t: (1.0 + np.sin(0.5 * np.pi * t), 1.0 - np.cos(0.5 * np.pi * t)), 64)
    g3 = line((2.0, 1.0), (2.0, 3.0))
    left = compose(compose(g1, g2), g3)
    right = compose(g1, compose(g2, g3))
    assert segment_image_distance(left, right) <= 1e-9


# ---------------------------------------------------------------------------
# branched path validation
# ---------------------------------------------------------------------------

def test_split_loop_validates():
    report = validate_branched(make_split_loop(m=256))
    assert report.ok


def test_single_stage_validates():
    bp = BranchedPath([[line((0.0,), (1.0,))]])
    assert validate_branched(bp).ok


def test_split_loop_endpoint_formulas():
    bp = make_split_loop(m=256)
    (g_in,), (g_up, g_dn), (g_out,) = bp.stages
    assert np.allclose(g_in.omega, [-1.0, 0.0], atol=1e-12)
    assert np.allclose(g_up.alpha, [-1.0, 0.0], atol=1e-12)
    assert np.allclose(g_dn.alpha, [-1.0, 0.0], atol=1e-12)
    assert np.allclose(g_up.omega, [1.0, 0.0], atol=1e-12)
    assert np.allclose(g_dn.omega, [1.0, 0.0], atol=1e-12)
    assert np.allclose(g_out.alpha, [1.0, 0.0], atol=1e-12)


def test_translated_final_segment_reports_gap():
    report = validate_branched(make_split_loop(m=256, final_offset=(0.0, 0.1)))
    assert not report.ok
    assert report.gap == pytest.approx(0.1, abs=1e-9)


def test_validation_invariant_under_stage_reordering():
    bp = make_split_loop(m=64)
    flipped = BranchedPath([bp.stages[0], tuple(reversed(bp.stages[1])), bp.stages[2]])
    assert validate_branched(flipped).ok


def test_incompatible_duplicate_segments_rejected():
    g = line((0.0, 0.0), (1.0, 0.0))
    report = validate_branched(BranchedPath([[g, g]]))
    assert not report.ok
    assert "incompatible" in report.reason


def test_same_endpoints_different_images_compatible():
    up = PathSegment.from_function(lambda t: (t, np.sin(np.pi * t)), 64)
    dn = PathSegment.from_function(lambda t: (t, -np.sin(np.pi * t)), 64)
    assert segments_compatible(up, dn)
    assert validate_branched(BranchedPath([[up, dn]])).ok


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------

def test_fd_weights_standard_stencils():
    assert np.allclose(fd_weights(1, [0, 1, 2]), [-1.5, 2.0, -0.5], atol=1e-12)
    assert np.allclose(fd_weights(2, [-1, 0, 1]), [1.0, -2.0, 1.0], atol=1e-12)


def test_fd_exact_on_polynomials():
    # stencil with k+4 points differentiates degree <= k+3 exactly
    m = 32
    t = np.arange(m + 1) / m
    samples = 2.0 * t**3 - t + 0.5
    from branchspace.paths import _one_sided_derivative

    assert _one_sided_derivative(samples, 1, True) == pytest.approx(-1.0, abs=1e-9)
    assert _one_sided_derivative(samples, 2, True) == pytest.approx(0.0, abs=1e-8)
    assert _one_sided_derivative(samples, 3, True) == pytest.approx(12.0, abs=1e-7)
    assert _one_sided_derivative(samples, 1, False) == pytest.approx(5.0, abs=1e-9)


def test_straight_line_passes_every_order():
    g_in = line((-1.0, 0.0), (0.0, 0.0), m=64)
    g_out = line((0.0, 0.0), (1.0, 0.0), m=64)
    bp = BranchedPath([[g_in], [g_out]])
    for order in range(1, 6):
        res = jet_match(bp, [0.0, 0.0], FX, order=order)
        assert res.passed, res.residuals


def test_split_junction_first_order_cancels():
    # outgoing arcs leave vertically with opposite speeds: pi - pi = 0,
    # matching the flat incoming line
    bp = make_split_loop(m=256)
    res = jet_match(bp, [-1.0, 0.0], FY, order=1)
    assert res.incoming == 1 and res.outgoing == 2
    assert res.residual(1) <= 1e-8
    assert res.passed


def test_split_junction_order_three_residuals_small():
    bp = make_split_loop(m=256)
    for p in ([-1.0, 0.0], [1.0, 0.0]):
        for f in (FX, FY):
            res = jet_match(bp, p, f, order=3)
            assert res.residual(3) <= 1e-4


def test_split_junction_mirror_symmetry_breaks_at_low_orders():
    # the incoming line moves horizontally while the arc pair leaves
    # vertically: the x sums genuinely disagree at orders 1 and 2
    bp = make_split_loop(m=256)
    res = jet_match(bp, [-1.0, 0.0], FX, order=3)
    assert res.residual(1) == pytest.approx(1.0, abs=1e-6)
    assert res.residual(2) == pytest.approx(2.0 * math.pi**2, abs=1e-4)
    assert not res.passed


def test_perturbed_arc_fails_second_order():
    bp = make_split_loop(m=256)
    broken = PathSegment.from_function(
        lambda t: (np.cos(np.pi * (1.0 - t)), -np.sin(np.pi * t) + t * t), 256
    )
    bp2 = BranchedPath([bp.stages[0], (bp.stages[1][0], broken), bp.stages[2]])
    res1 = jet_match(bp2, [-1.0, 0.0], FY, order=1)
    assert res1.passed  # first derivatives still cancel
    res2 = jet_match(bp2, [-1.0, 0.0], FY, order=2)
    assert res2.residual(2) == pytest.approx(2.0, abs=1e-4)
    assert not res2.passed


def test_jet_residual_converges_at_least_second_order():
    # true order-3 residual is zero for the x coordinate; the measured
    # residual is pure truncation error and must shrink by >= 4x per
    # sampling refinement
    residuals = []
    for m in (32, 64, 128):
        bp = make_split_loop(m=m)
        residuals.append(jet_match(bp, [-1.0, 0.0], FX, order=3).residual(3))
    assert residuals[1] <= residuals[0] / 3.9
    assert residuals[2] <= residuals[1] / 3.9


def test_jet_errors():
    bp = make_split_loop(m=256)
    with pytest.raises(NotAJunction):
        jet_match(bp, [5.0, 5.0], FX)
    with pytest.raises(ValueError):
        jet_match(bp, [-1.0, 0.0], FX, order=6)
    tiny = make_split_loop(m=8)
    with pytest.raises(InsufficientResolution):
        jet_match(tiny, [-1.0, 0.0], FX, order=5)


def test_default_test_functions_cover_products():
    fns = default_test_functions(2)
    q = np.array([2.0, 3.0])
    assert [f(q) for f in fns] == [2.0, 3.0, 4.0, 6.0, 9.0]


# ---------------------------------------------------------------------------
# interchange
# ---------------------------------------------------------------------------

def test_branched_path_json_roundtrip():
    bp = make_split_loop(m=16)
    back = branched_path_from_dict(json.loads(json.dumps(branched_path_to_dict(bp))))
    assert len(back.stages) == 3
    for stage_a, stage_b in zip(back.stages, bp.stages):
        assert len(stage_a) == len(stage_b)
        for ga, gb in zip(stage_a, stage_b):
            assert np.allclose(ga.values, gb.values, atol=0.0)
    assert validate_branched(back).ok


def test_json_rejects_non_uniform_grid():
    bp = make_split_loop(m=16)
    obj = branched_path_to_dict(bp)
    obj["stages"][0][0]["samples"][3][0] = 0.123
    with pytest.raises(ValueError):
        branched_path_from_dict(obj)


def test_dot_export_shape():
    dot = branched_path_to_dot(make_split_loop(m=16))
    assert dot.startswith("digraph")
    assert dot.count("->") == 4  # one edge per segment
    assert 'n0 [label="{-2,0}"]' in dot
