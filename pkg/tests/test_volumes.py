import math

import numpy as np
import pytest

from younghull import volumes
from younghull.acceptance import perturbed_convex_curves
from younghull.r4closed import EH_CONSTANT_R4
from younghull.trigcurve import TrigCurve, make_generalized_ellipse
from younghull.volumes import QuadratureSpec


def test_quadrature_spec_validation():
    spec = QuadratureSpec(16, 2)
    assert spec.cells == 256 and len(spec.axis_offsets) == 2
    assert len(set(spec.axis_offsets)) == 2
    for kwargs in ({"points_per_axis": 4, "dims": 2}, {"points_per_axis": 16, "dims": 0}):
        with pytest.raises(ValueError):
            QuadratureSpec(**kwargs)
    for offs in ((0.5,), (0.5, 0.5), (0.0, 0.3)):
        with pytest.raises(ValueError):
            QuadratureSpec(16, 2, offs)
    nodes = spec.nodes(np.arange(spec.cells))
    # no grid tuple has coincident coordinates
    assert np.min(np.abs(nodes[:, 0] - nodes[:, 1])) > 1e-3


def test_convex_hull_examples(circle, ellipse2, ellipse3):
    assert volumes.vol_convex_hull(circle, QuadratureSpec(512, 1)).value == pytest.approx(math.pi, rel=1e-14)
    assert volumes.vol_convex_hull(ellipse2, QuadratureSpec(64, 2)).value == pytest.approx(math.pi**2 / 12, rel=1e-12)
    target = (2 * math.pi) ** 3 / (math.factorial(3) * math.factorial(6))
    assert volumes.vol_convex_hull(ellipse3, QuadratureSpec(24, 3)).value == pytest.approx(target, rel=1e-10)


def test_elliptic_hull_examples(circle, ellipse2):
    assert volumes.vol_elliptic_hull(circle, QuadratureSpec(512, 1)).value == pytest.approx(math.pi, rel=1e-14)
    res = volumes.vol_elliptic_hull(ellipse2, QuadratureSpec(256, 2))
    assert abs(res.value - EH_CONSTANT_R4) < 1e-6
    assert res.signed_raw < 0 and res.value == abs(res.signed_raw)
    assert res.diagnostics["failed_cells"] == 0


def test_grid_refinement(ellipse2):
    for fn in (volumes.vol_convex_hull, volumes.vol_elliptic_hull):
        a = fn(ellipse2, QuadratureSpec(128, 2)).value
        b = fn(ellipse2, QuadratureSpec(256, 2)).value
        assert abs(a - b) < 1e-4 * b


def test_prefactor_is_a_hook(ellipse2, monkeypatch):
    spec = QuadratureSpec(32, 2)
    base = volumes.vol_elliptic_hull(ellipse2, spec).value
    monkeypatch.setattr(volumes, "elliptic_prefactor", lambda n: 1.0 / (2 * math.factorial(n)))
    assert volumes.vol_elliptic_hull(ellipse2, spec).value == pytest.approx(base * 24 / 4)


@pytest.fixture(scope="module")
def wobbly():
    return perturbed_convex_curves(2, 1, seed=21)[0]


def test_rigid_motion_and_scaling(wobbly, rng):
    spec = QuadratureSpec(48, 2)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    moved = wobbly.transformed(q, shift=[3.0, -1.0, 0.5, 2.0])
    scaled = wobbly.transformed(scale=2.0)
    for fn in (volumes.vol_convex_hull, volumes.vol_elliptic_hull):
        v = fn(wobbly, spec).value
        assert fn(moved, spec).value == pytest.approx(v, rel=1e-8)
        assert fn(scaled, spec).value == pytest.approx(16 * v, rel=1e-8)
    ratio = volumes.isoperimetric_ratio(wobbly, spec)
    assert volumes.isoperimetric_ratio(scaled, spec) == pytest.approx(ratio, rel=1e-8)


def test_hull_ordering(wobbly, ellipse2):
    spec = QuadratureSpec(64, 2)
    for c in (wobbly, ellipse2):
        assert volumes.vol_convex_hull(c, spec).value < volumes.vol_elliptic_hull(c, spec).value


def test_thread_count_does_not_change_bits(ellipse2, ellipse3):
    spec = QuadratureSpec(128, 2)
    a = volumes.vol_elliptic_hull(ellipse2, spec, threads=1)
    b = volumes.vol_elliptic_hull(ellipse2, spec, threads=3)
    assert a.signed_raw == b.signed_raw
    spec3 = QuadratureSpec(24, 3)
    assert volumes.vol_convex_hull(ellipse3, spec3, threads=1).signed_raw == volumes.vol_convex_hull(
        ellipse3, spec3, threads=4
    ).signed_raw


def test_quadrature_failure_raised():
    # a planar curve padded to R^4 has no osculating frame at all
    flat = TrigCurve.from_arrays(np.zeros(4), [[1, 0], [0, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0], [0, 0]])
    with pytest.raises(volumes.QuadratureFailure):
        volumes.vol_elliptic_hull(flat, QuadratureSpec(16, 2))


def test_dims_must_match(ellipse2):
    with pytest.raises(ValueError):
        volumes.vol_convex_hull(ellipse2, QuadratureSpec(16, 3))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_arc_length(n):
    assert volumes.arc_length(make_generalized_ellipse(n)) == pytest.approx(2 * math.pi * math.sqrt(n), rel=1e-14)
    with pytest.raises(ValueError):
        volumes.arc_length(make_generalized_ellipse(n), samples=10)


def test_isoperimetric(circle, ellipse2, ellipse3):
    assert abs(volumes.isoperimetric_ratio(circle) - 1) < 1e-6
    assert abs(volumes.isoperimetric_ratio(ellipse2) - 1) < 1e-6
    assert abs(volumes.isoperimetric_ratio(ellipse3, QuadratureSpec(32, 3)) - 1) < 1e-5
    for c in perturbed_convex_curves(2, 3, seed=5):
        assert volumes.isoperimetric_ratio(c) > 1
    point = TrigCurve.from_arrays(np.ones(2), np.zeros((2, 1)), np.zeros((2, 1)))
    with pytest.raises(ArithmeticError):
        volumes.isoperimetric_ratio(point)
