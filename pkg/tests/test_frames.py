import math

import numpy as np
import pytest

from younghull import frames, r4closed
from younghull.frames import YoungDiagram, partitions
from younghull.trigcurve import TWO_PI, TrigCurve, make_lissajoux


def test_young_diagrams():
    assert [str(d) for d in partitions(3)] == ["(1,1,1)", "(2,1)", "(3)"]
    assert [str(d) for d in partitions(2)] == ["(1,1)", "(2)"]
    assert YoungDiagram.parse("(2,1)") == YoungDiagram((2, 1))
    assert YoungDiagram((3, 1)).area == 4 and YoungDiagram((3, 1)).length == 2
    for bad in ((), (1, 2), (0,)):
        with pytest.raises(ValueError):
            YoungDiagram(bad)
    assert frames.stratum_of((1, 2)) == YoungDiagram((2, 1))
    assert len(partitions(5)) == 7


def test_cluster_angles_wraps():
    assert frames.cluster_angles([0.3, 0.3, 2.0]) == [(0.3, 2), (2.0, 1)]
    wrapped = frames.cluster_angles([TWO_PI - 1e-9, 1e-9, 1.0])
    assert sorted(m for _, m in wrapped) == [1, 2]


def test_osculating_subspace_examples(circle, ellipse2):
    sub = frames.osculating_subspace(circle, 0.4)
    assert sub.span.shape[0] == 0
    np.testing.assert_allclose(sub.base, circle(0.4))
    sub = frames.osculating_subspace(ellipse2, 0.0)
    np.testing.assert_allclose(sub.span, [[1, 0, 1, 0], [0, -1, 0, -2]], atol=1e-15)
    assert np.max(np.abs(sub.normals @ sub.span.T)) < 1e-14
    np.testing.assert_allclose(sub.normals @ sub.normals.T, np.eye(2), atol=1e-14)
    assert np.max(np.abs(sub.residual(sub.base))) < 1e-15


def test_gamma_examples(ellipse2):
    np.testing.assert_allclose(frames.gamma_map(ellipse2, [0.0, math.pi]), [0, 0, 0, -1.5], atol=1e-12)
    for t in (0.0, 1.1, 5.9):
        np.testing.assert_array_equal(frames.gamma_map(ellipse2, [t, t]), ellipse2(t))
    with pytest.raises(ValueError):
        frames.gamma_map(ellipse2, [0.1])


def test_gamma_lies_on_every_osculating_subspace(ellipse3, rng):
    for _ in range(20):
        ts = rng.random(3) * TWO_PI
        if frames.min_circular_gap(ts) < 0.05:
            continue
        x = frames.gamma_map(ellipse3, ts)
        for t in ts:
            sub = frames.osculating_subspace(ellipse3, t)
            assert np.max(np.abs(sub.residual(x))) < 1e-9


def test_gamma_strata_n3(ellipse3):
    # Gamma(s, t, t) equals the intersection of L(s) with the 2-codim-4 space at t
    s, t = 0.4, 2.3
    x = frames.gamma_map(ellipse3, [s, t, t])
    a, b, _ = frames.osculating_constraints(ellipse3, t, multiplicity=2)
    assert np.max(np.abs(a @ x - b)) < 1e-9
    np.testing.assert_allclose(frames.gamma_map(ellipse3, [t, s, t]), x, atol=1e-12)


def test_gamma_repeated(ellipse2, ellipse3):
    np.testing.assert_array_equal(frames.gamma_map_repeated(ellipse2, [0.7]), ellipse2(0.7))
    np.testing.assert_allclose(frames.gamma_map_repeated(ellipse2, [0.7, 2.0]), frames.gamma_map(ellipse2, [0.7, 2.0]))
    np.testing.assert_allclose(
        frames.gamma_map_repeated(ellipse3, [0.2, 1.9]), frames.gamma_map(ellipse3, [0.2, 1.9, 1.9])
    )
    with pytest.raises(ValueError):
        frames.pad_repeated([1, 2, 3], 2)


def test_gamma_singular_system_reported():
    # Delta vanishes at s = pi for k=1, l=3, so the osculating planes do not meet in a point
    with pytest.raises(frames.SingularSystemError) as info:
        frames.gamma_map(make_lissajoux(1, 3), [0.0, math.pi])
    assert info.value.condition > frames.COND_LIMIT


def test_gamma_batch_matches_single(ellipse3, rng):
    ts = rng.random((10, 3)) * TWO_PI
    batch = frames.gamma_batch(ellipse3, ts)
    for row, pt in zip(ts, batch):
        np.testing.assert_allclose(pt, frames.gamma_map(ellipse3, row), atol=1e-9)


def test_jacobian_against_closed_form(liss12):
    params = r4closed.LissajouxParams(1, 2)
    h = 1e-5
    for t1, t2 in ((0.3, 2.0), (1.0, 4.5), (5.0, 0.2)):
        jac = frames.gamma_jacobian(liss12, [t1, t2])
        fd1 = (r4closed.closed_gamma(params, t1 + h, t2) - r4closed.closed_gamma(params, t1 - h, t2)) / (2 * h)
        fd2 = (r4closed.closed_gamma(params, t1, t2 + h) - r4closed.closed_gamma(params, t1, t2 - h)) / (2 * h)
        np.testing.assert_allclose(jac, np.stack([fd1, fd2], axis=1), atol=1e-7)
        swapped = frames.gamma_jacobian(liss12, [t2, t1])
        np.testing.assert_allclose(swapped, jac[:, ::-1], atol=1e-12)


def test_jacobian_circle_and_diagonal_guard(circle, ellipse2):
    jac = frames.gamma_jacobian(circle, [0.8])
    np.testing.assert_allclose(jac[:, 0], circle.derivative(0.8, 1), atol=1e-8)
    with pytest.raises(ValueError):
        frames.gamma_jacobian(ellipse2, [1.0, 1.0 + 1e-5])


def _grid_values(curve, hp, grid=4096):
    return curve(np.arange(grid) * (TWO_PI / grid)) @ hp.normal - hp.offset


def test_mu_hyperplane_osculating(ellipse2):
    hp = frames.mu_hyperplane(ellipse2, YoungDiagram((2,)), [0.0])
    d = ellipse2.derivatives(0.0, 3)
    assert np.max(np.abs(d[1:] @ hp.normal)) < 1e-12
    assert _grid_values(ellipse2, hp).min() >= -1e-9
    assert abs(np.linalg.norm(hp.normal) - 1) < 1e-14


def test_mu_hyperplane_bitangent(ellipse2):
    hp = frames.mu_hyperplane(ellipse2, YoungDiagram((1, 1)), [0.0, math.pi])
    for t in (0.0, math.pi):
        assert abs(hp.value(ellipse2(t))) < 1e-12
        assert abs(ellipse2.derivative(t, 1) @ hp.normal) < 1e-12
    assert _grid_values(ellipse2, hp).min() >= -1e-9


@pytest.mark.parametrize("parts", [(1, 1), (2,)])
def test_mu_support_property_random(ellipse2, parts, rng):
    d = YoungDiagram(parts)
    for _ in range(25):
        ts = rng.random(d.length) * TWO_PI
        if frames.min_circular_gap(ts) < 0.05:
            continue
        hp = frames.mu_hyperplane(ellipse2, d, ts)
        assert _grid_values(ellipse2, hp).min() >= -1e-8


def test_mu_support_property_n3(ellipse3, rng):
    for parts in ((1, 1, 1), (2, 1), (3,)):
        d = YoungDiagram(parts)
        for _ in range(10):
            ts = rng.random(d.length) * TWO_PI
            if frames.min_circular_gap(ts) < 0.1:
                continue
            hp = frames.mu_hyperplane(ellipse3, d, ts)
            assert _grid_values(ellipse3, hp).min() >= -1e-8


def test_mu_batch_agrees_with_single(ellipse3, rng):
    d = YoungDiagram((2, 1))
    ts = rng.random((8, 2)) * TWO_PI
    normals, offsets, valid = frames.mu_normals_batch(ellipse3, d, ts)
    assert valid.all()
    for row, n, o in zip(ts, normals, offsets):
        hp = frames.mu_hyperplane(ellipse3, d, row)
        np.testing.assert_allclose(n, hp.normal, atol=1e-10)
        assert abs(o - hp.offset) < 1e-10


def test_mu_hyperplane_rejects_coincident(ellipse2):
    with pytest.raises(ValueError):
        frames.mu_hyperplane(ellipse2, YoungDiagram((1, 1)), [1.0, 1.0])
    with pytest.raises(ValueError):
        frames.mu_hyperplane(ellipse2, YoungDiagram((1, 1)), [1.0])


def test_spanning_subspace(ellipse2, ellipse3):
    sub = frames.spanning_subspace(ellipse2, YoungDiagram((2,)), [0.0])
    assert sub.codimension == 2
    np.testing.assert_allclose(sub.span, frames.osculating_subspace(ellipse2, 0.0).span)
    sub = frames.spanning_subspace(ellipse2, YoungDiagram((1, 1)), [0.0, 2.0])
    assert sub.codimension == 3 and sub.span.shape == (1, 4)
    sub = frames.spanning_subspace(ellipse3, YoungDiagram((2, 1)), [0.0, 2.0])
    assert sub.codimension == 3
    segment = TrigCurve.from_arrays(np.zeros(4), [[1.0], [0], [0], [0]], np.zeros((4, 1)))
    with pytest.raises(frames.DegenerateFrameError):
        frames.spanning_subspace(segment, YoungDiagram((2,)), [0.3])
