import numpy as np
import pytest

from htopt import ConvexRegionSpec, Projector, contains, project
from htopt.geometry import ProjectionError, sample
from htopt.oracle import grid_minimize

TRIANGLE = ConvexRegionSpec.halfspaces([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.0, 1.0])
REGIONS = {
    "box": ConvexRegionSpec.box([-1.0, 0.0, 2.0], [1.0, 3.0, 2.5]),
    "ball": ConvexRegionSpec.ball([1.0, -2.0, 0.5], 1.5),
    "halfspaces": ConvexRegionSpec.halfspaces(
        [[1.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.3, -1.0]],
        [2.0, 0.0, 0.0, 1.0, 1.0]),
}


def test_box_clamp():
    assert project(Projector(ConvexRegionSpec.box([3.0], [10.0])), [2.0])[0] == 3.0


def test_ball_scaling():
    np.testing.assert_allclose(project(Projector(ConvexRegionSpec.ball([0.0, 0.0], 1.0)), [3.0, 4.0]),
                               [0.6, 0.8], rtol=0, atol=1e-15)


def test_dykstra_triangle_against_grid():
    v = np.array([2.0, 2.0])
    p = project(Projector(TRIANGLE), v)
    pr = Projector(TRIANGLE)

    def distance(w):
        return np.sum((w - v) ** 2) if pr.contains(w, 0.0) else np.inf

    oracle = grid_minimize(distance, [0.0, 0.0], [1.0, 1.0], points_per_axis=201)
    np.testing.assert_allclose(oracle.minimizer, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-12)


def test_dykstra_beats_alternating_projection():
    # plain alternating projections would stop at a feasible but non-nearest point
    region = ConvexRegionSpec.halfspaces([[0.0, 1.0], [1.0, 1.0]], [0.0, 0.0])
    np.testing.assert_allclose(project(Projector(region), [1.0, 1.0]), [0.0, 0.0], atol=1e-10)


def test_dykstra_nonconvergence_reported(monkeypatch):
    import htopt.geometry as geo
    monkeypatch.setattr(geo, "DYKSTRA_MAX_SWEEPS", 1)
    with pytest.raises(ProjectionError) as info:
        project(Projector(TRIANGLE), [2.0, 1.7])
    assert info.value.residual > 0


@pytest.mark.parametrize("region, v, tol, expected", [
    (ConvexRegionSpec.box([3.0], [10.0]), [5.0], 1e-9, True),
    (ConvexRegionSpec.box([3.0], [10.0]), [2.9999999999], 1e-9, True),
    (ConvexRegionSpec.box([3.0], [10.0]), [2.99], 1e-9, False),
    (ConvexRegionSpec.ball([0.0, 0.0], 1.0), [2.0, 0.0], 1e-9, False),
    (TRIANGLE, [0.2, 0.2], 0.0, True),
])
def test_contains(region, v, tol, expected):
    assert contains(Projector(region), v, tol) is expected


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        project(Projector(REGIONS["box"]), [1.0, 2.0])


@pytest.mark.parametrize("kind", sorted(REGIONS))
def test_projection_properties(kind, rng):
    pr = Projector(REGIONS[kind])
    us = rng.normal(scale=4.0, size=(100, 3))
    vs = rng.normal(scale=4.0, size=(100, 3))
    members = sample(REGIONS[kind], 100, rng)
    for u, v in zip(us, vs):
        pu, pv = pr.project(u), pr.project(v)
        assert pr.contains(pu, 1e-9)
        np.testing.assert_allclose(pr.project(pu), pu, rtol=0, atol=1e-12)
        assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-12
    for v in vs:
        pv = pr.project(v)
        for w in members:
            assert np.linalg.norm(v - pv) <= np.linalg.norm(v - w) + 1e-12


@pytest.mark.parametrize("kind", sorted(REGIONS))
def test_samples_inside(kind, rng):
    pr = Projector(REGIONS[kind])
    assert all(pr.contains(w, 1e-9) for w in sample(REGIONS[kind], 50, rng))
