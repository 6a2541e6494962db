import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszlab import (
    Ball,
    DiscreteMeasure,
    KernelSpec,
    ValidationError,
    ball_mass,
    density,
    density_diagnostics,
    find_thin_ball,
    poisson_density,
    thin_boundary_ratio,
)
from rieszlab.measure import SINGLETON_RESOLUTION, as_mask, poisson_density_partial

from .conftest import random_measure


def test_measure_invariants():
    mu = DiscreteMeasure([[0.0], [3.0], [1.0]], [1.0, 2.0, 0.5])
    assert mu.dim == 1 and mu.size == 3
    assert mu.total_mass == 3.5
    assert mu.resolution == pytest.approx(1.0)
    with pytest.raises(ValueError):
        mu.points[0, 0] = 5.0


@pytest.mark.parametrize("points,weights", [
    ([[0.0], [0.0]], [1, 1]),
    ([[0.0], [1.0]], [1, -1]),
    ([[0.0], [np.nan]], [1, 1]),
    ([[0.0], [1.0]], [1, np.inf]),
    ([[0.0], [1.0]], [1]),
    (np.zeros((0, 2)), []),
])
def test_measure_rejects(points, weights):
    with pytest.raises(ValidationError):
        DiscreteMeasure(points, weights)


def test_singleton_resolution():
    assert DiscreteMeasure([[0.0, 0.0]], [1.0]).resolution == SINGLETON_RESOLUTION


def test_ball_is_closed():
    mu = DiscreteMeasure([[0.0], [1.0], [2.0]], [1.0, 1.0, 1.0])
    assert ball_mass(mu, Ball([0.0], 1.0)) == 2.0


def test_ball_validation():
    with pytest.raises(ValidationError):
        Ball([0.0], 0.0)


def test_density_unit_atom():
    mu = DiscreteMeasure([[0.0]], [1.0])
    assert density(mu, Ball([0.0], 4.0), KernelSpec(0.5)) == pytest.approx(0.5)


def test_poisson_unit_atom_geometric_series():
    # every dilate holds the atom: sum_k 2^{-k} 2^{-k s} = 1 / (1 - 2^{-1.5})
    mu = DiscreteMeasure([[0.0]], [1.0])
    P = poisson_density(mu, Ball([0.0], 1.0), KernelSpec(0.5))
    assert P == pytest.approx(1.5469181606780271, rel=1e-12)


def test_poisson_matches_partial_sums(cloud, spec):
    ball = Ball([0.5, 0.5], 0.1)
    partial = poisson_density_partial(cloud, ball, spec, 80)
    assert poisson_density(cloud, ball, spec) == pytest.approx(partial, rel=1e-12)


def test_as_mask_forms(cloud):
    m = as_mask(cloud, [0, 3])
    assert m.sum() == 2 and m[0] and m[3]
    assert as_mask(cloud, None).all()
    with pytest.raises(ValidationError):
        as_mask(cloud, [100])


def test_density_diagnostics(cloud, spec):
    diag = density_diagnostics(cloud, spec, [0.05, 0.1, 0.2])
    assert diag.theta.shape == (cloud.size, 3)
    assert diag.growth_constant == pytest.approx(diag.theta.max())
    with pytest.raises(ValidationError):
        density_diagnostics(cloud, spec, [])
    with pytest.raises(ValidationError):
        density_diagnostics(cloud, spec, [cloud.resolution / 2])


def test_growth_constant_unit_atom():
    mu = DiscreteMeasure([[0.0]], [1.0])
    assert density_diagnostics(mu, KernelSpec(0.5), [1, 2, 4]).growth_constant == 1.0


def test_thin_ratio_no_boundary_mass():
    mu = DiscreteMeasure([[0.0], [5.0]], [1.0, 1.0])
    # nothing near the sphere |x| = 1 except the atom at 0 at distance 1
    assert np.isfinite(thin_boundary_ratio(mu, Ball([0.0], 1.0)))


def test_thin_ratio_atom_on_sphere_is_infinite():
    mu = DiscreteMeasure([[0.0], [1.0]], [1.0, 1.0])
    assert thin_boundary_ratio(mu, Ball([0.0], 1.0)) == float("inf")


def test_find_thin_ball_in_range():
    mu = random_measure(np.random.default_rng(3), 200, 2)
    res = find_thin_ball(mu, [0.5, 0.5], 0.2, t=20.0)
    assert 0.2 <= res.ball.radius <= 0.4
    assert res.success and res.ratio <= 20.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 1.0), st.floats(1.0, 3.0))
def test_ball_mass_monotone(seed, r, k):
    mu = random_measure(np.random.default_rng(seed), 30, 2)
    c = mu.points[0]
    assert ball_mass(mu, Ball(c, r)) <= ball_mass(mu, Ball(c, k * r))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 1.0), st.sampled_from([0.25, 0.5, 0.75]))
def test_poisson_dominates_density(seed, r, s):
    mu = random_measure(np.random.default_rng(seed), 30, 2)
    spec = KernelSpec(s)
    ball = Ball(mu.points[0], r)
    assert poisson_density(mu, ball, spec) >= density(mu, ball, spec)
