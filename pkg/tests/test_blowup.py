import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszlab import (
    Ball,
    CantorSpec,
    DegenerateInputError,
    DiscreteMeasure,
    KernelSpec,
    ValidationError,
    density_comparability_scan,
    main_lemma_ratio,
    max_density_ball,
    multiscale_energy_profile,
    pairwise_energy,
)

from .conftest import random_measure


def test_max_density_single_atom():
    mu = DiscreteMeasure([[0.0]], [1.0])
    b = max_density_ball(mu, KernelSpec(0.5), [1.0, 2.0, 4.0])
    assert b.radius == 1.0


def test_comparability_scan_skips():
    mu = random_measure(np.random.default_rng(0), 30, 2)
    c = mu.points[0]
    B0 = Ball(c, 0.1)
    rows = density_comparability_scan(mu, KernelSpec(0.5), B0, 1.0,
                                      [Ball(c, 0.3), Ball([5.0, 5.0], 0.1)])
    assert not rows[0].skipped and rows[1].skipped and np.isnan(rows[1].ratio)


def test_shell_recomposition_exact():
    spec = CantorSpec(0.5, 8)
    mu = spec.build()
    x = mu.points[0]
    rep = multiscale_energy_profile(mu, KernelSpec(0.5), x, Ball(x, 4.0**-8), 6, step=2)
    cum = 0.0
    for e, es, c in zip(rep.shell_energies, rep.shell_self, rep.cumulative):
        cum = cum + 2 * e - es
        assert cum == pytest.approx(c, rel=1e-10, abs=1e-14)


def test_profile_validation():
    mu = random_measure(np.random.default_rng(0), 10, 1)
    with pytest.raises(ValidationError):
        multiscale_energy_profile(mu, KernelSpec(0.5), mu.points[0], Ball(mu.points[0], 0.01), 1)
    with pytest.raises(ValidationError):
        multiscale_energy_profile(mu, KernelSpec(0.5), [5.0], Ball(mu.points[0], 0.01), 4)


def test_profile_flags_single_shell():
    mu = DiscreteMeasure([[0.0]], [1.0])
    rep = multiscale_energy_profile(mu, KernelSpec(0.5), [0.0], Ball([0.0], 1.0), 3, thin_t=None)
    assert rep.cumulative == [0.0] * 4
    assert any("fewer than 2" in f for f in rep.flags)


def test_main_lemma_ratio_grows():
    spec = KernelSpec(0.5)
    ratios = []
    for g in (4, 6, 8):
        mu = CantorSpec(0.5, g).build()
        ratios.append(main_lemma_ratio(mu, spec, Ball([0.5], 0.75)).ratio)
    assert ratios[0] < ratios[1] < ratios[2]


def test_main_lemma_empty_ball():
    mu = DiscreteMeasure([[0.0]], [1.0])
    with pytest.raises(DegenerateInputError):
        main_lemma_ratio(mu, KernelSpec(0.5), Ball([3.0], 1.0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_shell_decomposition_property(seed):
    rng = np.random.default_rng(seed)
    mu = random_measure(rng, 30, 2)
    spec = KernelSpec(0.5)
    x = mu.points[0]
    r1, r2 = sorted(rng.uniform(0.05, 1.0, 2))
    inner = Ball(x, r1).contains(mu.points)
    outer = Ball(x, r2).contains(mu.points)
    shell = outer & ~inner
    whole = pairwise_energy(mu, spec, x, outer, outer)
    parts = (pairwise_energy(mu, spec, x, inner, inner) + 2 * pairwise_energy(mu, spec, x, outer, shell)
             - pairwise_energy(mu, spec, x, shell, shell))
    assert parts == pytest.approx(whole, rel=1e-10, abs=1e-12)
