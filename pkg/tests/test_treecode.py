import numpy as np
import pytest

from rieszlab import CantorSpec, DiscreteMeasure, KernelSpec, tree_transform_field, transform_field
from rieszlab.treecode import build_tree, contract_deviation

from .conftest import random_measure


def test_single_far_atom_exact():
    mu = DiscreteMeasure([[0.0], [10.0]], [1.0, 3.0])
    spec = KernelSpec(0.5)
    assert np.array_equal(tree_transform_field(mu, spec, 0.1),
                          transform_field(mu, spec, 0.1))


def test_tiny_theta_matches_naive():
    mu = random_measure(np.random.default_rng(1), 300, 2)
    spec = KernelSpec(0.5)
    naive = transform_field(mu, spec, 0.02)
    assert np.array_equal(tree_transform_field(mu, spec, 0.02, theta_mac=1e-9), naive)
    assert np.array_equal(tree_transform_field(mu, spec, 0.02, theta_mac=0.0), naive)


def test_tree_partitions_atoms():
    mu = random_measure(np.random.default_rng(0), 500, 3)
    root = build_tree(mu.points, mu.weights, leaf_size=8)
    seen = []

    def walk(c):
        if c.is_leaf:
            seen.extend(c.index.tolist())
        for ch in c.children:
            walk(ch)

    walk(root)
    assert sorted(seen) == list(range(500))
    assert root.mass == pytest.approx(mu.total_mass)


def test_deviation_decreases_with_theta():
    mu = CantorSpec(0.5, 10).build()
    spec = KernelSpec(0.5)
    eps = mu.resolution / 2
    naive = transform_field(mu, spec, eps)
    devs = [contract_deviation(mu, spec, naive, tree_transform_field(mu, spec, eps, th))
            for th in (0.6, 0.3, 0.1)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[1] < 1e-2


def test_bad_theta():
    mu = DiscreteMeasure([[0.0], [1.0]], [1.0, 1.0])
    with pytest.raises(ValueError):
        tree_transform_field(mu, KernelSpec(0.5), 0.1, theta_mac=1.5)
