import numpy as np
import pytest

from rieszlab import DiscreteMeasure, KernelSpec

ACCEPTANCE = []


def record_acceptance(number, name, ok, detail=""):
    ACCEPTANCE.append((number, name, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {name}  {detail}")


@pytest.fixture
def spec():
    return KernelSpec(0.5)


@pytest.fixture
def cloud():
    rng = np.random.default_rng(7)
    pts = rng.uniform(0, 1, (40, 2))
    return DiscreteMeasure(pts, rng.uniform(0.5, 1.5, 40))


def random_measure(rng, N, d):
    pts = rng.uniform(0, 1, (N, d))
    return DiscreteMeasure(pts, rng.uniform(0.1, 1.0, N))


def safe_eps(mu, lo=0.02, hi=0.3, rng=None):
    """An eps in [lo, hi] at least 1e-6 away from every pairwise distance."""
    diff = mu.points[:, None, :] - mu.points[None, :, :]
    dists = np.sort(np.linalg.norm(diff, axis=-1).ravel())
    rng = rng or np.random.default_rng(0)
    for _ in range(100):
        eps = rng.uniform(lo, hi)
        k = np.searchsorted(dists, eps)
        near = min(abs(dists[max(k - 1, 0)] - eps), abs(dists[min(k, dists.size - 1)] - eps))
        if near > 1e-6:
            return float(eps)
    raise RuntimeError("no tie-free eps found")
