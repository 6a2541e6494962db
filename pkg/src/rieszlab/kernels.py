"""The odd kernel family ``K(x) = (x_i**n / |x|**(n + s))_i``.

``n = 1`` is the s-Riesz kernel ``x / |x|**(1 + s)``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class KernelSpec:
    """Exponent ``s`` in (0, 1) and odd power ``n >= 1``."""

    s: float
    n: int = 1

    def __post_init__(self):
        s = float(self.s)
        if not (0.0 < s < 1.0) or not np.isfinite(s):
            raise ValidationError(f"kernel exponent s must lie in (0, 1), got {self.s!r}")
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValidationError(f"kernel power n must be an integer, got {self.n!r}")
        n = int(self.n)
        if n < 1 or n % 2 == 0:
            raise ValidationError(f"kernel power n must be odd and >= 1, got {n}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "n", n)

    def to_dict(self):
        return {"s": self.s, "n": self.n}


def _odd_power(x, n):
    # x * |x|^(n-1) is odd bit for bit; x**n is not on every platform
    return x if n == 1 else x * np.abs(x) ** (n - 1)


def kernel_eval(spec, x):
    """Evaluate the kernel at a single nonzero vector ``x``.

    >>> kernel_eval(KernelSpec(0.5), [4.0])
    array([0.5])
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValidationError("kernel_eval expects a single coordinate vector")
    r = np.linalg.norm(x)
    if r == 0.0:
        raise DomainError("kernel is singular at x = 0")
    return _odd_power(x, spec.n) / r ** (spec.n + spec.s)


def kernel_values(spec, diff, norms=None):
    """Vectorised kernel over the last axis of ``diff``.

    Entries with zero norm come back as zeros; callers are responsible for
    masking coincidences out of their sums.
    """
    diff = np.asarray(diff, dtype=float)
    if norms is None:
        norms = np.linalg.norm(diff, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = norms ** (spec.n + spec.s)
        out = _odd_power(diff, spec.n) / denom[..., None]
    out[norms == 0.0] = 0.0
    return out
