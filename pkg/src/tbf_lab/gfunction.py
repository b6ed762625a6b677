"""One-sided conditional probabilities of the thinned field.

g(p, n) is the probability that site 0 is empty given the past, where n is the
distance back to the nearest pair of adjacent occupied sites (0 if the past
ends in ``01``, INFINITY if the past has no occupied site at all).
"""

from __future__ import annotations

import enum
from typing import Sequence, Union

import numpy as np

from .errors import DomainError
from .spectral import DensityLike, as_p, build_spectrum


class Inf(enum.Enum):
    INFINITY = "inf"

    def __repr__(self) -> str:
        return "INFINITY"

    def __str__(self) -> str:
        return "inf"


INFINITY = Inf.INFINITY

StoppingDistance = Union[int, Inf]

# beyond this the a^n terms are below double resolution and g is lambda_pf
ASYMPTOTIC_CUTOFF = 10_000


def check_distance(n) -> StoppingDistance:
    if n is INFINITY:
        return n
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"stopping distance must be a non-negative integer or INFINITY, got {n!r}")
    return int(n)


def parse_distance(text: str) -> StoppingDistance:
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return INFINITY
    try:
        return check_distance(int(t))
    except ValueError:
        raise DomainError(f"cannot read stopping distance {text!r}") from None


def g(p: DensityLike, n: StoppingDistance) -> float:
    """Probability of an empty site after a past with stopping distance n."""
    p = as_p(p)
    n = check_distance(n)
    sp = build_spectrum(p)
    lam, lr, a = sp.lambda_pf, sp.lambda_r, sp.a
    if n is INFINITY or n > ASYMPTOTIC_CUTOFF:
        return lam
    if n == 0:
        return 0.0
    if n == 1:
        return 1.0 - p
    # both sides multiplied through by (1 - lam)(1 - lr)
    num = lam * (1.0 - lr) - a**n * lam * (1.0 - lam)
    den = (1.0 - lr) - a ** (n - 1) * (1.0 - lam)
    return num / den


def g_values(p: DensityLike, n_max: int) -> np.ndarray:
    """Array of g(p, n) for n = 0..n_max, vectorized."""
    p = as_p(p)
    if isinstance(n_max, bool) or not isinstance(n_max, (int, np.integer)) or n_max < 0:
        raise DomainError(f"n_max must be a non-negative integer, got {n_max!r}")
    sp = build_spectrum(p)
    lam, lr, a = sp.lambda_pf, sp.lambda_r, sp.a
    n = np.arange(int(n_max) + 1, dtype=np.float64)
    with np.errstate(under="ignore"):
        an = np.power(a, np.minimum(n, ASYMPTOTIC_CUTOFF + 1))
    out = (lam * (1.0 - lr) - an * lam * (1.0 - lam)) / ((1.0 - lr) - an / a * (1.0 - lam))
    out[n > ASYMPTOTIC_CUTOFF] = lam
    out[0] = 0.0
    if n_max >= 1:
        out[1] = 1.0 - p
    return out


def _den(sp, n: int) -> float:
    return (1.0 - sp.lambda_r) - sp.a ** (n - 1) * (1.0 - sp.lambda_pf)


def variation(p: DensityLike, n: int) -> float:
    """|g(n) - g(n+1)|; only meaningful from n = 2 on.

    Evaluated in factored form, since the plain difference cancels to
    rounding noise once |a|^n nears machine precision:

        g(n) - g(n+1) = a^(n-1) (1-a)^2 lam (1-lam)(1-lr) / (den(n) den(n+1))
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError(f"variation needs an integer n >= 2, got {n!r}")
    sp = build_spectrum(p)
    lam, lr, a = sp.lambda_pf, sp.lambda_r, sp.a
    num = abs(a) ** (n - 1) * (1.0 - a) ** 2 * lam * (1.0 - lam) * (1.0 - lr)
    return num / (_den(sp, n) * _den(sp, n + 1))


def parity_limit(n: int) -> float:
    """lim_{p -> 1} g(p, n)."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"parity_limit needs an integer n >= 1, got {n!r}")
    if n >= 3 and n % 2 == 1:
        return 2.0 / (n + 1)
    return 0.0


def sweep_g(p_values: Sequence[DensityLike], n_values: Sequence[StoppingDistance]) -> np.ndarray:
    """Table with one row per p and one column per n."""
    if len(p_values) == 0 or len(n_values) == 0:
        raise DomainError("sweep_g needs non-empty p and n lists")
    ns = [check_distance(n) for n in n_values]
    return np.array([[g(p, n) for n in ns] for p in p_values])
