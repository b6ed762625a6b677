"""Spectral data of the isolation-constrained transfer matrix.

Q is the symmetric 2x2 matrix

    Q = [[1-p,          sqrt(p(1-p))],
         [sqrt(p(1-p)), 0           ]]

whose entries weight neighbouring first-layer spins so that no two adjacent
sites are both occupied. Everything here is evaluated from closed forms;
no iterative eigen-solver is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np

from .errors import DomainError

DEFAULT_RTOL = 1e-10


@dataclass(frozen=True)
class Density:
    """Occupation probability of the first-layer Bernoulli field."""

    p: float

    def __post_init__(self):
        p = self.p
        if isinstance(p, bool) or not isinstance(p, (int, float, np.floating, np.integer)):
            raise DomainError(f"density must be a real number, got {p!r}")
        p = float(p)
        if not math.isfinite(p) or not (0.0 < p < 1.0):
            raise DomainError(f"density p must lie in the open interval (0, 1), got {p!r}")
        object.__setattr__(self, "p", p)

    def __float__(self) -> float:
        return self.p


DensityLike = Union[float, Density]


def as_p(p: DensityLike) -> float:
    """Validate a density and return it as a plain float."""
    if isinstance(p, Density):
        return p.p
    return Density(p).p


def _check_spin(x) -> int:
    if x not in (0, 1):
        raise DomainError(f"spin must be 0 or 1, got {x!r}")
    return int(x)


def transfer_matrix(p: DensityLike) -> np.ndarray:
    p = as_p(p)
    r = math.sqrt(p * (1.0 - p))
    return np.array([[1.0 - p, r], [r, 0.0]])


def alpha(p: DensityLike, x: int) -> float:
    """Single-site Bernoulli weight p^x (1-p)^(1-x)."""
    p = as_p(p)
    return p if _check_spin(x) == 1 else 1.0 - p


@dataclass(frozen=True)
class Spectrum:
    p: float
    lambda_pf: float
    lambda_r: float
    a: float
    v_pf: Tuple[float, float]
    v_r: Tuple[float, float]
    c_ratio: float
    d_const: float
    sqrt_disc: float

    def check(self, tol: float = DEFAULT_RTOL) -> None:
        """Raise AssertionError if any defining identity fails."""
        p, lam, lr = self.p, self.lambda_pf, self.lambda_r
        assert abs(lam + lr - (1 - p)) <= tol
        assert abs(lam * lr + p * (1 - p)) <= tol
        assert abs(lam - lr - self.sqrt_disc) <= tol
        assert -1.0 < self.a < 0.0
        q = transfer_matrix(p)
        v = np.array(self.v_pf)
        assert np.allclose(q @ v, lam * v, rtol=tol, atol=tol)


@lru_cache(maxsize=4096)
def _spectrum(p: float) -> Spectrum:
    q = 1.0 - p
    s = math.sqrt(q * (3.0 * p + 1.0))
    lam = 0.5 * (q + s)
    # q - s loses digits for p near 0; use the product identity instead
    lr = -p * q / lam
    r = math.sqrt(p * q)
    return Spectrum(
        p=p,
        lambda_pf=lam,
        lambda_r=lr,
        a=lr / lam,
        v_pf=(lam / r, 1.0),
        v_r=(lr / r, 1.0),
        c_ratio=s / abs(lr),
        d_const=q * (lam + 2.0 * p) / lam**3,
        sqrt_disc=s,
    )


def build_spectrum(p: DensityLike) -> Spectrum:
    return _spectrum(as_p(p))


def _check_power(m) -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError(f"power m must be a positive integer, got {m!r}; use the identity for Q^0")
    return int(m)


def _power_core(sp: Spectrum, m: int) -> np.ndarray:
    """The bracketed matrix of the closed form, without the lambda^m/s prefactor."""
    lam, lr = sp.lambda_pf, sp.lambda_r
    am = sp.a**m
    r = math.sqrt(sp.p * (1.0 - sp.p))
    off = (1.0 - am) * r
    return np.array([[lam - am * lr, off], [off, -lr + am * lam]])


def q_power(p: DensityLike, m: int) -> np.ndarray:
    """Q^m from the spectral closed form (m >= 1)."""
    sp = build_spectrum(p)
    m = _check_power(m)
    core = _power_core(sp, m)
    log_pref = m * math.log(sp.lambda_pf) - math.log(sp.sqrt_disc)
    if log_pref > -700.0:
        return math.exp(log_pref) * core
    log_abs, sign = q_power_log(p, m)
    with np.errstate(under="ignore"):
        return sign * np.exp(log_abs)


def q_power_log(p: DensityLike, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Q^m as (log|Q^m|, sign(Q^m)) entrywise; safe for very large m.

    Zero entries get log-magnitude -inf and sign 0.
    """
    sp = build_spectrum(p)
    m = _check_power(m)
    core = _power_core(sp, m)
    sign = np.sign(core)
    with np.errstate(divide="ignore"):
        log_abs = m * math.log(sp.lambda_pf) - math.log(sp.sqrt_disc) + np.log(np.abs(core))
    return log_abs, sign


def ratio_limit_onesided(p: DensityLike, i: int, x: int, y: int) -> float:
    """lim_n Q^(n+i)(w, x) / Q^n(w, y), which does not depend on w."""
    sp = build_spectrum(p)
    v = sp.v_pf
    return sp.lambda_pf**i * v[_check_spin(x)] / v[_check_spin(y)]


def ratio_limit_twosided(p: DensityLike, i: int, x: int, y: int) -> float:
    """lim_{n,m} Q^(n+m+i)(w, e) / (Q^n(w, x) Q^m(y, e)), independent of w and e."""
    sp = build_spectrum(p)
    v = sp.v_pf
    return sp.lambda_pf**i * sp.c_ratio / (v[_check_spin(x)] * v[_check_spin(y)])


def isolation_weight(p: DensityLike, interval_length: int, left_spin: int, right_spin: int) -> float:
    """Bernoulli probability that a run of ``interval_length`` sites, flanked by the
    two given spins, contains no pair of adjacent occupied sites."""
    p = as_p(p)
    if interval_length < 0:
        raise DomainError("interval_length must be non-negative")
    l, r = _check_spin(left_spin), _check_spin(right_spin)
    num = q_power(p, interval_length + 1)[l, r]
    return float(num / math.sqrt(alpha(p, l) * alpha(p, r)))
