"""Brute-force ground truth by enumerating first-layer Bernoulli words.

Nothing here uses the transfer matrix or the closed-form kernels: words are
integer bitmasks (site ``start + k`` is bit k), thinned with shifts, and
weighted by p^popcount (1-p)^(n - popcount).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ._parallel import ordered_map
from .boundary import BoundaryCondition, TailPattern
from .errors import DomainError, EnumerationLimitError, InadmissibleError, PaddingInstabilityError
from .gfunction import INFINITY, StoppingDistance, check_distance
from .specification import kernel
from .spectral import DensityLike, as_p

MAX_FREE_SITES = 26
MAX_SITES = 62
_CHUNK = 1 << 20


def _thin_masks(cfg: np.ndarray, n: int, left: int, right: int) -> np.ndarray:
    full = np.uint64((1 << n) - 1)
    nb = (cfg << np.uint64(1)) | (cfg >> np.uint64(1)) | np.uint64(left) | np.uint64(right << (n - 1))
    return cfg & nb & full


def _parse_outer(first_layer_bc) -> Tuple[int, int]:
    if isinstance(first_layer_bc, str):
        s = first_layer_bc.strip()
        if len(s) == 2:
            vals = (s[0], s[1])
        elif len(s) == 4:
            vals = (s[1], s[2])  # innermost spin on each side
        else:
            raise DomainError("first-layer boundary must have 2 or 4 spins")
        out = tuple(int(c) for c in vals)
    else:
        out = tuple(int(c) for c in first_layer_bc)
        if len(out) == 4:
            out = (out[1], out[2])
    if len(out) != 2 or any(c not in (0, 1) for c in out):
        raise DomainError("first-layer boundary spins must be 0 or 1")
    return out


def conditional_table(p: DensityLike, delta: Tuple[int, int], lam: Tuple[int, int],
                      target_annulus: str, first_layer_bc=(0, 0)) -> np.ndarray:
    """Finite-volume law of the thinned window given the thinned annulus on delta minus lam.

    Returns an array indexed by ``int(word, 2)`` over all interior words.
    """
    p = as_p(p)
    A, B = delta
    l, r = lam
    if not (A <= l <= r <= B):
        raise DomainError(f"window [{l},{r}] must lie in [{A},{B}]")
    n = B - A + 1
    k = r - l + 1
    if n > MAX_SITES:
        raise EnumerationLimitError(f"{n} sites exceed the bitmask width {MAX_SITES}")
    if len(target_annulus) != n - k or any(c not in "01" for c in target_annulus):
        raise DomainError(f"annulus word must have {n - k} bits")
    left, right = _parse_outer(first_layer_bc)
    ann_sites = [x for x in range(A, B + 1) if not l <= x <= r]
    ann_mask = 0
    ann_val = 0
    for x, c in zip(ann_sites, target_annulus):
        ann_mask |= 1 << (x - A)
        ann_val |= int(c) << (x - A)
    # thinning never creates occupied sites, so an occupied target forces the first layer
    forced = ann_val
    free = [b for b in range(n) if not (forced >> b) & 1]
    if len(free) > MAX_FREE_SITES:
        raise EnumerationLimitError(f"{len(free)} free sites exceed the cap of {MAX_FREE_SITES}")
    total = 1 << len(free)
    logp, log1mp = math.log(p), math.log1p(-p)
    int_bits = [l - A + j for j in range(k)]

    def run(start: int) -> np.ndarray:
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        cfg = np.full(idx.shape, np.uint64(forced))
        for j, b in enumerate(free):
            cfg |= ((idx >> np.uint64(j)) & np.uint64(1)) << np.uint64(b)
        t = _thin_masks(cfg, n, left, right)
        ok = (t & np.uint64(ann_mask)) == np.uint64(ann_val)
        pop = np.bitwise_count(cfg[ok]).astype(np.float64)
        w = np.exp(pop * logp + (n - pop) * log1mp)
        word = np.zeros(int(ok.sum()), dtype=np.int64)
        tk = t[ok]
        for j, b in enumerate(int_bits):
            word |= ((tk >> np.uint64(b)) & np.uint64(1)).astype(np.int64) << (k - 1 - j)
        return np.bincount(word, weights=w, minlength=1 << k)

    acc = np.zeros(1 << k)
    for part in ordered_map(run, range(0, total, _CHUNK)):
        acc += part
    den = acc.sum()
    if den <= 0:
        raise InadmissibleError("conditioning event has probability zero")
    return acc / den


def finite_conditional(p: DensityLike, delta: Tuple[int, int], lam: Tuple[int, int], target_interior: str,
                       target_annulus: str, first_layer_bc=(0, 0)) -> float:
    """P(thinned window = target_interior | thinned annulus = target_annulus) inside delta."""
    k = lam[1] - lam[0] + 1
    if len(target_interior) != k or any(c not in "01" for c in target_interior):
        raise DomainError(f"interior word must have {k} bits")
    table = conditional_table(p, delta, lam, target_annulus, first_layer_bc)
    return float(table[int(target_interior, 2)])


def truncated_problem(bc: BoundaryCondition, depth: int):
    """Delta, annulus word and first-layer outer spins for ``bc`` cut at ``depth``."""
    if depth < 1:
        raise DomainError("depth must be at least 1")
    l, r = bc.window
    A, B = l - depth, r + depth
    ann = "".join(str(bc.spin_at(x)) for x in range(A, l)) + "".join(str(bc.spin_at(x)) for x in range(r + 1, B + 1))
    # an occupied second-layer site is occupied in the first layer; an empty one can be taken empty
    outer = (bc.spin_at(A - 1), bc.spin_at(B + 1))
    return (A, B), ann, outer


def kernel_convergence(p: DensityLike, bc: BoundaryCondition, depths: Sequence[int]) -> List[Tuple[int, float]]:
    """Max deviation between the closed-form kernel and the depth-d finite-volume law."""
    ref = kernel(p, bc).probs
    out = []
    for d in depths:
        delta, ann, outer = truncated_problem(bc, d)
        table = conditional_table(p, delta, bc.window, ann, outer)
        out.append((int(d), float(np.abs(table - ref).max())))
    return out


def past_for_distance(n: StoppingDistance) -> Tuple[TailPattern, str]:
    """A left tail and annulus whose stopping distance at site 0 is n."""
    n = check_distance(n)
    if n is INFINITY:
        return TailPattern.empty(), ""
    if n == 0:
        return TailPattern.ones(), "01"
    return TailPattern.ones(), "0" * (n - 1)


def gfunction_via_kernels(p: DensityLike, n: StoppingDistance, k_values: Sequence[int]) -> List[Tuple[int, float]]:
    """P(site 0 empty) under the kernel on [0, k] with the given past and an all-ones future."""
    tail, ann = past_for_distance(n)
    out = []
    for k in k_values:
        if not 0 <= k <= 22:
            raise EnumerationLimitError("k must lie in [0, 22]")
        bc = BoundaryCondition((0, k), ann, "", tail, TailPattern.ones())
        probs = kernel(p, bc).probs
        out.append((int(k), float(probs[: 1 << k].sum())))
    return out


@dataclass(frozen=True)
class MonteCarloCounts:
    length: int
    window_counts: Dict[str, int] = field(repr=False)
    totals: Dict[int, int]

    def frequency(self, pattern: str) -> float:
        return self.window_counts.get(pattern, 0) / self.totals[len(pattern)]


def monte_carlo_thin(p: DensityLike, length: int, seed: int, max_pattern: int = 4) -> MonteCarloCounts:
    """Thin a sampled Bernoulli line and count every pattern of length <= max_pattern."""
    p = as_p(p)
    if length < 1000:
        raise DomainError("length must be at least 1000")
    rng = np.random.default_rng(seed)
    first = (rng.random(length + 2) < p).astype(np.uint8)
    s = first[1:-1] & (first[:-2] | first[2:])
    counts: Dict[str, int] = {}
    totals: Dict[int, int] = {}
    for L in range(1, max_pattern + 1):
        m = length - L + 1
        code = np.zeros(m, dtype=np.int64)
        for j in range(L):
            code = (code << 1) | s[j: j + m]
        bc = np.bincount(code, minlength=1 << L)
        totals[L] = m
        for c, v in enumerate(bc):
            counts[format(c, f"0{L}b")] = int(v)
    return MonteCarloCounts(length=length, window_counts=counts, totals=totals)


def _pushforward(p: float, pattern: str, pad: int) -> float:
    k = len(pattern)
    n = k + 2 * pad
    if n > MAX_FREE_SITES:
        raise EnumerationLimitError(f"pattern plus padding spans {n} sites, above {MAX_FREE_SITES}")
    target = 0
    for j, c in enumerate(pattern):
        target |= int(c) << (pad + j)
    pmask = ((1 << k) - 1) << pad
    total = 1 << n
    logp, log1mp = math.log(p), math.log1p(-p)

    def run(start: int) -> float:
        cfg = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        pop = np.bitwise_count(cfg).astype(np.float64)
        w = np.exp(pop * logp + (n - pop) * log1mp)
        acc = 0.0
        for left in (0, 1):
            for right in (0, 1):
                ow = (p if left else 1 - p) * (p if right else 1 - p)
                t = _thin_masks(cfg, n, left, right)
                hit = (t & np.uint64(pmask)) == np.uint64(target)
                acc += ow * float(w[hit].sum())
        return acc

    return float(sum(ordered_map(run, range(0, total, _CHUNK))))


def pushforward_marginal(p: DensityLike, pattern: str, padding: Optional[int] = None) -> float:
    """Exact probability that the thinned field shows ``pattern`` on a window.

    Computed at ``padding`` and at twice that (when it fits) and required to agree to 1e-12.
    """
    p = as_p(p)
    if not pattern or any(c not in "01" for c in pattern):
        raise DomainError("pattern must be a non-empty bit word")
    pad = 1 if padding is None else int(padding)
    if pad < 0:
        raise DomainError("padding must be non-negative")
    val = _pushforward(p, pattern, pad)
    pad2 = min(2 * pad if pad else 1, (MAX_FREE_SITES - len(pattern)) // 2)
    if pad2 > pad:
        val2 = _pushforward(p, pattern, pad2)
        if abs(val - val2) > 1e-12:
            raise PaddingInstabilityError(f"marginal of {pattern!r} moved by {abs(val - val2):.3g} when padding doubled")
    return val
