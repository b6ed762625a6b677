"""Two-sided conditional laws of the thinned field on a finite window.

Given a second-layer boundary, the sites split into a *fixed area* (occupied
sites and their empty neighbours, where the first layer is determined) and
*unfixed components*, where the first layer is a hidden Bernoulli field
constrained to have no adjacent occupied pair. The kernel weight of an
interior word is

    p^{#occupied in closure} (1-p)^{#empty neighbours of occupied in closure}
        * prod over nearby unfixed components U of Z(U)

where the closure of [l, r] is [l-1, r+1] and "nearby" means within
distance one of the closure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ._parallel import ordered_map
from .boundary import BoundaryCondition, TailKind, TailPattern
from .errors import BoundaryError, DomainError, EnumerationLimitError, InadmissibleError
from .spectral import DensityLike, as_p, build_spectrum, q_power_log

MAX_KERNEL_SITES = 24
_CHUNK = 1 << 16

Window = Tuple[int, int]


# ---------------------------------------------------------------------------
# thinning


def thin(word: Union[str, Sequence[int]], left: int = 0, right: int = 0) -> np.ndarray:
    """Remove isolated occupied sites; ``left``/``right`` are the outside neighbours."""
    if isinstance(word, str):
        w = np.array([int(c) for c in word.replace(" ", "")], dtype=np.uint8)
    else:
        w = np.asarray(word, dtype=np.uint8)
    if w.size == 0:
        return w.copy()
    if np.any(w > 1) or left not in (0, 1) or right not in (0, 1):
        raise DomainError("spins must be 0 or 1")
    padded = np.concatenate(([left], w, [right])).astype(np.uint8)
    return w & (padded[:-2] | padded[2:])


def is_non_isolated(spins: np.ndarray) -> bool:
    """True when no interior site of ``spins`` is an isolated occupied site."""
    s = np.asarray(spins, dtype=np.uint8)
    if s.size < 3:
        return True
    iso = (s[1:-1] == 1) & (s[:-2] == 0) & (s[2:] == 0)
    return not bool(iso.any())


# ---------------------------------------------------------------------------
# area decomposition


@dataclass(frozen=True)
class Interval:
    """Integer interval [start, stop]; ``None`` marks an infinite end."""

    start: Optional[int]
    stop: Optional[int]

    @property
    def is_finite(self) -> bool:
        return self.start is not None and self.stop is not None

    @property
    def length(self) -> Optional[int]:
        return self.stop - self.start + 1 if self.is_finite else None

    def intersects(self, lo: int, hi: int) -> bool:
        return (self.start is None or self.start <= hi) and (self.stop is None or self.stop >= lo)

    def __str__(self) -> str:
        a = "-inf" if self.start is None else str(self.start)
        b = "+inf" if self.stop is None else str(self.stop)
        return f"[{a},{b}]"


@dataclass(frozen=True)
class AreaDecomposition:
    window: Window
    region: Tuple[int, int]
    theta: Tuple[int, ...]
    theta_bar: Tuple[int, ...]
    unfixed_components: Tuple[Interval, ...]
    influencing_set: Tuple[Interval, ...]
    outer_left: Optional[Interval]
    outer_right: Optional[Interval]


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Maximal runs of True as (first, last) column pairs."""
    out = []
    start = None
    for k, v in enumerate(mask):
        if v and start is None:
            start = k
        elif not v and start is not None:
            out.append((start, k - 1))
            start = None
    if start is not None:
        out.append((start, len(mask) - 1))
    return out


def _merge(intervals: Iterable[Interval]) -> Tuple[Interval, ...]:
    def key(iv):
        return -math.inf if iv.start is None else iv.start

    merged: List[Interval] = []
    for iv in sorted(intervals, key=key):
        if merged:
            last = merged[-1]
            if last.stop is None or iv.start is None or iv.start <= last.stop + 1:
                stop = None if (last.stop is None or iv.stop is None) else max(last.stop, iv.stop)
                merged[-1] = Interval(last.start, stop)
                continue
        merged.append(iv)
    return tuple(merged)


def decompose(bc: BoundaryCondition, interior: Optional[str] = None) -> AreaDecomposition:
    """Fixed area, nearby unfixed components and influencing set.

    The window is filled with ``interior`` (all empty by default), since which
    components sit next to the window depends on it.
    """
    bc.validate()
    lo, spins = bc.materialize(interior)
    hi = lo + len(spins) - 1
    occ = spins.astype(bool)
    nb = np.zeros_like(occ)
    nb[1:] |= occ[:-1]
    nb[:-1] |= occ[1:]
    fixed = occ | nb
    l, r = bc.window
    comps = []
    for a, b in _runs(~fixed):
        start = None if (a == 0 and bc.left_tail.kind is TailKind.ALL_EMPTY) else lo + a
        stop = None if (b == len(spins) - 1 and bc.right_tail.kind is TailKind.ALL_EMPTY) else lo + b
        iv = Interval(start, stop)
        if iv.intersects(l - 2, r + 2):
            comps.append(iv)
    theta = tuple(int(lo + k) for k in np.flatnonzero(occ))
    theta_bar = tuple(int(lo + k) for k in np.flatnonzero(fixed))
    closure_fixed = [Interval(x, x) for x in theta_bar if l - 1 <= x <= r + 1]
    infl = _merge(closure_fixed + comps)
    outer_left = next((u for u in comps if u.start is None or u.start < l), None)
    outer_right = next((u for u in reversed(comps) if u.stop is None or u.stop > r), None)
    return AreaDecomposition(
        window=(l, r),
        region=(lo, hi),
        theta=theta,
        theta_bar=theta_bar,
        unfixed_components=tuple(comps),
        influencing_set=infl,
        outer_left=outer_left,
        outer_right=outer_right,
    )


# ---------------------------------------------------------------------------
# partition functions of unfixed components


def _log_q00(p: float, m: int) -> float:
    log_abs, _ = q_power_log(p, m)
    return float(log_abs[0, 0])


def unfixed_weight(p: DensityLike, U: Interval, window: Window, log: bool = False) -> float:
    """Z(U) for an unfixed component next to ``window``.

    Finite U: Q^{|U|+1}(0,0)/(1-p). Half-infinite U: lambda^{k}/(1-p) with k the
    number of its sites on the window side of the far closure edge. Bi-infinite
    U: D lambda^{|closure|}/(1-p).
    """
    p = as_p(p)
    sp = build_spectrum(p)
    l, r = window
    ll = math.log(sp.lambda_pf)
    if U.is_finite:
        if U.length < 0:
            raise DomainError("component has negative length")
        val = _log_q00(p, U.length + 1) - math.log1p(-p)
    elif U.start is None and U.stop is None:
        val = math.log(sp.d_const) + (r - l + 3) * ll - math.log1p(-p)
    elif U.start is None:
        val = max(0, U.stop - (l - 1) + 1) * ll - math.log1p(-p)
    else:
        val = max(0, (r + 1) - U.start + 1) * ll - math.log1p(-p)
    return val if log else math.exp(val)


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class KernelResult:
    """Conditional law on the window; ``probs[int(word, 2)]`` is P(word)."""

    window: Window
    probs: np.ndarray
    log_partition: float

    @property
    def size(self) -> int:
        return self.window[1] - self.window[0] + 1

    @property
    def partition_value(self) -> float:
        return math.exp(self.log_partition)

    def word(self, index: int) -> str:
        return format(index, f"0{self.size}b")

    def probability(self, word: str) -> float:
        if len(word) != self.size:
            raise DomainError(f"word must have {self.size} sites")
        return float(self.probs[int(word, 2)])

    @property
    def probabilities(self) -> Dict[str, float]:
        """Admissible words and their probabilities."""
        return {self.word(int(i)): float(self.probs[i]) for i in np.flatnonzero(self.probs > 0)}

    def support(self) -> List[str]:
        return [self.word(int(i)) for i in np.flatnonzero(self.probs > 0)]

    def event_probability(self, words: Iterable[str]) -> float:
        return float(sum(self.probability(w) for w in set(words)))


def _edge_run(fixed: np.ndarray, col: int, step: int) -> int:
    """Length of the unfixed run that starts at ``col`` and extends in direction ``step``."""
    n = 0
    k = col
    while 0 <= k < len(fixed) and not fixed[k]:
        n += 1
        k += step
    return n


def _fixed_mask(spins: np.ndarray) -> np.ndarray:
    occ = spins.astype(bool)
    f = occ.copy()
    f[1:] |= occ[:-1]
    f[:-1] |= occ[1:]
    return f


class _KernelPlan:
    """Boundary-only precomputation shared by all interior words."""

    def __init__(self, p: float, bc: BoundaryCondition):
        self.p = p
        self.bc = bc
        self.k = bc.size
        lo, base = bc.materialize()
        self.lo = lo
        self.li = bc.l - lo
        li, k = self.li, self.k
        # zone covers every site within distance one of the closure
        self.zone = base[li - 3: li + k + 3].astype(np.uint8)
        fixed = _fixed_mask(base)
        # runs that leave the zone through its outer columns
        self.left_ext = _edge_run(fixed, li - 2, -1)
        self.right_ext = _edge_run(fixed, li + k + 1, +1)
        self.left_inf = bc.left_tail.kind is TailKind.ALL_EMPTY and li - 2 - self.left_ext < 0
        self.right_inf = bc.right_tail.kind is TailKind.ALL_EMPTY and li + k + 1 + self.right_ext > len(base) - 1
        sp = build_spectrum(p)
        self.log_lam = math.log(sp.lambda_pf)
        self.log_d = math.log(sp.d_const)
        self.log_1mp = math.log1p(-p)
        maxlen = k + 4 + self.left_ext + self.right_ext + 2
        self.log_zfin = np.array([_log_q00(p, m + 1) for m in range(maxlen + 1)]) - self.log_1mp

    def log_weights(self, idx: np.ndarray) -> np.ndarray:
        k = self.k
        n = idx.size
        z = np.broadcast_to(self.zone, (n, self.zone.size)).copy()
        for j in range(k):
            z[:, 3 + j] = (idx >> (k - 1 - j)) & 1
        occ = z.astype(bool)
        # columns 1..k+4 of z are l-2 .. r+2
        left = occ[:, :-2]
        mid = occ[:, 1:-1]
        right = occ[:, 2:]
        fixed = mid | left | right  # for sites l-2 .. r+2
        # admissibility on the closure l-1 .. r+1
        iso = mid & ~left & ~right
        bad = iso[:, 1:-1].any(axis=1)
        occ_cl = mid[:, 1:-1]
        bd_cl = ~occ_cl & (left[:, 1:-1] | right[:, 1:-1])
        logw = occ_cl.sum(axis=1) * math.log(self.p) + bd_cl.sum(axis=1) * self.log_1mp
        logw = logw + self._components(~fixed)
        logw[bad] = -np.inf
        return logw

    def _components(self, u: np.ndarray) -> np.ndarray:
        """Sum of log Z(U) over unfixed runs meeting columns l-2 .. r+2."""
        n, width = u.shape
        l, r = self.bc.window
        first = l - 2  # absolute site of column 0
        total = np.zeros(n)
        run = np.zeros(n, dtype=np.int64)
        for j in range(width + 1):
            col = u[:, j] if j < width else np.zeros(n, dtype=bool)
            ending = (~col) & (run > 0)
            if ending.any():
                length = run[ending]
                last = first + j - 1
                from_left = length == j  # run began at column 0
                to_right = np.full(length.shape, j == width)
                total[ending] += self._run_weight(length, last, from_left, to_right, l, r)
            run = np.where(col, run + 1, 0)
        return total

    def _run_weight(self, length, last, from_left, to_right, l, r):
        ext_l = np.where(from_left, self.left_ext - 1, 0)
        ext_r = np.where(to_right, self.right_ext - 1, 0)
        inf_l = from_left & self.left_inf
        inf_r = to_right & self.right_inf
        full = length + ext_l + ext_r
        out = self.log_zfin[np.clip(full, 0, len(self.log_zfin) - 1)]
        stop = last + ext_r
        start = last - length + 1 - ext_l
        half_l = (np.maximum(0, stop - (l - 1) + 1)) * self.log_lam - self.log_1mp
        half_r = (np.maximum(0, (r + 1) - start + 1)) * self.log_lam - self.log_1mp
        both = self.log_d + (r - l + 3) * self.log_lam - self.log_1mp
        out = np.where(inf_l & ~inf_r, half_l, out)
        out = np.where(inf_r & ~inf_l, half_r, out)
        out = np.where(inf_l & inf_r, both, out)
        return out


def kernel_log_weights(p: DensityLike, bc: BoundaryCondition) -> np.ndarray:
    """Unnormalized log-weights of all 2^|window| interior words (-inf when inadmissible)."""
    p = as_p(p)
    if bc.size > MAX_KERNEL_SITES:
        raise EnumerationLimitError(f"window of {bc.size} sites exceeds the enumeration cap of {MAX_KERNEL_SITES}")
    bc.validate()
    plan = _KernelPlan(p, bc)
    total = 1 << bc.size
    starts = range(0, total, _CHUNK)
    parts = ordered_map(lambda s: plan.log_weights(np.arange(s, min(s + _CHUNK, total), dtype=np.int64)), starts)
    return np.concatenate(parts)


def kernel(p: DensityLike, bc: BoundaryCondition) -> KernelResult:
    """Closed-form conditional law of the window given ``bc``."""
    logw = kernel_log_weights(p, bc)
    m = logw.max()
    if not np.isfinite(m):
        raise BoundaryError("boundary admits no interior word")
    w = np.exp(logw - m)
    s = w.sum()
    return KernelResult(window=bc.window, probs=w / s, log_partition=float(m + math.log(s)))


def word_log_weight(p: DensityLike, bc: BoundaryCondition, word: str) -> float:
    """Unnormalized log-weight of one interior word, computed through :func:`decompose`."""
    p = as_p(p)
    lo, spins = bc.materialize(word)
    l, r = bc.window
    seg = spins[l - 2 - lo: r + 3 - lo]
    if not is_non_isolated(seg):
        return -math.inf
    dec = decompose(bc, word)
    occ = set(dec.theta)
    fixed = set(dec.theta_bar)
    closure = range(l - 1, r + 2)
    n_occ = sum(1 for x in closure if x in occ)
    n_bd = sum(1 for x in closure if x in fixed and x not in occ)
    val = n_occ * math.log(p) + n_bd * math.log1p(-p)
    for U in dec.unfixed_components:
        val += unfixed_weight(p, U, bc.window, log=True)
    return val


def sub_boundary(bc: BoundaryCondition, outer_word: str, sub_window: Window) -> BoundaryCondition:
    """Boundary for ``sub_window`` obtained by fixing the rest of ``bc``'s window to ``outer_word``.

    ``outer_word`` is a full word on ``bc``'s window; its letters inside
    ``sub_window`` are ignored.
    """
    l, r = bc.window
    a, b = sub_window
    if not (l <= a <= b <= r):
        raise DomainError(f"[{a},{b}] is not inside [{l},{r}]")
    if len(outer_word) != bc.size:
        raise DomainError("outer word has the wrong length")
    return BoundaryCondition(
        window=(a, b),
        left_annulus=bc.left_annulus + outer_word[: a - l],
        right_annulus=outer_word[b - l + 1:] + bc.right_annulus,
        left_tail=bc.left_tail,
        right_tail=bc.right_tail,
    )


# ---------------------------------------------------------------------------
# sensitivity to boundary variation


@dataclass(frozen=True)
class SensitivityBounds:
    n: int
    lower: float
    upper: float


def sensitivity_bounds(p: DensityLike, l: int, r: int, L: int, R: int) -> SensitivityBounds:
    """Two-sided estimate C_-|a|^n <= s([l,r],[L,R]) <= C_+|a|^n with n = min(l-L, R-r)."""
    p = as_p(p)
    if not (L < l - 1 <= r + 1 < R):
        raise DomainError(f"need L < l-1 <= r+1 < R, got l={l} r={r} L={L} R={R}")
    sp = build_spectrum(p)
    n = min(l - L, R - r)
    w = r - l + 1
    decay = abs(sp.a) ** n
    lower = math.sqrt(1 - p) / 6 * p**w * decay
    upper = 24 / (1 - p) ** 2 * max(p, sp.lambda_pf) ** w * decay
    return SensitivityBounds(n=n, lower=lower, upper=upper)


def lower_bound_exact(p: DensityLike, n: int, window_len: int) -> float:
    """Exact kernel difference for the witness pair of :func:`witness_pair`."""
    p = as_p(p)
    if n < 1 or window_len < 1:
        raise DomainError("need n >= 1 and window_len >= 1")
    sp = build_spectrum(p)
    lam, lr, a = sp.lambda_pf, sp.lambda_r, sp.a
    num = (1 - a) * (lam + abs(lr))
    den = (lam + p - a**n * (lr + p)) * (lam + p - a ** (n + 1) * (lr + p))
    return num / den * p**window_len * abs(a) ** n


def witness_pair(n: int, window_len: int, l: int = 0) -> Tuple[BoundaryCondition, BoundaryCondition, str]:
    """Two boundaries agreeing on [l-n, +inf) and the interior word they disagree on most.

    Both are all-ones on the right. On the left, the first has a block of n empty
    sites before the window and ones further out; the second has n+1 empty sites.
    """
    if n < 1 or window_len < 1:
        raise DomainError("need n >= 1 and window_len >= 1")
    win = (l, l + window_len - 1)
    ones = TailPattern.ones()
    omega = BoundaryCondition(win, "1" + "0" * n, "11", ones, ones)
    eta = BoundaryCondition(win, "0" * (n + 1), "11", ones, ones)
    return omega, eta, "0" + "1" * (window_len - 1)


def _agree_outside(b1: BoundaryCondition, b2: BoundaryCondition, frozen: Window) -> bool:
    l, r = b1.window
    return all(b1.spin_at(x) == b2.spin_at(x) for x in range(frozen[0], frozen[1] + 1) if not l <= x <= r)


def sensitivity_over_family(p: DensityLike, window: Window, frozen: Window,
                            family: Sequence[Tuple[BoundaryCondition, BoundaryCondition]]) -> float:
    """Largest kernel difference over a family of boundary pairs agreeing on ``frozen``."""
    l, r = window
    if not (frozen[0] <= l and r <= frozen[1]):
        raise DomainError("window must lie inside the frozen interval")
    best = 0.0
    for b1, b2 in family:
        if b1.window != tuple(window) or b2.window != tuple(window):
            raise DomainError("family member has a different window")
        if not _agree_outside(b1, b2, frozen):
            raise DomainError("boundary pair disagrees inside the frozen interval")
        k1, k2 = kernel(p, b1), kernel(p, b2)
        best = max(best, float(np.abs(k1.probs - k2.probs).max()))
    return best


def finite_energy_constant(p: DensityLike) -> float:
    return 2.0**-16 * as_p(p) ** 8


def finite_energy_ratio(p: DensityLike, m: int, event_words: Sequence[str],
                        bc_pair: Tuple[BoundaryCondition, BoundaryCondition]) -> float:
    """gamma(A | zeta) / gamma(A | eta) on the window [-m-4, m+4], A a cylinder on [-m, m].

    The event is the union of the given words on [-m, m].
    """
    if m < 0:
        raise DomainError("m must be non-negative")
    words = set(event_words)
    if not words:
        raise DomainError("event must be non-empty")
    if any(len(w) != 2 * m + 1 for w in words):
        raise DomainError(f"event words must have {2 * m + 1} sites")
    win = (-m - 4, m + 4)
    zeta, eta = bc_pair
    if zeta.window != win or eta.window != win:
        raise DomainError(f"boundaries must use the window [{win[0]},{win[1]}]")
    vals = []
    for bc in (zeta, eta):
        kr = kernel(p, bc)
        idx = np.arange(kr.probs.size)
        inner = (idx >> 4) & ((1 << (2 * m + 1)) - 1)
        targets = np.array([int(w, 2) for w in words])
        vals.append(float(kr.probs[np.isin(inner, targets)].sum()))
    if vals[0] <= 0 or vals[1] <= 0:
        raise InadmissibleError("event has probability zero under one of the boundaries")
    return vals[0] / vals[1]
