"""Generalized house-of-cards chain on {0, 1, 2, ...} and INFINITY.

From a state s >= 2 the chain climbs to s+1 with probability g(s) and drops
to 0 otherwise; 0 always moves to 1; 1 stays with probability p and climbs
to 2 otherwise; INFINITY stays with probability lambda_pf and drops to 0
otherwise. Mapping each state through tau (1 on {0, 1}) gives a thinned
configuration, one step behind the chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from .boundary import TailKind, TailPattern
from .errors import DomainError, TruncationError
from .gfunction import INFINITY, StoppingDistance, check_distance, g, g_values
from .spectral import DensityLike, as_p, build_spectrum

# code used for INFINITY inside integer state arrays
INF_CODE = -1
TAIL_TARGET = 1e-10
TAIL_LIMIT = 1e-8
MIN_TRUNCATION = 10


def transition(p: DensityLike, i: StoppingDistance, j: StoppingDistance) -> float:
    """One-step probability from state i to state j."""
    p = as_p(p)
    i = check_distance(i)
    j = check_distance(j)
    if i is INFINITY:
        if j is INFINITY:
            return build_spectrum(p).lambda_pf
        return 1.0 - build_spectrum(p).lambda_pf if j == 0 else 0.0
    if j is INFINITY:
        return 0.0
    if i == 0:
        return 1.0 if j == 1 else 0.0
    if i == 1:
        return p if j == 1 else (1.0 - p if j == 2 else 0.0)
    if j == i + 1:
        return g(p, i)
    if j == 0:
        return 1.0 - g(p, i)
    return 0.0


def transition_matrix(p: DensityLike, K: int) -> np.ndarray:
    """Transitions among states 0..K+1 and INFINITY (last index).

    Row K+1 is left empty; rows 0..K are complete.
    """
    p = as_p(p)
    if K < 1:
        raise DomainError("K must be at least 1")
    n = K + 3
    P = np.zeros((n, n))
    inf = n - 1
    gs = g_values(p, K)
    rows = np.arange(2, K + 1)
    P[rows, rows + 1] = gs[2:]
    P[rows, 0] = 1.0 - gs[2:]
    P[0, 1] = 1.0
    P[1, 1] = p
    P[1, 2] = 1.0 - p
    lam = build_spectrum(p).lambda_pf
    P[inf, inf] = lam
    P[inf, 0] = 1 - lam
    return P


@dataclass(frozen=True)
class StationaryDistribution:
    probabilities: np.ndarray  # states 0..K
    truncation_level: int
    tail_mass_bound: float

    def prob(self, state: StoppingDistance) -> float:
        state = check_distance(state)
        if state is INFINITY or state > self.truncation_level:
            return 0.0
        return float(self.probabilities[state])


def _unnormalized(p: float, K: int) -> np.ndarray:
    u = np.empty(K + 1)
    u[0] = 1.0 - p
    u[1] = 1.0
    if K >= 2:
        u[2:] = (1.0 - p) * np.cumprod(np.concatenate(([1.0], g_values(p, K - 1)[2:])))
    return u


def _tail_bound(p: float, u: np.ndarray, K: int) -> float:
    # beyond K every step multiplies by some g(k), k >= K, all at most b
    b = max(g(p, K), g(p, K + 1))
    return u[K] * b / (1.0 - b)


def auto_truncation(p: DensityLike, target: float = TAIL_TARGET, limit: int = 10_000_000) -> int:
    """Smallest K >= 10 whose tail mass bound is below ``target``."""
    p = as_p(p)
    K = 64
    while True:
        u = _unnormalized(p, K + 1)
        gs = g_values(p, K + 1)
        k = np.arange(MIN_TRUNCATION, K + 1)
        b = np.maximum(gs[k], gs[k + 1])
        # partial sums only grow with k, so each ratio bounds the tail after normalization
        bound = u[k] * b / (1.0 - b) / np.cumsum(u)[k]
        hit = np.flatnonzero(bound < target)
        if hit.size:
            return int(k[hit[0]])
        if K > limit:
            raise TruncationError("no truncation level reaches the tail target")
        K *= 4


def stationary(p: DensityLike, truncation: Optional[int] = None) -> StationaryDistribution:
    """Stationary law from the balance recursion, truncated at K."""
    p = as_p(p)
    K = auto_truncation(p) if truncation is None else int(truncation)
    if K < MIN_TRUNCATION:
        raise DomainError(f"truncation must be at least {MIN_TRUNCATION}, got {K}")
    u = _unnormalized(p, K)
    z = u.sum()
    tail = _tail_bound(p, u, K) / z
    if tail > TAIL_LIMIT:
        raise TruncationError(f"tail mass bound {tail:.3g} at K={K} exceeds {TAIL_LIMIT:g}; raise the truncation")
    return StationaryDistribution(probabilities=u / z, truncation_level=K, tail_mass_bound=float(tail))


def balance_residual(p: DensityLike, dist: StationaryDistribution) -> float:
    """max |pi P - pi| over states 0..K-1, applying the chain's sparse rows directly."""
    p = as_p(p)
    pi = dist.probabilities
    K = dist.truncation_level
    gs = g_values(p, K)
    moved = np.zeros(K + 1)
    moved[0] = (pi[2:] * (1.0 - gs[2:])).sum()
    moved[1] = pi[0] + p * pi[1]
    moved[2] = (1.0 - p) * pi[1]
    moved[3:] = pi[2:-1] * gs[2:-1]
    # state K also receives mass from K-1 only; states beyond K are cut
    return float(np.abs(moved - pi)[:K].max())


def tau(n: StoppingDistance) -> int:
    n = check_distance(n)
    return 1 if n in (0, 1) else 0


def tau_array(states: np.ndarray) -> np.ndarray:
    """tau applied to an integer state array (INF_CODE for INFINITY)."""
    s = np.asarray(states)
    return ((s == 0) | (s == 1)).astype(np.uint8)


@dataclass(frozen=True)
class GhocPath:
    """A chain trajectory; INFINITY is stored as INF_CODE."""

    states: np.ndarray

    def __len__(self) -> int:
        return len(self.states)

    def to_list(self) -> List[StoppingDistance]:
        return [INFINITY if s == INF_CODE else int(s) for s in self.states]

    def spins(self) -> np.ndarray:
        return tau_array(self.states)

    def is_valid(self) -> bool:
        return path_is_valid(self.states)


def path_is_valid(states: Sequence[int]) -> bool:
    s = np.asarray(states, dtype=np.int64)
    if s.size < 2:
        return True
    a, b = s[:-1], s[1:]
    ok = np.where(
        a == INF_CODE,
        (b == INF_CODE) | (b == 0),
        np.where(a == 0, b == 1, np.where(a == 1, (b == 1) | (b == 2), (b == 0) | (b == a + 1))),
    )
    return bool(ok.all())


def _encode(state: StoppingDistance) -> int:
    return INF_CODE if state is INFINITY else int(state)


def sample_path(p: DensityLike, length: int, seed: int, initial: Optional[StoppingDistance] = None) -> GhocPath:
    """Sample a chain path. Uses numpy's PCG64 generator seeded with ``seed``.

    Without ``initial`` the start is drawn from the stationary law.
    """
    p = as_p(p)
    if length < 1:
        raise DomainError("length must be at least 1")
    rng = np.random.default_rng(seed)
    if initial is None:
        st = stationary(p)
        probs = st.probabilities / st.probabilities.sum()
        state = int(rng.choice(probs.size, p=probs))
    else:
        state = _encode(check_distance(initial))
    lam = build_spectrum(p).lambda_pf
    table = g_values(p, 255).tolist()
    u = rng.random(length - 1)
    out = np.empty(length, dtype=np.int64)
    out[0] = state
    for t in range(length - 1):
        x = u[t]
        if state == 0:
            state = 1
        elif state == 1:
            state = 1 if x < p else 2
        elif state == INF_CODE:
            state = INF_CODE if x < lam else 0
        else:
            while state >= len(table):
                table.append(g(p, len(table)))
            state = state + 1 if x < table[state] else 0
        out[t + 1] = state
    return GhocPath(out)


def _tail_context(tail: TailPattern) -> List[int]:
    if tail.kind is TailKind.ALL_EMPTY:
        return [0, 0]
    if tail.kind is TailKind.ALL_ONES:
        return [1, 1]
    return [int(c) for c in tail.left_block(3 * tail.period + 3)]


def _latest_pair(spins: Sequence[int]) -> Optional[int]:
    for j in range(len(spins) - 1, 0, -1):
        if spins[j] == 1 and spins[j - 1] == 1:
            return j
    return None


def past_distance(left_tail: TailPattern) -> StoppingDistance:
    """Stopping distance of the site right after the tail."""
    ctx = _tail_context(left_tail)
    if ctx[-2] == 0 and ctx[-1] == 1:
        return 0
    j = _latest_pair(ctx)
    return INFINITY if j is None else len(ctx) - j


def distance_sequence(config: Union[str, Sequence[int]], left_tail: TailPattern) -> List[StoppingDistance]:
    """Stopping distances aligned with ``config``.

    Entry i is the stopping distance seen from site i+1, so that
    ``tau(out[i]) == config[i]``. The value for the first site of ``config``
    itself is :func:`past_distance`.
    """
    word = [int(c) for c in config]
    if any(c not in (0, 1) for c in word):
        raise DomainError("configuration must be a 0/1 word")
    ctx = _tail_context(left_tail)
    full = ctx + word
    # the last site may still be paired by the unseen future
    for i in range(1, len(full) - 1):
        if full[i] == 1 and full[i - 1] == 0 and full[i + 1] == 0:
            raise DomainError("configuration has an isolated occupied site")
    last = _latest_pair(ctx)
    out: List[StoppingDistance] = []
    for x in range(len(ctx), len(full)):
        if full[x] == 1 and full[x - 1] == 1:
            last = x
        if full[x] == 1 and full[x - 1] == 0:
            out.append(0)
        elif last is None:
            out.append(INFINITY)
        else:
            out.append(x + 1 - last)
    return out


def foster_drift(p: DensityLike, j_min: int, j_max: int) -> List[tuple]:
    """Drift g(j) A^{j+1} - A^j of h(j) = A^j, A = (1 + 1/lambda_pf)/2, for j_min <= j <= j_max."""
    p = as_p(p)
    if not (2 <= j_min <= j_max):
        raise DomainError("need 2 <= j_min <= j_max")
    A = 0.5 * (1.0 + 1.0 / build_spectrum(p).lambda_pf)
    out = []
    for j in range(j_min, j_max + 1):
        factor = g(p, j) * A - 1.0
        # A^j can overflow for large j; the sign is carried by the factor
        with np.errstate(over="ignore"):
            aj = np.power(A, float(j))
        out.append((j, float(aj * factor) if factor != 0 else 0.0))
    return out


def pattern_probability(p: DensityLike, pattern: str, truncation: Optional[int] = None) -> float:
    """Stationary probability that tau of consecutive chain states spells ``pattern``."""
    p = as_p(p)
    if not pattern or any(c not in "01" for c in pattern):
        raise DomainError("pattern must be a non-empty bit word")
    st = stationary(p, truncation)
    K = st.truncation_level
    size = K + 1 + len(pattern)
    v = np.zeros(size)
    v[: K + 1] = st.probabilities
    gs = g_values(p, size - 1)
    spin = np.zeros(size, dtype=np.uint8)
    spin[:2] = 1
    v = np.where(spin == int(pattern[0]), v, 0.0)
    for c in pattern[1:]:
        nxt = np.zeros(size)
        nxt[1] += v[0]
        nxt[1] += p * v[1]
        nxt[2:] += v[1:-1] * gs[1:-1]
        nxt[0] += (v[2:] * (1.0 - gs[2:])).sum()
        v = np.where(spin == int(c), nxt, 0.0)
    return float(v.sum())
