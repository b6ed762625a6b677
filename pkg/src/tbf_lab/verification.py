"""Self-checking suites behind ``tbf-lab verify``.

Each suite returns a list of :class:`Check` records. A check compares a
measured quantity against a threshold; the suite passes when all do.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .boundary import BoundaryCondition, TailPattern
from .errors import BoundaryError
from .gfunction import INFINITY, g, variation
from .ghoc import balance_residual, foster_drift, pattern_probability, stationary, transition_matrix
from .oracle import kernel_convergence, pushforward_marginal
from .specification import (
    finite_energy_constant,
    finite_energy_ratio,
    kernel,
    lower_bound_exact,
    sensitivity_bounds,
    sub_boundary,
    witness_pair,
    decompose,
)
from .spectral import build_spectrum, q_power, ratio_limit_twosided, transfer_matrix

DEFAULT_GRID = tuple(round(0.05 * k, 10) for k in range(1, 20))


@dataclass
class Check:
    name: str
    p: float
    value: float
    threshold: float
    passed: bool

    def as_dict(self) -> dict:
        d = asdict(self)
        for k in ("value", "threshold"):
            if not math.isfinite(d[k]):
                d[k] = str(d[k])
        if not math.isfinite(d["p"]):
            d["p"] = None  # checks spanning the whole grid
        return d


def _le(name, p, value, threshold) -> Check:
    return Check(name, float(p), float(value), float(threshold), bool(value <= threshold))


def suite_spectral(ps: Sequence[float], seed: int = 0) -> List[Check]:
    out = []
    for p in ps:
        sp = build_spectrum(p)
        out.append(_le("sum_identity", p, abs(sp.lambda_pf + sp.lambda_r - (1 - p)), 1e-12))
        out.append(_le("product_identity", p, abs(sp.lambda_pf * sp.lambda_r + p * (1 - p)), 1e-12))
        out.append(_le("difference_identity", p, abs(sp.lambda_pf - sp.lambda_r - sp.sqrt_disc), 1e-12))
        Q = transfer_matrix(p)
        M = np.eye(2)
        worst = 0.0
        for m in range(1, 31):
            M = M @ Q
            worst = max(worst, float(np.abs(q_power(p, m) - M).max() / np.abs(M).max()))
        out.append(_le("q_power_vs_product", p, worst, 1e-10))
        # finite-n ratio error should stay within a modest multiple of |a|^n
        n = 40
        Qn, Q2n = q_power(p, n), q_power(p, 2 * n)
        finite = Q2n[0, 0] / (Qn[0, 1] * Qn[1, 0])
        err = abs(finite - ratio_limit_twosided(p, 0, 1, 1))
        out.append(_le("twosided_limit_n40", p, err, 10 * abs(sp.a) ** n + 1e-13))
    a = [build_spectrum(p).a for p in sorted(ps)]
    if len(a) > 1:
        out.append(Check("a_strictly_decreasing", float("nan"), 0.0, 0.0, all(x > y for x, y in zip(a, a[1:]))))
    return out


def suite_gfunction(ps: Sequence[float], seed: int = 0) -> List[Check]:
    out = []
    for p in ps:
        sp = build_spectrum(p)
        out.append(_le("g0", p, abs(g(p, 0)), 0.0))
        out.append(_le("g1", p, abs(g(p, 1) - (1 - p)), 0.0))
        out.append(_le("g2", p, abs(g(p, 2) - (1 - p * p)), 1e-12))
        out.append(_le("g_inf", p, abs(g(p, INFINITY) - sp.lambda_pf), 0.0))
        bad = 0
        for n in range(1, 61):
            if g(p, 2 * n) > g(p, 2 * n + 2) + 1e-15 or g(p, 2 * n + 1) < g(p, 2 * n + 3) - 1e-15:
                bad += 1
        out.append(_le("interleaving_violations", p, bad, 0))
        v60 = variation(p, 60)
        if v60 > 1e-300 and variation(p, 61) > 0:
            out.append(_le("variation_ratio_n60", p, abs(variation(p, 61) / v60 - abs(sp.a)), 1e-3))
        rng = [g(p, n) for n in range(0, 201)] + [g(p, INFINITY)]
        out.append(Check("range_[0,1)", float(p), max(rng), 1.0, min(rng) >= 0 and max(rng) < 1))
    return out


def suite_ghoc(ps: Sequence[float], seed: int = 0) -> List[Check]:
    out = []
    for p in ps:
        st = stationary(p)
        pi = st.probabilities
        out.append(_le("pi1_equals_p2", p, abs(pi[1] - p * p), 1e-10))
        out.append(_le("pi0_equals_p2(1-p)", p, abs(pi[0] - p * p * (1 - p)), 1e-10))
        out.append(_le("balance_residual", p, balance_residual(p, st), 1e-10))
        out.append(_le("tail_mass_bound", p, st.tail_mass_bound, 1e-10))
        P200 = transition_matrix(p, 200)
        rows = np.abs(P200[:201].sum(axis=1) - 1).max()
        out.append(_le("row_stochastic", p, rows, 1e-12))
        drift = foster_drift(p, 2, 2000)
        positive = [j for j, d in drift if d >= 0]
        last = max(positive) if positive else 1
        # negativity from some finite j on; the exceptional set is reported as its largest element
        out.append(Check("foster_exceptional_max_j", float(p), float(last), 1999.0, last < 1999))
        if p <= 0.9:
            worst = max(d for j, d in drift if 5 <= j <= 105)
            out.append(Check("foster_drift_negative_5_105", float(p), worst, 0.0, worst < 0))
    return out


def finite_corpus(rng: np.random.Generator, count: int) -> List[BoundaryCondition]:
    """Boundaries whose unfixed components near the window are all finite.

    Half have a long empty block on one side so that truncation errors decay
    over the depths probed; the rest are short random annuli.
    """
    ones = TailPattern.ones()
    per = [ones, TailPattern.periodic("0110"), TailPattern.periodic("11000")]
    out: List[BoundaryCondition] = []
    while len(out) < count:
        size = int(rng.integers(1, 4))
        if len(out) % 2 == 0:
            block = "11" + "0" * int(rng.integers(16, 24))
            short = "".join(rng.choice(["0", "1"], int(rng.integers(0, 4)))) + "11"
            if len(out) % 4 == 0:
                bc = BoundaryCondition((0, size - 1), block, short, ones, per[int(rng.integers(3))])
            else:
                bc = BoundaryCondition((0, size - 1), short[::-1], block[::-1], per[int(rng.integers(3))], ones)
        else:
            la = "".join(rng.choice(["0", "1"], int(rng.integers(0, 7))))
            ra = "".join(rng.choice(["0", "1"], int(rng.integers(0, 7))))
            bc = BoundaryCondition((0, size - 1), la, ra, per[int(rng.integers(3))], per[int(rng.integers(3))])
        try:
            bc.validate()
            kernel(0.5, bc)
        except BoundaryError:
            continue
        out.append(bc)
    return out


def log_slope(depths: Sequence[int], errors: Sequence[float]) -> float:
    return float(np.polyfit(np.asarray(depths, float), np.log(np.asarray(errors, float)), 1)[0])


def component_reach(bc: BoundaryCondition) -> float:
    """Largest distance from the window reached by a nearby unfixed component, over admissible words."""
    l, r = bc.window
    reach = 0.0
    for word in kernel(0.5, bc).support():
        for U in decompose(bc, word).unfixed_components:
            if not U.is_finite:
                return math.inf
            reach = max(reach, l - U.start, U.stop - r)
    return reach


def suite_kernel(ps: Sequence[float], seed: int = 0, depth: int = 12) -> List[Check]:
    """Closed-form kernels against finite-volume enumeration.

    Boundaries whose nearby unfixed components fit inside the depth box must
    agree to rounding. For the others the error at ``depth`` must sit under
    the envelope 0.5 |a|^depth and decay with slope log|a| (within 20%).
    """
    out = []
    rng = np.random.default_rng(seed)
    corpus = finite_corpus(rng, 8)
    depths = list(range(4, depth + 1))
    reaches = [component_reach(bc) for bc in corpus]
    for p in ps:
        a = abs(build_spectrum(p).a)
        inside = 0.0
        envelope = 0.0
        slope_dev = 0.0
        for bc, reach in zip(corpus, reaches):
            errs = [e for _, e in kernel_convergence(p, bc, depths)]
            if reach <= depth:
                inside = max(inside, errs[-1])
            else:
                envelope = max(envelope, errs[-1] / a**depth)
                if min(errs) > 1e-14:
                    slope_dev = max(slope_dev, abs(log_slope(depths, errs) / math.log(a) - 1))
        out.append(_le("kernel_vs_oracle_inside_box", p, inside, 1e-10))
        out.append(_le("cut_error_over_a_pow_depth", p, envelope, 0.5))
        out.append(_le("log_error_slope_rel_dev", p, slope_dev, 0.2))
        out.append(_le("dlr_consistency", p, _dlr_worst(p, rng, 4), 1e-10))
    return out


def _dlr_worst(p: float, rng: np.random.Generator, count: int) -> float:
    tails = [TailPattern.ones(), TailPattern.empty(), TailPattern.periodic("0110")]
    worst = 0.0
    done = 0
    while done < count:
        size = int(rng.integers(2, 9))
        la = "".join(rng.choice(["0", "1"], int(rng.integers(0, 5))))
        ra = "".join(rng.choice(["0", "1"], int(rng.integers(0, 5))))
        bc = BoundaryCondition((0, size - 1), la, ra, tails[int(rng.integers(3))], tails[int(rng.integers(3))])
        try:
            bc.validate()
            worst = max(worst, dlr_defect(p, bc, *sorted(int(x) for x in rng.integers(0, size, 2))))
        except BoundaryError:
            continue
        done += 1
    return worst


def dlr_defect(p: float, bc: BoundaryCondition, a: int, b: int) -> float:
    """max |(gamma_D gamma_L)(w) - gamma_D(w)| for the sub-window [l+a, l+b]."""
    KD = kernel(p, bc)
    l = bc.l
    sub = (l + a, l + b)
    comp = np.zeros_like(KD.probs)
    for idx in np.flatnonzero(KD.probs > 0):
        w = KD.word(int(idx))
        KL = kernel(p, sub_boundary(bc, w, sub))
        for j in np.flatnonzero(KL.probs > 0):
            nw = w[:a] + KL.word(int(j)) + w[b + 1:]
            comp[int(nw, 2)] += KD.probs[idx] * KL.probs[j]
    return float(np.abs(comp - KD.probs).max())


def witness_difference(p: float, n: int, window_len: int) -> float:
    omega, eta, word = witness_pair(n, window_len)
    return abs(kernel(p, omega).probability(word) - kernel(p, eta).probability(word))


def suite_bounds(ps: Sequence[float], seed: int = 0) -> List[Check]:
    out = []
    for p in ps:
        eq = 0.0
        outside = 0
        for n in range(2, 13):
            for w in (1, 2, 3):
                direct = witness_difference(p, n, w)
                exact = lower_bound_exact(p, n, w)
                eq = max(eq, abs(direct - exact))
                b = sensitivity_bounds(p, 0, w - 1, -n, w - 1 + n)
                if not (b.lower <= exact <= b.upper):
                    outside += 1
        out.append(_le("witness_equals_direct", p, eq, 1e-10))
        out.append(_le("witness_outside_bounds", p, outside, 0))
    return out


def random_energy_instance(p: float, m: int, rng: np.random.Generator):
    """Random boundary pair on [-m-4, m+4] and a random event on [-m, m] charged by both."""
    tails = [TailPattern.ones(), TailPattern.empty(), TailPattern.periodic("0110"), TailPattern.periodic("11000")]
    win = (-m - 4, m + 4)

    def rand_bc():
        while True:
            la = "".join(rng.choice(["0", "1"], int(rng.integers(0, 6))))
            ra = "".join(rng.choice(["0", "1"], int(rng.integers(0, 6))))
            bc = BoundaryCondition(win, la, ra, tails[int(rng.integers(4))], tails[int(rng.integers(4))])
            try:
                bc.validate()
                return bc, kernel(p, bc)
            except BoundaryError:
                continue

    (z, kz), (e, ke) = rand_bc(), rand_bc()
    k = 2 * m + 1
    idx = np.arange(kz.probs.size)
    inner = (idx >> 4) & ((1 << k) - 1)
    mz = np.bincount(inner, weights=kz.probs, minlength=1 << k)
    me = np.bincount(inner, weights=ke.probs, minlength=1 << k)
    both = np.flatnonzero((mz > 0) & (me > 0))
    pick = rng.random(both.size) < 0.5
    if not pick.any():
        pick[int(rng.integers(both.size))] = True
    words = [format(int(c), f"0{k}b") for c in both[pick]]
    return words, (z, e)


def suite_finite_energy(ps: Sequence[float], seed: int = 0, instances: int = 100, m: int = 1) -> List[Check]:
    out = []
    rng = np.random.default_rng(seed)
    for p in ps:
        worst = math.inf
        for _ in range(instances):
            words, pair = random_energy_instance(p, m, rng)
            worst = min(worst, finite_energy_ratio(p, m, words, pair))
        c = finite_energy_constant(p)
        out.append(Check("min_ratio_over_constant", float(p), worst / c, 1.0, worst >= c))
    return out


def suite_pushforward(ps: Sequence[float], seed: int = 0) -> List[Check]:
    out = []
    for p in ps:
        worst = 0.0
        for L in range(1, 5):
            for c in range(1 << L):
                pat = format(c, f"0{L}b")
                worst = max(worst, abs(pattern_probability(p, pat) - pushforward_marginal(p, pat)))
        out.append(_le("chain_vs_enumeration", p, worst, 1e-9))
    return out


# p values used when the caller gives none
SUITE_DEFAULT_P: Dict[str, Sequence[float]] = {
    "spectral": DEFAULT_GRID,
    "gfunction": DEFAULT_GRID,
    "ghoc": DEFAULT_GRID,
    "kernel": (0.3, 0.5),
    "bounds": (0.3, 0.6, 0.9),
    "finite-energy": (0.3, 0.5, 0.8),
    "pushforward": (0.3, 0.5, 0.7, 0.9),
}

SUITES: Dict[str, Callable[..., List[Check]]] = {
    "spectral": suite_spectral,
    "gfunction": suite_gfunction,
    "ghoc": suite_ghoc,
    "kernel": suite_kernel,
    "bounds": suite_bounds,
    "finite-energy": suite_finite_energy,
    "pushforward": suite_pushforward,
}


def run_suite(name: str, ps: Optional[Sequence[float]] = None, seed: int = 0) -> Dict[str, List[Check]]:
    """Run one suite, or every suite for ``"all"``; ``ps=None`` uses per-suite defaults."""
    names = list(SUITES) if name == "all" else [name]
    for n in names:
        if n not in SUITES:
            raise KeyError(name)
    return {n: SUITES[n](SUITE_DEFAULT_P[n] if ps is None else ps, seed) for n in names}
