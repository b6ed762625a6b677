import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import glue_is_admissible
from tbf_lab import BoundaryError, DomainError, InadmissibleError
from tbf_lab.boundary import (
    BoundaryCondition,
    BoundaryParseError,
    TailKind,
    TailPattern,
    format_boundary,
    parse_boundary,
)
from tbf_lab.oracle import kernel_convergence
from tbf_lab.specification import (
    Interval,
    decompose,
    finite_energy_constant,
    finite_energy_ratio,
    is_non_isolated,
    kernel,
    kernel_log_weights,
    lower_bound_exact,
    sensitivity_bounds,
    sensitivity_over_family,
    sub_boundary,
    thin,
    unfixed_weight,
    witness_pair,
)
from tbf_lab.spectral import build_spectrum, q_power

ONES = TailPattern.ones()
EMPTY = TailPattern.empty()


# thinning ------------------------------------------------------------------


def test_thin_examples():
    assert thin("0110100").tolist() == [0, 1, 1, 0, 0, 0, 0]
    assert thin("1", left=1).tolist() == [1]
    assert thin("1").tolist() == [0]
    assert thin("111").tolist() == [1, 1, 1]


@settings(max_examples=80, deadline=None)
@given(st.text(alphabet="01", min_size=1, max_size=30), st.integers(0, 1), st.integers(0, 1))
def test_thin_against_definition(word, left, right):
    s = [left] + [int(c) for c in word] + [right]
    expected = [s[i] & (s[i - 1] | s[i + 1]) for i in range(1, len(s) - 1)]
    out = thin(word, left, right)
    assert out.tolist() == expected
    assert is_non_isolated(np.array([left] + out.tolist() + [right])) or left or right


def test_is_non_isolated():
    assert is_non_isolated(np.array([0, 1, 1, 0]))
    assert not is_non_isolated(np.array([0, 1, 0, 0]))


# boundaries ----------------------------------------------------------------


def test_periodic_tail_normalizes():
    assert TailPattern.periodic("000").kind is TailKind.ALL_EMPTY
    assert TailPattern.periodic("11").kind is TailKind.ALL_ONES
    with pytest.raises(BoundaryError):
        TailPattern.periodic("0100")
    with pytest.raises(BoundaryError):
        TailPattern.periodic("100")  # wraps into 0 1 0


def test_spin_at_periodic_tails():
    bc = BoundaryCondition((0, 0), "", "", TailPattern.periodic("0011"), TailPattern.periodic("1100"))
    assert [bc.spin_at(x) for x in range(-4, 0)] == [0, 0, 1, 1]
    assert [bc.spin_at(x) for x in range(-8, -4)] == [0, 0, 1, 1]
    assert [bc.spin_at(x) for x in range(1, 9)] == [1, 1, 0, 0, 1, 1, 0, 0]


def test_parse_and_format_round_trip():
    text = "tailL=per:0110 annulus=00 window=[ -2 , 3 ] annulusR=11 tailR=empty"
    bc = parse_boundary(text)
    assert bc.window == (-2, 3)
    assert bc.L == -4 and bc.R == 5
    again = parse_boundary(format_boundary(bc))
    assert again == bc
    # key order is free
    assert parse_boundary("tailR=empty window=[-2,3] annulusR=11 annulus=00 tailL=per:0110") == bc


@pytest.mark.parametrize(
    "text,col",
    [
        ("tailL=ones window=[0,2] tailR=onez", 30),
        ("tailL=ones annulus=0x1 window=[0,2] tailR=ones", 20),
        ("tailL=ones window=(0,2) tailR=ones", 18),
        ("tailL=ones window=[0,2]", 23),
        ("tailL=ones sideways=1 window=[0,2] tailR=ones", 11),
    ],
)
def test_parse_errors_point_at_the_problem(text, col):
    with pytest.raises(BoundaryParseError) as info:
        parse_boundary(text)
    assert info.value.position == col
    rendered = info.value.render().splitlines()
    assert rendered[0] == text
    assert rendered[1].index("^") == col


def test_parse_rejects_isolated_site_in_annulus():
    with pytest.raises(BoundaryParseError):
        parse_boundary("tailL=empty annulus=010 window=[0,1] tailR=ones")


# area decomposition --------------------------------------------------------


def test_decomposition_with_mixed_blocks():
    bc = BoundaryCondition((-7, 6), "110000", "0000111", ONES, ONES)
    dec = decompose(bc, "00001110001111")
    assert [str(u) for u in dec.unfixed_components] == ["[-10,-5]", "[1,1]", "[8,9]"]
    assert str(dec.outer_left) == "[-10,-5]"
    assert str(dec.outer_right) == "[8,9]"
    assert [str(u) for u in dec.influencing_set] == ["[-10,9]"]


def test_decomposition_all_empty_is_bi_infinite():
    bc = parse_boundary("tailL=empty window=[0,0] tailR=empty")
    dec = decompose(bc)
    assert len(dec.unfixed_components) == 1
    assert dec.unfixed_components[0] == Interval(None, None)


def test_unfixed_weight_cases():
    p = 0.5
    sp = build_spectrum(p)
    assert unfixed_weight(p, Interval(0, 3), (0, 0)) == pytest.approx(q_power(p, 5)[0, 0] / (1 - p), rel=1e-13)
    assert unfixed_weight(p, Interval(None, None), (0, 0)) == pytest.approx(sp.d_const * sp.lambda_pf**3 / (1 - p))
    # only sites reaching into the closure of the window carry a power of lambda
    assert unfixed_weight(p, Interval(None, -2), (0, 0)) == pytest.approx(1 / (1 - p))
    assert unfixed_weight(p, Interval(None, 0), (0, 0)) == pytest.approx(sp.lambda_pf**2 / (1 - p))
    assert unfixed_weight(p, Interval(3, None), (0, 0)) == pytest.approx(1 / (1 - p))


# kernels -------------------------------------------------------------------


def test_all_empty_singleton_is_point_mass():
    k = kernel(0.5, parse_boundary("tailL=empty window=[0,0] tailR=empty"))
    assert k.probabilities == {"0": 1.0}
    assert k.partition_value == pytest.approx(1.8090169943749475, abs=1e-12)


def test_kernel_frozen_values():
    k = kernel(0.5, parse_boundary("tailL=ones annulus=00 window=[0,2] annulusR=00 tailR=empty"))
    assert k.support() == ["000", "011", "110", "111"]
    assert k.probability("000") == pytest.approx(0.7060113295832982, abs=1e-12)
    assert k.probability("011") == pytest.approx(0.12732200375003505, abs=1e-12)
    assert k.probability("101") == 0.0
    assert k.event_probability(["110", "111"]) == pytest.approx(1 / 6, abs=1e-12)


def test_kernel_forced_words():
    # an occupied neighbour with an empty site behind it must be paired through the window
    assert kernel(0.5, BoundaryCondition((0, 0), "01", "", ONES, EMPTY)).probabilities == {"1": 1.0}
    assert kernel(0.5, BoundaryCondition((0, 0), "0", "0", ONES, ONES)).probabilities == {"0": 1.0}


def boundaries():
    tails = st.sampled_from([EMPTY, ONES, TailPattern.periodic("0011"), TailPattern.periodic("01110")])
    blocks = st.lists(st.sampled_from(["0", "00", "11", "111"]), max_size=4).map("".join)

    @st.composite
    def build(draw):
        left_tail, right_tail = draw(tails), draw(tails)
        size = draw(st.integers(1, 6))
        bc = BoundaryCondition((0, size - 1), draw(blocks), draw(blocks), left_tail, right_tail)
        try:
            bc.validate()
        except BoundaryError:
            return BoundaryCondition((0, size - 1), "00", "00", left_tail, right_tail)
        return bc

    return build()


@settings(max_examples=60, deadline=None)
@given(boundaries(), st.sampled_from([0.2, 0.5, 0.8]))
def test_support_is_exactly_the_admissible_glue(bc, p):
    k = kernel(p, bc)
    assert k.probs.sum() == pytest.approx(1.0, abs=1e-12)
    for idx in range(k.probs.size):
        word = k.word(idx)
        assert (k.probs[idx] > 0) == glue_is_admissible(bc, word)


@settings(max_examples=40, deadline=None)
@given(boundaries(), st.sampled_from([0.3, 0.7]))
def test_scalar_weights_match_vectorized(bc, p):
    from tbf_lab.specification import word_log_weight

    vec = kernel_log_weights(p, bc)
    for idx in range(vec.size):
        word = format(idx, f"0{bc.size}b")
        scalar = word_log_weight(p, bc, word)
        if math.isinf(vec[idx]):
            assert math.isinf(scalar)
        else:
            assert scalar == pytest.approx(vec[idx], abs=1e-10)


def test_sub_boundary_consistency():
    p = 0.4
    bc = parse_boundary("tailL=ones annulus=0 window=[0,4] annulusR=00 tailR=per:0011")
    big = kernel(p, bc)
    outer = "11000"
    small = kernel(p, sub_boundary(bc, outer, (2, 3)))
    # condition the big kernel on sites 0,1,4
    mask = [w for w in big.probabilities if w[:2] == "11" and w[4] == "0"]
    z = big.event_probability(mask)
    for w in mask:
        assert small.probability(w[2:4]) == pytest.approx(big.probability(w) / z, abs=1e-12)
    with pytest.raises(DomainError):
        sub_boundary(bc, outer, (3, 6))


@pytest.mark.parametrize("p", [0.3, 0.7])
def test_kernel_agrees_with_enumeration(p):
    bc = parse_boundary("tailL=ones annulus=000 window=[0,2] annulusR=0110 tailR=ones")
    assert kernel_convergence(p, bc, [9])[0][1] < 1e-10


# sensitivity ---------------------------------------------------------------


def test_sensitivity_bounds_frozen():
    b = sensitivity_bounds(0.5, 0, 0, -3, 3)
    assert b.n == 3
    assert b.lower == pytest.approx(0.0032838091951807535, rel=1e-12)
    assert b.upper == pytest.approx(4.3281572999747615, rel=1e-12)
    with pytest.raises(DomainError):
        sensitivity_bounds(0.5, 0, 0, -1, 3)


def test_witness_pair_realizes_the_exact_value():
    assert lower_bound_exact(0.5, 2, 1) == pytest.approx(0.06666666666666662, abs=1e-15)
    for p in (0.3, 0.5, 0.8):
        for n in (1, 2, 3):
            for w in (1, 2, 3):
                omega, eta, word = witness_pair(n, w)
                diff = abs(kernel(p, omega).probability(word) - kernel(p, eta).probability(word))
                assert diff == pytest.approx(lower_bound_exact(p, n, w), abs=1e-13)


def test_exact_value_lies_between_bounds():
    for p in (0.2, 0.5, 0.9):
        for n in (2, 5, 9):
            for w in (1, 3):
                b = sensitivity_bounds(p, 0, w - 1, -n, w - 1 + n)
                assert b.lower <= lower_bound_exact(p, n, w) <= b.upper


def test_sensitivity_family_checks_agreement():
    omega, eta, _ = witness_pair(2, 1)
    val = sensitivity_over_family(0.5, (0, 0), (-2, 5), [(omega, eta)])
    assert val >= lower_bound_exact(0.5, 2, 1) - 1e-15
    with pytest.raises(DomainError):
        sensitivity_over_family(0.5, (0, 0), (-3, 5), [(omega, eta)])


# finite energy -------------------------------------------------------------


def test_finite_energy_ratio_basics():
    m = 1
    win = (-m - 4, m + 4)
    zeta = BoundaryCondition(win, "11", "00", ONES, EMPTY)
    eta = BoundaryCondition(win, "00", "11", EMPTY, ONES)
    every = [format(i, "03b") for i in range(8)]
    assert finite_energy_ratio(0.5, m, every, (zeta, eta)) == pytest.approx(1.0, abs=1e-12)
    r = finite_energy_ratio(0.5, m, ["111"], (zeta, eta))
    c = finite_energy_constant(0.5)
    assert c <= r <= 1 / c
    with pytest.raises(InadmissibleError):
        finite_energy_ratio(0.5, m, ["010"], (zeta, eta))
    with pytest.raises(DomainError):
        finite_energy_ratio(0.5, m, ["01"], (zeta, eta))
