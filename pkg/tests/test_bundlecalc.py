import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hkworkbench.bundlecalc import (
    CurveData,
    HNData,
    InconsistentSequenceError,
    InconsistentSyzygyError,
    InvalidInputError,
    InvalidRangeError,
    RoundingPart,
    ceil_frac,
    direct_sum_hn,
    ehk_from_syzygy,
    exact_sequence_coefficient,
    format_curve,
    format_hn,
    hk_slope,
    parse_curve,
    parse_hn,
    rounding_eval,
    rr_direct_sum,
    rr_window_sum,
    section_formula,
)

P1 = CurveData(0, 1)


def zero_oracle(k, m, q):
    return 0


def mult_order(p, b):
    k, x = 1, p % b
    while x != 1 % b:
        x, k = x * p % b, k + 1
    return k


def test_curve_data():
    assert CurveData(1, 3).degOmega == 0
    assert CurveData(0, 1).degOmega == -2
    with pytest.raises(InvalidInputError):
        CurveData(0, 0)
    with pytest.raises(InvalidInputError):
        CurveData(-1, 1)
    assert parse_curve(format_curve(CurveData(2, 5))) == CurveData(2, 5)


def test_hn_data_validation():
    with pytest.raises(InvalidInputError):
        HNData(())
    with pytest.raises(InvalidInputError):
        HNData.of([(1, 0), (1, 1)])
    with pytest.raises(InvalidInputError):
        HNData.of([(0, 0)])
    hn = parse_hn("2:-9/2;1:-6")
    assert hn.rank == 3 and hn.degree == -15
    assert hn.nus(3) == [F(3, 2), F(2)]
    assert format_hn(hn) == "2:-9/2;1:-6"
    with pytest.raises(InvalidInputError):
        parse_hn("2:-9/2;x")


def test_hk_slope_examples():
    assert hk_slope(HNData.of([(2, F(-3, 2))])) == F(9, 2)
    assert hk_slope(HNData.of([(1, 3), (1, -2)])) == 13
    assert hk_slope(HNData.of([(1, 0)])) == 0


def test_rounding_examples():
    assert rounding_eval(RoundingPart(F(1, 3), 2), 1)[0] == F(1, 3)
    assert rounding_eval(RoundingPart(F(2, 5), 3), 1)[0] == F(4, 5)
    for e in range(6):
        assert rounding_eval(RoundingPart(F(-4), 5), e)[0] == 0


def test_rounding_matches_ceiling():
    rng = random.Random(3)
    for _ in range(300):
        rho = F(rng.randint(-50, 50), rng.randint(1, 30))
        p = rng.choice([2, 3, 5, 7])
        e = rng.randint(0, 6)
        q = p**e
        assert RoundingPart(rho, p).value(e) == ceil_frac(q * rho) - q * rho


def test_rounding_period_divides_order():
    rng = random.Random(8)
    for _ in range(200):
        p = rng.choice([2, 3, 5, 7])
        b = rng.randint(1, 60)
        if b % p == 0:
            continue
        rp = RoundingPart(F(rng.randint(-100, 100), b), p)
        period, onset = rp.period()
        order = mult_order(p, rp.rho.denominator)
        assert order % period == 0
        vals = [rp.value(e) for e in range(3 * order + 1)]
        assert all(vals[i] == vals[i + period] for i in range(onset, len(vals) - period))


def test_rounding_with_p_in_denominator_has_onset():
    # 1/4 at p=2: 1/4, 1/2, then 0 forever
    rp = RoundingPart(F(1, 4), 2)
    assert [rp.value(e) for e in range(4)] == [F(3, 4), F(1, 2), 0, 0]
    assert rp.period() == (1, 2)


def test_rr_window_examples():
    for q in (1, 2, 3, 4, 9, 25):
        assert rr_window_sum(0, 1, P1, 0, 1, q) == q * (q + 1) // 2
        assert rr_window_sum(0, 1, CurveData(1, 1), 0, 1, q, h1_total=1) == q * (q - 1) // 2 + 1
    assert rr_window_sum(3, 2, CurveData(2, 3), F(1, 2), F(1, 2), 7) == 0
    # sigma > rho always means an empty window
    assert rr_window_sum(3, 2, P1, F(1, 2), F(1, 3), 1) == 0
    assert rr_window_sum(3, 2, P1, 2, 1, 5) == 0


def test_rr_window_sum_property_1000():
    rng = random.Random(2024)
    for _ in range(1000):
        deg = F(rng.randint(-40, 40), rng.randint(1, 6))
        rk = rng.randint(1, 5)
        curve = CurveData(rng.randint(0, 4), rng.randint(1, 5))
        sigma = F(rng.randint(-30, 30), rng.randint(1, 12))
        rho = sigma + F(rng.randint(1, 40), rng.randint(1, 12))
        q = rng.choice([2, 3, 5, 7]) ** rng.randint(0, 4)
        assert rr_window_sum(deg, rk, curve, sigma, rho, q) == rr_direct_sum(deg, rk, curve, sigma, rho, q)


def test_section_formula_trivial_line():
    hn = HNData.of([(1, 0)])
    for q in (1, 2, 4, 27):
        total, queries = section_formula(hn, P1, 0, 1, q, zero_oracle)
        assert total == q * (q + 1) // 2 == rr_window_sum(0, 1, P1, 0, 1, q)
        assert queries == []  # the correction window is empty on the projective line


def test_section_formula_split_line_bundles():
    # O(0) + O(-1), compared with direct counting of h^0(O(qa + m))
    hn = HNData.of([(1, 0), (1, -1)])
    for q in (1, 2, 3, 8, 25):
        total, _ = section_formula(hn, P1, F(-1, 2), 2, q, zero_oracle)
        lo, hi = ceil_frac(q * F(-1, 2)), 2 * q
        direct = sum(max(0, q * a + m + 1) for m in range(lo, hi) for a in (0, -1))
        assert total == direct


def test_section_formula_preconditions():
    hn = HNData.of([(1, 0), (1, -1)])
    with pytest.raises(InvalidRangeError, match="sigma"):
        section_formula(hn, P1, 1, 5, 2, zero_oracle)
    with pytest.raises(InvalidRangeError, match="rho"):
        section_formula(hn, P1, 0, F(1, 2), 2, zero_oracle)


def test_section_formula_queries_window():
    hn = parse_hn("2:-9/2")
    seen = []

    def oracle(k, m, q):
        seen.append((k, m, q))
        return 0

    total, queries = section_formula(hn, CurveData(1, 3), F(3, 2), 4, 7, oracle)
    # nu_1 = 3/2, ceil(7 * 3/2) = 11, window length ceil(0/3) = 0 gives one query
    assert queries == [(1, 11)]
    assert seen == [(1, 11, 7)]


def test_section_formula_t1_agrees_with_window_sum():
    rng = random.Random(11)
    for _ in range(200):
        curve = CurveData(rng.randint(0, 3), rng.randint(1, 4))
        r = rng.randint(1, 4)
        mu = F(rng.randint(-30, 30), r)
        hn = HNData.of([(r, mu)])
        nu = -mu / curve.degY
        rho = nu + F(curve.degOmega + 2 * curve.degY, curve.degY) + F(rng.randint(0, 20), rng.randint(1, 5))
        q = rng.choice([2, 3, 5]) ** rng.randint(0, 3)
        salt = rng.randrange(1 << 30)

        def h1(m):
            return (m * 2654435761 + salt) % 4

        def oracle(k, m, q):
            return h1(m)

        total, queries = section_formula(hn, curve, nu, rho, q, oracle)
        window = rr_window_sum(r * mu, r, curve, nu, rho, q, h1_total=sum(h1(m) for _, m in queries))
        assert total == window


def test_exact_sequence_examples():
    S, T, Q = HNData.of([(1, -2)]), HNData.of([(2, -1)]), HNData.of([(1, 0)])
    assert exact_sequence_coefficient(S, T, Q, P1) == 1
    assert exact_sequence_coefficient(S, T, Q, CurveData(0, 2)) == F(1, 2)
    assert exact_sequence_coefficient(Q, T, S, P1) == 1
    split = exact_sequence_coefficient(HNData.of([(1, 3)]), HNData.of([(1, 3), (1, -1)]), HNData.of([(1, -1)]), P1)
    assert split == 0
    with pytest.raises(InconsistentSequenceError):
        exact_sequence_coefficient(S, T, HNData.of([(1, 1)]), P1)


def test_ehk_from_syzygy_examples():
    assert ehk_from_syzygy(parse_hn("2:-9/2"), (1, 1, 1), CurveData(1, 3)) == F(9, 4)
    for a, b in [(1, 1), (2, 3), (5, 2)]:
        assert ehk_from_syzygy(HNData.of([(1, -(a + b))]), (a, b), P1) == a * b
    for delta in (1, 2, 4, 5):
        hn = HNData.of([(2, F(-3 * delta, 2))])
        assert ehk_from_syzygy(hn, (1, 1, 1), CurveData(0, delta)) == F(3 * delta, 4)
    with pytest.raises(InconsistentSyzygyError):
        ehk_from_syzygy(parse_hn("2:-9/2"), (1, 1), CurveData(1, 3))
    with pytest.raises(InconsistentSyzygyError):
        ehk_from_syzygy(parse_hn("2:-4"), (1, 1, 1), CurveData(1, 3))


def test_direct_sum_hn_examples():
    assert direct_sum_hn((-1, -1, -1), CurveData(1, 3)).quotients == ((3, -3),)
    assert direct_sum_hn((0, -2), P1).quotients == ((1, 0), (1, -2))
    assert direct_sum_hn((-1, -1, -2), CurveData(0, 2)).quotients == ((2, -2), (1, -4))
    with pytest.raises(InvalidInputError):
        direct_sum_hn((), P1)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.fractions(max_denominator=9).filter(lambda x: abs(x) < 20))
def test_hk_slope_refinement_invariant(r1, r2, mu):
    assert hk_slope(HNData.of([(r1 + r2, mu)])) == hk_slope(HNData.of([(r1, mu)])) + hk_slope(HNData.of([(r2, mu)]))
