"""The projective line as a fully explicit test world.

Every bundle considered is a sum of line bundles ``O(a_i)``; Frobenius
pull-back multiplies each ``a_i`` by ``q``, the HN filtration is by blocks of
equal degree, and ``h^0``/``h^1`` of line bundles are elementary. This is
enough to check the section formulas of :mod:`hkworkbench.bundlecalc`
exactly, corrections included.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .bundlecalc import (
    CurveData,
    H1Oracle,
    HNData,
    InvalidInputError,
    ceil_frac,
    exact_sequence_coefficient,
    section_formula,
)
from .hkfit import detect_eventual_period

__all__ = [
    "P1",
    "SplitBundle",
    "InvalidCurveError",
    "p1_h0",
    "p1_h1",
    "p1_frobenius",
    "split_hn",
    "p1_window_sum_direct",
    "p1_window_sum_enumerate",
    "p1_h1_oracle",
    "parse_split_bundle",
    "random_split_case",
    "run_formula_trial",
    "random_exact_sequence",
    "exact_sequence_audit",
]

P1 = CurveData(g=0, degY=1)


class InvalidCurveError(ValueError):
    pass


@dataclass(frozen=True)
class SplitBundle:
    """``O(a_1) + ... + O(a_r)`` with ``a_1 >= ... >= a_r``."""

    degrees: tuple[int, ...]

    def __post_init__(self):
        if not self.degrees:
            raise InvalidInputError("a split bundle needs at least one summand")
        object.__setattr__(self, "degrees", tuple(sorted((int(a) for a in self.degrees), reverse=True)))

    @property
    def rank(self) -> int:
        return len(self.degrees)

    @property
    def degree(self) -> int:
        return sum(self.degrees)

    def __str__(self) -> str:
        return ",".join(map(str, self.degrees))


def parse_split_bundle(text: str) -> SplitBundle:
    try:
        return SplitBundle(tuple(int(t) for t in text.split(",") if t.strip()))
    except ValueError:
        raise InvalidInputError(f"expected comma-separated integers, got {text!r}") from None


def p1_h0(a: int) -> int:
    return max(0, a + 1)


def p1_h1(a: int) -> int:
    return max(0, -a - 1)


def p1_frobenius(b: SplitBundle, q: int) -> SplitBundle:
    if q < 1:
        raise InvalidInputError("q must be positive")
    return SplitBundle(tuple(q * a for a in b.degrees))


def split_hn(b: SplitBundle, curve: CurveData = P1) -> HNData:
    if curve.g != 0 or curve.degY != 1:
        raise InvalidCurveError("split HN data is only defined on the projective line with O(1) of degree 1")
    counts = Counter(b.degrees)
    return HNData(tuple((counts[a], Fraction(a)) for a in sorted(counts, reverse=True)))


def _clipped_sum(c: int, lo: int, hi: int) -> int:
    """``sum_{m=lo}^{hi-1} max(0, c + m + 1)`` as an arithmetic series."""
    start = max(lo, -c)  # first m with c + m + 1 >= 1
    if start >= hi:
        return 0
    first, last = c + start + 1, c + hi
    return (first + last) * (hi - start) // 2


def p1_window_sum_direct(b: SplitBundle, sigma, rho, q: int) -> int:
    """``sum_m sum_i h^0(O(q a_i + m))`` over ``ceil(q sigma) <= m < ceil(q rho)``."""
    sigma, rho = Fraction(sigma), Fraction(rho)
    if sigma >= rho:
        raise InvalidInputError("need sigma < rho")
    lo, hi = ceil_frac(q * sigma), ceil_frac(q * rho)
    return sum(_clipped_sum(q * a, lo, hi) for a in b.degrees)


def p1_window_sum_enumerate(b: SplitBundle, sigma, rho, q: int) -> int:
    """Same sum by explicit enumeration (small ``q`` only)."""
    sigma, rho = Fraction(sigma), Fraction(rho)
    lo, hi = ceil_frac(q * sigma), ceil_frac(q * rho)
    return sum(p1_h0(q * a + m) for m in range(lo, hi) for a in b.degrees)


def p1_h1_oracle(b: SplitBundle) -> H1Oracle:
    """``h^1`` of the ``k``-th HN block of ``b^q`` twisted by ``m``."""
    blocks = split_hn(b).quotients

    def oracle(k: int, m: int, q: int) -> int:
        r, a = blocks[k - 1]
        return r * p1_h1(q * int(a) + m)

    return oracle


# ---------------------------------------------------------------------------
# seeded random trials
# ---------------------------------------------------------------------------

PRIMES = (2, 3, 5, 7)


def _random_fraction(rng: random.Random, max_den: int = 9, max_num: int = 24) -> Fraction:
    return Fraction(rng.randint(0, max_num), rng.randint(1, max_den))


def random_split_case(rng: random.Random, *, max_rank: int = 5, max_abs: int = 6, max_e: int = 6):
    """One formula-vs-oracle case: ``(bundle, p, e, sigma, rho)`` with
    ``sigma <= nu_1`` and ``rho >= nu_t`` (the clearance on the projective line
    is ``(degOmega + 2 degY)/degY = 0``)."""
    r = rng.randint(1, max_rank)
    b = SplitBundle(tuple(rng.randint(-max_abs, max_abs) for _ in range(r)))
    p = rng.choice(PRIMES)
    e = rng.randint(0, max_e)
    nu_1, nu_t = Fraction(-b.degrees[0]), Fraction(-b.degrees[-1])
    sigma = nu_1 - _random_fraction(rng)
    rho = nu_t + _random_fraction(rng)
    if rho <= sigma:
        rho = sigma + Fraction(1, rng.randint(1, 9))
    return b, p, e, sigma, rho


def run_formula_trial(b: SplitBundle, p: int, e: int, sigma, rho) -> tuple[Fraction, int]:
    q = p**e
    formula, _ = section_formula(split_hn(b), P1, sigma, rho, q, p1_h1_oracle(b))
    return formula, p1_window_sum_direct(b, sigma, rho, q)


def random_exact_sequence(
    rng: random.Random, *, max_rank: int = 5, max_abs: int = 6, split_fraction: float = 0.75
):
    """``(S, T, Q, split)`` on the projective line.

    Split sequences take ``S`` a sub-multiset of ``T`` and ``Q`` its
    complement. The non-split ones are twisted Koszul sequences
    ``0 -> O(c-a-b) -> O(c-a) + O(c-b) -> O(c) -> 0``.
    """
    if rng.random() < split_fraction:
        r = rng.randint(2, max_rank)
        T = [rng.randint(-max_abs, max_abs) for _ in range(r)]
        rng.shuffle(T)
        cut = rng.randint(1, r - 1)
        return SplitBundle(tuple(T[:cut])), SplitBundle(tuple(T)), SplitBundle(tuple(T[cut:])), True
    a, b = rng.randint(1, 4), rng.randint(1, 4)
    c = rng.randint(-max_abs, max_abs)
    return SplitBundle((c - a - b,)), SplitBundle((c - a, c - b)), SplitBundle((c,)), False


def _alternating_window(S, T, Q, q: int) -> int:
    """Alternating ``h^0`` sum over a window covering every nonzero term."""
    lowest = min(min(B.degrees) for B in (S, T, Q))
    highest = max(max(B.degrees) for B in (S, T, Q))
    # below -q*highest - 1 all h^0 vanish; above -q*lowest all h^1 vanish
    sigma = Fraction(-highest - 1)
    rho = Fraction(-lowest + 1)
    return (
        p1_window_sum_direct(S, sigma, rho, q)
        - p1_window_sum_direct(T, sigma, rho, q)
        + p1_window_sum_direct(Q, sigma, rho, q)
    )


def exact_sequence_audit(S, T, Q, p: int, e_max: int = 8, max_period: int = 4) -> dict:
    """Constant terms ``c(e)`` = alternating sum minus coefficient * q^2 for
    ``e = 1..e_max``, with their detected eventual period."""
    coef = exact_sequence_coefficient(split_hn(S), split_hn(T), split_hn(Q), P1)
    consts = []
    for e in range(1, e_max + 1):
        q = p**e
        consts.append(Fraction(_alternating_window(S, T, Q, q)) - coef * q * q)
    found = detect_eventual_period(consts, max_period, min_repeats=2)
    return {"coefficient": coef, "constants": consts, "period": found}


def check_sequence(S: SplitBundle, T: SplitBundle, Q: SplitBundle) -> None:
    if T.rank != S.rank + Q.rank or T.degree != S.degree + Q.degree:
        raise InvalidInputError("rank or degree is not additive along the sequence")
