"""Exact rational formulas for sections of Frobenius pull-backs of bundles on
a smooth projective curve, given the curve invariants and the strong
Harder-Narasimhan data of the bundle.

Nothing here constructs a sheaf. Cohomology that cannot be written in closed
form (the ``h^1`` of the semistable quotients near their critical twist) is
requested from an ``H1Oracle``: any callable ``(k, m, q) -> int``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

__all__ = [
    "CurveData",
    "HNData",
    "RoundingPart",
    "H1Oracle",
    "InvalidInputError",
    "InvalidRangeError",
    "InconsistentSequenceError",
    "InconsistentSyzygyError",
    "ceil_frac",
    "rounding_part",
    "hk_slope",
    "rounding_eval",
    "rr_window_sum",
    "rr_direct_sum",
    "section_formula",
    "exact_sequence_coefficient",
    "ehk_from_syzygy",
    "direct_sum_hn",
    "parse_hn",
    "format_hn",
    "parse_curve",
    "format_curve",
]

H1Oracle = Callable[[int, int, int], int]


class InvalidInputError(ValueError):
    pass


class InvalidRangeError(ValueError):
    pass


class InconsistentSequenceError(ValueError):
    pass


class InconsistentSyzygyError(ValueError):
    pass


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def rounding_part(q: int, rho) -> Fraction:
    """``ceil(q*rho) - q*rho``, a rational in ``[0, 1)``."""
    v = q * Fraction(rho)
    return ceil_frac(v) - v


@dataclass(frozen=True)
class CurveData:
    g: int
    degY: int

    def __post_init__(self):
        if self.g < 0:
            raise InvalidInputError("genus must be nonnegative")
        if self.degY < 1:
            raise InvalidInputError("degY must be positive")

    @property
    def degOmega(self) -> int:
        return 2 * self.g - 2

    @property
    def h1_window(self) -> int:
        """``ceil(deg(omega)/deg(Y))``: length of each quotient's ``h^1`` window minus one."""
        return ceil_frac(Fraction(self.degOmega, self.degY))


@dataclass(frozen=True)
class HNData:
    """Ranks and normalised slopes ``mubar_k`` of the strong HN quotients,
    slopes strictly decreasing."""

    quotients: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        qs = tuple((int(r), Fraction(mu)) for r, mu in self.quotients)
        if not qs:
            raise InvalidInputError("HN data needs at least one quotient")
        if any(r < 1 for r, _ in qs):
            raise InvalidInputError("quotient ranks must be positive")
        if any(a[1] <= b[1] for a, b in zip(qs, qs[1:])):
            raise InvalidInputError("HN slopes must be strictly decreasing")
        object.__setattr__(self, "quotients", qs)

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, object]]) -> "HNData":
        return cls(tuple((r, Fraction(mu)) for r, mu in pairs))

    @property
    def t(self) -> int:
        return len(self.quotients)

    @property
    def rank(self) -> int:
        return sum(r for r, _ in self.quotients)

    @property
    def degree(self) -> Fraction:
        return sum((r * mu for r, mu in self.quotients), Fraction(0))

    def nus(self, degY: int) -> list[Fraction]:
        return [-mu / degY for _, mu in self.quotients]


@dataclass(frozen=True)
class RoundingPart:
    """``e -> ceil(p^e * rho) - p^e * rho`` for ``rho = a/b``."""

    rho: Fraction
    p: int

    def __post_init__(self):
        object.__setattr__(self, "rho", Fraction(self.rho))

    def value(self, e: int) -> Fraction:
        a, b = self.rho.numerator, self.rho.denominator
        return Fraction((-(self.p**e) * a) % b, b)

    def period(self) -> tuple[int, int]:
        """Minimal ``(period, onset)`` of the value sequence.

        The value at ``e`` is an injective function of the state
        ``p^e * a mod b``, and the state sequence obeys
        ``s_{e+1} = p * s_e mod b``; the first repeated state fixes both.
        """
        a, b = self.rho.numerator, self.rho.denominator
        seen: dict[int, int] = {}
        s, e = a % b, 0
        while s not in seen:
            seen[s] = e
            s = s * self.p % b
            e += 1
        onset = seen[s]
        return e - onset, onset


def rounding_eval(rp: RoundingPart, e: int) -> tuple[Fraction, int, int]:
    """Value at ``e`` together with the sequence's minimal period and onset."""
    if e < 0:
        raise InvalidInputError("e must be nonnegative")
    period, onset = rp.period()
    return rp.value(e), period, onset


def hk_slope(hn: HNData) -> Fraction:
    """Hilbert-Kunz slope: sum of ``r_k * mubar_k**2``."""
    if not isinstance(hn, HNData) or not hn.quotients:
        raise InvalidInputError("HN data needs at least one quotient")
    return sum((r * mu * mu for r, mu in hn.quotients), Fraction(0))


def rr_window_sum(deg, rk: int, curve: CurveData, sigma, rho, q: int, h1_total: int = 0) -> Fraction:
    """Closed form of ``sum_{m=ceil(q sigma)}^{ceil(q rho)-1} h^0(S^q(m))`` for a
    bundle of degree ``deg`` and rank ``rk``, given the ``h^1`` total over
    the same window."""
    deg, sigma, rho = Fraction(deg), Fraction(sigma), Fraction(rho)
    lo, hi = ceil_frac(q * sigma), ceil_frac(q * rho)
    if lo >= hi:
        return Fraction(0)
    if sigma >= rho:
        raise InvalidRangeError(f"sigma={sigma} must be below rho={rho}")
    g, dY = curve.g, curve.degY
    pi = rounding_part(q, rho)
    dl = rounding_part(q, sigma)
    quad = q * q * ((rho - sigma) * deg + (rho * rho - sigma * sigma) * rk * dY / 2)
    lin = q * (rho - sigma) * rk * (1 - g - Fraction(dY, 2))
    lin_per = q * ((pi - dl) * deg + (pi * rho - dl * sigma) * rk * dY)
    const = rk * ((pi * (pi - 1) - dl * (dl - 1)) * Fraction(dY, 2) + (pi - dl) * (1 - g))
    return quad + lin + lin_per + const + h1_total


def rr_direct_sum(deg, rk: int, curve: CurveData, sigma, rho, q: int) -> Fraction:
    """Term-by-term sum of the Euler characteristics ``q deg + m rk degY + rk(1-g)``
    over the window; independent of the closed form above."""
    deg = Fraction(deg)
    lo, hi = ceil_frac(q * Fraction(sigma)), ceil_frac(q * Fraction(rho))
    total = Fraction(0)
    for m in range(lo, hi):
        total += q * deg + m * rk * curve.degY + rk * (1 - curve.g)
    return total


def section_formula(
    hn: HNData,
    curve: CurveData,
    sigma,
    rho,
    q: int,
    oracle: H1Oracle,
) -> tuple[Fraction, list[tuple[int, int]]]:
    """Sum of ``h^0(S^q(m))`` over ``ceil(q sigma) <= m < ceil(q rho)`` from
    the strong HN data, with ``h^1`` corrections pulled from ``oracle``.

    Returns the total and the ``(k, m)`` pairs the oracle was asked about
    (``k`` counts quotients from 1).
    """
    sigma, rho = Fraction(sigma), Fraction(rho)
    dY, g = curve.degY, curve.g
    nus = hn.nus(dY)
    if sigma > nus[0]:
        raise InvalidRangeError(f"sigma={sigma} exceeds nu_1={nus[0]}")
    clearance = Fraction(curve.degOmega + 2 * dY, dY)
    if rho < nus[-1] + clearance:
        raise InvalidRangeError(f"rho={rho} is below nu_t + (degOmega + 2 degY)/degY = {nus[-1] + clearance}")
    rk, deg = hn.rank, hn.degree
    mu_hk = hk_slope(hn)
    pi = rounding_part(q, rho)
    half = Fraction(dY, 2)
    total = Fraction(q * q, 2 * dY) * (mu_hk + 2 * rho * deg * dY + rho * rho * rk * dY * dY)
    total += q * (rho * rk + deg / dY) * (1 - g - half)
    total += q * pi * (deg + rho * rk * dY)
    total += rk * pi * ((pi - 1) * half + 1 - g)
    queries: list[tuple[int, int]] = []
    h1 = 0
    for k, ((r, _), nu) in enumerate(zip(hn.quotients, nus), start=1):
        pk = rounding_part(q, nu)
        total -= r * pk * ((pk - 1) * half + 1 - g)
        start = ceil_frac(q * nu)
        for m in range(start, start + curve.h1_window + 1):
            queries.append((k, m))
            h1 += oracle(k, m, q)
    return total + h1, queries


def exact_sequence_coefficient(hnS: HNData, hnT: HNData, hnQ: HNData, curve: CurveData) -> Fraction:
    """Coefficient of ``q^2`` in the alternating section sum of ``0 -> S -> T -> Q -> 0``."""
    if hnT.rank != hnS.rank + hnQ.rank:
        raise InconsistentSequenceError(f"rank {hnT.rank} != {hnS.rank} + {hnQ.rank}")
    if hnT.degree != hnS.degree + hnQ.degree:
        raise InconsistentSequenceError(f"degree {hnT.degree} != {hnS.degree} + {hnQ.degree}")
    return (hk_slope(hnS) - hk_slope(hnT) + hk_slope(hnQ)) / (2 * curve.degY)


def ehk_from_syzygy(hn_syz: HNData, degrees: Sequence[int], curve: CurveData) -> Fraction:
    """Hilbert-Kunz multiplicity of an ideal from the HN data of the syzygy
    bundle ``Syz(f_1..f_n)(0)`` of its generators."""
    n = len(degrees)
    dY = curve.degY
    if hn_syz.rank != n - 1:
        raise InconsistentSyzygyError(f"syzygy rank {hn_syz.rank} should be n-1 = {n - 1}")
    if hn_syz.degree != -dY * sum(degrees):
        raise InconsistentSyzygyError(f"syzygy degree {hn_syz.degree} should be {-dY * sum(degrees)}")
    return (hk_slope(hn_syz) - dY * dY * sum(d * d for d in degrees)) / (2 * dY)


def direct_sum_hn(degrees: Sequence[int], curve: CurveData) -> HNData:
    """HN data of ``O(a_1) + ... + O(a_n)``: slopes ``a_i degY`` grouped and
    sorted, stable under every Frobenius pull-back."""
    if not degrees:
        raise InvalidInputError("need at least one summand")
    counts: dict[int, int] = {}
    for a in degrees:
        counts[a] = counts.get(a, 0) + 1
    return HNData(tuple((counts[a], Fraction(a * curve.degY)) for a in sorted(counts, reverse=True)))


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------

_HN_ITEM = re.compile(r"^\s*(\d+)\s*:\s*(-?\d+(?:/\d+)?)\s*$")


def parse_hn(text: str) -> HNData:
    """``2:-9/2;1:-6`` -> rank/slope pairs."""
    pairs = []
    for col, item in _split_with_columns(text, ";"):
        mt = _HN_ITEM.match(item)
        if not mt:
            raise InvalidInputError(f"column {col}: expected rank:slope, got {item.strip()!r}")
        pairs.append((int(mt.group(1)), Fraction(mt.group(2))))
    return HNData(tuple(pairs))


def format_hn(hn: HNData) -> str:
    return ";".join(f"{r}:{mu}" for r, mu in hn.quotients)


def parse_curve(text: str) -> CurveData:
    """``g=<int>,degY=<int>``."""
    fields = {}
    for col, item in _split_with_columns(text, ","):
        if "=" not in item:
            raise InvalidInputError(f"column {col}: expected key=value")
        k, v = item.split("=", 1)
        fields[k.strip()] = v.strip()
    try:
        return CurveData(int(fields["g"]), int(fields["degY"]))
    except KeyError as exc:
        raise InvalidInputError(f"curve text lacks {exc.args[0]}=") from None
    except ValueError:
        raise InvalidInputError("g and degY must be integers") from None


def format_curve(curve: CurveData) -> str:
    return f"g={curve.g},degY={curve.degY}"


def _split_with_columns(text: str, sep: str):
    col = 1
    for item in text.split(sep):
        if item.strip():
            yield col, item
        col += len(item) + 1


