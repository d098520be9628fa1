"""Exact fit of ``phi(p^e) = e_HK * p^(2e) + gamma(e)`` with ``gamma`` eventually
periodic in the exponent ``e``.

All arithmetic is done with :class:`fractions.Fraction`; nothing here touches
floating point.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .colength import ColengthCache, ColengthResult, IdealSpec, colength
from .gradedring import RingPresentation

__all__ = [
    "HKSample",
    "HKFit",
    "FitFailure",
    "hk_samples",
    "fit_quadratic_periodic",
    "linear_term_audit",
    "detect_eventual_period",
    "fraction_str",
    "parse_fraction",
    "read_samples_csv",
    "write_samples_csv",
    "default_e_max",
]


def fraction_str(x) -> str:
    """``num/den`` in lowest terms with positive denominator."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text.strip())


def default_e_max(p: int) -> int:
    return 8 if p == 2 else 6 if p == 3 else 4


@dataclass(frozen=True)
class HKSample:
    e: int
    q: int
    phi: int

    def __post_init__(self):
        if self.e < 0 or self.q < 1:
            raise ValueError("need e >= 0 and q >= 1")
        if self.phi < 1:
            raise ValueError("a Hilbert-Kunz value is a positive length")


@dataclass(frozen=True)
class HKFit:
    e_hk: Fraction
    tau: int
    e0: int
    gamma: tuple[Fraction, ...]
    verified_equations: int

    def gamma_at(self, e: int) -> Fraction:
        if e < self.e0:
            raise ValueError(f"gamma is only determined from e0={self.e0} on")
        return self.gamma[(e - self.e0) % self.tau]

    def predict(self, e: int, q: int) -> Fraction:
        return self.e_hk * q * q + self.gamma_at(e)

    def to_json(self, beta: Fraction | None = None) -> dict:
        out = {
            "e_hk": fraction_str(self.e_hk),
            "tau": self.tau,
            "e0": self.e0,
            "gamma": [fraction_str(g) for g in self.gamma],
        }
        if beta is not None:
            out["beta_audit"] = fraction_str(beta)
        out["verified_equations"] = self.verified_equations
        return out


class FitFailure(Exception):
    """No period up to ``tau_max`` explains the samples.

    ``residuals`` maps each tried period to the list of slope estimates
    ``(e, alpha_e)`` obtained from the pairs ``(e, e + tau)``; a working
    period would make them all equal from some ``e0`` on.
    """

    def __init__(self, message: str, residuals: dict[int, list[tuple[int, Fraction]]]):
        super().__init__(message)
        self.residuals = residuals

    def to_json(self) -> dict:
        return {
            "error": "fit-failure",
            "message": str(self),
            "residuals": {
                str(tau): [[e, fraction_str(a)] for e, a in rows] for tau, rows in self.residuals.items()
            },
        }


def hk_samples(
    ring: RingPresentation,
    ideal: IdealSpec,
    e_max: int,
    *,
    e_min: int = 1,
    threads: int | None = 1,
    cache: ColengthCache | None = None,
    details: dict[int, ColengthResult] | None = None,
) -> list[HKSample]:
    """Hilbert-Kunz values for ``e = e_min..e_max``.

    When ``details`` is given it is filled with the per-degree results.
    """
    if e_max < 1:
        raise ValueError("e_max must be at least 1")
    out = []
    p = ring.p
    for e in range(e_min, e_max + 1):
        res = colength(ring, ideal, p**e, threads=threads, cache=cache)
        if details is not None:
            details[e] = res
        out.append(HKSample(e, p**e, res.total))
    return out


def _index(samples: Iterable[HKSample]) -> dict[int, HKSample]:
    by_e: dict[int, HKSample] = {}
    for s in samples:
        if s.e in by_e and by_e[s.e] != s:
            raise ValueError(f"conflicting samples for e={s.e}")
        by_e[s.e] = s
    return by_e


def _slope(a: HKSample, b: HKSample) -> Fraction:
    return Fraction(b.phi - a.phi, b.q * b.q - a.q * a.q)


def fit_quadratic_periodic(
    samples: Sequence[HKSample], tau_max: int = 6, *, min_equations: int = 2
) -> HKFit:
    """Smallest period ``tau`` (then smallest onset ``e0``) under which every
    pair ``(e, e + tau)`` with ``e >= e0`` gives the same leading coefficient.

    A candidate needs at least ``min_equations`` such pairs, so that at
    least one of them checks the coefficient solved from another.
    """
    if tau_max < 1:
        raise ValueError("tau_max must be at least 1")
    by_e = _index(samples)
    es = sorted(by_e)
    residuals: dict[int, list[tuple[int, Fraction]]] = {}
    for tau in range(1, tau_max + 1):
        residuals[tau] = [(e, _slope(by_e[e], by_e[e + tau])) for e in es if e + tau in by_e]
        for e0 in es:
            if any(e0 + j not in by_e for j in range(tau)):
                continue
            pairs = [(e, alpha) for e, alpha in residuals[tau] if e >= e0]
            if len(pairs) < min_equations:
                break
            alpha = pairs[0][1]
            if any(a != alpha for _, a in pairs):
                continue
            gamma = tuple(by_e[e0 + j].phi - alpha * by_e[e0 + j].q ** 2 for j in range(tau))
            if all(
                by_e[e].phi - alpha * by_e[e].q ** 2 == gamma[(e - e0) % tau] for e in es if e >= e0
            ):
                return HKFit(alpha, tau, e0, gamma, len(pairs))
    raise FitFailure(
        f"no period tau <= {tau_max} fits {len(es)} samples with {min_equations} checked equations; "
        "more samples may be needed",
        residuals,
    )


def linear_term_audit(samples: Sequence[HKSample], fit: HKFit) -> Fraction:
    """Coefficient ``beta`` of ``q`` in ``phi = alpha q^2 + beta q + gamma(e)``.

    ``gamma`` is eliminated with the fitted period: each pair
    ``(e, e + tau)`` with ``e >= e0`` gives one linear equation in
    ``(alpha, beta)``, solved by exact least squares.
    """
    by_e = _index(samples)
    rows = []
    for e in sorted(by_e):
        if e >= fit.e0 and e + fit.tau in by_e:
            a, b = by_e[e], by_e[e + fit.tau]
            rows.append((Fraction(b.q**2 - a.q**2), Fraction(b.q - a.q), Fraction(b.phi - a.phi)))
    if len(rows) < 2:
        raise ValueError("the linear-term audit needs at least two sample pairs")
    s11 = sum(u * u for u, _, _ in rows)
    s12 = sum(u * v for u, v, _ in rows)
    s22 = sum(v * v for _, v, _ in rows)
    t1 = sum(u * w for u, _, w in rows)
    t2 = sum(v * w for _, v, w in rows)
    det = s11 * s22 - s12 * s12
    if det == 0:
        raise ValueError("degenerate sample pairs")
    return (s11 * t2 - s12 * t1) / det


def detect_eventual_period(values: Sequence, max_period: int, *, min_repeats: int = 1) -> tuple[int, int] | None:
    """Smallest ``(period, onset)`` such that ``values[i] == values[i + period]``
    for all ``i >= onset``, with at least ``min_repeats`` checked equalities."""
    n = len(values)
    for period in range(1, max_period + 1):
        for onset in range(n):
            checks = n - period - onset
            if checks < min_repeats:
                break
            if all(values[i] == values[i + period] for i in range(onset, n - period)):
                return period, onset
    return None


def write_samples_csv(samples: Iterable[HKSample], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["e", "q", "phi"])
        for s in samples:
            w.writerow([s.e, s.q, s.phi])


def read_samples_csv(path: str | os.PathLike) -> list[HKSample]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["e", "q", "phi"]:
            raise ValueError(f"{path}: expected header e,q,phi")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                e, q, phi = (int(x) for x in row)
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: expected three integers") from None
            out.append(HKSample(e, q, phi))
    return out
