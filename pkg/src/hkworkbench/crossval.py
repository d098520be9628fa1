"""Measured e_HK against the value predicted from syzygy-bundle data."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bundlecalc import CurveData, HNData, ehk_from_syzygy, format_curve, format_hn
from .colength import ColengthCache, IdealSpec
from .gradedring import RingPresentation
from .hkfit import (
    HKFit,
    HKSample,
    fit_quadratic_periodic,
    fraction_str,
    hk_samples,
    linear_term_audit,
)

__all__ = ["CrossReport", "infer_mu_hk", "reconcile", "report_from_samples"]


def infer_mu_hk(fit: HKFit, degrees: Sequence[int], curve: CurveData) -> Fraction:
    """``mu_HK(Syz(f_1..f_n)(0)) = 2 degY e_HK + degY^2 sum d_i^2``."""
    return 2 * curve.degY * Fraction(fit.e_hk) + curve.degY**2 * sum(d * d for d in degrees)


@dataclass
class CrossReport:
    ring: str
    ideal: tuple[str, ...]
    curve: CurveData
    hn_syz: HNData | None
    samples: list[HKSample]
    fit: HKFit
    beta: Fraction | None
    mu_hk_inferred: Fraction
    e_hk_predicted: Fraction | None = None
    residuals: list[tuple[int, int, Fraction]] = field(default_factory=list)

    @property
    def agree(self) -> bool | None:
        if self.e_hk_predicted is None:
            return None
        return self.e_hk_predicted == self.fit.e_hk

    def to_json(self) -> dict:
        out = {
            "inputs": {
                "ring": self.ring,
                "ideal": list(self.ideal),
                "curve": format_curve(self.curve),
                "hn_syz": format_hn(self.hn_syz) if self.hn_syz is not None else None,
            },
            "samples": [{"e": s.e, "q": s.q, "phi": s.phi} for s in self.samples],
            "fit": self.fit.to_json(self.beta),
            "e_hk_measured": fraction_str(self.fit.e_hk),
            "e_hk_predicted": None if self.e_hk_predicted is None else fraction_str(self.e_hk_predicted),
            "mu_hk_inferred": fraction_str(self.mu_hk_inferred),
            "agree": self.agree,
            "gamma_table": [[e, q, fraction_str(g)] for e, q, g in self.residuals],
        }
        if self.agree is False:
            out["discrepancy"] = (
                f"measured e_HK {fraction_str(self.fit.e_hk)} differs from predicted "
                f"{fraction_str(self.e_hk_predicted)}; the supplied HN data do not hold for this input"
            )
        return out


def report_from_samples(
    samples: list[HKSample],
    degrees: Sequence[int],
    curve: CurveData,
    hn_syz: HNData | None = None,
    *,
    tau_max: int = 6,
    ring_text: str = "",
    ideal_text: Sequence[str] = (),
) -> CrossReport:
    fit = fit_quadratic_periodic(samples, tau_max)
    try:
        beta = linear_term_audit(samples, fit)
    except ValueError:
        beta = None
    predicted = ehk_from_syzygy(hn_syz, degrees, curve) if hn_syz is not None else None
    table = [(s.e, s.q, s.phi - fit.e_hk * s.q * s.q) for s in sorted(samples, key=lambda s: s.e)]
    return CrossReport(
        ring=ring_text,
        ideal=tuple(ideal_text),
        curve=curve,
        hn_syz=hn_syz,
        samples=list(samples),
        fit=fit,
        beta=beta,
        mu_hk_inferred=infer_mu_hk(fit, degrees, curve),
        e_hk_predicted=predicted,
        residuals=table,
    )


def reconcile(
    ring: RingPresentation,
    ideal: IdealSpec,
    curve: CurveData,
    hn_syz: HNData | None = None,
    e_max: int = 3,
    tau_max: int = 6,
    *,
    threads: int | None = 1,
    cache: ColengthCache | None = None,
) -> CrossReport:
    """Sample, fit, and compare with the syzygy prediction when one is given.

    A fit failure propagates as :class:`hkworkbench.hkfit.FitFailure`.
    """
    samples = hk_samples(ring, ideal, e_max, threads=threads, cache=cache)
    return report_from_samples(
        samples,
        ideal.degrees,
        curve,
        hn_syz,
        tau_max=tau_max,
        ring_text=ring.describe(),
        ideal_text=[ring.format(f) for f in ideal.gens],
    )
