"""Hilbert-Kunz workbench: brute-force colengths of Frobenius powers, exact
fits of the Hilbert-Kunz function, and the vector-bundle formulas that
predict it on curves."""

from .bundlecalc import CurveData, HNData, ehk_from_syzygy, hk_slope, section_formula
from .colength import IdealSpec, colength, colength_naive, parse_ideal
from .gradedring import RingPresentation, parse_ring
from .hkfit import HKFit, HKSample, fit_quadratic_periodic, hk_samples, linear_term_audit

__version__ = "0.1.0"

__all__ = [
    "CurveData",
    "HNData",
    "HKFit",
    "HKSample",
    "IdealSpec",
    "RingPresentation",
    "colength",
    "colength_naive",
    "ehk_from_syzygy",
    "fit_quadratic_periodic",
    "hk_samples",
    "hk_slope",
    "linear_term_audit",
    "parse_ideal",
    "parse_ring",
    "section_formula",
]
