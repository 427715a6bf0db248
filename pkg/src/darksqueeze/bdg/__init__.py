"""Fluctuation operator, its eigenmodes and their certification."""

from .certify import CertificationReport, CertifyConfig, certify
from .fourier import FourierIntegrals, analytic_fourier_integrals
from .modes import (BdGMode, DualPair, ZeroMode, continuous_mode, eigenvalue_minus,
                    eigenvalue_plus, partner_mode, zero_mode)
from .operator import BdGContext, SigmaGrid, apply_L, taper
from .overlaps import (CompletenessGrid, completeness_check, inner_product, smooth_window,
                       wavepacket_orthonormality)
from .spectrum import count_zero_modes

__all__ = [
    "BdGContext", "BdGMode", "CertificationReport", "CertifyConfig", "CompletenessGrid",
    "DualPair", "FourierIntegrals", "SigmaGrid", "ZeroMode", "analytic_fourier_integrals",
    "apply_L", "certify", "completeness_check", "continuous_mode", "count_zero_modes",
    "eigenvalue_minus", "eigenvalue_plus", "inner_product", "partner_mode", "smooth_window",
    "taper", "wavepacket_orthonormality", "zero_mode",
]
