"""Exact moments of two-qubit determinant distributions, density reconstruction and checks."""

__version__ = "0.1.0"

from .exact_arith import BigFloat, GammaValue, Rational, gamma_half, hyp_terminating, pochhammer
from .interval import SupportInterval
from .moments import (MomentFamily, MomentTable, moment_balanced, moment_bures, moment_det,
                      moment_pt, moment_table)
from .reconstruct import (DensityEstimate, LegendreSeries, cdf, eval_density, eval_derivative,
                          legendre_coeffs, reconstruct_family)
from .sepprob import f_term, sep_prob
from .analysis import FisherConfig, fisher_compare, fisher_info, intercept_scan
from .ratfind import cf_candidates, smooth_search
from .mc_oracle import run_mc

__all__ = [
    "BigFloat", "DensityEstimate", "FisherConfig", "GammaValue", "LegendreSeries",
    "MomentFamily", "MomentTable", "Rational", "SupportInterval", "cdf", "cf_candidates",
    "eval_density", "eval_derivative", "f_term", "fisher_compare", "fisher_info", "gamma_half",
    "hyp_terminating", "intercept_scan", "legendre_coeffs", "moment_balanced", "moment_bures",
    "moment_det", "moment_pt", "moment_table", "pochhammer", "reconstruct_family", "run_mc",
    "sep_prob", "smooth_search",
]
