"""Mutual-information lower bounds for superimposed and regular pilots in overloaded MU-MIMO uplinks."""

from .allocation import QuarticG, optimal_alpha, optimal_lp, quartic_g
from .analysis import (
    VarianceBreakdown,
    error_variance_rp,
    error_variance_sp,
    sigma_v2_rp,
    sigma_v2_sp,
    trace_terms_sp,
)
from .kernels import BACKEND
from .linklevel import FrameRealization, SystemConfig, db_to_power, draw_frame
from .milb import EigDensity, MilbPoint, laguerre, milb_rp, milb_sp, rho_gamma_sp, rho_rp
from .pilots import PilotMatrix, gen_mwbe_pilots, gram_rows
from .simulator import TrialStats, mc_error_variance, mc_milb, mc_sigma_v2, mc_trace_terms

__version__ = "0.1.0"
