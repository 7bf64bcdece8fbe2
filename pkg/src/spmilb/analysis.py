"""Closed-form second-order statistics of the estimation error and residual.

``V`` is the residual after subtracting the pilot and the estimated data
term from the received block. Its per-entry variance is assembled from six
trace terms of ``E[V V^H]``::

    R1 = E[N N^H]                                   noise
    R2 = (1-a) P E[Ht S S^H Ht^H]                   error x data
    R3 = a P E[Ht Phi Phi^H Ht^H]                   error x pilot
    R4 = sqrt(a P) E[Ht Phi N^H]                    error-pilot x noise
    R5 = sqrt((1-a) P) E[N S^H Ht^H]                noise x error-data
    R6 = sqrt(a (1-a)) P E[Ht S Phi^H Ht^H]         error-data x error-pilot

with ``Ht = H - Hhat``. R4..R6 each appear together with their Hermitian
transpose, hence the factor 2 in the assembly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction


def error_variance_sp(alpha: float, P: float, K: int, L: int, sigma2: float) -> float:
    """Per-entry variance of ``H - Hhat`` with superimposed pilots."""
    return 1 - alpha * P * L / (P * K + sigma2)


def error_variance_rp(P: float, K: int, lp: int, sigma2: float) -> float:
    """Per-entry variance of ``H - Hhat`` with ``lp`` regular pilot symbols."""
    return 1 - P * lp / (P * K + sigma2)


def tr_r1(L: int, N: int, sigma2: float) -> float:
    return L * N * sigma2


def tr_r2(alpha, P, K, L, N, sigma2) -> float:
    return (1 - alpha) * P * L * K * N * error_variance_sp(alpha, P, K, L, sigma2)


def tr_r3(alpha, P, K, L, N, sigma2) -> float:
    # Phi^H E[Ht^H Ht] Phi, with E[Ht^H Ht] = N (I - aP/(PK+s2) R_phi) and R_phi^2 = K R_phi
    return alpha * P * K * L * N * (1 - alpha * P * K / (P * K + sigma2))


def tr_r4(alpha, P, K, L, N, sigma2) -> float:
    return -(alpha * P / (P * K + sigma2)) * K * L * N * sigma2


def tr_r5(alpha, P, K, L, N, sigma2) -> float:
    return 0


def r6_first(alpha, P, K, L, N, sigma2) -> float:
    """``tr E[(aP/(PK+s2)^2) Phi^H Phi Y^H Y Phi^H S]``."""
    d = P * K + sigma2
    return alpha * math.sqrt(alpha * (1 - alpha)) * P**2 / d**2 * K**2 * L**2 * N


def r6_second(alpha, P, K, L, N, sigma2) -> float:
    """``tr E[sqrt(aP)/(PK+s2) Phi^H H^H Y Phi^H S]``; vanishes since E[(Phi^H S)^2] = 0."""
    return 0


def r6_third(alpha, P, K, L, N, sigma2) -> float:
    """``tr E[sqrt(aP)/(PK+s2) Phi^H Phi Y^H H S]``."""
    return math.sqrt(alpha * (1 - alpha)) * P / (P * K + sigma2) * K**2 * L * N


def tr_r6(alpha, P, K, L, N, sigma2) -> float:
    """``sqrt(a(1-a)) P (first - second - third)``, with the square roots multiplied out."""
    d = P * K + sigma2
    return alpha * (1 - alpha) * P**2 * K**2 * L * N * (alpha * P * L / d - 1) / d


@dataclass(frozen=True)
class VarianceBreakdown:
    tr_r1: float
    tr_r2: float
    tr_r3: float
    tr_r4: float
    tr_r5: float
    tr_r6: float
    sigma_v2: float
    N: int
    L: int
    scheme: str = "sp"

    def assembled(self) -> float:
        """Float sum of the stored terms; loses digits when the terms nearly cancel."""
        total = self.tr_r1 + self.tr_r2 + self.tr_r3 + 2 * (self.tr_r4 + self.tr_r5 + self.tr_r6)
        return total / (self.N * self.L)

    def to_dict(self) -> dict:
        return asdict(self)


def trace_terms_sp(alpha: float, P: float, K: int, L: int, N: int, sigma2: float) -> VarianceBreakdown:
    """Evaluate the six traces and their normalized sum.

    The traces are rational in the inputs, so they are evaluated exactly on
    the binary values of the arguments and the sum is rounded once. Near
    ``alpha = 1`` at high power the terms are ~PK times larger than the
    result, and a float sum would keep only about 12 digits.
    """
    ex = (Fraction(alpha), Fraction(P), int(K), int(L), int(N), Fraction(sigma2))
    exact = dict(
        tr_r1=tr_r1(ex[3], ex[4], ex[5]),
        tr_r2=tr_r2(*ex),
        tr_r3=tr_r3(*ex),
        tr_r4=tr_r4(*ex),
        tr_r5=tr_r5(*ex),
        tr_r6=tr_r6(*ex),
    )
    total = exact["tr_r1"] + exact["tr_r2"] + exact["tr_r3"]
    total += 2 * (exact["tr_r4"] + exact["tr_r5"] + exact["tr_r6"])
    terms = {k: float(v) for k, v in exact.items()}
    return VarianceBreakdown(**terms, sigma_v2=float(total / (N * L)), N=N, L=L)


def sigma_v2_sp(alpha: float, P: float, K: int, L: int, sigma2: float) -> float:
    """Per-entry variance of the superimposed-pilot residual.

    The six contributions (noise, error x data, error x pilot, and the three
    cross terms) are regrouped so that every piece carrying ``PK`` also
    carries ``1 - alpha``::

        s2 (s2 + (1-a) PK) / d
          + (1-a) PK [1 - aPL/d - aPK/d + 2 a^2 P^2 K L / d^2],   d = PK + s2

    Summing them as written cancels to ``s2^2 / d`` at ``alpha = 1`` and
    loses up to three digits at high power.
    """
    d = P * K + sigma2
    pk = P * K
    bracket = 1 - alpha * P * L / d - alpha * pk / d + 2 * alpha**2 * P**2 * K * L / d**2
    return sigma2 * (sigma2 + (1 - alpha) * pk) / d + (1 - alpha) * pk * bracket


def sigma_v2_rp(P: float, K: int, lp: int, sigma2: float) -> float:
    return P * K * error_variance_rp(P, K, lp, sigma2) + sigma2
