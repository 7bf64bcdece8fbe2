"""Pilot/data resource split: power factor for superimposed pilots, pilot length for regular pilots."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .linklevel import SystemConfig
from .milb import MilbPoint, milb_rp, rho_gamma_sp

log = logging.getLogger(__name__)

SCAN_POINTS = 1000


@dataclass(frozen=True)
class QuarticG:
    """Numerator of d(rho)/d(alpha), descending coefficients ``c4 .. c0``.

    The coefficients satisfy ``c3 = -2 c4`` and ``c2 = c4 + c0 - sigma2^2``,
    so ``g(a) = (1 - a)^2 (c0 + c4 a^2) - sigma2^2 a^2``. Evaluation uses that
    factored form: the expanded sum cancels catastrophically near ``a = 1``
    at high power.
    """

    c4: float
    c3: float
    c2: float
    c1: float
    c0: float
    sigma4: float

    @property
    def coefficients(self) -> tuple[float, float, float, float, float]:
        return (self.c4, self.c3, self.c2, self.c1, self.c0)

    def __call__(self, alpha):
        a = np.asarray(alpha, dtype=np.float64)
        out = (1 - a) ** 2 * (self.c0 + self.c4 * a * a) - self.sigma4 * a * a
        return out if out.ndim else float(out)

    def expanded(self, alpha):
        """Plain Horner evaluation of the coefficients (reference only)."""
        return np.polyval(self.coefficients, alpha)

    def scale(self) -> float:
        return max(abs(self.c0), abs(self.c4))


def quartic_g(P: float, K: int, L: int, sigma2: float) -> QuarticG:
    if not P > 0:
        raise ValueError(f"P must be positive for a pilot/data trade-off, got {P!r}")
    d = sigma2 + K * P
    a = 2 * K**2 * L * P**3 / d
    return QuarticG(
        c4=-a,
        c3=2 * a,
        c2=-(a - K**2 * P**2 - 2 * K * P * sigma2),
        c1=-2 * d**2,
        c0=d**2,
        sigma4=sigma2**2,
    )


@dataclass(frozen=True)
class AlphaResult:
    alpha: float
    g: QuarticG
    residual: float
    rho: float
    gamma: float
    roots: tuple[float, ...]

    @property
    def ambiguous(self) -> bool:
        return len(self.roots) > 1


def optimal_alpha(P: float, K: int, L: int, sigma2: float, tol: float = 1e-10) -> AlphaResult:
    """Root of ``g`` in (0, 1), which maximizes ``rho`` and hence the SP bound.

    ``g(0) = (sigma2 + K P)^2 > 0`` and ``g(1) = -sigma2^2 < 0``, so a root
    is always bracketed. A 1000-point scan looks for further sign changes;
    if there are several, the root with the largest ``rho`` wins.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    g = quartic_g(P, K, L, sigma2)
    grid = np.linspace(0.0, 1.0, SCAN_POINTS + 1)
    vals = g(grid)
    brackets = [
        (grid[i], grid[i + 1]) for i in range(SCAN_POINTS) if np.sign(vals[i]) != np.sign(vals[i + 1])
    ]
    roots = []
    for lo, hi in brackets:
        if g(lo) == 0:
            roots.append(float(lo))
        elif g(hi) == 0:
            roots.append(float(hi))
        else:
            roots.append(bisect(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))
    roots = sorted({r for r in roots if 0 < r < 1})
    if not roots:
        raise RuntimeError("no sign change of g found in (0, 1)")
    if len(roots) > 1:
        log.warning("g has %d roots in (0,1) for P=%g K=%d L=%d: %s", len(roots), P, K, L, roots)
    best = max(roots, key=lambda a: rho_gamma_sp(a, P, K, L, sigma2)[0])
    rho, gamma = rho_gamma_sp(best, P, K, L, sigma2)
    return AlphaResult(best, g, float(g(best)), rho, gamma, tuple(roots))


@dataclass(frozen=True)
class LpResult:
    lp: int
    milb: MilbPoint
    table: tuple[MilbPoint, ...]


def lp_candidates(K: int, L: int, N: int) -> range:
    """Admissible regular pilot lengths: ``1 .. L-1``, capped by ``K`` and ``N``."""
    return range(1, min(L - 1, K, N) + 1)


def optimal_lp(P: float, K: int, L: int, N: int, sigma2: float, executor=None) -> LpResult:
    """Exhaustive search of the regular-pilot length; ties go to the shorter pilot."""
    cands = lp_candidates(K, L, N)
    if len(cands) == 0:
        raise ValueError(f"no admissible pilot length for K={K}, L={L}, N={N}")
    cfgs = [SystemConfig(K=K, L=L, N=N, P=P, sigma2=sigma2, lp=lp) for lp in cands]
    mapper = executor.map if executor is not None else map
    table = tuple(mapper(milb_rp, cfgs))
    best = table[0]
    for pt in table[1:]:
        if pt.milb_nats > best.milb_nats:
            best = pt
    return LpResult(best.config.lp, best, table)
