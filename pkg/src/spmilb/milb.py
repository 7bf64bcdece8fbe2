"""Closed-form mutual-information lower bounds via the Wishart eigenvalue density.

For an ``N x w`` matrix ``G`` with i.i.d. CN(0, 1) entries and ``N >= w``,
the unordered eigenvalues of ``G^H G`` have density

    f_w(x) = (1/w) sum_{m<w} m!/(m+N-w)! * La_m^{(N-w)}(x)^2 * x^(N-w) * e^(-x)

so ``E log det(I + rho G G^H) = w * int log(1 + rho x) f_w(x) dx``. The
integral is taken with Gauss-Legendre quadrature on ``[0, x_max]``, doubling
the order until successive values agree to a relative tolerance.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .analysis import sigma_v2_rp, sigma_v2_sp
from .linklevel import SystemConfig

LN2 = math.log(2.0)
DEFAULT_RTOL = 1e-8
TAIL_RTOL = 1e-10
MIN_ORDER = 64
MAX_ORDER = 16384


def laguerre(m: int, r: int, x: float) -> float:
    """Generalized Laguerre polynomial ``La_m^{(r)}(x)`` by the three-term recurrence."""
    if m < 0 or r < 0:
        raise ValueError(f"order and parameter must be nonnegative, got m={m}, r={r}")
    return float(kernels.laguerre(int(m), float(r), float(x)))


def laguerre_binomial(m: int, r: int, x: float) -> float:
    """Explicit sum ``sum_k (-1)^k C(m+r, m-k) x^k / k!``; only stable for small ``m``."""
    return sum((-1) ** k * math.comb(m + r, m - k) * x**k / math.factorial(k) for k in range(m + 1))


@functools.lru_cache(maxsize=64)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@functools.lru_cache(maxsize=1)
def _laguerre_rule(order: int = 96) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.laguerre.laggauss(order)


@dataclass(frozen=True)
class EigDensity:
    """Eigenvalue density of ``G^H G`` for an ``N x width`` Gaussian ``G``."""

    N: int
    width: int
    upper: float = field(init=False, compare=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"width must be positive, got {self.width}")
        if self.N < self.width:
            raise ValueError(
                f"eigenvalue density needs N >= width (got N={self.N}, width={self.width})"
            )
        # start past the spectral edge; widen while the density mass beyond is not negligible
        upper = 1.5 * (math.sqrt(self.N) + math.sqrt(self.width)) ** 2
        t, w = _laguerre_rule()
        while float(np.dot(w, self(upper + t) * np.exp(t))) > 1e-3 * TAIL_RTOL:
            upper *= 1.25
        object.__setattr__(self, "upper", upper)

    def __call__(self, x) -> np.ndarray:
        return kernels.wishart_density(np.asarray(x, dtype=np.float64), self.N, self.width)

    def nodes(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes on ``[0, upper]`` with weights already multiplied by the density."""
        hit = self._cache.get(order)
        if hit is None:
            t, w = _legendre(order)
            half = 0.5 * self.upper
            x = half * (t + 1.0)
            hit = (x, half * w * self(x))
            self._cache[order] = hit
        return hit

    def integrate(self, fn, rtol: float = DEFAULT_RTOL) -> tuple[float, int]:
        """``int_0^inf fn(x) f(x) dx`` and the Gauss-Legendre order that achieved ``rtol``."""
        order = MIN_ORDER
        x, wf = self.nodes(order)
        prev = float(np.dot(wf, fn(x)))
        while order < MAX_ORDER:
            order *= 2
            x, wf = self.nodes(order)
            cur = float(np.dot(wf, fn(x)))
            if abs(cur - prev) <= rtol * abs(cur):
                break
            prev = cur
        else:
            raise RuntimeError(f"quadrature did not reach rtol={rtol} by order {MAX_ORDER}")
        tail = self.tail(fn)
        if abs(tail) > TAIL_RTOL * abs(cur):
            raise RuntimeError(f"integrand mass beyond {self.upper:.1f} is {tail:.3g}, not negligible")
        return cur, order

    def tail(self, fn) -> float:
        """Estimate of ``int_upper^inf fn(x) f(x) dx`` (Gauss-Laguerre in the shift)."""
        t, w = _laguerre_rule()
        x = self.upper + t
        return float(np.dot(w, fn(x) * self(x) * np.exp(t)))

    def normalization(self) -> float:
        return self.integrate(np.ones_like)[0]

    def mean(self) -> float:
        return self.integrate(lambda x: x)[0]


@functools.lru_cache(maxsize=256)
def eig_density(N: int, width: int) -> EigDensity:
    return EigDensity(N, width)


def wishart_density(dens: EigDensity, x):
    return dens(x)


def log_integral(rho: float, N: int, width: int, rtol: float = DEFAULT_RTOL) -> float:
    """``int log(1 + rho x) f_width(x) dx`` in nats."""
    if rho == 0:
        return 0.0
    return eig_density(N, width).integrate(lambda x: np.log1p(rho * x), rtol)[0]


def gamma_coefficients(P: float, K: int, L: int, sigma2: float) -> tuple[float, float, float, float]:
    """Descending coefficients of the cubic ``gamma(alpha)``."""
    d = sigma2 + K * P
    a3 = 2 * K**2 * L * P**3 / d
    return (
        -a3,
        a3 + K * L * P**2 + K**2 * P**2,
        -K * L * P**2 - 2 * K**2 * P**2 - 2 * K * P * sigma2,
        d**2,
    )


def gamma_sp(alpha: float, P: float, K: int, L: int, sigma2: float) -> float:
    """Denominator polynomial of ``rho``, evaluated as ``(1 - alpha) B + sigma2^2``.

    Equal to the cubic with :func:`gamma_coefficients`, regrouped so that
    the drop from ``(sigma2 + K P)^2`` at 0 to ``sigma2^2`` at 1 does not
    cancel in floating point.
    """
    d = sigma2 + K * P
    b = K * L * P**2 * alpha * (2 * K * P * alpha / d - 1) + K**2 * P**2 * (1 - alpha) + 2 * K * P * sigma2
    return (1 - alpha) * b + sigma2**2


def rho_gamma_sp(alpha: float, P: float, K: int, L: int, sigma2: float) -> tuple[float, float]:
    """Effective SNR coefficient of the superimposed scheme and its denominator polynomial."""
    gamma = gamma_sp(alpha, P, K, L, sigma2)
    if not gamma > 0:
        raise ValueError(f"gamma={gamma!r} is not positive for alpha={alpha}, P={P}, K={K}, L={L}")
    return alpha * (1 - alpha) * P**2 * K / gamma, gamma


def rho_rp(P: float, K: int, lp: int, sigma2: float) -> float:
    den = P**2 * K * (K - lp) + sigma2**2 + 2 * P * K * sigma2
    if not den > 0:
        raise ValueError(f"rho_rp denominator {den!r} is not positive (K={K}, lp={lp}, P={P})")
    return P**2 * K / den


def rho_sp_from_variances(alpha, P, K, L, sigma2) -> float:
    """Same coefficient written as ``(1-alpha) P sigma_G^2 / sigma_V^2``."""
    sigma_g2 = alpha * P * K / (P * K + sigma2)
    return (1 - alpha) * P * sigma_g2 / sigma_v2_sp(alpha, P, K, L, sigma2)


def rho_rp_from_variances(P, K, lp, sigma2) -> float:
    sigma_g2 = P * K / (P * K + sigma2)
    return P * sigma_g2 / sigma_v2_rp(P, K, lp, sigma2)


@dataclass(frozen=True)
class MilbPoint:
    scheme: str
    config: SystemConfig
    rho: float
    milb_nats: float
    method: str = "closed-form"
    stderr: float = 0.0
    trials: int = 0
    seed: int | None = None

    @property
    def milb_bits(self) -> float:
        return self.milb_nats / LN2

    @property
    def allocation(self):
        return self.config.alpha if self.scheme == "sp" else self.config.lp

    def per_channel_use(self) -> "MilbPoint":
        """Same point with the bound (and its standard error) divided by ``L``."""
        L = self.config.L
        return MilbPoint(
            self.scheme,
            self.config,
            self.rho,
            self.milb_nats / L,
            self.method,
            self.stderr / L,
            self.trials,
            self.seed,
        )

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "config": self.config.to_dict(),
            "rho": self.rho,
            "milb_nats": self.milb_nats,
            "milb_bits": self.milb_bits,
            "method": self.method,
            "stderr": self.stderr,
            "trials": self.trials,
            "seed": self.seed,
        }


def milb_sp(cfg: SystemConfig, rtol: float = DEFAULT_RTOL) -> MilbPoint:
    """Superimposed-pilot bound ``L * int log(1 + rho x) f_L(x) dx`` per coherence block."""
    if cfg.alpha is None:
        raise ValueError("milb_sp needs a config with alpha set")
    if cfg.N < cfg.L:
        raise ValueError(f"N={cfg.N} < L={cfg.L}: eigenvalue density undefined")
    rho, _ = rho_gamma_sp(cfg.alpha, cfg.P, cfg.K, cfg.L, cfg.sigma2)
    value = cfg.L * log_integral(rho, cfg.N, cfg.L, rtol)
    return MilbPoint("sp", cfg, rho, value)


def milb_rp(cfg: SystemConfig, rtol: float = DEFAULT_RTOL) -> MilbPoint:
    """Regular-pilot bound ``(L - lp)/L * lp * int log(1 + rho x) f_lp(x) dx``."""
    if cfg.lp is None:
        raise ValueError("milb_rp needs a config with lp set")
    if cfg.N < cfg.lp:
        raise ValueError(f"N={cfg.N} < lp={cfg.lp}: eigenvalue density undefined")
    rho = rho_rp(cfg.P, cfg.K, cfg.lp, cfg.sigma2)
    value = (cfg.L - cfg.lp) / cfg.L * cfg.lp * log_integral(rho, cfg.N, cfg.lp, rtol)
    return MilbPoint("rp", cfg, rho, value)
