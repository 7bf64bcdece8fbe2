"""Link-level frame synthesis and linear MMSE channel estimation.

Conventions: ``H`` is ``N x K`` (antennas x users), pilots and data are
``K x width`` (users x symbols), received blocks are ``N x width``. All
random quantities are circularly-symmetric complex Gaussian with real and
imaginary parts of variance ``v/2``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .pilots import PilotMatrix, dft_phase_rows, gen_mwbe_pilots


def db_to_power(p_db: float, sigma2: float = 1.0) -> float:
    """Linear per-user power for ``p_db = 10 log10(P / sigma2)``."""
    return sigma2 * 10.0 ** (p_db / 10.0)


def power_to_db(power: float, sigma2: float = 1.0) -> float:
    return 10.0 * math.log10(power / sigma2) if power > 0 else -math.inf


@dataclass(frozen=True)
class SystemConfig:
    """Scalar scenario parameters.

    ``alpha`` selects the superimposed scheme, ``lp`` the regular scheme;
    at most one may be set. ``K >= L`` is not enforced here because the
    closed forms are defined for any ``K``; it is enforced wherever an
    actual pilot matrix of length ``L`` (or ``lp``) is built.
    """

    K: int
    L: int
    N: int
    P: float
    sigma2: float = 1.0
    alpha: float | None = None
    lp: int | None = None

    def __post_init__(self):
        for name in ("K", "L", "N"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer, got {getattr(self, name)!r}")
        if not self.P >= 0:
            raise ValueError(f"P must be nonnegative, got {self.P!r}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2!r}")
        if self.alpha is not None and self.lp is not None:
            raise ValueError("set either alpha (SP) or lp (RP), not both")
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.lp is not None and not (int(self.lp) == self.lp and 1 <= self.lp <= self.L - 1):
            raise ValueError(f"lp must be an integer in [1, {self.L - 1}], got {self.lp!r}")

    @property
    def scheme(self) -> str | None:
        if self.alpha is not None:
            return "sp"
        if self.lp is not None:
            return "rp"
        return None

    @property
    def ld(self) -> int:
        """Data symbols per block under the regular scheme."""
        if self.lp is None:
            raise ValueError("ld is only defined for the regular-pilot scheme")
        return self.L - self.lp

    @property
    def p_db(self) -> float:
        return power_to_db(self.P, self.sigma2)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class FrameRealization:
    """One sampled block. For RP, ``S`` and ``V`` cover only the data phase."""

    H: np.ndarray
    S: np.ndarray
    noise: np.ndarray
    Y: np.ndarray
    Hhat: np.ndarray
    V: np.ndarray


def frame_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for frame ``index`` under master ``seed``.

    The stream depends only on ``(seed, index)``, so frames can be drawn in
    any order or in parallel.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((*shape, 2))
    return math.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])


def sample_channel(cfg: SystemConfig, rng: np.random.Generator | int) -> np.ndarray:
    """``N x K`` i.i.d. CN(0, 1) channel."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return complex_normal(rng, (cfg.N, cfg.K))


def _check_dims(H, X, noise, what):
    if H.ndim != 2 or X.ndim != 2 or noise.ndim != 2:
        raise ValueError(f"{what}: expected 2-D arrays")
    if H.shape[1] != X.shape[0]:
        raise ValueError(f"{what}: channel has {H.shape[1]} users but signal has {X.shape[0]} rows")
    if noise.shape != (H.shape[0], X.shape[1]):
        raise ValueError(f"{what}: noise shape {noise.shape} != {(H.shape[0], X.shape[1])}")


def transmit_sp(H, pilots, S, alpha: float, P: float, noise) -> np.ndarray:
    """Received block ``sqrt(alpha P) H Phi + sqrt((1-alpha) P) H S + noise``."""
    H, phi, S, noise = (np.asarray(a) for a in (H, pilots, S, noise))
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if phi.shape != S.shape:
        raise ValueError(f"pilot shape {phi.shape} != data shape {S.shape}")
    _check_dims(H, phi, noise, "transmit_sp")
    return H @ (math.sqrt(alpha * P) * phi + math.sqrt((1 - alpha) * P) * S) + noise


def transmit_rp(H, pilots_rp, S_rp, P: float, noise) -> np.ndarray:
    """Received block ``sqrt(P) H [Phi_rp, S_rp] + noise``; pilots occupy the first columns."""
    H, phi, S_rp, noise = (np.asarray(a) for a in (H, pilots_rp, S_rp, noise))
    if phi.shape[0] != S_rp.shape[0]:
        raise ValueError(f"pilots have {phi.shape[0]} users but data has {S_rp.shape[0]}")
    X = np.concatenate([phi, S_rp], axis=1)
    _check_dims(H, X, noise, "transmit_rp")
    return math.sqrt(P) * (H @ X) + noise


def estimator_sp(pilots, alpha: float, P: float, sigma2: float) -> np.ndarray:
    """``W = sqrt(alpha P) / (P K + sigma2) * Phi^H`` (``width x K``)."""
    phi = np.asarray(pilots)
    K = phi.shape[0]
    return (math.sqrt(alpha * P) / (P * K + sigma2)) * phi.conj().T


def mmse_estimate_sp(Y, pilots, alpha: float, P: float, sigma2: float) -> np.ndarray:
    Y, phi = np.asarray(Y), np.asarray(pilots)
    if Y.shape[-1] != phi.shape[1]:
        raise ValueError(f"received block has {Y.shape[-1]} columns, pilots have {phi.shape[1]}")
    return Y @ estimator_sp(phi, alpha, P, sigma2)


def mmse_estimate_rp(Y_p, pilots_rp, P: float, sigma2: float) -> np.ndarray:
    """``Hhat = sqrt(P) / (P K + sigma2) * Y_p Phi_rp^H``."""
    Y_p, phi = np.asarray(Y_p), np.asarray(pilots_rp)
    if Y_p.shape[-1] != phi.shape[1]:
        raise ValueError(f"pilot block has {Y_p.shape[-1]} columns, pilots have {phi.shape[1]}")
    K = phi.shape[0]
    return (math.sqrt(P) / (P * K + sigma2)) * (Y_p @ phi.conj().T)


def residual_sp(Y, Hhat, pilots, alpha: float, P: float, S) -> np.ndarray:
    """Interference-plus-noise left after removing the pilot and the estimated data term."""
    Y, Hhat, phi, S = (np.asarray(a) for a in (Y, Hhat, pilots, S))
    Yd = Y - math.sqrt(alpha * P) * (Hhat @ phi)
    return Yd - math.sqrt((1 - alpha) * P) * (Hhat @ S)


def residual_rp(Y_d, Hhat, P: float, S_rp) -> np.ndarray:
    return np.asarray(Y_d) - math.sqrt(P) * (np.asarray(Hhat) @ np.asarray(S_rp))


def scheme_pilots(cfg: SystemConfig, pilots=None) -> np.ndarray:
    """Pilot matrix for ``cfg``; a caller-supplied matrix overrides the codebook."""
    if pilots is not None:
        return np.asarray(pilots)
    width = cfg.L if cfg.scheme == "sp" else cfg.lp
    return gen_mwbe_pilots(cfg.K, width).entries


def draw_frame(cfg: SystemConfig, rng: np.random.Generator, pilots=None) -> FrameRealization:
    """Sample ``H``, data and noise and derive ``Y``, ``Hhat`` and ``V``.

    ``pilots`` may be passed to reuse a matrix across frames, or to run with
    a raw phase matrix outside the ``length <= K`` regime.
    """
    if cfg.scheme is None:
        raise ValueError("config has neither alpha nor lp set")
    phi = scheme_pilots(cfg, pilots)
    H = complex_normal(rng, (cfg.N, cfg.K))
    if cfg.scheme == "sp":
        S = complex_normal(rng, (cfg.K, cfg.L))
        noise = complex_normal(rng, (cfg.N, cfg.L), cfg.sigma2)
        Y = transmit_sp(H, phi, S, cfg.alpha, cfg.P, noise)
        Hhat = mmse_estimate_sp(Y, phi, cfg.alpha, cfg.P, cfg.sigma2)
        V = residual_sp(Y, Hhat, phi, cfg.alpha, cfg.P, S)
    else:
        S = complex_normal(rng, (cfg.K, cfg.ld))
        noise = complex_normal(rng, (cfg.N, cfg.L), cfg.sigma2)
        Y = transmit_rp(H, phi, S, cfg.P, noise)
        Hhat = mmse_estimate_rp(Y[:, : cfg.lp], phi, cfg.P, cfg.sigma2)
        V = residual_rp(Y[:, cfg.lp :], Hhat, cfg.P, S)
    return FrameRealization(H=H, S=S, noise=noise, Y=Y, Hhat=Hhat, V=V)


__all__ = [
    "SystemConfig",
    "FrameRealization",
    "PilotMatrix",
    "db_to_power",
    "power_to_db",
    "frame_rng",
    "complex_normal",
    "sample_channel",
    "transmit_sp",
    "transmit_rp",
    "estimator_sp",
    "mmse_estimate_sp",
    "mmse_estimate_rp",
    "residual_sp",
    "residual_rp",
    "scheme_pilots",
    "draw_frame",
    "dft_phase_rows",
]
