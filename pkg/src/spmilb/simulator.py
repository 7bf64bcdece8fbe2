"""Monte Carlo counterparts of every closed-form quantity.

Trial ``i`` under master seed ``s`` draws from ``frame_rng(s, i)`` only, and
per-trial samples are stored by index before reduction. Results therefore
do not depend on chunking or on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import sigma_v2_rp, sigma_v2_sp
from .linklevel import SystemConfig, complex_normal, draw_frame, frame_rng, scheme_pilots
from .milb import rho_gamma_sp, rho_rp

MIN_TRIALS = 100
CHUNK = 256


@dataclass(frozen=True)
class TrialStats:
    quantity: str
    trials: int
    mean: float
    stderr: float
    seed: int
    config: SystemConfig

    @classmethod
    def from_samples(cls, quantity, samples, seed, config) -> "TrialStats":
        samples = np.asarray(samples, dtype=np.float64)
        n = samples.size
        sd = float(np.std(samples, ddof=1)) if n > 1 else 0.0
        return cls(quantity, n, float(np.mean(samples)), sd / math.sqrt(n), seed, config)

    def deviation(self, expected: float) -> float:
        """``|mean - expected|`` in units of the standard error (inf if stderr is 0 and they differ)."""
        diff = abs(self.mean - expected)
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / self.stderr

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "trials": self.trials,
            "mean": self.mean,
            "stderr": self.stderr,
            "seed": self.seed,
            "config": self.config.to_dict(),
        }


def _check_trials(trials):
    if trials < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials, got {trials}")


def run_trials(fn, trials: int, seed: int, workers: int = 1) -> dict[str, np.ndarray]:
    """Apply ``fn(indices, seed) -> {name: samples}`` over chunks and stitch by trial index."""
    chunks = [range(i, min(i + CHUNK, trials)) for i in range(0, trials, CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: fn(c, seed), chunks))
    else:
        parts = [fn(c, seed) for c in chunks]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _frame_samples(cfg: SystemConfig, pilots):
    """Per-trial second-moment samples of link-level frames."""
    phi = scheme_pilots(cfg, pilots)
    N, K = cfg.N, cfg.K

    def chunk(indices, seed):
        out = {}
        rows = []
        for i in indices:
            f = draw_frame(cfg, frame_rng(seed, i), phi)
            Ht = f.H - f.Hhat
            row = {
                "error_variance": np.vdot(Ht, Ht).real / (N * K),
                "estimate_power": np.vdot(f.Hhat, f.Hhat).real / (N * K),
                "orthogonality": np.vdot(Ht, f.Hhat).real / (N * K),
                "sigma_v2": np.vdot(f.V, f.V).real / (N * f.V.shape[1]),
                # every entry of E[S V^H] vanishes; track the sum of entries
                "sv_corr": (f.S @ f.V.conj().T).sum().real / (N * f.V.shape[1]),
                "received_power": np.vdot(f.Y, f.Y).real / (N * cfg.L),
            }
            if cfg.scheme == "sp":
                a = math.sqrt(cfg.alpha * cfg.P)
                b = math.sqrt((1 - cfg.alpha) * cfg.P)
                HtS = Ht @ f.S
                HtPhi = Ht @ phi
                row.update(
                    r1=np.vdot(f.noise, f.noise).real,
                    r2=b * b * np.vdot(HtS, HtS).real,
                    r3=a * a * np.vdot(HtPhi, HtPhi).real,
                    # tr(A B^H) = vdot(B, A)
                    r4=a * np.vdot(f.noise, HtPhi).real,
                    r5=b * np.vdot(HtS, f.noise).real,
                    r6=a * b * np.vdot(HtPhi, HtS).real,
                )
            else:
                row["pilot_power"] = np.vdot(f.Y[:, : cfg.lp], f.Y[:, : cfg.lp]).real / (N * cfg.lp)
            rows.append(row)
        for k in rows[0]:
            out[k] = np.array([r[k] for r in rows])
        return out

    return chunk


def mc_frame_stats(
    cfg: SystemConfig, trials: int, seed: int, pilots=None, workers: int = 1
) -> dict[str, TrialStats]:
    """All link-level second-moment statistics from one pass over ``trials`` frames.

    ``pilots`` overrides the codebook (e.g. a raw phase matrix with more
    columns than users).
    """
    _check_trials(trials)
    samples = run_trials(_frame_samples(cfg, pilots), trials, seed, workers)
    return {k: TrialStats.from_samples(k, v, seed, cfg) for k, v in samples.items()}


def mc_error_variance(cfg, trials, seed, pilots=None, workers=1) -> TrialStats:
    return mc_frame_stats(cfg, trials, seed, pilots, workers)["error_variance"]


def mc_sigma_v2(cfg, trials, seed, pilots=None, workers=1) -> TrialStats:
    return mc_frame_stats(cfg, trials, seed, pilots, workers)["sigma_v2"]


def mc_trace_terms(cfg, trials, seed, pilots=None, workers=1) -> dict[str, TrialStats]:
    """Empirical ``tr(R_i)``, i = 1..6, from the exact constituents of each frame."""
    if cfg.scheme != "sp":
        raise ValueError("trace terms are defined for the superimposed scheme")
    stats = mc_frame_stats(cfg, trials, seed, pilots, workers)
    return {f"r{i}": stats[f"r{i}"] for i in range(1, 7)}


def _logdet_pd(A: np.ndarray) -> np.ndarray:
    """Log-determinant of a stack of Hermitian positive-definite matrices via Cholesky."""
    try:
        c = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("log-det argument is not positive definite") from exc
    return 2.0 * np.log(np.abs(np.diagonal(c, axis1=-2, axis2=-1))).sum(axis=-1)


def _gram_logdet(M: np.ndarray, scale: float) -> np.ndarray:
    """``log det(I + scale * M M^H)`` for a stack of matrices, using the smaller Gram."""
    if M.shape[-2] >= M.shape[-1]:
        gram = np.conj(np.swapaxes(M, -1, -2)) @ M
    else:
        gram = M @ np.conj(np.swapaxes(M, -1, -2))
    eye = np.eye(gram.shape[-1])
    return _logdet_pd(eye + scale * gram)


def milb_rho(cfg: SystemConfig) -> float:
    if cfg.scheme == "sp":
        return rho_gamma_sp(cfg.alpha, cfg.P, cfg.K, cfg.L, cfg.sigma2)[0]
    return rho_rp(cfg.P, cfg.K, cfg.lp, cfg.sigma2)


def mc_milb(
    cfg: SystemConfig,
    trials: int,
    seed: int,
    mode: str = "gaussian-equivalent",
    pilots=None,
    workers: int = 1,
) -> TrialStats:
    """Monte Carlo MILB (nats per block, same prefactors as the closed forms).

    ``gaussian-equivalent`` averages ``log det(I + rho G G^H)`` over Gaussian
    ``G``; ``full-linklevel`` builds ``Hhat`` from simulated frames and uses the
    closed-form residual variance inside the log-det.
    """
    _check_trials(trials)
    if cfg.scheme is None:
        raise ValueError("config has neither alpha nor lp set")
    sp = cfg.scheme == "sp"
    width = cfg.L if sp else cfg.lp
    prefactor = 1.0 if sp else (cfg.L - cfg.lp) / cfg.L

    if mode == "gaussian-equivalent":
        rho = milb_rho(cfg)

        def chunk(indices, seed):
            G = np.stack([complex_normal(frame_rng(seed, i), (cfg.N, width)) for i in indices])
            return {"milb": prefactor * _gram_logdet(G, rho)}

    elif mode == "full-linklevel":
        phi = scheme_pilots(cfg, pilots)
        if sp:
            scale = (1 - cfg.alpha) * cfg.P / sigma_v2_sp(cfg.alpha, cfg.P, cfg.K, cfg.L, cfg.sigma2)
        else:
            scale = cfg.P / sigma_v2_rp(cfg.P, cfg.K, cfg.lp, cfg.sigma2)

        def chunk(indices, seed):
            Hh = np.stack([draw_frame(cfg, frame_rng(seed, i), phi).Hhat for i in indices])
            return {"milb": prefactor * _gram_logdet(Hh, scale)}

    else:
        raise ValueError(f"unknown mode {mode!r}")

    samples = run_trials(chunk, trials, seed, workers)["milb"]
    return TrialStats.from_samples(f"milb[{mode}]", samples, seed, cfg)
