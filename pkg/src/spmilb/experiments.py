"""Sweeps, optimizer reports and the Monte Carlo validation suite behind the CLI."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analysis
from .allocation import optimal_alpha, optimal_lp
from .linklevel import SystemConfig, db_to_power
from .milb import MilbPoint, eig_density, milb_rp, milb_sp
from .simulator import mc_frame_stats, mc_milb

CSV_COLUMNS = (
    "scheme",
    "K",
    "L",
    "N",
    "P_db",
    "alpha_or_Lp",
    "rho",
    "milb_nats",
    "milb_bits",
    "method",
    "stderr",
    "trials",
    "seed",
)


class SpecError(ValueError):
    """Invalid sweep or run specification (maps to exit status 2)."""


def frange(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic range, robust to float accumulation."""
    if not step > 0:
        raise SpecError(f"step must be positive, got {step}")
    if stop < start:
        raise SpecError(f"empty range {start}..{stop}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [start + i * step for i in range(n + 1)]


@dataclass
class SweepSpec:
    scheme: str = "both"
    axis: str = "power-db"
    K: list[int] = field(default_factory=lambda: [40])
    p_db: list[float] = field(default_factory=lambda: [20.0])
    axis_range: tuple[float, float, float] = (0.0, 40.0, 2.0)
    L: int = 30
    N: int = 60
    sigma2: float = 1.0
    alpha: float | None = None
    lp: int | None = None
    per_channel_use: bool = False
    trials: int = 0
    seed: int = 0
    allow_k_below_l: bool = False

    @property
    def optimal(self) -> bool:
        return self.alpha is None and self.lp is None

    def schemes(self) -> list[str]:
        return ["sp", "rp"] if self.scheme == "both" else [self.scheme]

    def points(self) -> list[tuple[int, float]]:
        """``(K, P_db)`` pairs in output order: fixed values outer, axis inner."""
        axis_vals = frange(*self.axis_range)
        if self.axis == "power-db":
            return [(k, p) for k in self.K for p in axis_vals]
        return [(int(round(k)), p) for p in self.p_db for k in axis_vals]

    def validate(self) -> None:
        if self.scheme not in ("sp", "rp", "both"):
            raise SpecError(f"scheme must be sp, rp or both, got {self.scheme!r}")
        if self.axis not in ("power-db", "users"):
            raise SpecError(f"axis must be power-db or users, got {self.axis!r}")
        if self.alpha is not None and self.scheme != "sp":
            raise SpecError("--alpha fixes the superimposed scheme; use --scheme sp")
        if self.lp is not None and self.scheme != "rp":
            raise SpecError("--lp fixes the regular scheme; use --scheme rp")
        if self.trials and self.trials < 100:
            raise SpecError(f"trials must be 0 or at least 100, got {self.trials}")
        bad = []
        for K, p in self.points():
            why = []
            if K < self.L and not self.allow_k_below_l:
                why.append(f"K={K} < L={self.L}")
            if self.N < self.L:
                why.append(f"N={self.N} < L={self.L}")
            if self.lp is not None and self.lp > K:
                why.append(f"lp={self.lp} > K={K}")
            if why:
                bad.append(f"(K={K}, P_db={p:g}): " + ", ".join(why))
        if bad:
            raise SpecError("rejected sweep points:\n  " + "\n  ".join(bad))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["axis_range"] = list(self.axis_range)
        return d


def closed_form_point(scheme: str, K: int, L: int, N: int, P: float, sigma2: float, alloc=None) -> MilbPoint:
    """Closed-form bound at one point; ``alloc=None`` re-solves the optimal split."""
    if scheme == "sp":
        if alloc is None:
            if P == 0:
                return milb_sp(SystemConfig(K, L, N, P, sigma2, alpha=0.5))
            alloc = optimal_alpha(P, K, L, sigma2).alpha
        return milb_sp(SystemConfig(K, L, N, P, sigma2, alpha=alloc))
    if alloc is None:
        return optimal_lp(P, K, L, N, sigma2).milb
    return milb_rp(SystemConfig(K, L, N, P, sigma2, lp=alloc))


def _evaluate(spec: SweepSpec, scheme: str, K: int, p_db: float) -> list[MilbPoint]:
    P = db_to_power(p_db, spec.sigma2)
    alloc = spec.alpha if scheme == "sp" else spec.lp
    pt = closed_form_point(scheme, K, spec.L, spec.N, P, spec.sigma2, alloc)
    out = [pt]
    if spec.trials:
        mc = mc_milb(pt.config, spec.trials, spec.seed)
        out.append(
            MilbPoint(scheme, pt.config, pt.rho, mc.mean, "monte-carlo", mc.stderr, mc.trials, spec.seed)
        )
    if spec.per_channel_use:
        out = [p.per_channel_use() for p in out]
    return out


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[MilbPoint]:
    """All rows of a sweep, in (scheme, fixed value, axis value) order."""
    spec.validate()
    jobs = [(s, K, p) for s in spec.schemes() for K, p in spec.points()]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda j: _evaluate(spec, *j), jobs))
    else:
        results = [_evaluate(spec, *j) for j in jobs]
    return [row for rows in results for row in rows]


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return "" if x is None else str(x)


def point_row(pt: MilbPoint) -> dict:
    c = pt.config
    return {
        "scheme": pt.scheme,
        "K": c.K,
        "L": c.L,
        "N": c.N,
        "P_db": c.p_db,
        "alpha_or_Lp": pt.allocation,
        "rho": pt.rho,
        "milb_nats": pt.milb_nats,
        "milb_bits": pt.milb_bits,
        "method": pt.method,
        "stderr": pt.stderr,
        "trials": pt.trials,
        "seed": pt.seed if pt.seed is not None else "",
    }


def optimal_alpha_report(p_db: float, K: int, L: int, N: int, sigma2: float = 1.0) -> dict:
    P = db_to_power(p_db, sigma2)
    res = optimal_alpha(P, K, L, sigma2)
    report = {
        "P_db": p_db,
        "P": P,
        "K": K,
        "L": L,
        "sigma2": sigma2,
        "alpha": res.alpha,
        "g_residual": res.residual,
        "g_scale": res.g.scale(),
        "rho": res.rho,
        "gamma": res.gamma,
        "roots": list(res.roots),
        "coefficients": dict(zip(("c4", "c3", "c2", "c1", "c0"), res.g.coefficients)),
    }
    if N >= L:
        pt = milb_sp(SystemConfig(K, L, N, P, sigma2, alpha=res.alpha))
        report.update(N=N, milb_nats=pt.milb_nats, milb_bits=pt.milb_bits)
    return report


def optimal_lp_report(p_db: float, K: int, L: int, N: int, sigma2: float = 1.0) -> dict:
    P = db_to_power(p_db, sigma2)
    res = optimal_lp(P, K, L, N, sigma2)
    return {
        "P_db": p_db,
        "P": P,
        "K": K,
        "L": L,
        "N": N,
        "sigma2": sigma2,
        "Lp": res.lp,
        "rho": res.milb.rho,
        "milb_nats": res.milb.milb_nats,
        "milb_bits": res.milb.milb_bits,
        "table": [{"Lp": p.config.lp, "rho": p.rho, "milb_nats": p.milb_nats} for p in res.table],
    }


# validation suite ----------------------------------------------------------------

VALIDATE_SUITES = ("all", "variances", "traces", "milb", "density")
DENSITY_CASES = ((60, 30), (60, 29), (60, 1), (31, 30))
SP_POINT = dict(K=40, L=30, N=60, P=1.0, sigma2=1.0, alpha=0.5)
RP_POINT = dict(K=40, L=30, N=60, P=1.0, sigma2=1.0, lp=10)


def _band_check(name, observed, expected, band, **extra) -> dict:
    return {
        "name": name,
        "observed": observed,
        "expected": expected,
        "band": band,
        "passed": bool(abs(observed - expected) <= band),
        **extra,
    }


def _density_checks() -> list[dict]:
    out = []
    for N, L in DENSITY_CASES:
        d = eig_density(N, L)
        out.append(_band_check(f"density[N={N},L={L}].normalization", d.normalization(), 1.0, 1e-8))
        out.append(_band_check(f"density[N={N},L={L}].mean", d.mean(), float(N), 1e-6 * N))
    return out


def _stat_check(name, stat, expected) -> dict:
    return _band_check(name, stat.mean, expected, 3 * stat.stderr, stderr=stat.stderr, trials=stat.trials)


def _variance_checks(trials, seed) -> list[dict]:
    sp = SystemConfig(**SP_POINT)
    rp = SystemConfig(**RP_POINT)
    s = mc_frame_stats(sp, trials, seed)
    r = mc_frame_stats(rp, trials, seed + 1)
    a, P, K, L, s2 = sp.alpha, sp.P, sp.K, sp.L, sp.sigma2
    return [
        _stat_check("sp.error_variance", s["error_variance"], analysis.error_variance_sp(a, P, K, L, s2)),
        _stat_check("sp.sigma_v2", s["sigma_v2"], analysis.sigma_v2_sp(a, P, K, L, s2)),
        _stat_check("rp.error_variance", r["error_variance"], analysis.error_variance_rp(P, K, rp.lp, s2)),
        _stat_check("rp.sigma_v2", r["sigma_v2"], analysis.sigma_v2_rp(P, K, rp.lp, s2)),
    ]


def _trace_checks(trials, seed) -> list[dict]:
    sp = SystemConfig(**SP_POINT)
    s = mc_frame_stats(sp, trials, seed + 2)
    b = analysis.trace_terms_sp(sp.alpha, sp.P, sp.K, sp.L, sp.N, sp.sigma2)
    return [_stat_check(f"sp.tr_r{i}", s[f"r{i}"], getattr(b, f"tr_r{i}")) for i in range(1, 7)]


def _milb_checks(trials, seed) -> list[dict]:
    K, L, N, s2 = 40, 30, 60, 1.0
    P = db_to_power(20.0, s2)
    out = []
    for i, scheme in enumerate(("sp", "rp")):
        pt = closed_form_point(scheme, K, L, N, P, s2)
        mc = mc_milb(pt.config, trials, seed + 3 + i)
        band = max(0.01 * abs(pt.milb_nats), 3 * mc.stderr)
        out.append(
            _band_check(
                f"{scheme}.milb[K={K},P_db=20]",
                mc.mean,
                pt.milb_nats,
                band,
                stderr=mc.stderr,
                trials=mc.trials,
                allocation=pt.allocation,
            )
        )
    return out


def run_validate(suite: str = "all", trials: int = 10000, seed: int = 0) -> dict:
    """Monte Carlo and quadrature checks against the closed forms; deterministic in ``seed``."""
    if suite not in VALIDATE_SUITES:
        raise SpecError(f"suite must be one of {VALIDATE_SUITES}, got {suite!r}")
    if trials < 100:
        raise SpecError(f"trials must be at least 100, got {trials}")
    checks = []
    if suite in ("all", "density"):
        checks += _density_checks()
    if suite in ("all", "variances"):
        checks += _variance_checks(trials, seed)
    if suite in ("all", "traces"):
        checks += _trace_checks(trials, seed)
    if suite in ("all", "milb"):
        checks += _milb_checks(trials, seed)
    return {
        "suite": suite,
        "trials": trials,
        "seed": seed,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }


def jsonable(obj):
    """Floats to 17-significant-digit-exact JSON numbers; numpy scalars to Python."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
