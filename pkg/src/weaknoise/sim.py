"""AWGN Monte Carlo harness with importance sampling for small outage
probabilities, plus empirical-exponent extraction and parameter sweeps.

The worst case over the parameter u (both the outage probability and the
conditional weak-noise cost) is taken over a configurable u-grid that
includes points at and just beside the quantizer bin edges, where the worst
cases sit.  Trials are split into chunks; each (u, chunk) pair gets its own
substream hashed from the master seed, so results are bit-identical for a
fixed (seed, config) regardless of execution order, and a parallel driver
would reproduce the serial result.

Importance sampling draws noise from a variance-inflated Gaussian
(covariance tilt * sigma**2 * I, tilt >= 1) and weights each outage
indicator by the exact Gaussian likelihood ratio, evaluated in the log
domain.  The outage-probability estimator is unbiased; the conditional
cost uses the standard self-normalized ratio.  tilt = 1 reproduces plain
Monte Carlo exactly (same noise stream, unit weights).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .cost import PowerCost
from .exponents import TradeoffParams, curve_point, solve_w, sphere_outage_prob
from .lattices import EnumerationCapError, decode_codebook, make_lattice, build_codebook, nearest_point
from .scheme import DecodeErrorOutage, ModScheme, SphereOutage, codeword_index, quantize

__all__ = [
    "SimConfig",
    "SimResult",
    "SWEEP_COLUMNS",
    "build_u_grid",
    "outage_for",
    "make_scheme",
    "run_plain_mc",
    "run_importance_sampled",
    "result_row",
    "sweep_exponents",
]

# CSV schema shared by the simulate and sweep commands.
SWEEP_COLUMNS = (
    "n",
    "lambda",
    "gamma",
    "alpha",
    "p_out",
    "stderr",
    "emp_outage_exp",
    "worst_cost",
    "emp_cost_exp",
    "E_U",
    "E_L",
)

# Full bin-edge augmentation of the u-grid is only done up to this many
# bins; beyond it, only the edges of the bins containing the uniform grid
# points are added, keeping the grid size bounded.
_EDGE_CAP = 1024


@dataclass(frozen=True)
class SimConfig:
    """Configuration of one simulation run; gamma = P / sigma**2."""

    n: int
    P: float
    sigma: float
    lam: float
    alpha: float = 2.0
    trials: int = 10_000
    seed: int = 0
    outage: str = "decode"  # 'decode' or 'sphere'; used by scheme builders
    sphere_theta: float | None = None  # default: w(lam)
    full_lattice: bool = False
    tilt: float | None = None  # IS noise-variance factor, >= 1
    u_grid: int = 33
    edge_points: bool = True
    chunk_size: int = 8192
    fast_decode: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n!r}")
        if not (self.P > 0.0 and math.isfinite(self.P)):
            raise ValueError(f"P must be finite and > 0, got {self.P!r}")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma!r}")
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam!r}")
        if self.alpha < 1.0:
            raise ValueError(f"alpha must be >= 1, got {self.alpha!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials!r}")
        if self.outage not in ("decode", "sphere"):
            raise ValueError(f"outage must be 'decode' or 'sphere', got {self.outage!r}")
        if self.tilt is not None and not (self.tilt > 0.0 and math.isfinite(self.tilt)):
            raise ValueError(f"tilt must be finite and > 0, got {self.tilt!r}")
        if self.u_grid < 1:
            raise ValueError(f"u_grid must be >= 1, got {self.u_grid!r}")
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size!r}")

    @property
    def gamma(self) -> float:
        return self.P / self.sigma**2


@dataclass(frozen=True, eq=False)
class SimResult:
    """Outage-probability estimate with confidence interval, worst-case
    conditional weak-noise cost, and the finite-n empirical exponents.

    p_out / stderr / ci95 / trials_effective refer to the worst grid point
    u_worst_outage; worst_cost to u_worst_cost.  The per_u_* arrays carry
    the full grid diagnostics.  Exponents are +inf when the underlying
    estimate is zero (flagged in notes), NaN when undefined.
    """

    p_out: float
    stderr: float
    ci95: tuple[float, float]
    emp_outage_exp: float
    worst_cost: float
    emp_cost_exp: float
    trials_effective: float
    u_worst_outage: float
    u_worst_cost: float
    grid: np.ndarray
    per_u_p: np.ndarray
    per_u_stderr: np.ndarray
    per_u_cost: np.ndarray
    per_u_ess: np.ndarray
    notes: tuple[str, ...] = ()


def build_u_grid(
    M: int, u_grid: int = 33, edge_points: bool = True, edge_cap: int = _EDGE_CAP
) -> np.ndarray:
    """Sorted, deduplicated grid of u values in [0, 1].

    Starts from u_grid uniform points (u_grid = 1 gives just 0.5) and, when
    edge_points is on, adds the quantizer bin edges j/M plus points 1e-9 to
    either side, clipped to [0, 1].  For M > edge_cap only the edges of the
    bins containing the uniform points are added.
    """
    if M < 1 or u_grid < 1:
        raise ValueError("need M >= 1 and u_grid >= 1")
    base = np.array([0.5]) if u_grid == 1 else np.linspace(0.0, 1.0, u_grid)
    parts = [base]
    if edge_points:
        if M + 1 <= edge_cap:
            js = np.arange(M + 1)
        else:
            js = np.unique(np.clip(np.floor(base * M).astype(np.int64), 0, M))
            js = np.unique(np.concatenate([js, js + 1]).clip(0, M))
        edges = js / M
        parts += [edges, np.clip(edges - 1e-9, 0.0, 1.0), np.clip(edges + 1e-9, 0.0, 1.0)]
    return np.unique(np.concatenate(parts))


def outage_for(cfg: SimConfig) -> DecodeErrorOutage | SphereOutage:
    """Outage definition selected by the config; the sphere radius
    parameter defaults to w(lam)."""
    if cfg.outage == "sphere":
        theta = solve_w(cfg.lam) if cfg.sphere_theta is None else cfg.sphere_theta
        return SphereOutage(theta)
    return DecodeErrorOutage(full_lattice=cfg.full_lattice)


def make_scheme(
    cfg: SimConfig,
    lattice_kind: str = "z",
    M: int | None = None,
    rate: float | None = None,
    pairing: bool = False,
) -> ModScheme:
    """Build the codebook and scheme for a config.

    Give exactly one of M (quantizer bins) or rate (nats; M = ceil(e^{nR})).
    With pairing, M must be even and the codebook holds M/2 codewords.
    """
    if (M is None) == (rate is None):
        raise ValueError("give exactly one of M or rate")
    if rate is not None:
        if cfg.n * rate > math.log(1e15):
            raise EnumerationCapError(
                f"rate {rate:.4g} at n={cfg.n} needs e^{cfg.n * rate:.1f} codewords"
            )
        M = math.ceil(math.exp(cfg.n * rate))
    if M < 2:
        raise ValueError(f"M must be >= 2, got {M} (rate too small?)")
    if pairing and M % 2 != 0:
        M += 1
    codewords = M // 2 if pairing else M
    if codewords < 2:
        raise ValueError(f"pairing with M = {M} leaves fewer than 2 codewords")
    lat = make_lattice(lattice_kind, cfg.n)
    cb = build_codebook(lat, cfg.n, cfg.P, codewords)
    return ModScheme(codebook=cb, M=M, pairing=pairing, outage=outage_for(cfg))


def _substream(seed: int, u_idx: int, chunk_idx: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(u_idx, chunk_idx))
    return np.random.default_rng(ss)


def _chunk_outage_and_cost(
    s: ModScheme,
    u: float,
    Z: np.ndarray,
    sigma: float,
    bits: np.ndarray | None,
    rho: PowerCost,
    r2: np.ndarray,
    fast: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Outage mask and per-trial conditional cost (zeros on outage rows)."""
    m = len(Z)
    i_u, q_u = quantize(u, s.M)
    j = codeword_index(s, u)
    x = s.codebook.points[j]
    cost = np.zeros(m)
    if isinstance(s.outage, SphereOutage):
        out = r2 > s.n * sigma**2 * (1.0 + s.outage.theta)
        non = ~out
        if non.any():
            idx = decode_codebook(s.codebook, x + Z[non], fast=fast)
            if s.pairing:
                est = (2 * idx + bits[non] + 0.5) / s.M
            else:
                est = (idx + 0.5) / s.M
            cost[non] = rho.rho(est - u)
        return out, cost
    # Decode-error outage: non-outage means a correct (pair) decode, so the
    # estimate is known without a second decode.
    if s.outage.full_lattice:
        v = nearest_point(s.codebook.lattice, (x + Z) / s.codebook.scale)
        out = np.any(v != s.codebook.lattice_points[j], axis=1)
    else:
        out = decode_codebook(s.codebook, x + Z, fast=fast) != j
    non = ~out
    if non.any():
        if s.pairing:
            est = (2 * j + bits[non] + 0.5) / s.M
            cost[non] = rho.rho(est - u)
        else:
            cost[non] = rho.rho(q_u - u)
    return out, cost


def _mc_engine(cfg: SimConfig, s: ModScheme, tilt: float) -> SimResult:
    if s.n != cfg.n:
        raise ValueError(f"scheme dimension {s.n} != cfg.n {cfg.n}")
    rho = PowerCost(cfg.alpha)
    grid = build_u_grid(s.M, cfg.u_grid, cfg.edge_points)
    T = cfg.trials
    scale = cfg.sigma * math.sqrt(tilt)
    log_tilt = math.log(tilt)
    K = len(grid)
    per_p = np.zeros(K)
    per_se = np.zeros(K)
    per_cost = np.full(K, math.nan)
    per_ess = np.zeros(K)
    notes: list[str] = []
    undefined_cost = 0

    for u_idx, u in enumerate(grid):
        sum_x = sum_x2 = 0.0
        sum_w = sum_w2 = 0.0
        sum_wc = sum_wn = 0.0
        done = 0
        chunk_idx = 0
        while done < T:
            m = min(cfg.chunk_size, T - done)
            rng = _substream(cfg.seed, u_idx, chunk_idx)
            Z = scale * rng.standard_normal((m, cfg.n))
            bits = rng.integers(0, 2, size=m) if s.pairing else None
            r2 = np.einsum("ij,ij->i", Z, Z)
            out, cost = _chunk_outage_and_cost(s, u, Z, cfg.sigma, bits, rho, r2, cfg.fast_decode)
            if tilt == 1.0:
                w = np.ones(m)
            else:
                logw = 0.5 * cfg.n * log_tilt - (r2 / (2.0 * cfg.sigma**2)) * (1.0 - 1.0 / tilt)
                w = np.exp(logw)
            x = w * out
            sum_x += x.sum()
            sum_x2 += (x * x).sum()
            sum_w += w.sum()
            sum_w2 += (w * w).sum()
            non = ~out
            sum_wc += (w[non] * cost[non]).sum()
            sum_wn += w[non].sum()
            done += m
            chunk_idx += 1
        per_p[u_idx] = sum_x / T
        if T > 1:
            var = max(0.0, (sum_x2 - sum_x * sum_x / T) / (T - 1))
            per_se[u_idx] = math.sqrt(var / T)
        per_ess[u_idx] = sum_w * sum_w / sum_w2 if sum_w2 > 0.0 else 0.0
        if sum_wn > 0.0:
            per_cost[u_idx] = sum_wc / sum_wn
        else:
            undefined_cost += 1

    iu = int(np.argmax(per_p))
    p_out = float(per_p[iu])
    se = float(per_se[iu])
    ci = (max(0.0, p_out - 1.96 * se), min(1.0, p_out + 1.96 * se))
    if T == 1:
        notes.append("degenerate ci (trials=1)")
    if p_out == 0.0:
        notes.append("no outage observed at any grid point; p_out estimate is 0")
    if undefined_cost:
        notes.append(f"undefined conditional cost at {undefined_cost} grid point(s) (no non-outage trials)")

    defined = ~np.isnan(per_cost)
    if defined.any():
        ic = int(np.nanargmax(per_cost))
        worst_cost = float(per_cost[ic])
        u_worst_cost = float(grid[ic])
    else:
        worst_cost = math.nan
        u_worst_cost = math.nan

    emp_outage = -math.log(p_out) / cfg.n if p_out > 0.0 else math.inf
    if math.isnan(worst_cost):
        emp_cost = math.nan
    elif worst_cost > 0.0:
        emp_cost = -math.log(worst_cost) / cfg.n
    else:
        emp_cost = math.inf
    return SimResult(
        p_out=p_out,
        stderr=se,
        ci95=ci,
        emp_outage_exp=emp_outage,
        worst_cost=worst_cost,
        emp_cost_exp=emp_cost,
        trials_effective=float(per_ess[iu]),
        u_worst_outage=float(grid[iu]),
        u_worst_cost=u_worst_cost,
        grid=grid,
        per_u_p=per_p,
        per_u_stderr=per_se,
        per_u_cost=per_cost,
        per_u_ess=per_ess,
        notes=tuple(notes),
    )


def run_plain_mc(cfg: SimConfig, s: ModScheme) -> SimResult:
    """Plain Monte Carlo: for each grid u and trial, draw Z ~ N(0, sigma^2 I)
    from the seeded stream, record the outage indicator and, on non-outage,
    the cost of the estimation error.  p_out and worst_cost are maxima over
    the grid, matching the worst-case formulation."""
    return _mc_engine(cfg, s, tilt=1.0)


def run_importance_sampled(cfg: SimConfig, s: ModScheme) -> SimResult:
    """Importance-sampled run with noise variance inflated by cfg.tilt.

    Requires tilt >= 1: deflating the variance would inflate the estimator
    variance for tail events.  tilt = 1 reproduces run_plain_mc exactly.
    """
    if cfg.tilt is None:
        raise ValueError("cfg.tilt is required for importance sampling")
    if cfg.tilt < 1.0:
        raise ValueError(f"tilt must be >= 1 for tail events, got {cfg.tilt!r}")
    return _mc_engine(cfg, s, tilt=cfg.tilt)


def result_row(cfg: SimConfig, res: SimResult) -> dict:
    """One CSV row (SWEEP_COLUMNS schema) for a finished run."""
    cp = curve_point(TradeoffParams(cfg.lam, cfg.gamma, cfg.alpha))
    return {
        "n": cfg.n,
        "lambda": cfg.lam,
        "gamma": cfg.gamma,
        "alpha": cfg.alpha,
        "p_out": res.p_out,
        "stderr": res.stderr,
        "emp_outage_exp": res.emp_outage_exp,
        "worst_cost": res.worst_cost,
        "emp_cost_exp": res.emp_cost_exp,
        "E_U": cp.e_upper,
        "E_L": cp.e_lower,
        "note": "; ".join(res.notes),
    }


def _exact_sphere_row(n: int, p: TradeoffParams, cp) -> dict:
    """Closed-form row: exact sphere-outage probability, and the
    deterministic worst-case quantization cost at M = ceil(e^{nR})."""
    theta = solve_w(p.lam)
    p_out = sphere_outage_prob(n, theta)
    R = cp.rate_achievable
    nR = n * R
    if nR <= 500.0:
        ln_2m = math.log(2.0 * math.ceil(math.exp(nR)))
    else:
        ln_2m = math.log(2.0) + nR  # ceiling negligible at this scale
    emp_cost_exp = p.alpha * ln_2m / n
    worst_cost = math.exp(-n * emp_cost_exp) if n * emp_cost_exp < 700.0 else 0.0
    return {
        "n": n,
        "lambda": p.lam,
        "gamma": p.gamma,
        "alpha": p.alpha,
        "p_out": p_out,
        "stderr": 0.0,
        "emp_outage_exp": -math.log(p_out) / n if p_out > 0.0 else math.inf,
        "worst_cost": worst_cost,
        "emp_cost_exp": emp_cost_exp,
        "E_U": cp.e_upper,
        "E_L": cp.e_lower,
        "note": "exact (no MC)",
    }


def sweep_exponents(
    cfg: SimConfig,
    n_list,
    lambda_list,
    gamma_list,
    lattice_kind: str = "z",
    exact_sphere: bool = False,
) -> list[dict]:
    """Grid sweep over (n, lam, gamma).

    Each point builds a scheme at the achievable rate (M = ceil(e^{nR})
    quantizer bins), runs an importance-sampled simulation, and yields one
    SWEEP_COLUMNS row; P is taken from cfg and sigma is derived from gamma.
    The IS tilt defaults to 1 + w(lam) unless cfg.tilt is set.  With
    exact_sphere, rows are computed in closed form instead (no MC).
    Infeasible points yield a row of NaNs with an explanatory note and the
    sweep continues.
    """
    rows: list[dict] = []
    for n in n_list:
        for lam in lambda_list:
            for gamma in gamma_list:
                p = TradeoffParams(lam, gamma, cfg.alpha)
                cp = curve_point(p)
                base = {
                    "n": n,
                    "lambda": lam,
                    "gamma": gamma,
                    "alpha": cfg.alpha,
                    "p_out": math.nan,
                    "stderr": math.nan,
                    "emp_outage_exp": math.nan,
                    "worst_cost": math.nan,
                    "emp_cost_exp": math.nan,
                    "E_U": cp.e_upper,
                    "E_L": cp.e_lower,
                    "note": "",
                }
                if cp.rate_achievable <= 0.0:
                    base["note"] = "infeasible: achievable rate <= 0"
                    rows.append(base)
                    continue
                if exact_sphere:
                    rows.append(_exact_sphere_row(n, p, cp))
                    continue
                sigma = math.sqrt(cfg.P / gamma)
                tilt = cfg.tilt if cfg.tilt is not None else 1.0 + solve_w(lam)
                point_cfg = replace(cfg, n=n, sigma=sigma, lam=lam, tilt=tilt)
                try:
                    s = make_scheme(point_cfg, lattice_kind, rate=cp.rate_achievable)
                except (EnumerationCapError, ValueError) as exc:
                    base["note"] = f"infeasible: {exc}"
                    rows.append(base)
                    continue
                res = run_importance_sampled(point_cfg, s)
                row = result_row(point_cfg, res)
                row["n"] = n
                rows.append(row)
    return rows
