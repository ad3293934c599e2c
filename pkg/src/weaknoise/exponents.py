"""Trade-off exponents for outage-constrained analog transmission over AWGN.

Computes the converse (upper) and achievable (lower) exponents of the
weak-noise error cost as functions of the outage exponent ``lam`` (the
worst-case outage probability must decay like ``e**(-lam*n)``) and the SNR
``gamma = P / sigma**2``.  The achievable side is the exponent of a
quantize-and-lattice-code scheme; the converse side comes from a
signal-locus-length budget combined with a binary-hypothesis-testing bound.

All rates and exponents are in nats.  Every function here is pure, so the
module is safe for unrestricted concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaincc

__all__ = [
    "LAMBDA_TIGHT_MAX",
    "TradeoffParams",
    "ExponentCurvePoint",
    "solve_w",
    "rate_converse",
    "rate_achievable",
    "exponent_upper",
    "exponent_lower",
    "curve_point",
    "random_coding_exp",
    "expurgated_exp",
    "poltyrev_exp",
    "poltyrev_inv",
    "q_function",
    "sphere_outage_prob",
    "converse_bound",
    "converse_bound_exponent",
    "locus_length_budget",
]

# Largest outage exponent for which the converse and achievable exponents
# meet at high SNR: lam = (1/2) ln(e/2), equivalently w(lam) = 1.
LAMBDA_TIGHT_MAX = 0.5 * (1.0 - math.log(2.0))

_EXPURGATED_KNEE = 4.0 / math.e


@dataclass(frozen=True)
class TradeoffParams:
    """A point in trade-off space.

    lam    -- outage exponent, nats per channel use, >= 0
    gamma  -- SNR  P / sigma**2, > 0
    alpha  -- power of the error cost |t|**alpha, >= 1
    """

    lam: float
    gamma: float
    alpha: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam!r}")
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise ValueError(f"gamma must be finite and > 0, got {self.gamma!r}")
        if not (math.isfinite(self.alpha) and self.alpha >= 1.0):
            raise ValueError(f"alpha must be finite and >= 1, got {self.alpha!r}")


@dataclass(frozen=True)
class ExponentCurvePoint:
    """One evaluated point of the trade-off curve (all values in nats).

    The rate fields keep their sign; ``e_upper``/``e_lower`` are clamped to
    zero when the corresponding rate is non-positive, so curves render
    across full lam ranges.  Check ``converse_rate_positive`` /
    ``achievable_rate_positive`` to detect the clamp.
    """

    lam: float
    w: float
    rate_converse: float
    rate_achievable: float
    e_upper: float
    e_lower: float

    @property
    def gap(self) -> float:
        return self.e_upper - self.e_lower

    @property
    def tight(self) -> bool:
        return self.gap <= 1e-10

    @property
    def converse_rate_positive(self) -> bool:
        return self.rate_converse > 0.0

    @property
    def achievable_rate_positive(self) -> bool:
        return self.rate_achievable > 0.0


def _g(theta: float) -> float:
    """theta - ln(1 + theta); strictly increasing for theta > 0."""
    return theta - math.log1p(theta)


def solve_w(lam: float) -> float:
    """Solve theta - ln(1 + theta) = 2*lam for theta >= 0.

    The left side is strictly increasing on theta > 0, so the root is
    unique.  Bracketed bisection seeded at theta0 = 2*lam + 2*sqrt(lam),
    finished with Newton steps; the residual is at most 1e-12.
    """
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam >= 0.0):
        raise ValueError(f"lam must be finite and >= 0, got {lam!r}")
    if lam == 0.0:
        return 0.0
    target = 2.0 * lam
    lo = 0.0
    hi = 2.0 * lam + 2.0 * math.sqrt(lam)
    while _g(hi) < target:
        hi *= 2.0
    # Bisect down to a narrow bracket, then polish with Newton.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _g(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-9 * (1.0 + hi):
            break
    theta = 0.5 * (lo + hi)
    for _ in range(12):
        resid = _g(theta) - target
        if abs(resid) <= 1e-14 * (1.0 + target):
            break
        theta -= resid * (1.0 + theta) / theta
        if theta < lo or theta > hi:
            theta = 0.5 * (lo + hi)
    return theta


def rate_converse(p: TradeoffParams) -> float:
    """Converse-side rate (1/2) ln(gamma / (1 + w(lam))), in nats.

    May be negative at low SNR; the caller decides what that means.
    """
    return 0.5 * math.log(p.gamma / (1.0 + solve_w(p.lam)))


def exponent_upper(p: TradeoffParams) -> float:
    """Converse exponent alpha * rate_converse, clamped to 0 at non-positive rate."""
    r = rate_converse(p)
    return p.alpha * r if r > 0.0 else 0.0


def random_coding_exp(x: float) -> float:
    """Random-coding exponent of lattice ensembles as a function of the
    normalized volume-to-noise ratio divided by 2*pi*e.

    Piecewise: 0 for x <= 1; (x - ln x - 1)/2 for 1 <= x <= 2;
    (1/2) ln(e x / 4) for x >= 2.  Continuous at both knots.
    """
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x!r}")
    if x <= 1.0:
        return 0.0
    if x <= 2.0:
        return 0.5 * (x - math.log(x) - 1.0)
    return 0.5 * (1.0 + math.log(0.25 * x))


def expurgated_exp(x: float) -> float:
    """Expurgated exponent of lattice ensembles.

    Piecewise: 0 for x <= 4/e; (1/2) ln(e x / 4) for 4/e <= x <= 4;
    x/8 for x >= 4.  Continuous at both knots.
    """
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x!r}")
    if x <= _EXPURGATED_KNEE:
        return 0.0
    if x <= 4.0:
        return 0.5 * (1.0 + math.log(0.25 * x))
    return 0.125 * x


def poltyrev_exp(x: float) -> float:
    """Poltyrev exponent: pointwise max of the random-coding and expurgated
    exponents.  Zero for x <= 1, strictly increasing for x > 1."""
    return max(random_coding_exp(x), expurgated_exp(x))


def poltyrev_inv(lam: float) -> float:
    """Inverse of poltyrev_exp, solved analytically per branch.

    Undefined for lam <= 0 (the exponent is flat at zero there).
    """
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam > 0.0):
        raise ValueError(f"lam must be finite and > 0, got {lam!r}")
    if lam <= LAMBDA_TIGHT_MAX:
        return 1.0 + solve_w(lam)
    if lam <= 0.5:
        return 4.0 * math.exp(2.0 * lam - 1.0)
    return 8.0 * lam


def rate_achievable(p: TradeoffParams) -> float:
    """Rate of the quantize-and-lattice-code scheme meeting the outage
    constraint: (1/2) ln gamma - (1/2) ln poltyrev_inv(lam), in nats.

    lam = 0 uses the continuous limit poltyrev_inv(0+) = 1, which makes the
    rate coincide with rate_converse there.
    """
    x = 1.0 if p.lam == 0.0 else poltyrev_inv(p.lam)
    return 0.5 * math.log(p.gamma) - 0.5 * math.log(x)


def exponent_lower(p: TradeoffParams) -> float:
    """Achievable exponent alpha * rate_achievable, clamped to 0 at
    non-positive rate."""
    r = rate_achievable(p)
    return p.alpha * r if r > 0.0 else 0.0


def curve_point(p: TradeoffParams) -> ExponentCurvePoint:
    """Evaluate everything at one (lam, gamma, alpha) point."""
    w = solve_w(p.lam)
    rc = rate_converse(p)
    ra = rate_achievable(p)
    return ExponentCurvePoint(
        lam=p.lam,
        w=w,
        rate_converse=rc,
        rate_achievable=ra,
        e_upper=p.alpha * rc if rc > 0.0 else 0.0,
        e_lower=p.alpha * ra if ra > 0.0 else 0.0,
    )


def q_function(s: float) -> float:
    """Standard Gaussian upper tail Q(s) = P(N(0,1) > s)."""
    if math.isnan(s):
        raise ValueError("s must not be NaN")
    return 0.5 * math.erfc(s / math.sqrt(2.0))


def sphere_outage_prob(n: int, theta: float) -> float:
    """P(||Z||^2 > n sigma^2 (1 + theta)) for Z ~ N(0, sigma^2 I_n).

    sigma cancels, so the input is normalized: this is the chi-square(n)
    upper tail at n*(1 + theta), computed as a regularized upper incomplete
    gamma function.
    """
    if not isinstance(n, (int,)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not (math.isfinite(theta) and theta >= 0.0):
        raise ValueError(f"theta must be finite and >= 0, got {theta!r}")
    return float(gammaincc(0.5 * n, 0.5 * n * (1.0 + theta)))


def converse_bound(
    M: int,
    L: float,
    sigma: float,
    lam: float,
    n: int,
    alpha: float,
    s_opt: float | None = None,
) -> float:
    """Evaluable converse bound on the worst-case conditional error cost:

        max(0, 2 * (1/(2M))**alpha * (Q(L / (2 sigma M)) - e**(-lam n)))

    for a signal locus of length L cut into M segments.  When s_opt is
    given, M is replaced by ceil(L / (2 sigma s_opt)), which pins the
    Q-function argument near s_opt.
    """
    if s_opt is not None:
        if not (math.isfinite(s_opt) and s_opt > 0.0):
            raise ValueError(f"s_opt must be finite and > 0, got {s_opt!r}")
        M = max(1, math.ceil(L / (2.0 * sigma * s_opt)))
    if not isinstance(M, int) or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")
    if not (L >= 0.0 and math.isfinite(L)):
        raise ValueError(f"L must be finite and >= 0, got {L!r}")
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be finite and > 0, got {sigma!r}")
    if not (lam >= 0.0 and n >= 1 and alpha >= 1.0):
        raise ValueError("need lam >= 0, n >= 1, alpha >= 1")
    tail = q_function(L / (2.0 * sigma * M)) - math.exp(-lam * n)
    return max(0.0, 2.0 * (0.5 / M) ** alpha * tail)


def converse_bound_exponent(p: TradeoffParams, n: int, s: float = 1.0) -> float:
    """-(1/n) ln of the converse bound at the locus-length budget.

    Evaluates converse_bound with L = sigma * e**(n * rate_converse) and
    M = L / (2 sigma s) (continuous M; the ceiling is negligible at any
    scale where this function is useful), entirely in the log domain.
    sigma cancels.  Returns +inf when the bound clamps to zero, i.e. when
    Q(s) <= e**(-lam n).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if not (math.isfinite(s) and s > 0.0):
        raise ValueError(f"s must be finite and > 0, got {s!r}")
    r = rate_converse(p)
    tail = q_function(s) - math.exp(-p.lam * n)
    if tail <= 0.0:
        return math.inf
    ln_bound = math.log(2.0) - p.alpha * (n * r - math.log(s)) + math.log(tail)
    return -ln_bound / n


def locus_length_budget(p: TradeoffParams, sigma: float, n: int) -> float:
    """High-SNR budget sigma * e**(n * rate_converse) on the signal locus
    length of any admissible modulator."""
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise ValueError(f"sigma must be finite and > 0, got {sigma!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    return sigma * math.exp(n * rate_converse(p))
