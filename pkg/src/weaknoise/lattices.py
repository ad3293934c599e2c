"""Classical lattices (Z^n, D_n, E8), nearest-point decoding, sphere
enumeration, and power-constrained codebook construction.

Decoders follow the standard coordinate-rounding constructions: Z^n rounds
coordinate-wise, D_n rounds and flips the worst coordinate when the parity
check fails, and E8 takes the better of its two D8 cosets.  Codebooks are
the M smallest-norm points of a scaled lattice inside the power sphere of
radius sqrt(n*P), in a deterministic (norm, then lexicographic) order.

LatticeDef and Codebook are immutable after construction and all functions
are pure, so everything here can be shared freely across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exponents import q_function

__all__ = [
    "DEFAULT_ENUM_CAP",
    "EnumerationCapError",
    "LatticeDef",
    "Codebook",
    "make_lattice",
    "nearest_point",
    "nearest_point_scaled",
    "nvnr",
    "enumerate_ball",
    "build_codebook",
    "decode_codebook",
    "voronoi_escape_prob_zn",
    "codebook_to_csv",
]

DEFAULT_ENUM_CAP = 1_000_000

# Relative slack when testing ||v||^2 <= r^2, so points exactly on the
# sphere survive floating-point rounding.  Squared norms of the lattices
# here live on a grid of quarter-integers, far coarser than this.
_BOUNDARY_TOL = 1e-9


class EnumerationCapError(RuntimeError):
    """A ball enumeration would exceed the configured point cap."""


@dataclass(frozen=True, eq=False)
class LatticeDef:
    """A base lattice: name ('z', 'd' or 'e8'), dimension, generator matrix
    (rows are basis vectors) and Voronoi cell volume |det(generator)|."""

    name: str
    dimension: int
    generator: np.ndarray
    voronoi_volume: float

    def __post_init__(self):
        if self.name not in ("z", "d", "e8"):
            raise ValueError(f"unknown lattice name {self.name!r}")
        g = self.generator
        if g.shape != (self.dimension, self.dimension):
            raise ValueError(f"generator shape {g.shape} != ({self.dimension}, {self.dimension})")
        det = abs(float(np.linalg.det(g)))
        if not math.isclose(det, self.voronoi_volume, rel_tol=1e-9):
            raise ValueError(f"voronoi_volume {self.voronoi_volume} != |det| {det}")


def make_lattice(kind: str, dimension: int | None = None) -> LatticeDef:
    """Construct one of the supported lattices.

    kind 'z': Z^n, any n >= 1.  kind 'd': D_n (even-coordinate-sum integer
    vectors), n >= 2.  kind 'e8': the E8 lattice, dimension fixed at 8.
    """
    kind = kind.lower()
    if kind == "z":
        n = 1 if dimension is None else dimension
        if n < 1:
            raise ValueError(f"Z^n needs n >= 1, got {n}")
        gen = np.eye(n)
    elif kind == "d":
        n = 4 if dimension is None else dimension
        if n < 2:
            raise ValueError(f"D_n needs n >= 2, got {n}")
        gen = np.zeros((n, n))
        gen[0, 0] = gen[0, 1] = 1.0
        gen[1, 0], gen[1, 1] = 1.0, -1.0
        for i in range(2, n):
            gen[i, i - 1], gen[i, i] = 1.0, -1.0
    elif kind == "e8":
        n = 8 if dimension is None else dimension
        if n != 8:
            raise ValueError(f"E8 has dimension 8, got {n}")
        gen = np.zeros((8, 8))
        gen[0, 0] = 2.0
        for i in range(1, 7):
            gen[i, i - 1], gen[i, i] = -1.0, 1.0
        gen[7, :] = 0.5
    else:
        raise ValueError(f"unknown lattice kind {kind!r}")
    gen.flags.writeable = False
    return LatticeDef(kind, n, gen, abs(float(np.linalg.det(gen))))


def _round_half_down(y: np.ndarray) -> np.ndarray:
    """Nearest integer; exact halves round toward -inf (the smaller point)."""
    return np.ceil(y - 0.5)


def _nearest_zn(y: np.ndarray) -> np.ndarray:
    return _round_half_down(y)


def _nearest_dn(y: np.ndarray) -> np.ndarray:
    f = _round_half_down(y)
    odd = np.mod(f.sum(axis=1), 2.0) != 0.0
    if odd.any():
        w = y[odd] - f[odd]
        k = np.argmax(np.abs(w), axis=1)
        rows = np.arange(len(k))
        step = np.where(w[rows, k] > 0.0, 1.0, -1.0)
        fo = f[odd]
        fo[rows, k] += step
        f[odd] = fo
    return f


def _lex_less(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise lexicographic a < b."""
    out = np.zeros(len(a), dtype=bool)
    undecided = np.ones(len(a), dtype=bool)
    for j in range(a.shape[1]):
        lt = undecided & (a[:, j] < b[:, j])
        gt = undecided & (a[:, j] > b[:, j])
        out[lt] = True
        undecided &= ~(lt | gt)
        if not undecided.any():
            break
    return out


def _nearest_e8(y: np.ndarray) -> np.ndarray:
    c0 = _nearest_dn(y)
    c1 = _nearest_dn(y - 0.5) + 0.5
    d0 = ((y - c0) ** 2).sum(axis=1)
    d1 = ((y - c1) ** 2).sum(axis=1)
    use1 = d1 < d0
    tie = d1 == d0
    if tie.any():
        use1[tie] = _lex_less(c1[tie], c0[tie])
    return np.where(use1[:, None], c1, c0)


_DECODERS = {"z": _nearest_zn, "d": _nearest_dn, "e8": _nearest_e8}


def nearest_point(lat: LatticeDef, y) -> np.ndarray:
    """Nearest lattice point(s) to y (shape (n,) or (m, n)).

    Exact distance ties at half-integer inputs resolve deterministically:
    Z^n picks the lexicographically smaller point; D_n and E8 use a fixed
    first-worst-coordinate rule (still distance-optimal).
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != lat.dimension:
        raise ValueError(f"input dimension {y.shape[-1]} != lattice dimension {lat.dimension}")
    if not np.all(np.isfinite(y)):
        raise ValueError("input must be finite")
    single = y.ndim == 1
    out = _DECODERS[lat.name](np.atleast_2d(y))
    return out[0] if single else out


def nearest_point_scaled(lat: LatticeDef, scale: float, y) -> np.ndarray:
    """Nearest point of the scaled lattice scale * lat; covariant in scale."""
    if not (scale > 0.0 and math.isfinite(scale)):
        raise ValueError(f"scale must be finite and > 0, got {scale!r}")
    return scale * nearest_point(lat, np.asarray(y, dtype=float) / scale)


def nvnr(lat: LatticeDef, scale: float, sigma2: float) -> float:
    """Normalized volume-to-noise ratio V(scale*lat)**(2/n) / sigma2."""
    if not (scale > 0.0 and sigma2 > 0.0):
        raise ValueError("scale and sigma2 must be > 0")
    return scale**2 * lat.voronoi_volume ** (2.0 / lat.dimension) / sigma2


def _ball_volume(n: int, radius: float) -> float:
    return math.pi ** (0.5 * n) / math.gamma(0.5 * n + 1.0) * radius**n


def _integer_points_in_ball(center: np.ndarray, r2: float, cap: int) -> np.ndarray:
    """All z in Z^n with ||z - center||^2 <= r2 (plus boundary slack),
    via depth-first enumeration with per-coordinate pruning."""
    n = len(center)
    r2_eff = r2 + _BOUNDARY_TOL * (1.0 + r2)
    rows: list[np.ndarray] = []
    count = 0
    prefix = np.zeros(n)

    def descend(i: int, used: float):
        nonlocal count
        rem = r2_eff - used
        if rem < 0.0:
            return
        half = math.sqrt(rem)
        lo = math.ceil(center[i] - half)
        hi = math.floor(center[i] + half)
        if lo > hi:
            return
        if i == n - 1:
            vals = np.arange(lo, hi + 1, dtype=float)
            keep = (vals - center[i]) ** 2 <= rem
            vals = vals[keep]
            if len(vals):
                count += len(vals)
                if count > cap:
                    raise EnumerationCapError(
                        f"enumeration exceeded cap of {cap} points"
                    )
                block = np.tile(prefix, (len(vals), 1))
                block[:, i] = vals
                rows.append(block)
            return
        for v in range(lo, hi + 1):
            prefix[i] = v
            descend(i + 1, used + (v - center[i]) ** 2)

    descend(0, 0.0)
    if not rows:
        return np.empty((0, n))
    return np.concatenate(rows, axis=0)


def _unscaled_ball(lat: LatticeDef, r: float, cap: int) -> np.ndarray:
    """Lattice points of lat (unit scale) with norm <= r, sorted by
    (squared norm, lexicographic)."""
    n = lat.dimension
    r2 = r * r
    est = _ball_volume(n, r) / lat.voronoi_volume + 1.0
    if est > cap:
        raise EnumerationCapError(
            f"ball of radius {r:.6g} holds an estimated {est:.3g} lattice "
            f"points, exceeding the cap of {cap}"
        )
    raw_cap = 3 * cap + 1024
    if lat.name == "z":
        pts = _integer_points_in_ball(np.zeros(n), r2, raw_cap)
    elif lat.name == "d":
        pts = _integer_points_in_ball(np.zeros(n), r2, raw_cap)
        pts = pts[np.mod(pts.sum(axis=1), 2.0) == 0.0]
    else:  # e8 = D8 union (D8 + 1/2)
        ints = _integer_points_in_ball(np.zeros(8), r2, raw_cap)
        ints = ints[np.mod(ints.sum(axis=1), 2.0) == 0.0]
        zs = _integer_points_in_ball(np.full(8, -0.5), r2, raw_cap)
        zs = zs[np.mod(zs.sum(axis=1), 2.0) == 0.0]
        pts = np.concatenate([ints, zs + 0.5], axis=0)
    if len(pts) > cap:
        raise EnumerationCapError(
            f"ball of radius {r:.6g} holds {len(pts)} lattice points, "
            f"exceeding the cap of {cap}"
        )
    norm2 = (pts**2).sum(axis=1)
    order = np.lexsort(tuple(pts[:, j] for j in reversed(range(n))) + (norm2,))
    return pts[order]


def enumerate_ball(
    lat: LatticeDef, scale: float, radius: float, cap: int = DEFAULT_ENUM_CAP
) -> np.ndarray:
    """All points of the scaled lattice scale*lat with norm <= radius,
    sorted by (norm, lexicographic).  Raises EnumerationCapError when the
    expected or actual point count exceeds cap."""
    if not (scale > 0.0 and math.isfinite(scale)):
        raise ValueError(f"scale must be finite and > 0, got {scale!r}")
    if not (radius > 0.0 and math.isfinite(radius)):
        raise ValueError(f"radius must be finite and > 0, got {radius!r}")
    return scale * _unscaled_ball(lat, radius / scale, cap)


@dataclass(frozen=True, eq=False)
class Codebook:
    """A finite, power-constrained, indexed codeword set.

    points are scale * lattice_points; every point satisfies
    ||x||^2 <= dimension * power_limit; index order is (norm, lex).
    """

    lattice: LatticeDef
    scale: float
    lattice_points: np.ndarray  # (M, n), exact integer/half-integer entries
    points: np.ndarray  # (M, n), channel-input units
    power_limit: float

    def __post_init__(self):
        if len(self.points) < 1 or self.points.shape != self.lattice_points.shape:
            raise ValueError("points and lattice_points must be congruent, non-empty")

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def rate(self) -> float:
        """ln(M) / n, in nats per channel use."""
        return math.log(self.size) / self.lattice.dimension

    def membership_index(self) -> dict[bytes, int]:
        """Exact lookup from a lattice point to its codeword index."""
        keys = np.round(2.0 * self.lattice_points).astype(np.int64)
        return {keys[i].tobytes(): i for i in range(len(keys))}


def build_codebook(
    lat: LatticeDef, n: int, P: float, M: int, cap: int = DEFAULT_ENUM_CAP
) -> Codebook:
    """Scale the lattice so at least M points fit in the sphere of radius
    sqrt(n*P), then keep the first M in (norm, lex) order.

    The scale beta is found by bisection: the point count inside the fixed
    sphere is non-increasing in beta, and we take the largest beta (up to
    relative 1e-12) that still yields M points.
    """
    if lat.dimension != n:
        raise ValueError(f"lattice dimension {lat.dimension} != n {n}")
    if not isinstance(M, int) or M < 2:
        raise ValueError(f"M must be an integer >= 2, got {M!r}")
    if M > cap:
        raise EnumerationCapError(f"M = {M} exceeds the enumeration cap of {cap}")
    if not (P > 0.0 and math.isfinite(P)):
        raise ValueError(f"P must be finite and > 0, got {P!r}")
    radius = math.sqrt(n * P)

    def count(beta: float) -> int:
        try:
            return len(_unscaled_ball(lat, radius / beta, cap))
        except EnumerationCapError:
            return cap + 1  # definitely >= M (M <= cap)

    # Volume heuristic start, then grow/shrink by 2**(1/n) so the expected
    # count changes by ~2x per step.
    beta = (_ball_volume(n, radius) / (M * lat.voronoi_volume)) ** (1.0 / n)
    step = 2.0 ** (1.0 / n)
    lo = beta
    while count(lo) < M:
        lo /= step
    hi = lo
    while count(hi) >= M:
        hi *= step
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if count(mid) >= M:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    unscaled = _unscaled_ball(lat, radius / lo, cap)[:M]
    # Snap the scale to the exact critical value sqrt(n P) / r_max, then
    # nudge down until the power constraint holds in floating point.
    r_max = math.sqrt(float((unscaled**2).sum(axis=1).max()))
    beta = radius / r_max if r_max > 0.0 else lo
    while ((beta * unscaled) ** 2).sum(axis=1).max() > n * P:
        beta = float(np.nextafter(beta, 0.0))
    unscaled.flags.writeable = False
    points = beta * unscaled
    points.flags.writeable = False
    return Codebook(lat, beta, unscaled, points, P)


def decode_codebook(cb: Codebook, y, fast: bool = False):
    """Index of the codeword nearest to y (shape (n,) -> int, or
    (m, n) -> int array).  Ties break toward the smaller index.

    The default is an exact brute-force scan over all M codewords.  With
    fast=True, the lattice nearest-point decoder plus a membership lookup
    answers most queries in O(n); misses fall back to brute force, so the
    result is still a true nearest codeword (ties may resolve differently).
    """
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    Y = np.atleast_2d(y)
    if Y.shape[1] != cb.lattice.dimension:
        raise ValueError(
            f"input dimension {Y.shape[1]} != codebook dimension {cb.lattice.dimension}"
        )
    out = np.empty(len(Y), dtype=np.int64)
    todo = np.arange(len(Y))
    if fast:
        v = nearest_point(cb.lattice, Y / cb.scale)
        keys = np.round(2.0 * v).astype(np.int64)
        index = cb.membership_index()
        misses = []
        for i in range(len(Y)):
            hit = index.get(keys[i].tobytes())
            if hit is None:
                misses.append(i)
            else:
                out[i] = hit
        todo = np.asarray(misses, dtype=np.int64)
    if len(todo):
        pts = cb.points
        block = max(1, 4_000_000 // (len(pts) * pts.shape[1]))
        for a in range(0, len(todo), block):
            idx = todo[a : a + block]
            diff = Y[idx][:, None, :] - pts[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            out[idx] = np.argmin(d2, axis=1)
    return int(out[0]) if single else out


def voronoi_escape_prob_zn(beta: float, sigma: float, n: int) -> float:
    """Exact probability that N(0, sigma^2 I_n) noise leaves the Voronoi
    cell of the scaled lattice beta * Z^n (a cube of side beta):

        1 - (1 - 2 Q(beta / (2 sigma)))**n
    """
    if not (beta > 0.0 and sigma > 0.0 and n >= 1):
        raise ValueError("need beta > 0, sigma > 0, n >= 1")
    return 1.0 - (1.0 - 2.0 * q_function(beta / (2.0 * sigma))) ** n


def codebook_to_csv(cb: Codebook, f) -> None:
    """Write the codebook as CSV rows (index, coordinates) to a text file
    object."""
    n = cb.lattice.dimension
    f.write("index," + ",".join(f"x{j}" for j in range(n)) + "\n")
    for i, row in enumerate(cb.points):
        f.write(str(i) + "," + ",".join(format(v, ".12g") for v in row) + "\n")
