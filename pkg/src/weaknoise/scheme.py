"""Quantize-and-code modulation: uniform quantizer, codebook modulator,
index-decoding estimator, outage definitions, and signal-locus length
measurement for generic modulators.

The modulator quantizes u in [0, 1] into M bins and transmits the codeword
indexed by the bin.  The estimator decodes a codeword index and returns the
bin midpoint, so conditioned on a correct decode the estimation error is
exactly the quantization error.  The pairing variant maps each pair of
consecutive bins to one codeword (making the map piecewise continuous on
half the bins) and resolves the resulting ambiguity with a fair coin at the
estimator; the error then stays within 3/(2M) under correct pair decoding.

ModScheme is immutable and estimate() takes its randomness as an explicit
argument, so all operations are pure given their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lattices import Codebook, decode_codebook, nearest_point

__all__ = [
    "DecodeErrorOutage",
    "SphereOutage",
    "ModScheme",
    "ModulatorFn",
    "quantize",
    "codeword_index",
    "modulate",
    "estimate",
    "is_outage",
    "locus_length",
    "scheme_modulator",
]


@dataclass(frozen=True)
class DecodeErrorOutage:
    """Outage = the decoded codeword index differs from the transmitted one.

    With full_lattice=True the receiver decodes over the whole (scaled)
    lattice instead of the finite codebook; outage is then exactly the
    event that the noise leaves the Voronoi cell, which has a known closed
    form for Z^n and serves as a simulation oracle.
    """

    full_lattice: bool = False


@dataclass(frozen=True)
class SphereOutage:
    """Outage = ||z||^2 > n sigma^2 (1 + theta), independent of u.

    theta = w(lam) makes this the high-SNR-optimal outage region for
    outage exponent lam.
    """

    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta >= 0.0):
            raise ValueError(f"theta must be finite and >= 0, got {self.theta!r}")


OutageKind = DecodeErrorOutage | SphereOutage


@dataclass(frozen=True, eq=False)
class ModScheme:
    """A quantize-and-code scheme: M quantizer bins over a codebook.

    Without pairing the codebook must hold at least M codewords; with
    pairing M must be even and the first M/2 codewords are used.
    """

    codebook: Codebook
    M: int
    pairing: bool = False
    outage: OutageKind = DecodeErrorOutage()

    def __post_init__(self):
        if not isinstance(self.M, int) or self.M < 2:
            raise ValueError(f"M must be an integer >= 2, got {self.M!r}")
        if self.pairing and self.M % 2 != 0:
            raise ValueError(f"pairing needs even M, got {self.M}")
        needed = self.M // 2 if self.pairing else self.M
        if self.codebook.size < needed:
            raise ValueError(
                f"codebook holds {self.codebook.size} codewords, scheme needs {needed}"
            )

    @property
    def n(self) -> int:
        return self.codebook.lattice.dimension

    @property
    def codewords_used(self) -> int:
        return self.M // 2 if self.pairing else self.M


def quantize(u: float, M: int) -> tuple[int, float]:
    """Bin index and bin midpoint of u in [0, 1] under M uniform bins.

    u = 1 clamps into the top bin, so the bins cover all of [0, 1];
    |midpoint - u| <= 1/(2M) always.
    """
    if not isinstance(M, int) or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")
    if not (0.0 <= u <= 1.0):
        raise ValueError(f"u must be in [0, 1], got {u!r}")
    i = min(int(u * M), M - 1)
    return i, (i + 0.5) / M


def codeword_index(s: ModScheme, u: float) -> int:
    """Codeword index the modulator transmits for u (pair-collapsed when
    pairing is on)."""
    i, _ = quantize(u, s.M)
    return i // 2 if s.pairing else i


def modulate(s: ModScheme, u: float) -> np.ndarray:
    """Channel input for u; always satisfies the power constraint because
    every codeword does."""
    return s.codebook.points[codeword_index(s, u)]


def estimate(s: ModScheme, y, rng: np.random.Generator | None = None) -> float:
    """Estimate u from a channel output y.

    Decodes the nearest codeword; without pairing the estimate is the
    midpoint of the decoded bin.  With pairing, a fair bit from rng picks
    one of the two bins mapped to the decoded codeword.
    """
    idx = decode_codebook(s.codebook, y)
    if not s.pairing:
        return (idx + 0.5) / s.M
    if rng is None:
        raise ValueError("pairing estimate needs a bit source (rng)")
    b = int(rng.integers(0, 2))
    return (2 * idx + b + 0.5) / s.M


def is_outage(s: ModScheme, u: float, z, sigma: float) -> bool:
    """Whether the noise vector z is an outage for parameter u."""
    z = np.asarray(z, dtype=float)
    if z.shape != (s.n,):
        raise ValueError(f"noise shape {z.shape} != ({s.n},)")
    if isinstance(s.outage, SphereOutage):
        return float(z @ z) > s.n * sigma**2 * (1.0 + s.outage.theta)
    j = codeword_index(s, u)
    y = s.codebook.points[j] + z
    if s.outage.full_lattice:
        v = nearest_point(s.codebook.lattice, y / s.codebook.scale)
        return not np.array_equal(v, s.codebook.lattice_points[j])
    return decode_codebook(s.codebook, y) != j


@dataclass(frozen=True)
class ModulatorFn:
    """A generic modulator u in [0,1] -> R^n for locus-length measurement.

    continuity is a free-text descriptor (e.g. 'continuous',
    'piecewise-constant over M bins').
    """

    fn: Callable[[float], np.ndarray]
    dimension: int
    power_limit: float
    continuity: str = "unspecified"


def locus_length(f: ModulatorFn, k: int) -> float:
    """Polyline approximation of the signal locus length over k+1 uniform
    samples of u; non-decreasing under refinement k -> 2k."""
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    pts = np.asarray([f.fn(j / k) for j in range(k + 1)], dtype=float)
    if pts.shape != (k + 1, f.dimension):
        raise ValueError(f"modulator output shape {pts.shape[1:]} != ({f.dimension},)")
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def scheme_modulator(s: ModScheme) -> ModulatorFn:
    """Wrap a scheme's modulator for locus-length measurement."""
    kind = "piecewise-constant over M/2 bin pairs" if s.pairing else "piecewise-constant over M bins"
    return ModulatorFn(
        fn=lambda u: modulate(s, u),
        dimension=s.n,
        power_limit=s.codebook.power_limit,
        continuity=kind,
    )
