"""Sturm-sequence bisection eigensolver for the truncated parity chains.

This is the oracle against which both continued-fraction methods are
cross-validated.  It deliberately shares no code path with them: counting
negative pivots of the LDL^T factorization of ``T - E`` gives the number of
eigenvalues below E, and bisection on that count brackets each eigenvalue.

Bisection brackets are snapped outward to a power-of-two lattice, so every
endpoint is an exact dyadic number.  Results are then bit-reproducible at a
fixed tolerance, independent of truncation order: any two chains that agree
on an eigenvalue far below the tolerance return the identical float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import TooFewLevelsError
from .model import ChainCoefficients, Parity, TruncationOrder

__all__ = [
    "SpectralMethod",
    "EnergyLevel",
    "SpectrumApproximation",
    "sturm_count",
    "eigenvalues",
    "DEFAULT_EIG_TOL",
]

# Default bisection width, relative to omega.
DEFAULT_EIG_TOL = 1e-11

# Gap below which two levels are flagged as a near-degenerate pair,
# relative to omega.
NEAR_DEGENERATE_GAP = 1e-10

# Pivots in (-PIVMIN, PIVMIN] are replaced by -PIVMIN before counting, the
# usual bisection convention: an exactly singular leading submatrix counts
# as an eigenvalue below E.  Small enough never to matter at physical
# scales, large enough that a_j / PIVMIN cannot overflow for any
# representable chain.
PIVMIN = 1e-290


class SpectralMethod(Enum):
    METHOD_A = "a"
    METHOD_B = "b"
    ORACLE = "oracle"
    PATHOLOGICAL = "pathological"


@dataclass(frozen=True)
class EnergyLevel:
    index: int
    energy: float
    residual: float


@dataclass(frozen=True)
class SpectrumApproximation:
    """Ordered low-lying spectrum estimate with per-level residuals.

    ``residual`` is each method's own convergence witness: the spectral
    function magnitude for the coefficient method, the resolvent reciprocal
    for the resolvent method, and the final bracket width for the oracle.
    Energies are strictly increasing except across flagged near-degenerate
    pairs, which are kept separate rather than merged.
    """

    method: SpectralMethod
    parity: Parity | None
    order: TruncationOrder
    levels: tuple[EnergyLevel, ...]
    flagged_pairs: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        flagged = {frozenset(p) for p in self.flagged_pairs}
        for a, b in zip(self.levels, self.levels[1:]):
            if a.energy >= b.energy and frozenset((a.index, b.index)) not in flagged:
                raise ValueError(
                    f"levels not strictly increasing at indices {a.index},{b.index}"
                )

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def energies(self) -> np.ndarray:
        return np.array([lev.energy for lev in self.levels])

    @classmethod
    def from_levels(cls, method, parity, order, levels, omega) -> "SpectrumApproximation":
        """Assemble, flagging near-degenerate neighbours (gap < 1e-10*omega)."""
        levels = tuple(levels)
        flagged = tuple(
            (a.index, b.index)
            for a, b in zip(levels, levels[1:])
            if abs(b.energy - a.energy) < NEAR_DEGENERATE_GAP * omega
        )
        return cls(method=method, parity=parity, order=order, levels=levels,
                   flagged_pairs=flagged)


def _negative_pivot_counts(energies: np.ndarray, diag: np.ndarray, off2: np.ndarray) -> np.ndarray:
    """Count eigenvalues strictly below each energy, vectorized.

    ``energies`` has any shape; ``diag`` (..., n+1) and ``off2`` (..., n)
    broadcast against it on the leading axes.
    """
    q = diag[..., 0] - energies
    q = np.where(q <= PIVMIN, np.minimum(q, -PIVMIN), q)
    count = (q < 0).astype(np.int64)
    for j in range(1, diag.shape[-1]):
        q = (diag[..., j] - energies) - off2[..., j - 1] / q
        q = np.where(q <= PIVMIN, np.minimum(q, -PIVMIN), q)
        count += q < 0
    return count


def sturm_count(energy: float, chain: ChainCoefficients) -> int:
    """Number of chain eigenvalues strictly less than ``energy``.

    Monotone non-decreasing in the energy; ranges 0..order+1.  Exactly
    singular pivots are perturbed to -PIVMIN, which keeps the count
    deterministic.
    """
    off2 = chain.offdiag * chain.offdiag
    return int(_negative_pivot_counts(np.asarray(float(energy)), chain.diag, off2))


def gershgorin_interval(chain: ChainCoefficients) -> tuple[float, float]:
    """Enclosing interval for the whole spectrum from Gershgorin discs."""
    radius = np.zeros(chain.dim)
    radius[:-1] += np.abs(chain.offdiag)
    radius[1:] += np.abs(chain.offdiag)
    return float(np.min(chain.diag - radius)), float(np.max(chain.diag + radius))


def _dyadic_bracket(lo: float, hi: float) -> tuple[float, float]:
    # Snap outward so both endpoints are integer multiples of a power of two;
    # all bisection midpoints then stay on the absolute dyadic lattice.
    width = 2.0 ** math.ceil(math.log2(max(hi - lo, 1e-30)))
    start = width * math.floor(lo / width)
    stop = start + width
    while stop < hi:
        stop += width
    return start, stop


def eigenvalues(chain: ChainCoefficients, first_k: int, tol: float | None = None) -> SpectrumApproximation:
    """The ``first_k`` smallest eigenvalues of the chain by Sturm bisection.

    Each eigenvalue is bracketed until the bracket width drops below
    ``tol`` (default 1e-11 * omega); the reported energy is the final
    bracket midpoint and the residual is the final width.  Deterministic;
    all ``first_k`` bisections run in lockstep on one vectorized pivot
    sweep per iteration.
    """
    if tol is None:
        tol = DEFAULT_EIG_TOL * chain.params.omega
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 1 <= first_k <= chain.dim:
        raise ValueError(f"first_k must be in 1..{chain.dim}, got {first_k}")

    off2 = chain.offdiag * chain.offdiag
    lo0, hi0 = _dyadic_bracket(*gershgorin_interval(chain))
    lo = np.full(first_k, lo0)
    hi = np.full(first_k, hi0)
    wanted = np.arange(1, first_k + 1)
    diag = chain.diag[None, :]
    off2 = off2[None, :]
    while float(np.max(hi - lo)) > tol:
        mid = 0.5 * (lo + hi)
        below = _negative_pivot_counts(mid, diag, off2) >= wanted
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)

    widths = hi - lo
    levels = [
        EnergyLevel(index=n, energy=float(0.5 * (lo[n] + hi[n])), residual=float(widths[n]))
        for n in range(first_k)
    ]
    return SpectrumApproximation.from_levels(
        SpectralMethod.ORACLE, chain.parity, chain.order, levels, chain.params.omega
    )


def eigenvalues_batch(
    diag: np.ndarray,
    off2: np.ndarray,
    first_k: int,
    tol: float,
    interval: tuple[float, float],
) -> np.ndarray:
    """Low-level batched bisection over many chains at once.

    ``diag`` has shape (S, n+1) or (n+1,), ``off2`` shape (S, n); returns an
    (S, first_k) array.  Used by the parameter scan, where hundreds of
    chains differ only in their off-diagonals.
    """
    size = off2.shape[0]
    lo0, hi0 = _dyadic_bracket(*interval)
    lo = np.full((size, first_k), lo0)
    hi = np.full((size, first_k), hi0)
    wanted = np.arange(1, first_k + 1)[None, :]
    d = np.broadcast_to(diag, (size, diag.shape[-1]))[:, None, :]
    o2 = off2[:, None, :]
    while float(np.max(hi - lo)) > tol:
        mid = 0.5 * (lo + hi)
        below = _negative_pivot_counts(mid, d, o2) >= wanted
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return 0.5 * (lo + hi)


def union_spectrum(spectra: list[SpectrumApproximation], first_k: int | None = None) -> list[EnergyLevel]:
    """Merge per-parity spectra into one sorted level list, re-indexed."""
    merged = sorted((lev for s in spectra for lev in s.levels), key=lambda lev: lev.energy)
    if first_k is not None:
        if len(merged) < first_k:
            raise TooFewLevelsError(f"requested {first_k} levels, have {len(merged)}")
        merged = merged[:first_k]
    return [EnergyLevel(index=i, energy=lev.energy, residual=lev.residual)
            for i, lev in enumerate(merged)]
