"""Resolvent method (CLI method "b"): determinant and resolvent
recurrences on truncated parity chains, plus the pathological truncation
that plants a fictitious pole.

For a chain of dimension N+1 the minors D_j = det(E - H)_{j..N} obey

    D_j = b_j(E) D_{j+1} - a_{j+1} D_{j+2},   D_{N+1} = 1, D_{N+2} = 0,

with b_j(E) = E - diag[j] and a_j the squared off-diagonal entries (their
sign cancels in the recurrence).  The border resolvent matrix element is
G_0(E) = D_1/D_0: a finite continued fraction in ratio form, with poles
exactly at the chain eigenvalues (never lifted, since every a_j > 0 for
g > 0).

The ratio form is evaluated here through the scaled minor pair rather than
by chained divisions.  The two are algebraically identical, but the minor
recurrence is linear and backward stable, passes through partial-fraction
poles without blowup, and keeps a sign-true witness D_0 for pole
bracketing; a float "infinity" of the division form witnesses nothing, so
pole detection always uses the denominator chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DivergedTailError,
    GZeroError,
    PoleSeparationError,
    WindowEmptyError,
)
from .model import ChainCoefficients, ModelParams, Parity, TruncationOrder, build_chain
from .schweber import DEN_FLOOR
from .search import bisect_sign
from .tridiag import (
    EnergyLevel,
    SpectralMethod,
    SpectrumApproximation,
    sturm_count,
)

__all__ = [
    "CharPolySequence",
    "ResolventStatus",
    "ResolventValue",
    "PathologicalVariant",
    "ModifiedChain",
    "char_poly",
    "resolvent_cf",
    "poles_of_resolvent",
    "inverse_recurrence_tail",
    "build_pathological",
    "E0_MIN_SEPARATION",
]

# Exact power-of-two rescaling bounds for the minor recurrence.
_RESCALE_LIMIT = 2.0**256
_RESCALE = 2.0**-256

# Plant energies closer than this to a genuine pole are rejected: the
# demonstration needs the planted pole to be separable from the real ones.
E0_MIN_SEPARATION = 1e-6


class ResolventStatus(Enum):
    CONVERGED = "converged"
    POLE_HIT = "pole-hit"


@dataclass(frozen=True)
class CharPolySequence:
    """Scaled minors D_j for j = N+1 down to 0.

    ``mantissas[j] * 2**scale_exponents[j]`` reconstructs det M_j'; the
    j = 0 entry is det(E - H) itself.  Rescaling factors are positive, so
    every mantissa carries the true sign.
    """

    energy: float
    mantissas: np.ndarray
    scale_exponents: np.ndarray

    def mantissa(self, j: int) -> float:
        return float(self.mantissas[j])

    def log2_magnitude(self, j: int) -> float:
        m = self.mantissas[j]
        if m == 0.0:
            return -math.inf
        return math.log2(abs(m)) + float(self.scale_exponents[j])

    @property
    def det0_sign(self) -> float:
        return float(np.sign(self.mantissas[0]))

    def ratio(self, j: int) -> float:
        """D_{j+1} / D_j, the level-j resolvent entry G_j(E)."""
        return float(
            self.mantissas[j + 1] / self.mantissas[j]
            * 2.0 ** float(self.scale_exponents[j + 1] - self.scale_exponents[j])
        )


@dataclass(frozen=True)
class ResolventValue:
    """Border resolvent G_0(E) together with its reciprocal D_0/D_1.

    ``value * reciprocal`` is 1 up to rounding whenever both are finite;
    the poles of the resolvent are the zeros of ``reciprocal``.
    """

    value: float
    reciprocal: float
    status: ResolventStatus


def _b_values(energy: float, chain: ChainCoefficients) -> np.ndarray:
    return energy - chain.diag


def char_poly(energy: float, chain: ChainCoefficients) -> CharPolySequence:
    """Scaled characteristic minors of E - H for a chain.

    Zeros of the j = 0 entry over energy are the truncated-chain
    eigenvalues; rescaling prevents overflow at any order.
    """
    n = chain.order
    b = _b_values(energy, chain)
    a = chain.a_values()
    mant = np.empty(n + 2)
    exps = np.zeros(n + 2, dtype=np.int64)
    mant[n + 1] = 1.0
    prev2, prev1 = 0.0, 1.0  # D_{j+2}, D_{j+1}
    shift = 0
    for j in range(n, -1, -1):
        cur = b[j] * prev1 - (a[j] * prev2 if j < n else 0.0)
        prev2, prev1 = prev1, cur
        mag = max(abs(prev1), abs(prev2))
        if mag > _RESCALE_LIMIT:
            prev1 *= _RESCALE
            prev2 *= _RESCALE
            shift += 256
        elif 0.0 < mag < 1.0 / _RESCALE_LIMIT:
            prev1 /= _RESCALE
            prev2 /= _RESCALE
            shift -= 256
        mant[j] = prev1
        exps[j] = shift
    return CharPolySequence(energy=energy, mantissas=mant, scale_exponents=exps)


def _det_pair(energy: float, chain: ChainCoefficients) -> tuple[float, float]:
    """(D_0, D_1) under a shared positive rescale."""
    seq = char_poly(energy, chain)
    d0 = seq.mantissas[0]
    d1 = seq.mantissas[1] * 2.0 ** float(seq.scale_exponents[1] - seq.scale_exponents[0])
    return float(d0), float(d1)


def _det_pair_grid(energies: np.ndarray, chain: ChainCoefficients) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (D_0, D_1) over an energy grid, jointly rescaled per point."""
    b = energies[None, :] - chain.diag[:, None]
    a = chain.a_values()
    prev2 = np.zeros_like(energies)
    prev1 = np.ones_like(energies)
    n = chain.order
    for j in range(n, -1, -1):
        cur = b[j] * prev1 - (a[j] * prev2 if j < n else 0.0)
        prev2, prev1 = prev1, cur
        mag = np.maximum(np.abs(prev1), np.abs(prev2))
        scale = np.where(mag > _RESCALE_LIMIT, _RESCALE, 1.0)
        scale = np.where((mag > 0.0) & (mag < 1.0 / _RESCALE_LIMIT), 1.0 / _RESCALE, scale)
        prev1 = prev1 * scale
        prev2 = prev2 * scale
    return prev1, prev2


def resolvent_cf(energy: float, chain: ChainCoefficients) -> ResolventValue:
    """G_0(E) for a truncated chain, with the reciprocal reported alongside.

    In ratio terms this is the backward two-term recurrence seeded at
    G_N = 1/b_N(E) (the standard cut-off); the reciprocal b_0 - a_1 G_1 is
    computed as D_0/D_1 from the minor pair.  Status is POLE_HIT when the
    reciprocal falls below the denominator floor, i.e. E sits on a chain
    eigenvalue to within working precision.
    """
    d0, d1 = _det_pair(energy, chain)
    if d1 == 0.0:
        # E is an eigenvalue of the once-deleted chain: a zero of G_0.
        return ResolventValue(value=0.0, reciprocal=math.copysign(math.inf, d0),
                              status=ResolventStatus.CONVERGED)
    reciprocal = d0 / d1
    if abs(reciprocal) < DEN_FLOOR:
        return ResolventValue(value=math.inf, reciprocal=reciprocal,
                              status=ResolventStatus.POLE_HIT)
    return ResolventValue(value=1.0 / reciprocal, reciprocal=reciprocal,
                          status=ResolventStatus.CONVERGED)


def poles_of_resolvent(
    chain: ChainCoefficients,
    window: tuple[float, float],
    max_levels: int,
    grid: int | None = None,
    refine_tol: float | None = None,
) -> SpectrumApproximation:
    """Poles of G_0 inside a window, i.e. the truncated-chain eigenvalues.

    Detection runs on sign changes of the j = 0 characteristic minor: for
    g > 0 its zeros are exactly the reciprocal's (no pole is lifted, every
    off-diagonal entry being nonzero), while sampling the reciprocal ratio
    itself would also flip at its own poles (the once-deleted chain's
    eigenvalues, which interlace) and, at g = 0, would lose every lifted
    pole to exact factor cancellation.  Brackets are refined by sign
    bisection on the minor; the residual reported per pole is the
    reciprocal magnitude there.
    """
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"window must be finite with lo < hi, got {window!r}")
    if max_levels < 1:
        raise ValueError("max_levels must be >= 1")
    if grid is None:
        grid = max(512, int(128 * (hi - lo) / chain.params.omega))
    if refine_tol is None:
        refine_tol = 1e-12 * chain.params.omega

    energies = np.linspace(lo, hi, grid)
    d0, _ = _det_pair_grid(energies, chain)

    poles: list[EnergyLevel] = []
    sign_flip = np.sign(d0[:-1]) * np.sign(d0[1:]) < 0
    for i in np.nonzero(sign_flip)[0]:
        root = bisect_sign(
            lambda e: char_poly(e, chain).det0_sign,
            float(energies[i]), float(energies[i + 1]),
            refine_tol,
        )
        residual = abs(resolvent_cf(root, chain).reciprocal)
        poles.append(EnergyLevel(index=len(poles), energy=root, residual=residual))
        if len(poles) >= max_levels:
            break
    if not poles:
        raise WindowEmptyError(f"no resolvent pole in window {window!r}")
    return SpectrumApproximation.from_levels(
        SpectralMethod.METHOD_B, chain.parity, chain.order, poles, chain.params.omega
    )


def inverse_recurrence_tail(energy0: float, chain: ChainCoefficients) -> float:
    """Run the two-term recurrence upward from a forced pole at energy0.

    Demanding G_0(E_0) = infinity fixes the seed G_1 = b_0(E_0)/a_1, and

        G_{j+1} = b_j(E_0)/a_{j+1} - 1/(a_{j+1} G_j)

    climbs to G_N(E_0).  The upward direction is the unstable one for
    generic seeds, which the pathological construction exploits: G_N tends
    to -omega/g^2 regardless of E_0 as the order grows.
    """
    if chain.params.g == 0.0:
        raise GZeroError("upward recurrence needs nonzero coupling (a_j > 0)")
    if chain.order < 1:
        raise ValueError("need order >= 1 for the upward recurrence")
    if not math.isfinite(energy0):
        raise ValueError("energy0 must be finite")
    b = _b_values(energy0, chain)
    a = chain.a_values()
    cur = b[0] / a[0]  # G_1 = b_0/a_1
    for j in range(1, chain.order):
        if abs(cur) < DEN_FLOOR:
            raise DivergedTailError(j)
        cur = b[j] / a[j] - 1.0 / (a[j] * cur)
    return float(cur)


class PathologicalVariant(Enum):
    DIAG_ONLY = "diag"
    DIAG_AND_OFFDIAG = "diag-offdiag"


@dataclass(frozen=True)
class ModifiedChain:
    """A chain altered in its last entries so the border resolvent acquires
    a pole at ``target_energy`` while the projection onto the first N rows
    and columns still equals the unmodified operator.

    DIAG_ONLY sets H[N,N] = E_0 - 1/G_N(E_0); DIAG_AND_OFFDIAG instead
    sets H[N,N] = E_0 - N/G_N(E_0) and H[N-1,N] = H[N,N-1] = g N.
    """

    base: ChainCoefficients
    target_energy: float
    modified_diag_nn: float
    variant: PathologicalVariant
    tail: float  # G_N(E_0) from the upward recurrence

    @property
    def modified_offdiag(self) -> float | None:
        if self.variant is PathologicalVariant.DIAG_AND_OFFDIAG:
            return self.base.params.g * self.base.order
        return None

    @property
    def slow_approach_diagnostic(self) -> float:
        """N (G_N + omega/g^2): if this does not vanish with N, the
        off-diagonal variant need not produce a low-energy state."""
        p = self.base.params
        return self.base.order * (self.tail + p.omega / (p.g * p.g))

    def to_chain(self) -> ChainCoefficients:
        diag = self.base.diag.copy()
        diag[self.base.order] = self.modified_diag_nn
        offdiag = self.base.offdiag.copy()
        if self.modified_offdiag is not None:
            offdiag[self.base.order - 1] = self.modified_offdiag
        return ChainCoefficients(
            params=self.base.params,
            parity=self.base.parity,
            order=self.base.order,
            diag=diag,
            offdiag=offdiag,
        )


def build_pathological(
    energy0: float,
    params: ModelParams,
    parity: Parity,
    order: TruncationOrder,
    variant: PathologicalVariant = PathologicalVariant.DIAG_ONLY,
) -> ModifiedChain:
    """Construct the truncation that plants a resolvent pole at energy0.

    ``energy0`` must keep a minimum separation from every genuine pole of
    the unmodified truncated resolvent so that the planted pole is
    unambiguous; violations raise PoleSeparationError.
    """
    if params.g == 0.0:
        raise GZeroError("pathological construction needs nonzero coupling")
    base = build_chain(params, parity, order)
    below = sturm_count(energy0 - E0_MIN_SEPARATION, base)
    above = sturm_count(energy0 + E0_MIN_SEPARATION, base)
    if below != above:
        raise PoleSeparationError(
            f"E0={energy0!r} lies within {E0_MIN_SEPARATION} of a genuine "
            f"pole of the unmodified resolvent at order {order}"
        )
    tail = inverse_recurrence_tail(energy0, base)
    if tail == 0.0:
        raise DivergedTailError(base.order)
    if variant is PathologicalVariant.DIAG_ONLY:
        hnn = energy0 - 1.0 / tail
    else:
        hnn = energy0 - base.order / tail
    return ModifiedChain(
        base=base,
        target_energy=energy0,
        modified_diag_nn=float(hnn),
        variant=variant,
        tail=tail,
    )
