"""Coefficient method (CLI method "a"): recurrence coefficients,
coefficient sequences and the finite continued fraction whose zeros
approximate the Rabi spectrum.

The expansion coefficients K_n of the eigenfunction around the lower
singular point satisfy the three-term recurrence

    n K_n = f_{n-1}(E) K_{n-1} - K_{n-2},      K_0 = 1, K_1 = f_0(E),

with f_n(E) = 2g/w + (n w - x + D^2/(x - n w)) / (2g) and x = E + g^2/w.
Eigenvalues are the energies where the minimal solution of the recurrence
also satisfies the K_1 = f_0 seed, i.e. the zeros of

    S_N(E) = f_0(E) - F_N(E),
    F_N(E) = 1/(f_1 - 2/(f_2 - 3/(f_3 - ... N/f_N))).

The method sees only D^2, so it cannot discern the two parity chains: its
roots approximate the union of both parity spectra.  The f_n have poles on
the lattice x = n w; a guard interval around each pole is excluded from
evaluation and root finding (exact level crossings live on that lattice
and are reported as candidates, not roots).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DegenerateDenominatorError,
    GZeroError,
    PoleError,
    TooShortError,
)
from .model import ModelParams, TruncationOrder, shifted_energy

__all__ = [
    "CfStatus",
    "CfValue",
    "SchweberCoefficient",
    "CoefficientSequence",
    "ConvergentPair",
    "Classification",
    "coeff_f",
    "forward_recurrence",
    "minimal_sequence",
    "finite_cf",
    "spectral_function_a",
    "convergent_pair",
    "pair_secular",
    "classify_solution",
    "EPS_POLE_REL",
    "DEN_FLOOR",
]

# Pole guard half-width around x = n*omega, relative to omega.  Inside it
# f_n is reported at_pole instead of evaluated; the root finder treats the
# interval as a degeneracy candidate, never a root.
EPS_POLE_REL = 1e-9

# An intermediate continued-fraction denominator below this magnitude is a
# pole of a partial fraction; the evaluation reports Overflow status.
DEN_FLOOR = 1e-300

# Relative tolerance of the recurrence-consistency invariant.
TOL_REC = 1e-12

# Rescale running pairs by an exact power of two; ratios are preserved
# bit-for-bit.
_RESCALE_LIMIT = 2.0**256
_RESCALE = 2.0**-256


class CfStatus(Enum):
    CONVERGED = "converged"
    HIT_POLE = "hit-pole"
    OVERFLOW = "overflow"


@dataclass(frozen=True)
class CfValue:
    """Value of a finite continued fraction plus its evaluation status.

    ``value`` is finite exactly when ``status`` is CONVERGED; ``depth`` is
    the number of partial-fraction levels actually used.
    """

    value: float
    status: CfStatus
    depth: int

    @property
    def converged(self) -> bool:
        return self.status is CfStatus.CONVERGED


@dataclass(frozen=True)
class SchweberCoefficient:
    """Recurrence coefficient f_n(E); ``at_pole`` marks the guard interval
    around x(E) = n*omega where the value is undefined."""

    n: int
    value: float
    at_pole: bool


class Classification(Enum):
    MINIMAL_LIKE = "minimal-like"
    DOMINANT_LIKE = "dominant-like"
    UNDETERMINED = "undetermined"


def _require_coupling(params: ModelParams):
    if params.g == 0.0:
        raise GZeroError(
            "coefficient method undefined at g=0; use the resolvent method "
            "or the tridiagonal eigensolver"
        )


def coeff_f(
    n: int, energy: float, params: ModelParams, eps_pole: float | None = None
) -> SchweberCoefficient:
    """Evaluate f_n(E), flagging the pole guard around x(E) = n*omega.

    ``eps_pole`` is the guard half-width in energy units (default
    EPS_POLE_REL * omega).
    """
    _require_coupling(params)
    if n < 0:
        raise ValueError("n must be >= 0")
    w, g, d = params.omega, params.g, params.delta
    if eps_pole is None:
        eps_pole = EPS_POLE_REL * w
    x = shifted_energy(params, energy)
    detune = x - n * w
    if abs(detune) < eps_pole:
        return SchweberCoefficient(n=n, value=math.nan, at_pole=True)
    value = 2.0 * g / w + (-detune + d * d / detune) / (2.0 * g)
    return SchweberCoefficient(n=n, value=value, at_pole=False)


def _coeff_values(
    energy: float, params: ModelParams, n_max: int, eps_pole: float | None = None
) -> np.ndarray:
    """f_0..f_{n_max} as an array; raises PoleError on any guard hit."""
    w, g, d = params.omega, params.g, params.delta
    if eps_pole is None:
        eps_pole = EPS_POLE_REL * w
    x = shifted_energy(params, energy)
    detune = x - w * np.arange(n_max + 1, dtype=float)
    hits = np.abs(detune) < eps_pole
    if np.any(hits):
        raise PoleError(int(np.argmax(hits)), energy)
    return 2.0 * g / w + (-detune + d * d / detune) / (2.0 * g)


@dataclass(frozen=True)
class CoefficientSequence:
    """Coefficients K_0..K_N stored as mantissa / power-of-two exponent
    pairs so that ratio diagnostics never overflow or underflow.

    Absolute values are not meaningful downstream, only ratios; ``entries``
    reconstructs the plain floats where representable (inf/0 otherwise).
    """

    mantissas: np.ndarray
    exponents: np.ndarray

    def __len__(self) -> int:
        return len(self.mantissas)

    @property
    def entries(self) -> np.ndarray:
        return np.ldexp(self.mantissas, self.exponents.astype(np.int64))

    def ratio(self, n: int) -> float:
        """K_{n+1} / K_n."""
        if not 0 <= n < len(self) - 1:
            raise IndexError(f"ratio index {n} out of range")
        return float(
            self.mantissas[n + 1] / self.mantissas[n]
            * 2.0 ** float(self.exponents[n + 1] - self.exponents[n])
        )

    def ratios(self) -> np.ndarray:
        """All consecutive ratios K_{n+1}/K_n, n = 0..N-1."""
        return np.array([self.ratio(n) for n in range(len(self) - 1)])


def _pack_scaled(values: list[tuple[float, int]]) -> CoefficientSequence:
    m = np.array([v for v, _ in values])
    e = np.array([s for _, s in values], dtype=np.int64)
    return CoefficientSequence(mantissas=m, exponents=e)


def forward_recurrence(
    energy: float,
    params: ModelParams,
    order: TruncationOrder,
    k1: float | None = None,
) -> CoefficientSequence:
    """Run the three-term recurrence forward from K_0 = 1, K_1 = k1.

    ``k1`` defaults to f_0(E), the seed forced by analyticity at the lower
    singular point.  Forward iteration is exact for the recurrence but
    numerically favours the dominant solution: at an eigenvalue the minimal
    decay survives only until rounding feeds the dominant branch (use
    :func:`minimal_sequence` for a stable minimal solution).
    """
    _require_coupling(params)
    n = int(order)
    if n < 0:
        raise ValueError("order must be >= 0")
    f = _coeff_values(energy, params, max(n - 1, 0))
    if k1 is None:
        k1 = float(f[0])
    out = [(1.0, 0)]
    if n >= 1:
        out.append((float(k1), 0))
        prev2, prev1, shift = 1.0, float(k1), 0
        for m in range(2, n + 1):
            cur = (f[m - 1] * prev1 - prev2) / m
            prev2, prev1 = prev1, cur
            if abs(prev1) > _RESCALE_LIMIT or abs(prev2) > _RESCALE_LIMIT:
                prev1 *= _RESCALE
                prev2 *= _RESCALE
                shift += 256
            out.append((prev1, shift))
    return _pack_scaled(out)


def minimal_sequence(
    energy: float,
    params: ModelParams,
    order: TruncationOrder,
    start_depth: int | None = None,
) -> CoefficientSequence:
    """Minimal solution K_0..K_N with K_0 = 1, built backward.

    The tail ratios xi_n = n K_n / K_{n-1} are generated by the downward
    recursion xi_n = n / (f_n - xi_{n+1}) seeded well beyond ``order``
    (Miller's device); the products then assemble the minimal solution,
    which the forward recurrence cannot reach in floating point.  Note the
    seed K_1 = xi_1 equals f_0(E) only at eigenvalues.
    """
    _require_coupling(params)
    n = int(order)
    if n < 0:
        raise ValueError("order must be >= 0")
    if start_depth is None:
        start_depth = n + max(50, n)
    f = _coeff_values(energy, params, start_depth)
    xi = 0.0
    ratio = np.empty(n + 1)
    for m in range(start_depth, 0, -1):
        xi = m / (f[m] - xi)
        if m <= n:
            ratio[m] = xi / m
    out = [(1.0, 0)]
    mant, shift = 1.0, 0
    for m in range(1, n + 1):
        mant *= ratio[m]
        while mant != 0.0 and abs(mant) < 1.0 / _RESCALE_LIMIT:
            mant /= _RESCALE
            shift -= 256
        out.append((mant, shift))
    return _pack_scaled(out)


def finite_cf(
    energy: float,
    params: ModelParams,
    order: TruncationOrder,
    eps_pole: float | None = None,
) -> CfValue:
    """Backward evaluation of F_N(E) = 1/(f_1 - 2/(f_2 - ... N/f_N)).

    Backward evaluation is the stable direction for the minimal solution.
    Status is HIT_POLE if any needed f_n sits in its pole guard, OVERFLOW
    if an intermediate denominator falls below DEN_FLOOR.
    """
    _require_coupling(params)
    n = int(order)
    if n < 1:
        raise ValueError("order must be >= 1 for the continued fraction")
    try:
        f = _coeff_values(energy, params, n, eps_pole)
    except PoleError:
        return CfValue(value=math.nan, status=CfStatus.HIT_POLE, depth=n)
    acc = f[n]
    for m in range(n - 1, 0, -1):
        if abs(acc) < DEN_FLOOR:
            return CfValue(value=math.nan, status=CfStatus.OVERFLOW, depth=n)
        acc = f[m] - (m + 1) / acc
    if abs(acc) < DEN_FLOOR:
        return CfValue(value=math.nan, status=CfStatus.OVERFLOW, depth=n)
    return CfValue(value=float(1.0 / acc), status=CfStatus.CONVERGED, depth=n)


def spectral_function_a(
    energy: float,
    params: ModelParams,
    order: TruncationOrder,
    eps_pole: float | None = None,
) -> CfValue:
    """S_N(E) = f_0(E) - F_N(E); its zeros are the method's eigenvalue
    estimates.  Pole and overflow statuses propagate."""
    f0 = coeff_f(0, energy, params, eps_pole)
    tail = finite_cf(energy, params, order, eps_pole)
    if f0.at_pole:
        return CfValue(value=math.nan, status=CfStatus.HIT_POLE, depth=tail.depth)
    if not tail.converged:
        return CfValue(value=math.nan, status=tail.status, depth=tail.depth)
    return CfValue(value=f0.value - tail.value, status=CfStatus.CONVERGED, depth=tail.depth)


@dataclass(frozen=True)
class ConvergentPair:
    """Numerator/denominator pair (A_n, B_n) of the n-th convergent.

    Both satisfy C_n = f_n C_{n-1} - n C_{n-2} with seeds A_0 = 0,
    A_{-1} = 1, B_0 = 1, B_{-1} = 0; only the quotient A_n/B_n = F_n is
    well-defined in the large-n limit, so the pair is rescaled on the fly
    by exact powers of two.
    """

    a: float
    b: float
    n: int

    @property
    def ratio(self) -> float:
        if self.b == 0.0:
            raise DegenerateDenominatorError(f"B_{self.n} = 0: F_{self.n} has a pole here")
        return self.a / self.b


def _pair_state(
    energy: float, params: ModelParams, n: int, eps_pole: float | None = None
) -> tuple[float, float, float, float]:
    """(A_{n-1}, A_n, B_{n-1}, B_n) with shared power-of-two rescaling."""
    f = _coeff_values(energy, params, n, eps_pole)
    a_prev, b_prev = 0.0, 1.0        # A_0, B_0
    a_cur, b_cur = 1.0, float(f[1])  # A_1, B_1
    for m in range(2, n + 1):
        fm = f[m]
        a_prev, a_cur = a_cur, fm * a_cur - m * a_prev
        b_prev, b_cur = b_cur, fm * b_cur - m * b_prev
        if max(abs(a_cur), abs(b_cur), abs(a_prev), abs(b_prev)) > _RESCALE_LIMIT:
            a_prev *= _RESCALE
            a_cur *= _RESCALE
            b_prev *= _RESCALE
            b_cur *= _RESCALE
    return a_prev, a_cur, b_prev, b_cur


def convergent_pair(energy: float, params: ModelParams, n: int) -> ConvergentPair:
    """Rescaled (A_n, B_n) with A_n/B_n = F_n(E); cross-check strategy for
    the backward evaluation."""
    _require_coupling(params)
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return ConvergentPair(a=0.0, b=1.0, n=0)
    _, a_cur, _, b_cur = _pair_state(energy, params, n)
    return ConvergentPair(a=a_cur, b=b_cur, n=n)


def pair_secular(
    energy: float,
    params: ModelParams,
    order: TruncationOrder,
    eps_pole: float | None = None,
) -> float:
    """Pole-free secular function W_N(E) = f_0(E) B_N - A_N, up to a
    positive rescale.

    W_N vanishes exactly where S_N = f_0 - F_N does, but stays finite and
    single-signed across the poles of F_N (where B_N = 0, W_N = -A_N != 0
    since consecutive convergents never vanish together).  Sign scans on
    W_N therefore see every root once and never see an F_N pole, which raw
    sampling of S_N cannot guarantee: root/pole pairs closer than the grid
    cancel, and isolated F_N poles masquerade as sign changes.
    """
    _require_coupling(params)
    n = int(order)
    if n < 1:
        raise ValueError("order must be >= 1")
    f0 = coeff_f(0, energy, params, eps_pole)
    if f0.at_pole:
        return math.nan
    try:
        _, a_cur, _, b_cur = _pair_state(energy, params, n, eps_pole)
    except PoleError:
        return math.nan
    return f0.value * b_cur - a_cur


def classify_solution(seq: CoefficientSequence, params: ModelParams) -> Classification:
    """Classify a coefficient sequence by its late ratios.

    DOMINANT_LIKE if the last 10 ratios sit within 20% of the limit
    omega/(2g); MINIMAL_LIKE if their magnitudes decay monotonically below
    one tenth of that limit; UNDETERMINED otherwise.
    """
    _require_coupling(params)
    if len(seq) < 20:
        raise TooShortError(f"need at least 20 entries, got {len(seq)}")
    target = params.omega / (2.0 * params.g)
    last = np.array([seq.ratio(n) for n in range(len(seq) - 11, len(seq) - 1)])
    if np.all(np.abs(last - target) <= 0.2 * target):
        return Classification.DOMINANT_LIKE
    mags = np.abs(last)
    if np.all(mags < 0.1 * target) and np.all(np.diff(mags) <= 0):
        return Classification.MINIMAL_LIKE
    return Classification.UNDETERMINED
