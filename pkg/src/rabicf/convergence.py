"""Convergence certificates for the resolvent tail and the spectral
convergence comparator.

A continued fraction a_1/(b_1 - a_2/(b_2 - ...)) with dimensionful entries
converges to a value bounded by c whenever |b_j| >= a_j/c + c holds for all
levels and the numerator products are unbounded.  Applied to the resolvent
tail (a_j = j g^2, b_j(E) = E - j w -/+ (-1)^j D) the inequality holds for
all j >= n once n exceeds

    (|E| + |D|)/w + (2 g^2/w^2) (1 + sqrt(1 + (|E| + |D|) w / g^2)),

for the optimal choice of c.  The bound is finite for every coupling, in
particular beyond g = w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TooFewLevelsError
from .model import ModelParams, Parity
from .schweber import CfStatus, CfValue, DEN_FLOOR
from .tridiag import SpectrumApproximation

__all__ = [
    "PringsheimCertificate",
    "tail_depth_bound",
    "check_pringsheim",
    "best_certificate",
    "compare_spectra",
    "tail_value",
]


@dataclass(frozen=True)
class PringsheimCertificate:
    """Finite verification of |b_j| >= a_j/c + c over j in [start_index,
    verified_up_to].  A certificate is not a proof for all j; callers pair
    it with the depth bound, beyond which the inequality is automatic."""

    c: float
    start_index: int
    verified_up_to: int
    holds: bool
    margin: float
    unbounded_product: bool


def tail_depth_bound(energy: float, params: ModelParams) -> int:
    """Smallest certified tail start: the dimensionful convergence bound,
    rounded up.  Returns 1 at g = 0, where every tail numerator vanishes
    and the tail is trivially convergent."""
    w, g, d = params.omega, params.g, params.delta
    if g == 0.0:
        return 1
    s = abs(energy) + d
    n = s / w + (2.0 * g * g / (w * w)) * (1.0 + math.sqrt(1.0 + s * w / (g * g)))
    return max(1, math.ceil(n))


def _tail_b(energy: float, params: ModelParams, parity: Parity, j: np.ndarray) -> np.ndarray:
    return energy - j * params.omega - parity.sign * ((-1.0) ** j) * params.delta


def check_pringsheim(
    energy: float,
    params: ModelParams,
    parity: Parity,
    n: int,
    c: float,
    up_to: int,
) -> PringsheimCertificate:
    """Verify the tail inequality with constant ``c`` on levels [n, up_to]."""
    if n < 0 or up_to < n:
        raise ValueError("need 0 <= n <= up_to")
    if c <= 0:
        raise ValueError("c must be positive")
    j = np.arange(n, up_to + 1, dtype=float)
    lhs = np.abs(_tail_b(energy, params, parity, j))
    rhs = j * params.g * params.g / c + c
    margin = float(np.min(lhs - rhs))
    return PringsheimCertificate(
        c=c,
        start_index=n,
        verified_up_to=up_to,
        holds=bool(margin >= 0.0),
        margin=margin,
        unbounded_product=params.g > 0.0,
    )


def best_certificate(
    energy: float,
    params: ModelParams,
    parity: Parity,
    n: int,
    up_to: int,
    grid: int = 400,
) -> PringsheimCertificate:
    """Search c on a log grid over [g^2/w, n*w] and keep the best margin.

    The optimum sits strictly inside that range whenever n satisfies the
    depth bound.  At g = 0 the inequality degenerates to |b_j| >= c; the
    largest admissible c is min |b_j| and is used directly.
    """
    w, g = params.omega, params.g
    if g == 0.0:
        j = np.arange(n, up_to + 1, dtype=float)
        c = float(np.min(np.abs(_tail_b(energy, params, parity, j))))
        c = max(c, DEN_FLOOR)
        return check_pringsheim(energy, params, parity, n, c, up_to)
    lo, hi = g * g / w, max(n, 1) * w
    if hi <= lo:
        hi = 4.0 * lo
    best = None
    for c in np.geomspace(lo, hi, grid):
        cert = check_pringsheim(energy, params, parity, n, float(c), up_to)
        if best is None or cert.margin > best.margin:
            best = cert
    return best


def compare_spectra(a: SpectrumApproximation, b: SpectrumApproximation, m: int) -> float:
    """max_{n < m} |E_n^a - E_n^b| over the first m levels."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if len(a) < m or len(b) < m:
        raise TooFewLevelsError(
            f"need {m} levels, have {len(a)} and {len(b)}"
        )
    ea = a.energies[:m]
    eb = b.energies[:m]
    return float(np.max(np.abs(ea - eb)))


def tail_value(
    energy: float,
    params: ModelParams,
    parity: Parity,
    n: int,
    depth: int,
) -> CfValue:
    """Backward evaluation of the resolvent tail starting at level n,
    truncated ``depth`` levels below:

        xi_n = a_n/(b_n - a_{n+1}/(b_{n+1} - ...))

    With a certificate at start n the value is bounded by the certified c.
    Starting below the depth bound is allowed but uncertified, and the
    evaluation may hit a partial-fraction pole.
    """
    if n < 1:
        raise ValueError("tail start must be >= 1")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    g2 = params.g * params.g
    acc = 0.0
    for j in range(n + depth, n - 1, -1):
        den = float(_tail_b(energy, params, parity, np.float64(j))) - acc
        if abs(den) < DEN_FLOOR:
            return CfValue(value=math.nan, status=CfStatus.HIT_POLE, depth=depth)
        acc = j * g2 / den
    return CfValue(value=float(acc), status=CfStatus.CONVERGED, depth=depth)
