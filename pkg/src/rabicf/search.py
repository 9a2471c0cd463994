"""Pole-aware root localization and the parameter-scan crossing detector.

Root scans here serve both spectral methods: the window is first segmented
at known singular abscissae (for the coefficient method, the pole lattice
E = k w - g^2/w), sign changes are bracketed per segment, and brackets are
refined by Brent or by sign bisection.  Sign changes straddling a cut are
degeneracy candidates, never roots.

The crossing scan tracks oracle eigenvalues of both parity chains across a
coupling sweep and records every inter-parity crossing together with the
deviation of the shifted energy x* = E* + g*^2/w from the nearest integer
multiple of w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .convergence import tail_depth_bound
from .errors import DegenerateScanError, DeltaZeroError, GZeroError, LostBracketError
from .model import ModelParams, Parity, TruncationOrder, build_chain
from .schweber import EPS_POLE_REL, pair_secular, spectral_function_a
from .tridiag import (
    EnergyLevel,
    SpectralMethod,
    SpectrumApproximation,
    eigenvalues_batch,
    gershgorin_interval,
)

__all__ = [
    "SegmentedWindow",
    "segment_window",
    "BracketScan",
    "bracket_roots",
    "refine_root",
    "bisect_sign",
    "MethodAResult",
    "solve_method_a",
    "default_window",
    "default_order_a",
    "CrossingEvent",
    "ScanResult",
    "scan_levels",
    "scan_crossings",
]

DEFAULT_GRID = 2000
DEFAULT_REFINE_TOL = 1e-12


@dataclass(frozen=True)
class SegmentedWindow:
    """An energy window minus guard neighbourhoods around known cuts.

    ``segments`` partition the window with open guard intervals of
    half-width ``guard`` removed around each entry of ``cut_points``.
    """

    window: tuple[float, float]
    cut_points: tuple[float, ...]
    segments: tuple[tuple[float, float], ...]
    guard: float


def segment_window(
    window: tuple[float, float],
    params: ModelParams | None = None,
    guard: float | None = None,
) -> SegmentedWindow:
    """Segment a window at the coefficient-pole lattice E = k w - g^2/w.

    With ``params`` omitted the window is one cut-free segment (resolvent
    and oracle scans have no excluded abscissae).
    """
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"invalid window {window!r}")
    cuts: list[float] = []
    if params is not None:
        if guard is None:
            guard = EPS_POLE_REL * params.omega
        shift = params.g * params.g / params.omega
        k_lo = math.ceil((lo + shift) / params.omega)
        k_hi = math.floor((hi + shift) / params.omega)
        cuts = [k * params.omega - shift for k in range(k_lo, k_hi + 1)]
    guard = float(guard if guard is not None else 0.0)
    segments = []
    prev = lo
    for c in cuts:
        if c - guard > prev:
            segments.append((prev, c - guard))
        prev = c + guard
    if hi > prev:
        segments.append((prev, hi))
    return SegmentedWindow(
        window=(lo, hi), cut_points=tuple(cuts), segments=tuple(segments), guard=guard
    )


@dataclass(frozen=True)
class BracketScan:
    """Sign-change brackets plus cut points flagged as pole candidates."""

    brackets: tuple[tuple[float, float], ...]
    pole_candidates: tuple[float, ...]


def bracket_roots(f, seg: SegmentedWindow, grid: int) -> BracketScan:
    """Maximal list of sign-change brackets of ``f`` over the segments.

    ``f`` maps energy to a float; NaN marks a sample whose evaluation did
    not converge and is skipped.  ``grid`` is the total sample budget,
    distributed over segments proportionally to length with at least two
    samples each.  A sign change between the closing sample of one segment
    and the opening sample of the next is reported as a pole candidate at
    the cut between them, not as a bracket.
    """
    if grid < 2 * max(1, len(seg.segments)):
        raise ValueError("grid too small for the segment count")
    total = sum(b - a for a, b in seg.segments)
    brackets: list[tuple[float, float]] = []
    edge_signs: list[tuple[float, float]] = []
    for a, b in seg.segments:
        n = max(2, int(round(grid * (b - a) / total))) if total > 0 else 2
        xs = np.linspace(a, b, n)
        vals = np.array([f(x) for x in xs])
        ok = np.isfinite(vals)
        xs, vals = xs[ok], vals[ok]
        if len(xs) == 0:
            edge_signs.append((math.nan, math.nan))
            continue
        s = np.sign(vals)
        for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
            brackets.append((float(xs[i]), float(xs[i + 1])))
        for i in np.nonzero(s == 0.0)[0]:
            # a sample sitting exactly on a root is its own bracket
            brackets.append((float(xs[i]), float(xs[i])))
        edge_signs.append((float(vals[0]), float(vals[-1])))
    pole_candidates = []
    for i, cut in enumerate(seg.cut_points):
        if i + 1 >= len(edge_signs):
            break
        left, right = edge_signs[i][1], edge_signs[i + 1][0]
        if math.isfinite(left) and math.isfinite(right) and np.sign(left) != np.sign(right):
            pole_candidates.append(cut)
    return BracketScan(brackets=tuple(brackets), pole_candidates=tuple(pole_candidates))


def refine_root(f, bracket: tuple[float, float], tol: float) -> tuple[float, float]:
    """Brent refinement of a sign-change bracket to width < tol.

    Returns (root, |f(root)|).  Raises LostBracketError if the endpoint
    signs do not differ or the evaluation stops converging inside the
    bracket (re-bracket on a finer grid in that case).
    """
    lo, hi = bracket

    def wrapped(x):
        v = f(x)
        if not math.isfinite(v):
            raise _StatusFailure(x)
        return v

    try:
        flo, fhi = wrapped(lo), wrapped(hi)
        if flo == 0.0:
            return lo, 0.0
        if fhi == 0.0:
            return hi, 0.0
        if np.sign(flo) == np.sign(fhi):
            raise LostBracketError(f"no sign change over {bracket!r}")
        # generous cap: odd-multiplicity roots push Brent past the default 100
        root = brentq(wrapped, lo, hi, xtol=tol, maxiter=200)
    except _StatusFailure as exc:
        raise LostBracketError(f"evaluation failed inside bracket at E={exc.x!r}") from None
    return float(root), abs(f(root))


class _StatusFailure(Exception):
    def __init__(self, x):
        self.x = x


def bisect_sign(f, lo: float, hi: float, tol: float) -> float:
    """Bisection using only the sign of ``f``; robust for functions whose
    magnitude jumps (rescaled determinant mantissas)."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    if np.sign(flo) == np.sign(f(hi)):
        raise LostBracketError(f"no sign change over ({lo!r}, {hi!r})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def default_window(params: ModelParams, levels: int) -> tuple[float, float]:
    """Envelope window holding at least ``levels`` low-lying states: the
    g = 0 and delta = 0 exact spectra bound the sweep."""
    lo = -params.g**2 / params.omega - params.delta - params.omega
    hi = (levels + 2) * params.omega
    return lo, hi


def default_order_a(params: ModelParams, levels: int, window: tuple[float, float]) -> int:
    """Default truncation for the coefficient method: the tail-depth bound
    at the largest swept |E|, with floors of 4*levels and 50."""
    emax = max(abs(window[0]), abs(window[1]))
    return max(tail_depth_bound(emax, params), 4 * levels, 50)


@dataclass(frozen=True)
class MethodAResult:
    spectrum: SpectrumApproximation
    pole_candidates: tuple[float, ...]


def solve_method_a(
    params: ModelParams,
    order: TruncationOrder,
    window: tuple[float, float],
    levels: int | None = None,
    grid: int = DEFAULT_GRID,
    refine_tol: float = DEFAULT_REFINE_TOL,
    eps_pole: float | None = None,
) -> MethodAResult:
    """Locate the coefficient-method roots in a window.

    Brackets come from sign changes of the pole-free secular form
    W_N = f_0 B_N - A_N (raw sampling of f_0 - F_N both misses root/pole
    pairs tighter than the grid and brackets isolated poles of F_N); the
    refined root's residual is |f_0 - F_N| evaluated backward.  Refinement
    bisects on the sign of W_N, whose rescaled magnitude is not continuous.

    Raises DeltaZeroError at delta = 0: there the true eigenvalues sit
    exactly on the pole lattice (root/pole collision), which this method
    cannot resolve; use the resolvent method or the eigensolver.
    """
    if params.g == 0.0:
        raise GZeroError("coefficient method undefined at g=0")
    if params.delta == 0.0:
        raise DeltaZeroError(
            "at delta=0 every eigenvalue coincides with a coefficient pole; "
            "use the resolvent method or the eigensolver"
        )
    seg = segment_window(window, params, guard=eps_pole)
    secular = lambda e: pair_secular(e, params, order, eps_pole)
    scan = bracket_roots(secular, seg, grid)
    found = []
    for lo, hi in scan.brackets:
        root = bisect_sign(secular, lo, hi, refine_tol)
        res = spectral_function_a(root, params, order, eps_pole)
        residual = abs(res.value) if res.converged else math.inf
        found.append((root, residual))
    found.sort()
    if levels is not None:
        found = found[:levels]
    spectrum = SpectrumApproximation.from_levels(
        SpectralMethod.METHOD_A,
        None,
        order,
        [EnergyLevel(index=i, energy=e, residual=r) for i, (e, r) in enumerate(found)],
        params.omega,
    )
    return MethodAResult(spectrum=spectrum, pole_candidates=scan.pole_candidates)


@dataclass(frozen=True)
class CrossingEvent:
    """An inter-parity level crossing found during a parameter scan."""

    parameter: str
    value: float
    energy: float
    parities: tuple[Parity, Parity]
    plus_level: int
    minus_level: int
    shifted: float
    nearest_multiple: int
    deviation: float


@dataclass(frozen=True)
class ScanResult:
    parameter: str
    values: np.ndarray
    plus_levels: np.ndarray
    minus_levels: np.ndarray
    events: tuple[CrossingEvent, ...]


def _scan_params(base: ModelParams, parameter: str, value: float) -> ModelParams:
    if parameter == "g":
        return ModelParams(base.omega, value, base.delta)
    if parameter == "delta":
        return ModelParams(base.omega, base.g, value)
    raise ValueError(f"unsupported scan parameter {parameter!r}")


def _sweep_interval(base, parameter, vmax, order) -> tuple[float, float]:
    """Spectrum envelope over the whole sweep (widest chain wins)."""
    p = _scan_params(base, parameter, vmax)
    lo_p, hi_p = gershgorin_interval(build_chain(p, Parity.PLUS, order))
    lo_m, hi_m = gershgorin_interval(build_chain(p, Parity.MINUS, order))
    return min(lo_p, lo_m), max(hi_p, hi_m)


def _batch_tables(base, parameter, values, order):
    """(diag, off2) tables of shape (S, order+1) / (S, order) for one parity
    sign, broadcast over the scanned values."""
    n_index = np.arange(1, order + 1, dtype=float)
    j = np.arange(order + 1, dtype=float)

    def tables(sign):
        if parameter == "g":
            diag = j * base.omega + sign * ((-1.0) ** j) * base.delta
            off2 = values[:, None] ** 2 * n_index[None, :]
        else:
            diag = (j * base.omega)[None, :] + sign * ((-1.0) ** j)[None, :] * values[:, None]
            off2 = np.broadcast_to(base.g**2 * n_index, (len(values), order))
        return diag, off2

    return tables


def _spectra_at(base, parameter, values, levels, order, tol):
    """(S, levels) eigenvalue tables for both parities, batched over the scan."""
    interval = _sweep_interval(base, parameter, float(np.max(values)), order)
    tables = _batch_tables(base, parameter, values, order)
    out = []
    for parity in (Parity.PLUS, Parity.MINUS):
        diag, off2 = tables(parity.sign)
        out.append(eigenvalues_batch(diag, off2, levels, tol, interval))
    return out[0], out[1]


def _refine_events(base, parameter, raw, order, tol, value_tol):
    """Bisect all detected crossings in lockstep on the scan parameter.

    ``raw`` rows are (plus_level, minus_level, lo, hi).  One batched
    eigensolve per bisection step covers every event and both parities.
    """
    m = len(raw)
    a_idx = np.array([r[0] for r in raw])
    b_idx = np.array([r[1] for r in raw])
    lo = np.array([r[2] for r in raw])
    hi = np.array([r[3] for r in raw])
    kmax = int(max(a_idx.max(), b_idx.max())) + 1
    interval = _sweep_interval(base, parameter, float(hi.max()), order)
    rows = np.arange(m)

    def gaps_at(vals):
        tables = _batch_tables(base, parameter, vals, order)
        diag_p, off2_p = tables(+1)
        diag_m, off2_m = tables(-1)
        ep = eigenvalues_batch(diag_p, off2_p, kmax, tol, interval)
        em = eigenvalues_batch(diag_m, off2_m, kmax, tol, interval)
        return ep[rows, a_idx] - em[rows, b_idx], ep[rows, a_idx], em[rows, b_idx]

    gap_lo, _, _ = gaps_at(lo)
    while float(np.max(hi - lo)) > value_tol:
        mid = 0.5 * (lo + hi)
        gap_mid, _, _ = gaps_at(mid)
        same = np.sign(gap_mid) == np.sign(gap_lo)
        lo = np.where(same, mid, lo)
        gap_lo = np.where(same, gap_mid, gap_lo)
        hi = np.where(same, hi, mid)
    star = 0.5 * (lo + hi)
    _, ea, eb = gaps_at(star)
    return star, 0.5 * (ea + eb)


def scan_levels(
    params_base: ModelParams,
    parameter: str,
    start: float,
    stop: float,
    steps: int,
    levels: int,
    order: TruncationOrder,
    tol: float | None = None,
) -> ScanResult:
    """Track the lowest oracle eigenvalues of both parity chains across a
    parameter sweep and refine every inter-parity crossing.

    Crossings are detected as sign changes of E_i^+ - E_j^- between
    adjacent scan points for every level pair (tracking is by sorted order
    within each chain, which parity conservation keeps consistent), then
    refined by bisection on the gap.  Events closer than one scan step for
    the same pair are deduplicated.
    """
    if steps < 10:
        raise ValueError("steps must be >= 10")
    if not (math.isfinite(start) and math.isfinite(stop) and start < stop):
        raise ValueError("invalid scan range")
    if parameter == "g" and params_base.delta == 0.0:
        raise DegenerateScanError(
            "delta=0 makes the parity chains identical: every pair is "
            "degenerate at every coupling"
        )
    if parameter == "delta" and start <= 0.0:
        raise DegenerateScanError("delta scan range must stay strictly positive")
    if tol is None:
        tol = 1e-11 * params_base.omega

    values = np.linspace(start, stop, steps)
    ep, em = _spectra_at(params_base, parameter, values, levels, order, tol)

    step = (stop - start) / (steps - 1)
    raw = []
    for a in range(levels):
        for b in range(levels):
            s = np.sign(ep[:, a] - em[:, b])
            for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
                raw.append((a, b, float(values[i]), float(values[i + 1])))

    events: list[CrossingEvent] = []
    if raw:
        value_tol = 1e-12 * max(1.0, abs(stop))
        stars, estars = _refine_events(params_base, parameter, raw, order, tol, value_tol)
        for (a, b, _, _), star, estar in zip(raw, stars, estars):
            p = _scan_params(params_base, parameter, float(star))
            shifted = float(estar) + p.g * p.g / p.omega
            k = int(round(shifted / p.omega))
            events.append(CrossingEvent(
                parameter=parameter,
                value=float(star),
                energy=float(estar),
                parities=(Parity.PLUS, Parity.MINUS),
                plus_level=a,
                minus_level=b,
                shifted=shifted,
                nearest_multiple=k,
                deviation=abs(shifted - k * p.omega),
            ))
    events.sort(key=lambda ev: (ev.value, ev.plus_level, ev.minus_level))
    deduped: list[CrossingEvent] = []
    for ev in events:
        if any(
            d.plus_level == ev.plus_level and d.minus_level == ev.minus_level
            and abs(d.value - ev.value) < step
            for d in deduped
        ):
            continue
        deduped.append(ev)
    return ScanResult(
        parameter=parameter,
        values=values,
        plus_levels=ep,
        minus_levels=em,
        events=tuple(deduped),
    )


def scan_crossings(
    params_base: ModelParams,
    parameter: str,
    start: float,
    stop: float,
    steps: int,
    levels: int,
    order: TruncationOrder,
    tol: float | None = None,
) -> list[CrossingEvent]:
    """Crossing events only; see :func:`scan_levels` for the level tracks."""
    return list(
        scan_levels(params_base, parameter, start, stop, steps, levels, order, tol).events
    )
