"""Physical parameters and truncated parity-chain matrices.

The Rabi Hamiltonian restricted to one of its two parity-invariant
subspaces is a real symmetric tridiagonal (Jacobi) matrix in the Fock
basis.  Everything downstream (both continued-fraction methods and the
eigensolver oracle) consumes the chain coefficients built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "ModelParams",
    "Parity",
    "TruncationOrder",
    "ChainCoefficients",
    "build_chain",
    "shifted_energy",
]

# Index of the last retained Fock state; chain dimension is order + 1.
TruncationOrder = int


class Parity(Enum):
    """The two invariant subspaces of the model's Z2 symmetry."""

    PLUS = +1
    MINUS = -1

    @property
    def sign(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return "plus" if self is Parity.PLUS else "minus"


@dataclass(frozen=True)
class ModelParams:
    """The three couplings of the Rabi Hamiltonian, in energy units.

    omega : oscillator frequency, strictly positive.
    g     : qubit-oscillator coupling; the sign is irrelevant (unitary
            equivalence), so the absolute value is stored.
    delta : level splitting; absolute value stored for the same reason.
    """

    omega: float
    g: float
    delta: float

    def __post_init__(self):
        omega = float(self.omega)
        g = float(self.g)
        delta = float(self.delta)
        if not (math.isfinite(omega) and math.isfinite(g) and math.isfinite(delta)):
            raise ValueError("model parameters must be finite")
        if omega <= 0.0:
            raise ValueError(f"omega must be strictly positive, got {omega!r}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "g", abs(g))
        object.__setattr__(self, "delta", abs(delta))


def _check_order(order: int) -> int:
    n = int(order)
    if n != order or n < 0:
        raise ValueError(f"truncation order must be an integer >= 0, got {order!r}")
    return n


@dataclass(frozen=True)
class ChainCoefficients:
    """Truncated parity chain of dimension ``order + 1``.

    ``diag[j] = j*omega + sign * (-1)**j * delta`` and
    ``offdiag[j-1] = g * sqrt(j)`` for ``j = 1..order``.  The off-diagonal
    stores the matrix entries sqrt(a_j); continued-fraction numerators are
    recovered as ``a_values() = offdiag**2`` so the matrix stays the single
    source of truth.
    """

    params: ModelParams
    parity: Parity
    order: TruncationOrder
    diag: np.ndarray = field(repr=False)
    offdiag: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.diag) != self.order + 1 or len(self.offdiag) != self.order:
            raise ValueError("coefficient lengths inconsistent with order")
        self.diag.setflags(write=False)
        self.offdiag.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.order + 1

    def a_values(self) -> np.ndarray:
        """Continued-fraction numerators a_j = j*g**2 for j = 1..order."""
        return self.offdiag * self.offdiag

    def principal_submatrix(self, order: int) -> "ChainCoefficients":
        """Restriction to the first ``order + 1`` rows and columns."""
        m = _check_order(order)
        if m > self.order:
            raise ValueError(f"cannot extend order {self.order} to {m}")
        return ChainCoefficients(
            params=self.params,
            parity=self.parity,
            order=m,
            diag=self.diag[: m + 1].copy(),
            offdiag=self.offdiag[:m].copy(),
        )


def build_chain(params: ModelParams, parity: Parity, order: TruncationOrder) -> ChainCoefficients:
    """Build the truncated parity-chain coefficients for a parameter set."""
    n = _check_order(order)
    j = np.arange(n + 1, dtype=float)
    diag = j * params.omega + parity.sign * ((-1.0) ** j) * params.delta
    offdiag = params.g * np.sqrt(np.arange(1, n + 1, dtype=float))
    return ChainCoefficients(params=params, parity=parity, order=n, diag=diag, offdiag=offdiag)


def shifted_energy(params: ModelParams, energy: float) -> float:
    """Coupling-shifted energy x = E + g**2/omega used by the recurrence
    coefficients; its pole lattice sits at integer multiples of omega."""
    return energy + params.g * params.g / params.omega
