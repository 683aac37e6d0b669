"""Momentum grids, single-mode Hamiltonians, spectra and ground-state energies.

The working medium is a family of free-fermion chains whose Hamiltonian
decouples into independent momentum modes.  Each mode is described by a real
diagonal coefficient ``diag`` and a (generally complex) pairing coefficient
``offdiag``; the transverse-field Ising constructors fill these in as
``diag = 2 (h + cos k)`` and ``offdiag = 2 sin k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModeHamiltonian",
    "CriticalExponents",
    "momentum_grid",
    "tim_mode",
    "gap",
    "ground_state_energy",
    "tim_exponents",
]


@dataclass(frozen=True)
class ModeHamiltonian:
    """Parameters of one momentum mode.

    Attributes
    ----------
    k : float
        Momentum, in (0, pi).
    diag : float
        Real coefficient multiplying sigma^z in the 2x2 block.
    offdiag : complex
        Coefficient multiplying sigma^+ (conjugated on sigma^-).
    """

    k: float
    diag: float
    offdiag: complex

    def matrix2(self) -> np.ndarray:
        """2x2 Hermitian block acting on the even-occupation subspace."""
        return np.array(
            [[self.diag, self.offdiag], [np.conj(self.offdiag), -self.diag]],
            dtype=complex,
        )

    def matrix4(self) -> np.ndarray:
        """Full 4x4 mode Hamiltonian in the basis |00>, |10>, |01>, |11>.

        Only |00> and |11> are coupled; the singly occupied states sit at
        zero energy and are untouched by unitary dynamics.
        """
        h = np.zeros((4, 4), dtype=complex)
        h[0, 0] = self.diag
        h[3, 3] = -self.diag
        h[0, 3] = self.offdiag
        h[3, 0] = np.conj(self.offdiag)
        return h


@dataclass(frozen=True)
class CriticalExponents:
    """Equilibrium critical exponents plus the quench-class flag.

    ``x = 1`` means the drive crosses the critical point; ``x = 2`` means the
    drive terminates at the critical point.
    """

    nu: float
    z: float
    d: int = 1
    x: int = 1

    def __post_init__(self):
        if self.nu <= 0 or self.z <= 0:
            raise ValueError("nu and z must be positive")
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if self.x not in (1, 2):
            raise ValueError("x must be 1 (crossing) or 2 (ending at criticality)")


def tim_exponents(x: int = 1) -> CriticalExponents:
    """Transverse-field Ising exponents (nu = z = d = 1)."""
    return CriticalExponents(nu=1.0, z=1.0, d=1, x=x)


def momentum_grid(length: int) -> np.ndarray:
    """Positive momenta k_m = (2m - 1) pi / L for m = 1 .. L/2.

    The antiperiodic-sector grid avoids k = 0 and k = pi exactly, so every
    mode keeps a nonzero pairing coefficient at finite L.
    """
    if length <= 0 or length % 2 != 0:
        raise ValueError(f"chain length must be a positive even integer, got {length}")
    m = np.arange(1, length // 2 + 1)
    return (2 * m - 1) * np.pi / length


def tim_mode(h: float, k: float) -> ModeHamiltonian:
    """Transverse-field Ising mode at field h and momentum k (J = 1)."""
    if not 0.0 < k < np.pi:
        raise ValueError(f"momentum must lie in (0, pi), got {k}")
    return ModeHamiltonian(k=k, diag=2.0 * (h + np.cos(k)), offdiag=2.0 * np.sin(k))


def gap(mode: ModeHamiltonian) -> float:
    """Consecutive-level gap of the 4x4 mode Hamiltonian.

    The spectrum is {-E, 0, 0, +E} with E = sqrt(diag^2 + |offdiag|^2); for
    Ising inputs this evaluates to 2 sqrt((h + cos k)^2 + sin^2 k).
    """
    return float(np.hypot(mode.diag, abs(mode.offdiag)))


def ground_state_energy(h: float, length: int) -> float:
    """Exact many-body ground-state energy -sum_k E_k over the momentum grid."""
    ks = momentum_grid(length)
    e = 2.0 * np.sqrt((h + np.cos(ks)) ** 2 + np.sin(ks) ** 2)
    return float(-np.sum(e))
