"""Disordered Ising chain: Hamiltonian construction, drive waveform, disorder sampling.

The chain Hamiltonian is

    H0(theta) = sum_i theta_i Z_i + J sum_{i=1..L-1} Z_i Z_{i+1} + (h/2) sum_i X_i

with open boundaries (L-1 bonds), driven through the transverse operator
V = sum_i X_i with amplitude f(t) = -(F/2) cos(omega t).

Basis convention, shared by every module in this package:

* sites are numbered 1..L,
* bit value b_i = 0 means site i is in the Z_i = +1 eigenstate,
* the basis index is the big-endian integer of (b_1 ... b_L), so site i
  occupies bit position L - i and site 1 is the most significant bit.

All couplings are quoted in units of the interaction strength J.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChainParams",
    "spin_table",
    "static_diagonal",
    "build_static_hamiltonian",
    "build_drive_operator",
    "drive_amplitude",
    "sample_disorder",
]


@dataclass(frozen=True)
class ChainParams:
    """Geometry and couplings of the driven disordered Ising chain.

    L      number of spins
    J      interaction strength; sets the unit of energy
    h      static transverse field, units of J
    F      drive amplitude, units of J (F = 0 turns the drive off)
    omega  drive angular frequency, units of J
    W      disorder strength; local fields are uniform on [0, W]
    """

    L: int
    J: float = 1.0
    h: float = 2.5
    F: float = 0.0
    omega: float = 8.0
    W: float = 1.0

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.J <= 0:
            raise ValueError(f"J must be > 0, got {self.J}")
        if self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.F < 0:
            raise ValueError(f"F must be >= 0, got {self.F}")
        if self.W < 0:
            raise ValueError(f"W must be >= 0, got {self.W}")

    @property
    def dim(self) -> int:
        return 1 << self.L

    @property
    def period(self) -> float:
        """Drive period T = 2 pi / omega."""
        return 2.0 * np.pi / self.omega


def spin_table(L: int) -> np.ndarray:
    """(2^L, L) array of Z eigenvalues; column i-1 holds s_i = +/-1 for site i.

    Row z follows the fixed convention s_i(z) = 1 - 2 * ((z >> (L - i)) & 1).
    """
    z = np.arange(1 << L)
    bits = (z[:, None] >> (L - 1 - np.arange(L))) & 1
    return (1 - 2 * bits).astype(np.int8)


def static_diagonal(params: ChainParams, theta: np.ndarray) -> np.ndarray:
    """Diagonal part of H0: local fields plus nearest-neighbour ZZ couplings.

    Returns the length-2^L vector D(z) = sum_i theta_i s_i(z) + J sum_i s_i s_{i+1}.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (params.L,):
        raise ValueError(
            f"theta has shape {theta.shape}, expected ({params.L},)"
        )
    s = spin_table(params.L).astype(np.float64)
    diag = s @ theta
    if params.L > 1:
        diag += params.J * np.sum(s[:, :-1] * s[:, 1:], axis=1)
    return diag


def build_static_hamiltonian(params: ChainParams, theta: np.ndarray) -> np.ndarray:
    """Dense H0(theta) in the computational basis.

    All entries are real; the transverse term contributes h/2 on every pair of
    basis states at Hamming distance one.
    """
    N = params.dim
    H = np.zeros((N, N), dtype=np.complex128)
    idx = np.arange(N)
    H[idx, idx] = static_diagonal(params, theta)
    half_h = params.h / 2.0
    for p in range(params.L):
        H[idx, idx ^ (1 << p)] += half_h
    return H


def build_drive_operator(params: ChainParams) -> np.ndarray:
    """Dense V = sum_i X_i: the adjacency matrix of the L-bit hypercube."""
    N = params.dim
    V = np.zeros((N, N), dtype=np.complex128)
    idx = np.arange(N)
    for p in range(params.L):
        V[idx, idx ^ (1 << p)] += 1.0
    return V


def drive_amplitude(params: ChainParams, t):
    """Drive waveform f(t) = -(F/2) cos(omega t); zero mean over one period."""
    return -(params.F / 2.0) * np.cos(params.omega * np.asarray(t, dtype=np.float64))


def sample_disorder(params: ChainParams, rng: np.random.Generator) -> np.ndarray:
    """One disorder realization: L i.i.d. local fields uniform on [0, W]."""
    return rng.uniform(0.0, params.W, size=params.L)
