"""Classical Boltzmann-machine targets: exact Gibbs distributions and datasets.

The generative-modeling ground truth is the all-to-all Ising energy

    E(z) = sum_i a_i z_i + sum_{i<j} b_ij z_i z_j,      z_i in {+1, -1},

with biases and couplings drawn uniformly from [-J/2, J/2], at temperature
kT0.  System sizes here allow exact enumeration of all 2^L configurations, so
Q(z) = exp(-E(z)/kT0)/Z is computed exactly and datasets are drawn by
inverse-transform sampling from the enumerated distribution.

Spin-to-bit decoding is shared with the chain convention: z_i = +1 maps to
bit 0, and a configuration's index is the big-endian integer of its bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import spin_table

__all__ = [
    "BoltzmannModel",
    "Dataset",
    "sample_model",
    "energy",
    "exact_distribution",
    "draw_dataset",
    "empirical_histogram",
    "spins_to_indices",
    "indices_to_spins",
]

ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class BoltzmannModel:
    """Local biases a, symmetric zero-diagonal couplings b, temperature kT0."""

    a: np.ndarray
    b: np.ndarray
    kT0: float

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        L = a.shape[0]
        if a.ndim != 1 or b.shape != (L, L):
            raise ValueError(f"inconsistent shapes: a {a.shape}, b {b.shape}")
        if not np.array_equal(b, b.T):
            raise ValueError("couplings must be symmetric")
        if np.any(np.diagonal(b) != 0):
            raise ValueError("couplings must have zero diagonal")
        if not self.kT0 > 0:
            raise ValueError(f"kT0 must be > 0, got {self.kT0}")

    @property
    def L(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class Dataset:
    """Spin samples (rows of +/-1) plus provenance (model id, seed, ...)."""

    samples: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 2:
            raise ValueError(f"expected (n, L) samples, got shape {samples.shape}")
        if not np.all(np.isin(samples, (-1, 1))):
            raise ValueError("samples must contain only +1 and -1")

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def L(self) -> int:
        return self.samples.shape[1]


def sample_model(L: int, J: float, kT0: float, rng: np.random.Generator) -> BoltzmannModel:
    """Random model: a_i and b_ij (i<j) i.i.d. uniform on [-J/2, J/2].

    Biases are drawn first, then the upper-triangle couplings row by row, so
    cloned streams reproduce the model exactly.
    """
    a = rng.uniform(-J / 2.0, J / 2.0, size=L)
    b = np.zeros((L, L))
    iu = np.triu_indices(L, k=1)
    b[iu] = rng.uniform(-J / 2.0, J / 2.0, size=len(iu[0]))
    b += b.T
    return BoltzmannModel(a=a, b=b, kT0=kT0)


def energy(model: BoltzmannModel, z: np.ndarray) -> float:
    """E(z) = sum_i a_i z_i + sum_{i<j} b_ij z_i z_j for one configuration."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (model.L,):
        raise ValueError(f"z has shape {z.shape}, expected ({model.L},)")
    if not np.all(np.isin(z, (-1.0, 1.0))):
        raise ValueError("z must contain only +1 and -1")
    # b is symmetric with zero diagonal, so z.b.z double-counts each pair
    return float(model.a @ z + 0.5 * (z @ model.b @ z))


def _all_energies(model: BoltzmannModel) -> np.ndarray:
    s = spin_table(model.L).astype(np.float64)
    return s @ model.a + 0.5 * np.einsum("ni,ij,nj->n", s, model.b, s)


def exact_distribution(model: BoltzmannModel) -> np.ndarray:
    """Q(z) = exp(-E(z)/kT0)/Z over all 2^L configurations, indexed by basis index."""
    if model.L > ENUMERATION_LIMIT:
        raise ValueError(
            f"exact enumeration limited to L <= {ENUMERATION_LIMIT}, got L={model.L}"
        )
    E = _all_energies(model)
    w = np.exp(-(E - E.min()) / model.kT0)
    return w / w.sum()


def spins_to_indices(samples: np.ndarray) -> np.ndarray:
    """Basis indices of spin rows under the fixed +1 -> bit 0 convention."""
    samples = np.asarray(samples)
    L = samples.shape[-1]
    bits = (1 - samples) // 2
    weights = 1 << (L - 1 - np.arange(L))
    return bits @ weights


def indices_to_spins(indices: np.ndarray, L: int) -> np.ndarray:
    """Spin rows for basis indices; inverse of spins_to_indices."""
    indices = np.asarray(indices)
    bits = (indices[..., None] >> (L - 1 - np.arange(L))) & 1
    return (1 - 2 * bits).astype(np.int8)


def draw_dataset(Q: np.ndarray, n: int, rng: np.random.Generator,
                 provenance: dict | None = None) -> Dataset:
    """n i.i.d. draws from the enumerated distribution, decoded to spin rows."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    Q = np.asarray(Q, dtype=np.float64)
    L = int(np.log2(len(Q)))
    if len(Q) != 1 << L:
        raise ValueError(f"distribution length {len(Q)} is not a power of 2")
    cdf = np.cumsum(Q)
    cdf[-1] = 1.0
    indices = np.searchsorted(cdf, rng.random(n), side="right")
    indices = np.minimum(indices, len(Q) - 1)
    return Dataset(samples=indices_to_spins(indices, L),
                   provenance=provenance or {})


def empirical_histogram(data: Dataset) -> np.ndarray:
    """Normalized outcome histogram of a dataset over all 2^L basis indices."""
    if data.n == 0:
        raise ValueError("dataset is empty")
    indices = spins_to_indices(data.samples)
    counts = np.bincount(indices, minlength=1 << data.L)
    return counts / data.n
