"""Spectral statistics: spacing ratios, eigenvector components, reference ensembles.

The central diagnostic is the consecutive-gap ratio

    r_alpha = min(d_alpha, d_{alpha+1}) / max(d_alpha, d_{alpha+1}),

which needs no unfolding and distinguishes uncorrelated spectra (Poisson,
mean r = 2 ln 2 - 1 = 0.3863) from level-repelling ones (GOE/COE mean r near
0.53, CUE near 0.60).  Reference densities are Wigner-like surmises folded
onto [0, 1]; direct random-matrix samplers are provided as cross-check
oracles for them.

Eigenvector statistics follow the rescaled-component convention: for a
unitary with eigenvectors |E_a> the values N |<z|E_a>|^2 are binned and, for
Haar-random matrices, follow the exponential (Porter-Thomas) density e^{-x}.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ReferenceEnsemble",
    "BinnedDistribution",
    "LevelStatistics",
    "R_EDGES",
    "PT_EDGES",
    "spacing_ratios",
    "reference_r_density",
    "level_statistics",
    "eigenstate_component_values",
    "eigenstate_component_stats",
    "porter_thomas_bin_masses",
    "porter_thomas_reference",
    "histogram_kld",
    "discrete_kld",
    "sample_goe",
    "sample_haar_unitary",
    "sample_coe",
    "sample_poisson_levels",
]

#: Binning conventions used across the package: spacing-ratio histograms use
#: 50 uniform bins on [0, 1]; rescaled-component and rescaled-probability
#: histograms use 60 uniform bins on [0, 12] (the e^{-x} mass beyond 12 is
#: below 1e-5).
R_EDGES = np.linspace(0.0, 1.0, 51)
PT_EDGES = np.linspace(0.0, 12.0, 61)

KLD_EPSILON = 1e-12


class ReferenceEnsemble(Enum):
    POI = "poi"
    GOE = "goe"
    COE = "coe"
    CUE = "cue"
    PORTER_THOMAS = "porter-thomas"


@dataclass(frozen=True)
class BinnedDistribution:
    """A histogram as a probability mass function over fixed bins."""

    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.float64)
        masses = np.asarray(self.masses, dtype=np.float64)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)
        if edges.ndim != 1 or masses.ndim != 1 or len(edges) != len(masses) + 1:
            raise ValueError(
                f"shape mismatch: {len(edges)} edges vs {len(masses)} masses"
            )
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly ascending")
        if np.any(masses < 0):
            raise ValueError("bin masses must be nonnegative")
        total = float(masses.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"bin masses must sum to 1, got {total!r}")

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def densities(self) -> np.ndarray:
        return self.masses / np.diff(self.edges)

    @classmethod
    def from_samples(cls, values: np.ndarray, edges: np.ndarray) -> "BinnedDistribution":
        """Bin samples and normalize over the in-range counts.

        Values outside the edge range are dropped; the remaining counts are
        renormalized so the masses sum to one.
        """
        counts, _ = np.histogram(np.asarray(values, dtype=np.float64), bins=edges)
        total = counts.sum()
        if total == 0:
            raise ValueError("no samples fall inside the bin range")
        return cls(edges=np.asarray(edges, dtype=np.float64), masses=counts / total)

    @classmethod
    def from_counts(cls, counts: np.ndarray, edges: np.ndarray) -> "BinnedDistribution":
        counts = np.asarray(counts)
        total = counts.sum()
        if total <= 0:
            raise ValueError("counts must have positive total")
        return cls(edges=np.asarray(edges, dtype=np.float64), masses=counts / total)


@dataclass(frozen=True)
class LevelStatistics:
    """Spacing ratios of one spectrum with their mean and histogram."""

    ratios: np.ndarray
    mean_ratio: float
    histogram: BinnedDistribution


def spacing_ratios(spectrum: np.ndarray) -> np.ndarray:
    """Consecutive-gap ratios r_alpha = min/max of adjacent gaps; values in [0, 1].

    The input must be sorted ascending with at least 3 levels.  Degenerate
    levels are handled explicitly: two zero gaps give r = 1, exactly one zero
    gap gives r = 0.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.ndim != 1 or len(spectrum) < 3:
        raise ValueError(f"need at least 3 levels, got {spectrum.shape}")
    gaps = np.diff(spectrum)
    if np.any(gaps < 0):
        raise ValueError("spectrum must be sorted ascending")
    lo = np.minimum(gaps[:-1], gaps[1:])
    hi = np.maximum(gaps[:-1], gaps[1:])
    ratios = np.ones_like(lo)
    np.divide(lo, hi, out=ratios, where=hi > 0)
    return ratios


def reference_r_density(ensemble: ReferenceEnsemble, r):
    """Surmise density of the folded spacing ratio on [0, 1].

    POI: 2/(1+r)^2.  GOE and COE share the beta = 1 surmise
    (27/4)(r+r^2)/(1+r+r^2)^{5/2}.  CUE: (81 sqrt(3)/(2 pi))(r+r^2)^2/(1+r+r^2)^4,
    where the constant includes the factor 2 from folding the unrestricted
    ratio density onto [0, 1] so that it integrates to 1.
    """
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0) or np.any(r > 1):
        raise ValueError("r must lie in [0, 1]")
    if ensemble is ReferenceEnsemble.POI:
        return 2.0 / (1.0 + r) ** 2
    if ensemble in (ReferenceEnsemble.GOE, ReferenceEnsemble.COE):
        return (27.0 / 4.0) * (r + r * r) / (1.0 + r + r * r) ** 2.5
    if ensemble is ReferenceEnsemble.CUE:
        return (81.0 * np.sqrt(3.0) / (2.0 * np.pi)) * (r + r * r) ** 2 / (1.0 + r + r * r) ** 4
    raise ValueError(f"no spacing-ratio density for {ensemble}")


def level_statistics(spectrum: np.ndarray, edges: np.ndarray = R_EDGES) -> LevelStatistics:
    """Spacing ratios, their mean, and their histogram for one spectrum."""
    ratios = spacing_ratios(spectrum)
    hist = BinnedDistribution.from_samples(ratios, edges)
    return LevelStatistics(ratios=ratios, mean_ratio=float(ratios.mean()), histogram=hist)


def _check_unitary(U: np.ndarray, tol: float = 1e-6) -> None:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {U.shape}")
    dev = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if dev > tol:
        raise ValueError(f"input is not unitary: max |U^dag U - I| = {dev:.3e}")


def eigenstate_component_values(U: np.ndarray) -> np.ndarray:
    """All rescaled eigenvector components N |<z|E_a>|^2 of a unitary matrix."""
    _check_unitary(U)
    _, vecs = np.linalg.eig(U)
    N = U.shape[0]
    return (N * np.abs(vecs) ** 2).ravel()


def eigenstate_component_stats(U: np.ndarray, edges: np.ndarray = PT_EDGES) -> BinnedDistribution:
    """Histogram of rescaled eigenvector components; e^{-x} for Haar matrices."""
    return BinnedDistribution.from_samples(eigenstate_component_values(U), edges)


def porter_thomas_bin_masses(edges: np.ndarray = PT_EDGES) -> np.ndarray:
    """Exponential-density reference masses on the given bins, normalized."""
    edges = np.asarray(edges, dtype=np.float64)
    masses = np.exp(-edges[:-1]) - np.exp(-edges[1:])
    return masses / masses.sum()


def porter_thomas_reference(edges: np.ndarray = PT_EDGES) -> BinnedDistribution:
    return BinnedDistribution(edges=edges, masses=porter_thomas_bin_masses(edges))


def histogram_kld(p: BinnedDistribution, q: BinnedDistribution,
                  epsilon: float = KLD_EPSILON) -> float:
    """D(p || q) = sum_b p_b ln(p_b / q_b) over shared bins.

    Both mass vectors are regularized by adding epsilon per bin and
    renormalizing, so empty bins never produce infinities.  The tiny negative
    values the regularization can introduce are clamped to zero.
    """
    if not np.array_equal(p.edges, q.edges):
        raise ValueError("histograms have mismatched bin edges")
    return discrete_kld(p.masses, q.masses, epsilon)


def discrete_kld(p: np.ndarray, q: np.ndarray, epsilon: float = KLD_EPSILON) -> float:
    """KL divergence between two probability vectors, both epsilon-regularized."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    n = p.shape[0]
    pr = (p + epsilon) / (1.0 + n * epsilon)
    qr = (q + epsilon) / (1.0 + n * epsilon)
    return max(float(np.sum(pr * np.log(pr / qr))), 0.0)


# ---------------------------------------------------------------------------
# random-matrix sampling oracles


def sample_goe(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Real symmetric Gaussian matrix (A + A^T)/2; GOE level statistics."""
    A = rng.standard_normal((dim, dim))
    return (A + A.T) / 2.0


def sample_haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix.

    The R-diagonal phases are divided out, which makes the QR factorization
    unique and the resulting Q exactly Haar.
    """
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def sample_coe(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Circular orthogonal ensemble member U^T U with U Haar."""
    U = sample_haar_unitary(dim, rng)
    return U.T @ U


def sample_poisson_levels(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted i.i.d. uniform levels; uncorrelated (Poisson) gap statistics."""
    return np.sort(rng.uniform(0.0, 1.0, size=dim))
