"""Multi-layer quenched evolution and its output-distribution diagnostics.

A quench schedule is an (M, L) array of disorder vectors.  Layer m evolves the
state for one drive period under theta_m, so the full sequence applies
U(theta_M) ... U(theta_1) to the initial all-up product state.  The measured
distribution after m layers is p(z; Theta_m) = |<z|psi_m>|^2.

Diagnostics:

* the Porter-Thomas curve tracks how fast {N p(z)} approaches the exponential
  density e^{-Np} of a Haar-random state as layers accumulate,
* the anti-concentration fraction is the measure of outcomes with
  p(z) > delta/N (1/e at delta = 1 for Porter-Thomas),
* temporal memory compares distributions a few layers apart late in the
  sequence; thermalizing dynamics decorrelates immediately while localized
  dynamics retains short-term memory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainParams, sample_disorder
from .propagator import PropagatorConfig, evolve_block
from .spectral import PT_EDGES, BinnedDistribution, discrete_kld, histogram_kld, porter_thomas_reference

__all__ = [
    "EvolutionTrace",
    "sample_schedule",
    "initial_state",
    "run_quench_sequence",
    "composite_propagator",
    "porter_thomas_kld_curve",
    "anticoncentration_fraction",
    "temporal_memory",
]


@dataclass(frozen=True)
class EvolutionTrace:
    """Per-layer output distributions of one quench sequence.

    distributions[m] is p(z; Theta_m) for m = 0..M (row 0 is the initial
    state).  seed_manifest optionally records the streams that produced the
    schedule.
    """

    distributions: np.ndarray
    seed_manifest: dict | None = None

    def __post_init__(self) -> None:
        dist = np.asarray(self.distributions, dtype=np.float64)
        object.__setattr__(self, "distributions", dist)
        if dist.ndim != 2:
            raise ValueError(f"expected (M+1, 2^L) distributions, got {dist.shape}")
        if np.any(dist < 0):
            raise ValueError("probabilities must be nonnegative")
        worst = float(np.max(np.abs(dist.sum(axis=1) - 1.0)))
        if worst > 1e-9:
            raise ValueError(f"distributions must sum to 1, worst deviation {worst:.3e}")

    @property
    def layers(self) -> int:
        return self.distributions.shape[0] - 1


def sample_schedule(params: ChainParams, layers: int, rng: np.random.Generator) -> np.ndarray:
    """(layers, L) quench schedule of i.i.d. uniform disorder vectors."""
    if layers < 0:
        raise ValueError(f"layers must be >= 0, got {layers}")
    return np.stack([sample_disorder(params, rng) for _ in range(layers)]) \
        if layers else np.empty((0, params.L))


def initial_state(params: ChainParams) -> np.ndarray:
    """All spins along +z: the basis state of index 0."""
    state = np.zeros(params.dim, dtype=np.complex128)
    state[0] = 1.0
    return state


def _check_schedule(params: ChainParams, schedule: np.ndarray) -> np.ndarray:
    schedule = np.asarray(schedule, dtype=np.float64)
    if schedule.ndim != 2 or schedule.shape[1] != params.L:
        raise ValueError(
            f"schedule has shape {schedule.shape}, expected (M, {params.L})"
        )
    return schedule


def run_quench_sequence(params: ChainParams, schedule: np.ndarray,
                        config: PropagatorConfig,
                        seed_manifest: dict | None = None) -> EvolutionTrace:
    """Evolve the initial state through every layer, recording p(z) after each."""
    schedule = _check_schedule(params, schedule)
    M = schedule.shape[0]
    block = np.ascontiguousarray(initial_state(params)[:, None])
    dists = np.empty((M + 1, params.dim))
    dists[0] = np.abs(block[:, 0]) ** 2
    for m in range(M):
        evolve_block(block, params, schedule[m], config)
        dists[m + 1] = np.abs(block[:, 0]) ** 2
    return EvolutionTrace(distributions=dists, seed_manifest=seed_manifest)


def composite_propagator(params: ChainParams, schedule: np.ndarray,
                         config: PropagatorConfig) -> np.ndarray:
    """Dense product U(theta_M) ... U(theta_1) over the whole schedule."""
    schedule = _check_schedule(params, schedule)
    if schedule.shape[0] < 1:
        raise ValueError("composite propagator needs at least one layer")
    U = np.eye(params.dim, dtype=np.complex128)
    for theta in schedule:
        evolve_block(U, params, theta, config)
    return U


def porter_thomas_kld_curve(trace: EvolutionTrace) -> np.ndarray:
    """(M+1, 2) array of (m, KLD of binned {N p} from the exponential density)."""
    dists = trace.distributions
    N = dists.shape[1]
    reference = porter_thomas_reference()
    out = np.empty((dists.shape[0], 2))
    for m, p in enumerate(dists):
        binned = BinnedDistribution.from_samples(N * p, reference.edges)
        out[m] = (m, histogram_kld(binned, reference))
    return out


def anticoncentration_fraction(p: np.ndarray, delta: float) -> float:
    """Fraction of outcomes with p(z) > delta / N."""
    p = np.asarray(p, dtype=np.float64)
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"p must sum to 1, got {total!r}")
    N = p.shape[0]
    return float(np.mean(p > delta / N))


def temporal_memory(params: ChainParams, config: PropagatorConfig,
                    window_start: int, window_len: int, dm_max: int,
                    rng: np.random.Generator, reverse: bool = False,
                    epsilon: float = 1e-12) -> np.ndarray:
    """Mean late-time KLD between distributions dm layers apart.

    Runs one random schedule long enough to cover the averaging window and,
    for each dm in 1..dm_max, averages D(p_{m+dm} || p_m) over
    m in [window_start, window_start + window_len).  The reverse flag swaps
    the KLD direction.  Returns a (dm_max, 2) array of (dm, mean KLD).
    """
    if window_start < 1 or window_len < 1 or dm_max < 1:
        raise ValueError(
            "window_start, window_len and dm_max must be positive, got "
            f"({window_start}, {window_len}, {dm_max})"
        )
    total_layers = window_start + window_len - 1 + dm_max
    schedule = sample_schedule(params, total_layers, rng)
    block = np.ascontiguousarray(initial_state(params)[:, None])
    stored: dict[int, np.ndarray] = {}
    for m in range(1, total_layers + 1):
        evolve_block(block, params, schedule[m - 1], config)
        if m >= window_start:
            stored[m] = np.abs(block[:, 0]) ** 2
    out = np.empty((dm_max, 2))
    window = range(window_start, window_start + window_len)
    for i, dm in enumerate(range(1, dm_max + 1)):
        if reverse:
            vals = [discrete_kld(stored[m], stored[m + dm], epsilon) for m in window]
        else:
            vals = [discrete_kld(stored[m + dm], stored[m], epsilon) for m in window]
        out[i] = (dm, float(np.mean(vals)))
    return out
