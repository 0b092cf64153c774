"""Sequential best-of-D training of the quenched evolution.

Each training step proposes D fresh disorder layers, evolves a copy of the
current state through each candidate layer, scores every candidate by the KL
cost against the data histogram, and accepts the argmin (ties resolve to the
lowest candidate index).  The accepted layer's evolved state becomes the new
current state; rejected candidates are discarded.  The evolving state is
reused across steps, never recomputed from scratch.

The default cost is the forward divergence D(Q_tilde || P_model), which stays
finite for any model state thanks to epsilon-regularization of P; the reverse
direction is available behind a flag.  shot_count > 0 switches candidate
scoring to finite-sampling estimates of P while the accepted state update
remains exact.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import rel_entr

from .chain import ChainParams, sample_disorder
from .propagator import PropagatorConfig, build_period_propagator, evolve_block_columns, quasi_energies
from .quench import initial_state
from .spectral import spacing_ratios

__all__ = ["TrainingConfig", "TrainingTrace", "SweepRow", "cost", "train", "sweep_disorder"]


@dataclass(frozen=True)
class TrainingConfig:
    """Protocol parameters for best-of-D training.

    m_max         number of training steps (accepted layers)
    d_candidates  candidates proposed per step
    kld_reverse   score with D(P_model || Q_tilde) instead of the default
                  forward direction
    epsilon       regularizer added per outcome before taking logs
    shot_count    0 scores candidates with exact probabilities; > 0 draws that
                  many measurement samples per candidate and scores the counts
    """

    m_max: int
    d_candidates: int = 200
    kld_reverse: bool = False
    epsilon: float = 1e-12
    shot_count: int = 0

    def __post_init__(self) -> None:
        if self.m_max < 1:
            raise ValueError(f"m_max must be >= 1, got {self.m_max}")
        if self.d_candidates < 1:
            raise ValueError(f"d_candidates must be >= 1, got {self.d_candidates}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.shot_count < 0:
            raise ValueError(f"shot_count must be >= 0, got {self.shot_count}")


@dataclass(frozen=True)
class TrainingTrace:
    """Accepted costs and parameters of one training run.

    costs[m] is the accepted (minimum) candidate cost at step m and
    chosen_thetas[m] the accepted disorder vector.  candidate_median tracks
    the per-step median candidate cost; candidate_costs holds the full
    (m_max, D) cost table when recording was requested.
    """

    costs: np.ndarray
    chosen_thetas: np.ndarray
    candidate_median: np.ndarray
    final_state: np.ndarray
    candidate_costs: np.ndarray | None = None


def _regularize(p: np.ndarray, epsilon: float) -> np.ndarray:
    n = p.shape[0]
    return (p + epsilon) / (1.0 + n * epsilon)


def cost(p_model: np.ndarray, q_tilde: np.ndarray, config: TrainingConfig) -> float:
    """KL training cost between the model distribution and the data histogram.

    Forward (default): sum_z Q(z) ln(Q(z)/p_reg(z)) with p regularized.
    Reverse (flag):    sum_z p(z) ln(p(z)/Q_reg(z)) with Q regularized.
    """
    p_model = np.asarray(p_model, dtype=np.float64)
    q_tilde = np.asarray(q_tilde, dtype=np.float64)
    if p_model.shape != q_tilde.shape:
        raise ValueError(f"shape mismatch: {p_model.shape} vs {q_tilde.shape}")
    if config.kld_reverse:
        val = float(rel_entr(p_model, _regularize(q_tilde, config.epsilon)).sum())
    else:
        val = float(rel_entr(q_tilde, _regularize(p_model, config.epsilon)).sum())
    return max(val, 0.0)


def _candidate_costs(P: np.ndarray, q_tilde: np.ndarray, config: TrainingConfig) -> np.ndarray:
    """Vectorized cost of every probability column in P against q_tilde."""
    if config.kld_reverse:
        vals = rel_entr(P, _regularize(q_tilde, config.epsilon)[:, None]).sum(axis=0)
    else:
        n = P.shape[0]
        Preg = (P + config.epsilon) / (1.0 + n * config.epsilon)
        vals = rel_entr(q_tilde[:, None], Preg).sum(axis=0)
    return np.maximum(vals, 0.0)


def train(params: ChainParams, model_qtilde: np.ndarray, config: TrainingConfig,
          prop_config: PropagatorConfig, rng: np.random.Generator,
          record_candidates: bool = False,
          start_state: np.ndarray | None = None) -> TrainingTrace:
    """Run the best-of-D protocol for m_max steps and return the trace.

    Per step, the D candidate disorder vectors are drawn from rng as a single
    (D, L) block; in finite-shot mode the per-candidate measurement draws
    follow in candidate order.  Identical (rng state, config) therefore
    reproduce the trace bit for bit.  start_state resumes a checkpointed run
    from a stored state instead of the all-up product state.
    """
    q_tilde = np.asarray(model_qtilde, dtype=np.float64)
    if q_tilde.shape != (params.dim,):
        raise ValueError(f"q_tilde has shape {q_tilde.shape}, expected ({params.dim},)")
    D = config.d_candidates
    if start_state is None:
        state = initial_state(params)
    else:
        state = np.ascontiguousarray(start_state, dtype=np.complex128)
        if state.shape != (params.dim,):
            raise ValueError(f"start_state has shape {state.shape}, expected ({params.dim},)")
    costs = np.empty(config.m_max)
    chosen = np.empty((config.m_max, params.L))
    medians = np.empty(config.m_max)
    all_costs = np.empty((config.m_max, D)) if record_candidates else None
    for m in range(config.m_max):
        thetas = rng.uniform(0.0, params.W, size=(D, params.L))
        block = np.repeat(state[:, None], D, axis=1)
        evolve_block_columns(block, params, thetas, prop_config)
        P = np.abs(block) ** 2
        if config.shot_count > 0:
            scored = np.empty_like(P)
            for d in range(D):
                col = P[:, d] / P[:, d].sum()
                scored[:, d] = rng.multinomial(config.shot_count, col) / config.shot_count
        else:
            scored = P
        cand = _candidate_costs(scored, q_tilde, config)
        if not np.all(np.isfinite(cand)):
            bad = np.flatnonzero(~np.isfinite(cand))
            raise RuntimeError(
                f"non-finite candidate cost at step {m}: candidates {bad.tolist()}, "
                f"values {cand[bad].tolist()}"
            )
        j = int(np.argmin(cand))
        costs[m] = cand[j]
        chosen[m] = thetas[j]
        medians[m] = float(np.median(cand))
        if all_costs is not None:
            all_costs[m] = cand
        state = np.ascontiguousarray(block[:, j])
    return TrainingTrace(costs=costs, chosen_thetas=chosen, candidate_median=medians,
                         final_state=state, candidate_costs=all_costs)


@dataclass(frozen=True)
class SweepRow:
    """Aggregate of one disorder strength in a trainability sweep."""

    W: float
    mean_final_cost: float
    std_final_cost: float
    mean_ratio: float


def sweep_disorder(params_base: ChainParams, W_values: np.ndarray, model_count: int,
                   config: TrainingConfig, rng: np.random.Generator,
                   prop_config: PropagatorConfig | None = None,
                   samples: int = 3000, kT0: float | None = None) -> list[SweepRow]:
    """Trainability versus disorder strength, with phase identification.

    For each W, model_count independent Boltzmann targets are drawn and
    trained on (model draw, dataset draw, training run, one single-layer
    spectrum draw, in that rng order per model), yielding the mean and
    standard deviation of the final cost plus the pooled single-layer spacing
    ratio mean at that W.
    """
    from .boltzmann import draw_dataset, empirical_histogram, exact_distribution, sample_model
    from .chain import build_static_hamiltonian

    if model_count < 1:
        raise ValueError(f"model_count must be >= 1, got {model_count}")
    if prop_config is None:
        prop_config = PropagatorConfig()
    temperature = params_base.J if kT0 is None else kT0
    rows = []
    for W in np.asarray(W_values, dtype=np.float64):
        params = replace(params_base, W=float(W))
        finals = np.empty(model_count)
        pooled_ratios = []
        for k in range(model_count):
            model = sample_model(params.L, params.J, temperature, rng)
            data = draw_dataset(exact_distribution(model), samples, rng)
            trace = train(params, empirical_histogram(data), config, prop_config, rng)
            finals[k] = trace.costs[-1]
            theta = sample_disorder(params, rng)
            if params.F == 0.0:
                spectrum = np.linalg.eigvalsh(build_static_hamiltonian(params, theta))
            else:
                U = build_period_propagator(params, theta, prop_config)
                spectrum = quasi_energies(U, params.period).energies
            pooled_ratios.append(spacing_ratios(spectrum))
        rows.append(SweepRow(
            W=float(W),
            mean_final_cost=float(finals.mean()),
            std_final_cost=float(finals.std(ddof=1)) if model_count > 1 else 0.0,
            mean_ratio=float(np.concatenate(pooled_ratios).mean()),
        ))
    return rows
