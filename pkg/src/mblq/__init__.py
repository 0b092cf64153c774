"""Driven disordered quantum Ising chains as trainable generative models.

Subpackages and modules:

* ``chain``      -- Hamiltonian and drive-operator construction, disorder sampling
* ``propagator`` -- single-period Floquet propagators and quasi-energy spectra
* ``spectral``   -- level-spacing ratios, eigenvector statistics, reference ensembles
* ``quench``     -- multi-layer quenched evolution and its output-distribution diagnostics
* ``boltzmann``  -- classical Boltzmann-machine target distributions and datasets
* ``trainer``    -- sequential best-of-D training of the quenched evolution
* ``experiments`` -- config parsing, reproduction pipelines, run manifests
* ``cli``        -- the ``mblq`` command-line entry point
"""

__version__ = "0.1.0"

from .chain import (
    ChainParams,
    build_drive_operator,
    build_static_hamiltonian,
    drive_amplitude,
    sample_disorder,
)
from .propagator import (
    PropagatorConfig,
    QuasiSpectrum,
    build_period_propagator,
    evolve_one_period,
    quasi_energies,
)
from .quench import (
    EvolutionTrace,
    anticoncentration_fraction,
    composite_propagator,
    initial_state,
    porter_thomas_kld_curve,
    run_quench_sequence,
    temporal_memory,
)
from .spectral import (
    BinnedDistribution,
    LevelStatistics,
    ReferenceEnsemble,
    discrete_kld,
    eigenstate_component_stats,
    eigenstate_component_values,
    histogram_kld,
    level_statistics,
    porter_thomas_bin_masses,
    porter_thomas_reference,
    reference_r_density,
    sample_coe,
    sample_goe,
    sample_haar_unitary,
    sample_poisson_levels,
    spacing_ratios,
)
from .boltzmann import (
    BoltzmannModel,
    Dataset,
    draw_dataset,
    empirical_histogram,
    energy,
    exact_distribution,
    sample_model,
)
from .trainer import TrainingConfig, TrainingTrace, cost, sweep_disorder, train

__all__ = [
    "ChainParams",
    "build_static_hamiltonian",
    "build_drive_operator",
    "drive_amplitude",
    "sample_disorder",
    "PropagatorConfig",
    "QuasiSpectrum",
    "evolve_one_period",
    "build_period_propagator",
    "quasi_energies",
    "BinnedDistribution",
    "LevelStatistics",
    "ReferenceEnsemble",
    "spacing_ratios",
    "reference_r_density",
    "eigenstate_component_stats",
    "eigenstate_component_values",
    "porter_thomas_bin_masses",
    "porter_thomas_reference",
    "histogram_kld",
    "discrete_kld",
    "level_statistics",
    "sample_goe",
    "sample_haar_unitary",
    "sample_coe",
    "sample_poisson_levels",
    "EvolutionTrace",
    "initial_state",
    "run_quench_sequence",
    "composite_propagator",
    "porter_thomas_kld_curve",
    "anticoncentration_fraction",
    "temporal_memory",
    "BoltzmannModel",
    "Dataset",
    "sample_model",
    "energy",
    "exact_distribution",
    "draw_dataset",
    "empirical_histogram",
    "TrainingConfig",
    "TrainingTrace",
    "cost",
    "train",
    "sweep_disorder",
    "__version__",
]
