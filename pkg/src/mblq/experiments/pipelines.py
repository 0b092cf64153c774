"""Experiment pipelines: work units, ordered merges, CSV/JSON emission.

Each pipeline factors into stateless unit functions (one disorder
realization, one training run, one sweep point) mapped over a worker pool,
plus a driver that merges unit results in unit-index order and writes the
output files.  Merging in a fixed order makes every output a pure function
of (master seed, config), independent of worker count and scheduling.

Seed streams are derived per unit as a pure function of the master seed and
the unit's indices; the hex key of every stream is recorded for the run
manifest.  Long units (composite propagators, training runs) checkpoint to
<out>/checkpoints and resume from a matching checkpoint automatically.
"""

from __future__ import annotations

import csv
import json
import os
from functools import lru_cache, partial
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from ..boltzmann import (
    Dataset,
    draw_dataset,
    empirical_histogram,
    exact_distribution,
    sample_model,
)
from ..chain import ChainParams, build_static_hamiltonian, sample_disorder
from ..propagator import PropagatorConfig, evolve_block, quasi_energies
from ..quench import (
    anticoncentration_fraction,
    run_quench_sequence,
    sample_schedule,
    temporal_memory,
)
from ..seeding import derive_rng, stream_key_hex
from ..spectral import (
    PT_EDGES,
    R_EDGES,
    BinnedDistribution,
    ReferenceEnsemble,
    discrete_kld,
    eigenstate_component_values,
    histogram_kld,
    porter_thomas_reference,
    reference_r_density,
    spacing_ratios,
)
from ..trainer import TrainingConfig, sweep_disorder, train
from .config import ExperimentConfig

__all__ = ["PIPELINES", "SCHEMA_VERSION"]

SCHEMA_VERSION = "mblq-csv-1"


def _params(config: ExperimentConfig, W: float, F: float) -> ChainParams:
    return ChainParams(L=config.L, J=config.J, h=config.h, F=F,
                       omega=config.omega, W=W)


def _prop(config: ExperimentConfig) -> PropagatorConfig:
    return PropagatorConfig(n_steps=config.n_steps)


def _phase_label(W: float, F: float) -> str:
    return f"W{W:g}_F{F:g}"


def _central_window(spectrum: np.ndarray, fraction: float) -> np.ndarray:
    """Central fraction of a sorted spectrum, by index; at least 3 levels."""
    if fraction >= 1.0:
        return spectrum
    n = spectrum.shape[0]
    keep = max(3, int(round(fraction * n)))
    start = (n - keep) // 2
    return spectrum[start:start + keep]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _atomic_savez(path: Path, **arrays) -> None:
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, **arrays)
    os.replace(tmp, path)


@lru_cache(maxsize=None)
def _surmise_mean(ensemble: ReferenceEnsemble) -> float:
    val, _ = quad(lambda r: r * reference_r_density(ensemble, r), 0.0, 1.0)
    return val


def _nearest_reference(mean_ratio: float) -> tuple[str, ReferenceEnsemble]:
    """Reference surmise whose mean is closest to the observed mean ratio."""
    candidates = (
        ("POI", ReferenceEnsemble.POI),
        ("GOE/COE", ReferenceEnsemble.GOE),
        ("CUE", ReferenceEnsemble.CUE),
    )
    return min(candidates, key=lambda c: abs(_surmise_mean(c[1]) - mean_ratio))


def _r_reference(ensemble: ReferenceEnsemble) -> BinnedDistribution:
    centers = 0.5 * (R_EDGES[:-1] + R_EDGES[1:])
    masses = reference_r_density(ensemble, centers) * np.diff(R_EDGES)
    return BinnedDistribution(edges=R_EDGES, masses=masses / masses.sum())


def _write_r_histogram(path: Path, counts: np.ndarray,
                       ensemble: ReferenceEnsemble) -> BinnedDistribution:
    hist = BinnedDistribution.from_counts(counts, R_EDGES)
    ref = reference_r_density(ensemble, hist.centers)
    _write_csv(path,
               ["bin_center (ratio r)", "density (probability per unit r)",
                "reference_density (probability per unit r)"],
               zip(hist.centers, hist.densities, ref))
    return hist


def _fingerprint(config: ExperimentConfig, **extra) -> str:
    keys = ("kind", "L", "J", "h", "omega", "n_steps", "m_layers",
            "master_seed", "d_candidates", "samples", "kT0", "epsilon",
            "shots", "kld_reverse", "dataset_path")
    payload = {k: getattr(config, k) for k in keys}
    payload.update(extra)
    return json.dumps(payload, sort_keys=True)


# ---------------------------------------------------------------- level-stats

def _unit_level_stats(config: ExperimentConfig, unit: tuple[int, int]):
    phase_i, k = unit
    W, F = config.phase_grid()[phase_i]
    params = _params(config, W, F)
    rng = derive_rng(config.master_seed, phase_i, k)
    theta = sample_disorder(params, rng)
    if F == 0.0:
        spectrum = np.linalg.eigvalsh(build_static_hamiltonian(params, theta))
    else:
        U = np.eye(params.dim, dtype=np.complex128)
        evolve_block(U, params, theta, _prop(config))
        spectrum = quasi_energies(U, params.period).energies
    ratios = spacing_ratios(_central_window(spectrum, config.spectral_window))
    counts, _ = np.histogram(ratios, bins=R_EDGES)
    return counts.astype(np.int64), float(ratios.sum()), int(ratios.size)


def run_level_stats(config: ExperimentConfig, out: Path, mapper):
    phases = config.phase_grid()
    units = [(pi, k) for pi in range(len(phases))
             for k in range(config.realizations)]
    results = mapper(partial(_unit_level_stats, config), units)
    files: list[Path] = []
    phase_summaries = []
    for pi, (W, F) in enumerate(phases):
        counts = np.zeros(len(R_EDGES) - 1, dtype=np.int64)
        rsum, rcount = 0.0, 0
        for unit, res in zip(units, results):
            if unit[0] == pi:
                counts += res[0]
                rsum += res[1]
                rcount += res[2]
        mean_ratio = rsum / rcount
        ref_name, ensemble = _nearest_reference(mean_ratio)
        label = _phase_label(W, F)
        path = out / f"r_hist_{label}.csv"
        hist = _write_r_histogram(path, counts, ensemble)
        files.append(path)
        phase_summaries.append({
            "W": W, "F": F, "label": label,
            "realizations": config.realizations,
            "mean_ratio": mean_ratio,
            "reference": ref_name,
            "reference_mean": _surmise_mean(ensemble),
            "kld_vs_reference": histogram_kld(hist, _r_reference(ensemble)),
        })
    seeds = {f"{_phase_label(*phases[pi])}/r{k:04d}":
             stream_key_hex(config.master_seed, pi, k) for pi, k in units}
    summary = {"phases": phase_summaries,
               "spectral_window": config.spectral_window}
    return summary, files, seeds


# ------------------------------------------------------------------ cue-check

def _unit_cue_check(config: ExperimentConfig, ckpt_dir: str,
                    unit: tuple[int, int]):
    phase_i, k = unit
    W, F = config.phase_grid()[phase_i]
    params = _params(config, W, F)
    prop = _prop(config)
    rng = derive_rng(config.master_seed, phase_i, k)
    schedule = sample_schedule(params, config.m_layers, rng)
    ckpt = Path(ckpt_dir) / f"{_phase_label(W, F)}_r{k:04d}.npz"
    fingerprint = _fingerprint(config, W=W, F=F, realization=k)
    U = np.eye(params.dim, dtype=np.complex128)
    done = 0
    if ckpt.exists():
        with np.load(ckpt, allow_pickle=False) as data:
            if (data["fingerprint"].item() == fingerprint
                    and int(data["layers_done"]) <= config.m_layers):
                U = np.ascontiguousarray(data["U"])
                done = int(data["layers_done"])
    for m in range(done, config.m_layers):
        evolve_block(U, params, schedule[m], prop)
        if (m + 1) % config.checkpoint_every == 0 and m + 1 < config.m_layers:
            _atomic_savez(ckpt, U=U, layers_done=np.int64(m + 1),
                          fingerprint=np.array(fingerprint))
    if ckpt.exists():
        ckpt.unlink()
    deviation = float(np.abs(U.conj().T @ U - np.eye(params.dim)).max())
    energies = quasi_energies(U, params.period).energies
    ratios = spacing_ratios(_central_window(energies, config.spectral_window))
    r_counts, _ = np.histogram(ratios, bins=R_EDGES)
    nc_counts, _ = np.histogram(eigenstate_component_values(U), bins=PT_EDGES)
    return (r_counts.astype(np.int64), float(ratios.sum()), int(ratios.size),
            nc_counts.astype(np.int64), deviation)


def run_cue_check(config: ExperimentConfig, out: Path, mapper):
    phases = config.phase_grid()
    ckpt_dir = out / "checkpoints"
    ckpt_dir.mkdir(exist_ok=True)
    units = [(pi, k) for pi in range(len(phases))
             for k in range(config.realizations)]
    results = mapper(partial(_unit_cue_check, config, str(ckpt_dir)), units)
    files: list[Path] = []
    phase_summaries = []
    pt_ref = porter_thomas_reference(PT_EDGES)
    for pi, (W, F) in enumerate(phases):
        r_counts = np.zeros(len(R_EDGES) - 1, dtype=np.int64)
        nc_counts = np.zeros(len(PT_EDGES) - 1, dtype=np.int64)
        rsum, rcount, dev = 0.0, 0, 0.0
        for unit, res in zip(units, results):
            if unit[0] == pi:
                r_counts += res[0]
                rsum += res[1]
                rcount += res[2]
                nc_counts += res[3]
                dev = max(dev, res[4])
        label = _phase_label(W, F)
        r_path = out / f"r_hist_{label}.csv"
        _write_r_histogram(r_path, r_counts, ReferenceEnsemble.CUE)
        nc_hist = BinnedDistribution.from_counts(nc_counts, PT_EDGES)
        nc_path = out / f"nc_hist_{label}.csv"
        _write_csv(nc_path,
                   ["bin_center (Nc)", "density (probability per unit Nc)",
                    "reference_density (probability per unit Nc)"],
                   zip(nc_hist.centers, nc_hist.densities,
                       np.exp(-nc_hist.centers)))
        files += [r_path, nc_path]
        phase_summaries.append({
            "W": W, "F": F, "label": label,
            "layers": config.m_layers,
            "realizations": config.realizations,
            "mean_ratio": rsum / rcount,
            "cue_mean": _surmise_mean(ReferenceEnsemble.CUE),
            "nc_kld_vs_porter_thomas": histogram_kld(nc_hist, pt_ref),
            "max_unitarity_deviation": dev,
        })
    seeds = {f"{_phase_label(*phases[pi])}/r{k:04d}":
             stream_key_hex(config.master_seed, pi, k) for pi, k in units}
    summary = {"phases": phase_summaries,
               "spectral_window": config.spectral_window}
    return summary, files, seeds


# ------------------------------------------------------------ supremacy-curve

def _unit_supremacy(config: ExperimentConfig, unit: tuple[int, int]):
    phase_i, k = unit
    W, F = config.phase_grid()[phase_i]
    params = _params(config, W, F)
    rng = derive_rng(config.master_seed, phase_i, k)
    schedule = sample_schedule(params, config.m_layers, rng)
    trace = run_quench_sequence(params, schedule, _prop(config))
    scaled = params.dim * trace.distributions
    counts = np.empty((config.m_layers + 1, len(PT_EDGES) - 1), dtype=np.int64)
    for m in range(config.m_layers + 1):
        counts[m], _ = np.histogram(scaled[m], bins=PT_EDGES)
    fraction = anticoncentration_fraction(trace.distributions[-1], config.delta)
    return counts, float(fraction)


def run_supremacy_curve(config: ExperimentConfig, out: Path, mapper):
    phases = config.phase_grid()
    units = [(pi, k) for pi in range(len(phases))
             for k in range(config.realizations)]
    results = mapper(partial(_unit_supremacy, config), units)
    files: list[Path] = []
    phase_summaries = []
    pt_ref = porter_thomas_reference(PT_EDGES)
    for pi, (W, F) in enumerate(phases):
        counts = np.zeros((config.m_layers + 1, len(PT_EDGES) - 1),
                          dtype=np.int64)
        fractions = []
        for unit, res in zip(units, results):
            if unit[0] == pi:
                counts += res[0]
                fractions.append(res[1])
        curve = [(m, histogram_kld(
            BinnedDistribution.from_counts(counts[m], PT_EDGES), pt_ref))
            for m in range(config.m_layers + 1)]
        label = _phase_label(W, F)
        curve_path = out / f"pt_kld_{label}.csv"
        _write_csv(curve_path, ["m (layers)", "kld (nats)"], curve)
        final_hist = BinnedDistribution.from_counts(counts[-1], PT_EDGES)
        hist_path = out / f"np_hist_{label}.csv"
        _write_csv(hist_path,
                   ["bin_center (Np)", "density (probability per unit Np)",
                    "reference_density (probability per unit Np)"],
                   zip(final_hist.centers, final_hist.densities,
                       np.exp(-final_hist.centers)))
        files += [curve_path, hist_path]
        phase_summaries.append({
            "W": W, "F": F, "label": label,
            "layers": config.m_layers,
            "realizations": config.realizations,
            "final_kld": curve[-1][1],
            "anticoncentration_delta": config.delta,
            "anticoncentration_mean": float(np.mean(fractions)),
        })
    seeds = {f"{_phase_label(*phases[pi])}/r{k:04d}":
             stream_key_hex(config.master_seed, pi, k) for pi, k in units}
    return {"phases": phase_summaries}, files, seeds


# --------------------------------------------------------------------- memory

def _unit_memory(config: ExperimentConfig, unit: tuple[int, int]):
    phase_i, k = unit
    W, F = config.phase_grid()[phase_i]
    params = _params(config, W, F)
    rng = derive_rng(config.master_seed, phase_i, k)
    start, length = config.effective_window()
    table = temporal_memory(params, _prop(config), start, length,
                            config.dm_max, rng, reverse=config.kld_reverse,
                            epsilon=config.epsilon)
    return table[:, 1]


def run_memory(config: ExperimentConfig, out: Path, mapper):
    phases = config.phase_grid()
    units = [(pi, k) for pi in range(len(phases))
             for k in range(config.realizations)]
    results = mapper(partial(_unit_memory, config), units)
    start, length = config.effective_window()
    files: list[Path] = []
    phase_summaries = []
    for pi, (W, F) in enumerate(phases):
        rows = [res for unit, res in zip(units, results) if unit[0] == pi]
        mean_kld = np.mean(np.vstack(rows), axis=0)
        label = _phase_label(W, F)
        path = out / f"memory_{label}.csv"
        _write_csv(path, ["dm (layers)", "mean_kld (nats)"],
                   [(dm + 1, mean_kld[dm]) for dm in range(config.dm_max)])
        files.append(path)
        phase_summaries.append({
            "W": W, "F": F, "label": label,
            "realizations": config.realizations,
            "kld_dm1": float(mean_kld[0]),
        })
    seeds = {f"{_phase_label(*phases[pi])}/r{k:04d}":
             stream_key_hex(config.master_seed, pi, k) for pi, k in units}
    summary = {
        "phases": phase_summaries,
        "window_start": start,
        "window_len": length,
        "window_start_requested": config.window_start,
        "window_len_requested": config.window_len,
        "window_rescaled": (start, length) != (config.window_start,
                                               config.window_len),
        "dm_max": config.dm_max,
    }
    return summary, files, seeds


# --------------------------------------------------------------- make-dataset

def run_make_dataset(config: ExperimentConfig, out: Path, mapper):
    files: list[Path] = []
    entries = []
    seeds = {}
    for d in range(config.datasets):
        rng = derive_rng(config.master_seed, d)
        seed_key = stream_key_hex(config.master_seed, d)
        seeds[f"d{d:03d}"] = seed_key
        model = sample_model(config.L, config.J, config.kT0, rng)
        Q = exact_distribution(model)
        data = draw_dataset(Q, config.samples, rng)
        txt_path = out / f"dataset_{d:03d}.txt"
        with open(txt_path, "w") as fh:
            for row in data.samples:
                fh.write(" ".join(f"{int(v):+d}" for v in row) + "\n")
        sidecar = {
            "schema_version": SCHEMA_VERSION,
            "L": config.L,
            "kT0": config.kT0,
            "samples": config.samples,
            "seed_key": seed_key,
            "fields": model.a.tolist(),
            "couplings": model.b.tolist(),
        }
        json_path = out / f"dataset_{d:03d}.json"
        json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        files += [txt_path, json_path]
        entries.append({
            "file": txt_path.name,
            "samples": config.samples,
            "empirical_kld_vs_exact": discrete_kld(
                empirical_histogram(data), Q),
        })
    return {"datasets": entries, "L": config.L, "kT0": config.kT0}, files, seeds


# ---------------------------------------------------------------------- train

def _load_dataset(path: str, d: int, L: int) -> Dataset:
    root = Path(path)
    file = root / f"dataset_{d:03d}.txt" if root.is_dir() else root
    samples = np.loadtxt(file, dtype=np.int64, ndmin=2)
    if samples.shape[1] != L:
        raise ValueError(
            f"dataset {file} has {samples.shape[1]} spins per row, expected {L}"
        )
    return Dataset(samples=samples, provenance={"file": str(file)})


def _unit_train(config: ExperimentConfig, ckpt_dir: str,
                unit: tuple[int, int]):
    phase_i, d = unit
    W, F = config.phase_grid()[phase_i]
    params = _params(config, W, F)
    prop = _prop(config)
    data_rng = derive_rng(config.master_seed, phase_i, d, 0)
    if config.dataset_path:
        data = _load_dataset(config.dataset_path, d, config.L)
    else:
        model = sample_model(config.L, config.J, config.kT0, data_rng)
        data = draw_dataset(exact_distribution(model), config.samples, data_rng)
    q_tilde = empirical_histogram(data)
    rng = derive_rng(config.master_seed, phase_i, d, 1)
    M = config.m_layers
    ckpt = Path(ckpt_dir) / f"train_{_phase_label(W, F)}_d{d:02d}.npz"
    fingerprint = _fingerprint(config, W=W, F=F, dataset=d)
    costs = np.empty(0)
    thetas = np.empty((0, config.L))
    medians = np.empty(0)
    state = None
    if ckpt.exists():
        with np.load(ckpt, allow_pickle=False) as saved:
            if (saved["fingerprint"].item() == fingerprint
                    and saved["costs"].shape[0] <= M):
                costs = saved["costs"]
                thetas = saved["thetas"]
                medians = saved["medians"]
                state = saved["state"]
                rng = np.random.default_rng()
                rng.bit_generator.state = json.loads(saved["rng_state"].item())
    while costs.shape[0] < M:
        seg = min(config.checkpoint_every, M - costs.shape[0])
        seg_config = TrainingConfig(
            m_max=seg, d_candidates=config.d_candidates,
            kld_reverse=config.kld_reverse, epsilon=config.epsilon,
            shot_count=config.shots)
        trace = train(params, q_tilde, seg_config, prop, rng,
                      start_state=state)
        costs = np.concatenate([costs, trace.costs])
        thetas = np.vstack([thetas, trace.chosen_thetas])
        medians = np.concatenate([medians, trace.candidate_median])
        state = trace.final_state
        if costs.shape[0] < M:
            _atomic_savez(
                ckpt, costs=costs, thetas=thetas, medians=medians,
                state=state, fingerprint=np.array(fingerprint),
                rng_state=np.array(json.dumps(rng.bit_generator.state)))
    if ckpt.exists():
        ckpt.unlink()
    return costs, thetas, medians


def run_train(config: ExperimentConfig, out: Path, mapper):
    phases = config.phase_grid()
    ckpt_dir = out / "checkpoints"
    ckpt_dir.mkdir(exist_ok=True)
    units = [(pi, d) for pi in range(len(phases))
             for d in range(config.datasets)]
    results = mapper(partial(_unit_train, config, str(ckpt_dir)), units)
    files: list[Path] = []
    phase_summaries = []
    for pi, (W, F) in enumerate(phases):
        label = _phase_label(W, F)
        finals, first10, last10 = [], [], []
        for unit, res in zip(units, results):
            if unit[0] != pi:
                continue
            costs, thetas, medians = res
            d = unit[1]
            trace_path = out / f"train_{label}_d{d:02d}.csv"
            steps = np.arange(1, costs.shape[0] + 1)
            _write_csv(trace_path,
                       ["step (count)", "cost (nats)", "candidate_min (nats)",
                        "candidate_median (nats)"],
                       zip(steps, costs, costs, medians))
            sched_path = out / f"schedule_{label}_d{d:02d}.txt"
            with open(sched_path, "w") as fh:
                for theta in thetas:
                    fh.write(" ".join(repr(float(v)) for v in theta) + "\n")
            files += [trace_path, sched_path]
            finals.append(costs[-1])
            first10.append(float(np.mean(costs[:10])))
            last10.append(float(np.mean(costs[-10:])))
        phase_summaries.append({
            "W": W, "F": F, "label": label,
            "datasets": config.datasets,
            "steps": config.m_layers,
            "final_costs": [float(c) for c in finals],
            "mean_final_cost": float(np.mean(finals)),
            "std_final_cost": (float(np.std(finals, ddof=1))
                               if len(finals) > 1 else 0.0),
            "mean_first10_cost": float(np.mean(first10)),
            "mean_last10_cost": float(np.mean(last10)),
        })
    seeds = {}
    for pi, d in units:
        label = _phase_label(*phases[pi])
        seeds[f"{label}/d{d:02d}/data"] = stream_key_hex(
            config.master_seed, pi, d, 0)
        seeds[f"{label}/d{d:02d}/train"] = stream_key_hex(
            config.master_seed, pi, d, 1)
    summary = {"phases": phase_summaries,
               "d_candidates": config.d_candidates,
               "dataset_path": config.dataset_path}
    return summary, files, seeds


# -------------------------------------------------------------------- w-sweep

def _unit_wsweep(config: ExperimentConfig, unit: tuple[int]):
    wi, = unit
    F = config.f_values[0]
    params_base = _params(config, config.w_values[wi], F)
    rng = derive_rng(config.master_seed, wi)
    training = TrainingConfig(
        m_max=config.m_layers, d_candidates=config.d_candidates,
        kld_reverse=config.kld_reverse, epsilon=config.epsilon,
        shot_count=config.shots)
    rows = sweep_disorder(params_base, np.array([config.w_values[wi]]),
                          config.datasets, training, rng,
                          prop_config=_prop(config), samples=config.samples,
                          kT0=config.kT0)
    row = rows[0]
    return row.W, row.mean_final_cost, row.std_final_cost, row.mean_ratio


def run_w_sweep(config: ExperimentConfig, out: Path, mapper):
    units = [(wi,) for wi in range(len(config.w_values))]
    results = mapper(partial(_unit_wsweep, config), units)
    F = config.f_values[0]
    path = out / f"w_sweep_F{F:g}.csv"
    _write_csv(path,
               ["W (units of J)", "mean_final_cost (nats)",
                "std_final_cost (nats)", "mean_ratio (dimensionless)"],
               results)
    seeds = {f"W{config.w_values[wi]:g}":
             stream_key_hex(config.master_seed, wi)
             for (wi,) in units}
    summary = {
        "F": F,
        "steps": config.m_layers,
        "d_candidates": config.d_candidates,
        "datasets": config.datasets,
        "rows": [{"W": r[0], "mean_final_cost": r[1],
                  "std_final_cost": r[2], "mean_ratio": r[3]}
                 for r in results],
    }
    return summary, [path], seeds


PIPELINES = {
    "level-stats": run_level_stats,
    "cue-check": run_cue_check,
    "supremacy-curve": run_supremacy_curve,
    "memory": run_memory,
    "make-dataset": run_make_dataset,
    "train": run_train,
    "w-sweep": run_w_sweep,
}
