"""Run orchestration: dispatch, worker pool, manifest emission.

A run is (validated config) -> (output files + summary.json + manifest.json)
in the configured output directory.  Realization-level work units are mapped
over a process pool when workers > 1; results are merged in unit order, so
outputs are byte-identical for any worker count.  The manifest records the
config snapshot, code version, per-unit seed stream keys, and a sha256
checksum of every output file; re-running from the manifest alone reproduces
all checksums.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import multiprocessing
import time
from dataclasses import dataclass
from pathlib import Path

from .. import __version__
from .config import ExperimentConfig
from .pipelines import PIPELINES, SCHEMA_VERSION

__all__ = ["RunManifest", "run_experiment", "rerun_from_manifest"]


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record of one run."""

    kind: str
    status: str
    schema_version: str
    code_version: str
    config: dict
    master_seed: int
    seed_streams: dict
    outputs: dict
    created: str
    duration_seconds: float
    error: str | None = None


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _make_mapper(workers: int):
    """Order-preserving map over work units, inline or via a process pool."""
    if workers <= 1:
        return lambda fn, units: [fn(unit) for unit in units]

    def pooled(fn, units):
        with multiprocessing.Pool(workers) as pool:
            return pool.map(fn, units, chunksize=1)

    return pooled


def _checksum_tree(out: Path) -> dict:
    skip = {"manifest.json"}
    found = {}
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name not in skip:
            found[str(path.relative_to(out))] = _sha256(path)
    return found


def _write_manifest(out: Path, manifest: RunManifest) -> Path:
    path = out / "manifest.json"
    path.write_text(json.dumps(dataclasses.asdict(manifest), indent=2,
                               sort_keys=True) + "\n")
    return path


def run_experiment(config: ExperimentConfig) -> RunManifest:
    """Dispatch a validated config to its pipeline and write the manifest.

    On pipeline failure a partial-results manifest (status "failed",
    checksums of whatever was written) is still emitted before the error is
    re-raised.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    mapper = _make_mapper(config.workers)
    snapshot = dataclasses.asdict(config)
    started = time.time()
    created = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started))
    try:
        summary, files, seeds = PIPELINES[config.kind](config, out, mapper)
    except Exception as exc:
        manifest = RunManifest(
            kind=config.kind, status="failed",
            schema_version=SCHEMA_VERSION, code_version=__version__,
            config=snapshot, master_seed=config.master_seed,
            seed_streams={}, outputs=_checksum_tree(out), created=created,
            duration_seconds=time.time() - started, error=str(exc))
        _write_manifest(out, manifest)
        raise

    summary_path = out / "summary.json"
    summary_doc = {"kind": config.kind, "schema_version": SCHEMA_VERSION,
                   **summary}
    summary_path.write_text(json.dumps(summary_doc, indent=2,
                                       sort_keys=True) + "\n")
    files = list(files) + [summary_path]
    if config.emit_plots:
        from .plots import emit_plots_for
        files += emit_plots_for(out, files)
    outputs = {str(p.relative_to(out)): _sha256(p) for p in sorted(files)}
    manifest = RunManifest(
        kind=config.kind, status="complete",
        schema_version=SCHEMA_VERSION, code_version=__version__,
        config=snapshot, master_seed=config.master_seed,
        seed_streams=seeds, outputs=outputs, created=created,
        duration_seconds=time.time() - started)
    _write_manifest(out, manifest)
    return manifest


def config_from_snapshot(snapshot: dict) -> ExperimentConfig:
    """Rebuild a validated config from a manifest's config record."""
    values = dict(snapshot)
    for key in ("w_values", "f_values"):
        if key in values:
            values[key] = tuple(values[key])
    return ExperimentConfig(**values)


def rerun_from_manifest(manifest_path: str | Path,
                        output_dir: str | Path | None = None) -> RunManifest:
    """Re-execute the run a manifest describes, optionally elsewhere.

    The rerun's outputs must reproduce the recorded checksums; callers can
    compare the returned manifest's outputs table against the original.
    """
    doc = json.loads(Path(manifest_path).read_text())
    config = config_from_snapshot(doc["config"])
    if output_dir is not None:
        config = dataclasses.replace(config, output_dir=str(output_dir))
    return run_experiment(config)
