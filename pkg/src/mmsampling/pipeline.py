"""End-to-end runs: sample, Minimax among samples, embed, cluster, extend labels."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import traceback
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .clustering import ClusterLabels, extend_labels, gmm_fit_predict, kmeans_fit_predict
from .data import DataMatrix, generate_synthetic, load_csv, load_table
from .embedding import DEFAULT_MAX_DIM, embed_minimax, write_spectrum_csv
from .evaluation import EvalScores, evaluate
from .memory import MemoryTracker
from .minimax import DENSE_CAP, CapExceededError, minimax_from_mst, prim_incremental
from .sampling import (
    SAMPLERS,
    SampleSet,
    SubsetAssignment,
    mm_sample,
    sample_minimax,
    save_samples,
)

logger = logging.getLogger(__name__)

SAMPLER_CHOICES = ("mm", "kmeans", "dpp", "random", "none")
CLUSTERERS = ("gmm", "kmeans")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


@dataclass
class RunConfig:
    dataset: str
    sampler: str = "mm"
    k: int = 2
    seed: int = 0
    num_samples_override: int | None = None
    standardize: bool = False
    max_dim: int = DEFAULT_MAX_DIM
    restarts: int = 10
    output: str | None = None
    label_col: str | None = None
    clusterer: str = "gmm"
    dense_cap: int = DENSE_CAP

    def __post_init__(self):
        if self.sampler not in SAMPLER_CHOICES:
            raise ValueError(f"unknown sampler {self.sampler!r}; choose from {SAMPLER_CHOICES}")
        if self.clusterer not in CLUSTERERS:
            raise ValueError(f"unknown clusterer {self.clusterer!r}")
        if self.k < 1:
            raise ValueError("k must be positive")


@dataclass
class RunResult:
    config: RunConfig
    scores: EvalScores | None
    memory: dict
    d_prime: int
    n_objects: int
    n_samples: int
    labels: ClusterLabels
    truth: np.ndarray | None
    samples: SampleSet
    spectrum: np.ndarray = field(repr=False, default=None)
    data_sha256: str | None = None

    def record(self) -> dict:
        rec = {
            "dataset": self.config.dataset,
            "sampler": self.config.sampler,
            "seed": self.config.seed,
            "d_prime": self.d_prime,
            "n_objects": self.n_objects,
            "n_samples": self.n_samples,
            "m1": None if self.scores is None else self.scores.m1_rand,
            "m2": None if self.scores is None else self.scores.m2_mutual_info,
            "m3": None if self.scores is None else self.scores.m3_v_measure,
            "peak_aux_entries": self.memory["peak_aux_entries"],
            "memory": self.memory,
            "config": {k: v for k, v in asdict(self.config).items() if k != "output"},
        }
        if self.scores is not None:
            rec["percent"] = self.scores.as_percent()
        if self.data_sha256 is not None:
            rec["data_sha256"] = self.data_sha256
        return rec


def load_dataset(spec: str, label_col: str | None = None) -> tuple[DataMatrix, str | None]:
    """``gen:<name>:<n>[:<seed>]`` builds a synthetic set; anything else is a path.

    ``.csv`` files are read with a header row (``label_col`` names the
    labels); other files are headerless tables whose last column holds the
    labels, the layout of the original benchmark downloads.
    Returns the data and the file's SHA-256 (None for generated data).
    """
    if spec.startswith("gen:"):
        parts = spec.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"generator spec must be gen:<name>:<n>[:<seed>], got {spec!r}")
        seed = int(parts[3]) if len(parts) == 4 else 0
        return generate_synthetic(parts[1], int(parts[2]), seed), None
    path = Path(spec)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    if path.suffix.lower() == ".csv":
        return load_csv(path, label_col), digest
    return load_table(path), digest


def stage_seeds(seed: int) -> dict[str, int]:
    names = ("prim", "sampler", "cluster")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {n: int(c.generate_state(1)[0]) for n, c in zip(names, children)}


def _cluster(coords, config: RunConfig, seed: int) -> ClusterLabels:
    k = min(config.k, coords.shape[0])
    if config.clusterer == "kmeans":
        return kmeans_fit_predict(coords, k, seed=seed)
    return gmm_fit_predict(coords, k, restarts=config.restarts, seed=seed)


def run_pipeline(config: RunConfig, data: DataMatrix | None = None) -> RunResult:
    digest = None
    if data is None:
        with stage("load"):
            data, digest = load_dataset(config.dataset, config.label_col)
    if config.standardize:
        data = data.standardized()
    n = data.n_objects
    seeds = stage_seeds(config.seed)
    linear = config.sampler in ("mm", "kmeans", "random")
    tracker = MemoryTracker(n, forbid_quadratic=linear)

    if config.sampler == "none":
        if n > config.dense_cap:
            raise PipelineError("minimax", CapExceededError(f"N={n} exceeds the dense cap {config.dense_cap}"))
        with stage("mst"):
            mst = prim_incremental(data, seed=seeds["prim"], tracker=tracker)
        with stage("minimax"):
            tracker.alloc("none.M", n * n)
            m = minimax_from_mst(mst, dense_cap=config.dense_cap)
            tracker.free("prim.T")
        samples = SampleSet("none", SubsetAssignment.from_ids(np.arange(n)))
    elif config.sampler == "mm":
        with stage("mst"):
            mst = prim_incremental(data, seed=seeds["prim"], tracker=tracker)
        with stage("sampling"):
            samples, m = mm_sample(mst, num_samples=config.num_samples_override, tracker=tracker, inplace=True)
            tracker.free("prim.T")
            del mst
    else:
        with stage("sampling"):
            if config.sampler == "dpp":
                tracker.alloc("dpp.kernel_offline", n * n)
            samples = SAMPLERS[config.sampler](data, seed=seeds["sampler"], num_samples=config.num_samples_override)
            tracker.free("dpp.kernel_offline")
            tracker.alloc("sampling.subset_id", n)
            if samples.representatives is not None:
                tracker.alloc("sampling.representatives", samples.representatives.size)
        with stage("sample_minimax"):
            s = samples.s
            tracker.alloc("sample.prim", 6 * s)
            m = sample_minimax(samples, data, seed=seeds["prim"])
            tracker.free("sample.prim")
            tracker.alloc("sample.M_s", s * s)

    s = m.shape[0]
    with stage("embedding"):
        tracker.alloc("embed.K", s * s)
        tracker.alloc("embed.V", s * s + s)
        emb = embed_minimax(m, max_dim=config.max_dim)
        tracker.free("embed.K", "mm.M_s", "sample.M_s", "none.M")
        tracker.alloc("embed.E", emb.coords.size)
    with stage("clustering"):
        tracker.alloc("cluster.work", 3 * s * config.k + 2 * config.k * emb.d_prime)
        sample_labels = _cluster(emb.coords, config, seeds["cluster"])
        tracker.free("cluster.work", "embed.V")
    with stage("extend"):
        tracker.alloc("labels", n)
        labels = extend_labels(sample_labels, samples)

    scores = None
    if data.labels is not None:
        with stage("evaluate"):
            scores = evaluate(labels, data.labels)

    result = RunResult(
        config=config,
        scores=scores,
        memory=tracker.report(),
        d_prime=emb.d_prime,
        n_objects=n,
        n_samples=s,
        labels=labels,
        truth=data.labels,
        samples=samples,
        spectrum=emb.spectrum,
        data_sha256=digest,
    )
    if config.output:
        with stage("write"):
            write_outputs(result, emb, Path(config.output))
    return result


def write_outputs(result: RunResult, emb, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "result.json").write_text(json.dumps(result.record(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with (out / "labels.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        truth = result.truth
        w.writerow(["object", "predicted"] + (["true"] if truth is not None else []))
        for i, lab in enumerate(result.labels.labels.tolist()):
            w.writerow([i, lab] + ([int(truth[i])] if truth is not None else []))
    write_spectrum_csv(emb, out / "spectrum.csv")
    save_samples(result.samples, out / "samples.json")


SWEEP_FIELDS = ["dataset", "sampler", "seed", "status", "d_prime", "m1", "m2", "m3", "peak_aux_entries", "error"]


def _run_cell(config: RunConfig) -> dict:
    try:
        rec = run_pipeline(config).record()
        row = {k: rec.get(k) for k in SWEEP_FIELDS}
        row.update(status="ok", error="")
    except Exception as exc:
        logger.debug("sweep cell failed\n%s", traceback.format_exc())
        row = {k: None for k in SWEEP_FIELDS}
        row.update(dataset=config.dataset, sampler=config.sampler, seed=config.seed, status="error", error=str(exc))
    return row


def run_sweep(configs: list[RunConfig], output=None, jobs: int = 1) -> list[dict]:
    """Run every cell, keep going past failures, optionally write a CSV table."""
    if jobs > 1 and len(configs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, configs))
    else:
        rows = [_run_cell(c) for c in configs]
    if output is not None:
        with Path(output).open("w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=SWEEP_FIELDS)
            w.writeheader()
            for row in rows:
                w.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return rows


def sweep_configs(spec: dict | list) -> list[RunConfig]:
    """Expand a sweep description.

    Either a list of RunConfig dicts, or ``{"datasets": [...], "samplers":
    [...], "seed": int, "defaults": {...}}`` expanded as a grid; cells get
    distinct seeds derived from the master seed unless one is given.
    """
    if isinstance(spec, list):
        return [RunConfig(**c) for c in spec]
    cells = list(spec.get("runs", []))
    defaults = spec.get("defaults", {})
    for ds in spec.get("datasets", []):
        ds = ds if isinstance(ds, dict) else {"dataset": ds}
        for sampler in spec.get("samplers", []):
            cells.append({**defaults, **ds, "sampler": sampler})
    master = np.random.SeedSequence(spec.get("seed", 0)).spawn(len(cells))
    configs = []
    for cell, child in zip(cells, master):
        cell = dict(cell)
        cell.setdefault("seed", int(child.generate_state(1)[0]))
        cell.pop("output", None)
        configs.append(RunConfig(**cell))
    return configs


__all__ = [
    "RunConfig",
    "RunResult",
    "PipelineError",
    "run_pipeline",
    "run_sweep",
    "sweep_configs",
    "load_dataset",
]
