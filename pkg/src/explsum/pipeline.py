"""End-to-end run configuration and the normalize/smooth/precluster/engine
pipeline shared by the CLI, the benchmark harness and the tests."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

from .cost import Clustering, marginal_loss
from .engine import EngineConfig, SummarizeResult, summarize
from .errors import ConfigError
from .lsh import LshConfig
from .matrix import ExplanationMatrix, smooth
from .spectral import SpectralConfig, precluster
from .summary import SummaryArtifact, build_summary


@dataclass(frozen=True)
class RunConfig:
    beta_r: float = 0.05
    beta_c: float = 0.05
    seed: int = 0
    smooth: bool = True
    knee_sensitivity: float = 1.0
    precluster: bool = True
    precluster_k_rows: int | None = None
    precluster_k_cols: int | None = None
    candidate_mode: str = "exhaustive"
    k_neighbors: int = 10
    lsh_tables: int = 8
    lsh_hashes: int = 4
    lsh_width: float | None = None
    loss_mode: str = "marginal"
    max_iterations: int | None = None
    trace: bool = False

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            beta_r=self.beta_r,
            beta_c=self.beta_c,
            seed=self.seed,
            candidate_mode=self.candidate_mode,
            k_neighbors=self.k_neighbors,
            max_iterations=self.max_iterations,
            loss_mode=self.loss_mode,
            lsh=LshConfig(
                n_tables=self.lsh_tables,
                hashes_per_table=self.lsh_hashes,
                bucket_width=self.lsh_width,
                seed=self.seed,
            ),
        )

    def spectral_config(self) -> SpectralConfig:
        return SpectralConfig(
            k_rows=self.precluster_k_rows,
            k_cols=self.precluster_k_cols,
            seed=self.seed,
        )

    def validate(self) -> None:
        self.engine_config().validate()
        self.spectral_config().validate()
        if self.knee_sensitivity <= 0:
            raise ConfigError("knee sensitivity must be positive")

    def document(self) -> dict:
        """Canonical echo for manifests and artifact metadata."""
        return {
            "beta_r": self.beta_r,
            "beta_c": self.beta_c,
            "seed": self.seed,
            "smooth": self.smooth,
            "knee_sensitivity": self.knee_sensitivity,
            "precluster": self.precluster,
            "precluster_k_rows": self.precluster_k_rows,
            "precluster_k_cols": self.precluster_k_cols,
            "candidate_mode": self.candidate_mode,
            "k_neighbors": self.k_neighbors,
            "lsh_tables": self.lsh_tables,
            "lsh_hashes": self.lsh_hashes,
            "lsh_width": self.lsh_width,
            "loss_mode": self.loss_mode,
            "max_iterations": self.max_iterations,
        }


@dataclass(frozen=True)
class PipelineRun:
    artifact: SummaryArtifact
    result: SummarizeResult
    matrix: ExplanationMatrix  # the matrix the engine consumed
    initial: Clustering | None
    stage_seconds: dict[str, float]


def run_pipeline(matrix: ExplanationMatrix, config: RunConfig) -> PipelineRun:
    """smooth -> precluster -> engine -> artifact, with stage timings.

    ``matrix`` must already be normalized (loading normalizes).
    """
    config.validate()
    stages: dict[str, float] = {}
    work = matrix
    if config.smooth:
        t0 = time.perf_counter()
        work = smooth(work, config.knee_sensitivity)
        stages["smooth"] = time.perf_counter() - t0
    initial: Clustering | None = None
    if config.precluster:
        t0 = time.perf_counter()
        initial = precluster(work, config.spectral_config())
        stages["precluster"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    result = summarize(
        work, config.engine_config(), initial=initial, with_trace=config.trace
    )
    stages["engine"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    artifact = build_summary(
        work,
        result.clustering,
        result.cost,
        config=config.document(),
        seed=config.seed,
    )
    stages["artifact"] = time.perf_counter() - t0
    return PipelineRun(
        artifact=artifact,
        result=result,
        matrix=work,
        initial=initial,
        stage_seconds=stages,
    )


def build_manifest(
    run: PipelineRun,
    config: RunConfig,
    input_path: str,
    output_path: str,
    normalize_seconds: float,
) -> dict:
    stages = {"normalize": normalize_seconds, **run.stage_seconds}
    manifest = {
        "input": input_path,
        "output": output_path,
        "config": config.document(),
        "seed": config.seed,
        "stages": stages,
        "evaluations": run.result.evaluations,
        "accepted_merges": run.result.accepted_merges,
        "iterations": run.result.iterations,
        "cost": {
            "model": run.result.cost.model_cost,
            "loss": run.result.cost.loss,
            "total": run.result.cost.total,
        },
        "clusters": {
            "rows": len(run.result.clustering.row_clusters),
            "cols": len(run.result.clustering.col_clusters),
        },
    }
    if run.result.trace is not None:
        manifest["trace"] = [
            {
                "step": ev.step,
                "side": ev.side,
                "popped": ev.popped,
                "best": ev.best,
                "delta": ev.delta,
                "accepted": ev.accepted,
                "candidates": ev.n_candidates,
            }
            for ev in run.result.trace
        ]
    return manifest


BENCH_LADDER = (
    ("baseline", "baseline", False, False),
    ("marginal", "marginal", False, False),
    ("marginal+smooth", "marginal", True, False),
    ("marginal+smooth+precluster", "marginal", True, True),
)


def bench_variants(base: RunConfig):
    """The ablation ladder crossed with both candidate modes (8 variants)."""
    for name, loss_mode, use_smooth, use_precluster in BENCH_LADDER:
        for mode in ("exhaustive", "lsh"):
            cfg = replace(
                base,
                loss_mode=loss_mode,
                smooth=use_smooth,
                precluster=use_precluster,
                candidate_mode=mode,
            )
            yield f"{name}/{mode}", cfg


def evaluate_common_loss(matrix: ExplanationMatrix, clustering) -> float:
    """The comparison metric across bench variants: the marginalized loss of
    the final clustering on the shared normalized (unsmoothed) matrix."""
    return marginal_loss(matrix, clustering, "marginal").loss
