from __future__ import annotations

"""Experiment pipeline: config -> initial opinions, trust, media -> run -> analysis -> files."""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.analysis import (
    ClusterReport,
    HistogramDistance,
    OpinionHistogram,
    OpinionSummary,
    clusters_to_frame,
    clusters_to_json,
    detect_clusters,
    histogram,
    histogram_distance,
    histogram_to_frame,
    histogram_to_json,
    normalized_entropy,
    summary_metrics,
)
from src.config import (
    OPINION_STREAM,
    TRUST_STREAM,
    ClassicModelConfig,
    CsvTrust,
    ExperimentConfig,
    ExplicitOpinions,
    TwoCampsOpinions,
    UniformOpinions,
    derive_seed,
)
from src.dynamics_engine import (
    ClassicHkParams,
    ClassicModelSpec,
    ExtendedModelSpec,
    ModelSpec,
    RunSchedule,
    SimulationResult,
    run_simulation,
    trajectory_frame,
)
from src.media_signal import MediaCoupling, ZeroSignal, build_coupling
from src.model_core import ModelParams, OpinionState
from src.sentiment_ingest import (
    empirical_distribution,
    integrated_histogram,
    parse_records,
    quantize_opinions,
    write_grid_histogram_csv,
)
from src.trust_network import TrustGenSpec, generate_trust, read_trust_csv

__all__ = ["Comparison", "ExperimentReport", "initial_state", "build_model", "run_experiment"]


@dataclass
class Comparison:
    source: str
    distance: HistogramDistance
    simulated: OpinionHistogram
    empirical: OpinionHistogram
    clamped: int
    rejected_rows: int


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    result: SimulationResult
    summary: OpinionSummary
    clusters: ClusterReport
    histogram: OpinionHistogram
    flatness: float
    comparison: Optional[Comparison] = None
    written: list[Path] = field(default_factory=list)

    def render(self) -> str:
        """One-page human-readable summary."""

        model = self.config.model
        s = self.summary
        lines = [
            f"Model:      {model.kind} ({self.result.final_state.n_agents} agents)",
            f"Converged:  {'yes' if self.result.converged else 'no'} after {self.result.steps_taken} steps",
            f"Opinions:   mean={s.mean:.6g} variance={s.variance:.6g} min={s.min:.6g} max={s.max:.6g} spread={s.spread:.6g}",
            f"Clusters:   {len(self.clusters)} (gap threshold {self.clusters.gap_threshold:g})",
        ]
        for k, c in enumerate(self.clusters.clusters):
            lines.append(f"  #{k}: size={c.size} centroid={c.centroid:.6g} width={c.width:.3g}")
        lines.append(f"Flatness:   {self.flatness:.4f} (normalized entropy of the histogram)")
        if self.comparison is not None:
            cmp = self.comparison
            lines.append(
                f"Comparison: l1={cmp.distance.l1:.6g} emd={cmp.distance.emd:.6g} vs {cmp.source}"
            )
            lines.append(
                f"  clamped {cmp.clamped} of {self.result.final_state.n_agents} opinions into [-1, 1]; "
                f"{cmp.rejected_rows} sentiment rows rejected"
            )
        for path in self.written:
            lines.append(f"Wrote:      {path}")
        return "\n".join(lines)


def initial_state(config: ExperimentConfig) -> OpinionState:
    init = config.agents.initial_opinions
    if isinstance(init, ExplicitOpinions):
        return OpinionState(np.array(init.values))

    seed = init.seed if init.seed is not None else derive_seed(config.seed, OPINION_STREAM)
    rng = np.random.Generator(np.random.PCG64(seed))
    if isinstance(init, UniformOpinions):
        return OpinionState(rng.uniform(init.lo, init.hi, size=config.agents.count))
    if isinstance(init, TwoCampsOpinions):
        centers = np.concatenate([np.full(init.n1, init.center1), np.full(init.n2, init.center2)])
        offsets = rng.uniform(-init.jitter, init.jitter, size=centers.size)
        return OpinionState(centers + offsets)
    raise TypeError(f"Unknown initial opinion law: {type(init).__name__}")


def _resolve(base_dir: Path, path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else base_dir / p


def build_model(config: ExperimentConfig, base_dir: Path = Path(".")) -> ModelSpec:
    model = config.model
    if isinstance(model, ClassicModelConfig):
        return ClassicModelSpec(ClassicHkParams(epsilon=model.epsilon))

    n = config.agents.count
    params = ModelParams(alpha=model.alpha, beta=model.beta, b=model.b, dt=model.dt)

    if isinstance(config.trust, CsvTrust):
        trust = read_trust_csv(_resolve(base_dir, config.trust.path))
    else:
        gen = config.trust
        spec = TrustGenSpec(
            n_agents=n,
            topology=gen.topology,
            weight_law=gen.weight_law,
            factions=gen.factions,
            seed=gen.seed if gen.seed is not None else derive_seed(config.seed, TRUST_STREAM),
        )
        trust = generate_trust(spec)

    if config.media is None:
        coupling = MediaCoupling.zeros(n)
    else:
        coupling = build_coupling(config.media.coupling, n)
    return ExtendedModelSpec(params=params, trust=trust, coupling=coupling)


def _write_json(path: Path, payload: dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def _compare(config: ExperimentConfig, final: OpinionState, base_dir: Path) -> Comparison:
    source = _resolve(base_dir, config.outputs.compare_against)
    with open(source, encoding="utf-8", newline="") as fh:
        parsed = parse_records(fh)
    empirical = empirical_distribution(parsed.records)

    integrated, clamped = quantize_opinions(final.opinions)
    if clamped:
        logging.warning(f"[Experiment] Clamped {clamped} simulated opinions into [-1, 1] for comparison")
    simulated = integrated_histogram(integrated)
    return Comparison(
        source=str(source),
        distance=histogram_distance(simulated, empirical),
        simulated=simulated,
        empirical=empirical,
        clamped=clamped,
        rejected_rows=len(parsed.diagnostics),
    )


def run_experiment(
    config: ExperimentConfig,
    *,
    base_dir: Path = Path("."),
    default_workers: int = 1,
) -> ExperimentReport:
    """Run one experiment and write every requested output.

    Raises DivergenceError, ConfigurationError, FormatError or OSError; the CLI
    turns them into exit codes.
    """

    logging.info(f"[Experiment] Building {config.model.kind} model (seed={config.seed})")
    state0 = initial_state(config)
    model = build_model(config, base_dir)

    schedule = RunSchedule(
        max_steps=config.run.max_steps,
        tolerance=config.run.tolerance,
        record_every=config.run.record_every,
        media=config.media.signal if config.media is not None else ZeroSignal(),
        workers=config.run.workers or default_workers,
    )
    result = run_simulation(state0, model, schedule)
    final = result.final_state.opinions

    hist_cfg = config.outputs.histogram
    hist = histogram(final, hist_cfg.lo, hist_cfg.hi, hist_cfg.n_bins)
    clusters = detect_clusters(final, config.gap_threshold())
    report = ExperimentReport(
        config=config,
        result=result,
        summary=summary_metrics(final),
        clusters=clusters,
        histogram=hist,
        flatness=normalized_entropy(hist) if hist.counts.sum() else 0.0,
    )

    if config.outputs.compare_against is not None:
        report.comparison = _compare(config, result.final_state, base_dir)

    outputs = config.outputs
    dt = config.model.dt if not isinstance(config.model, ClassicModelConfig) else 1.0
    if outputs.trajectory_path:
        path = _resolve(base_dir, outputs.trajectory_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        trajectory_frame(result, dt).to_csv(path, index=False, lineterminator="\n")
        report.written.append(path)
    if outputs.histogram_path:
        path = _resolve(base_dir, outputs.histogram_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        histogram_to_frame(hist).to_csv(path, index=False, lineterminator="\n")
        report.written.append(path)
    if outputs.clusters_path:
        path = _resolve(base_dir, outputs.clusters_path)
        _write_json(path, clusters_to_json(clusters))
        report.written.append(path)
    if outputs.clusters_csv_path:
        path = _resolve(base_dir, outputs.clusters_csv_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        clusters_to_frame(clusters).to_csv(path, index=False, lineterminator="\n")
        report.written.append(path)
    if outputs.comparison_histogram_path and report.comparison is not None:
        path = _resolve(base_dir, outputs.comparison_histogram_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_grid_histogram_csv(report.comparison.simulated, path)
        report.written.append(path)
    if outputs.summary_path:
        path = _resolve(base_dir, outputs.summary_path)
        _write_json(path, _summary_payload(report))
        report.written.append(path)

    logging.info(
        f"[Experiment] Done: converged={result.converged}, steps={result.steps_taken}, "
        f"clusters={len(clusters)}"
    )
    return report


def _summary_payload(report: ExperimentReport) -> dict[str, Any]:
    s = report.summary
    payload: dict[str, Any] = {
        "converged": report.result.converged,
        "steps_taken": report.result.steps_taken,
        "metrics": {
            "mean": s.mean,
            "variance": s.variance,
            "min": s.min,
            "max": s.max,
            "spread": s.spread,
        },
        "cluster_count": len(report.clusters),
        "flatness": report.flatness,
        "histogram": histogram_to_json(report.histogram),
    }
    if report.comparison is not None:
        payload["comparison"] = {
            "l1": report.comparison.distance.l1,
            "emd": report.comparison.distance.emd,
            "clamped": report.comparison.clamped,
            "rejected_rows": report.comparison.rejected_rows,
        }
    return payload
