"""
Replicated studies: classifier accuracy on a held-out corpus, and parameter
recovery for the three estimation settings under ConvNet and user-defined
partitions.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from ..config import settings
from ..convnet import ConvNetModel, evaluate, train
from ..convnet.models import Label
from ..convnet.serialization import save_model
from ..covariance import smooth_param_arrays
from ..datagen import SettingSpec, gen_setting, setting_regimes, setting_truth
from ..datagen.corpus import build_corpus, load_corpus, split_corpus
from ..errors import ConfigError
from ..field import SpatialField, Stream, derive_seed, regular_grid_locations
from ..gp import log_likelihood
from ..mle import FitConfig, FitResult, fit
from ..partition import Partition, PartitionMethod, label_agreement, partition_field
from . import reports
from .config import AccuracyConfig, ExperimentConfig, ExperimentName
from .models import (
    METHOD_LABELS,
    AccuracyReport,
    HistogramBin,
    MethodSummary,
    ReplicateFit,
    StudyReport,
)

__all__ = [
    "AccuracyConfig",
    "ExperimentConfig",
    "ExperimentName",
    "StudyReport",
    "AccuracyReport",
    "fit_partitioned",
    "run_accuracy",
    "run_setting",
    "run_experiment",
]

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
PARAM_COLUMNS = (0, 1, 4)  # σ, λ₁, ν in the smoothed parameter table
PARAM_LABELS = ("sigma", "lambda", "nu")


def fit_partitioned(
    field: SpatialField,
    method: PartitionMethod,
    k: int,
    model: Optional[ConvNetModel],
    fit_cfg: FitConfig,
    iters: int,
    seed: int,
) -> Tuple[Partition, FitResult]:
    """Partition the field, then fit the nonstationary model at the partition's anchors"""
    partition = partition_field(field, method, k, model, iters=iters, seed=seed)
    return partition, fit(field, partition.anchors, cfg=fit_cfg, assignment=partition.labels)


def _surfaces(result: FitResult, coords: np.ndarray) -> np.ndarray:
    return smooth_param_arrays(result.param_field(), coords)[:, PARAM_COLUMNS]


def _summarize(method: PartitionMethod, k: int, fits: List[ReplicateFit]) -> MethodSummary:
    mse = np.array([f.mse for f in fits])
    r = mse.shape[0]
    se = mse.std(axis=0, ddof=1) / np.sqrt(r) if r > 1 else np.full(3, np.nan)
    means = np.mean(np.array([f.anchor_params for f in fits]), axis=0)
    agreement = float(np.mean([f.regime_agreement for f in fits]))
    return MethodSummary(
        method=method,
        k=k,
        replicates=r,
        mse=tuple(mse.mean(axis=0)),
        se=tuple(se),
        subregion_means=[tuple(row) for row in means],
        regime_agreement=agreement,
    )


def run_setting(
    setting: int,
    cfg: ExperimentConfig,
    model: Optional[ConvNetModel],
    out_dir: Optional[PathLike] = None,
) -> StudyReport:
    """
    Replicated fits of one setting. Every (method, K) plan sees the same fields;
    MSE is taken against the true smoothed surfaces at the observation locations.
    """
    plans = cfg.plans_for(setting)
    if model is None and any(method == "convnet" for method, _ in plans):
        raise ConfigError(f"setting{setting} needs a trained model for ConvNet partitions")
    spec = SettingSpec.standard(setting, n=cfg.n, bandwidth=cfg.bandwidth)
    fit_cfg = cfg.fit.model_copy(update={"bandwidth": cfg.bandwidth})
    grid = regular_grid_locations(cfg.heatmap_side**2)
    heat: Dict[Tuple[str, int], np.ndarray] = {
        (m, k): np.zeros((grid.shape[0], 3)) for m, k in plans
    }

    fits: List[ReplicateFit] = []
    for rep in tqdm(
        range(cfg.replicates), desc=f"setting{setting}", disable=not settings.show_progress
    ):
        field = gen_setting(spec, derive_seed(cfg.seed, Stream.FIELD, rep))
        truth = setting_truth(spec, field.coords)
        regimes = setting_regimes(spec, field.coords)
        loglik_truth = log_likelihood(field, spec.param_field()).loglik
        for method, k in plans:
            partition, result = fit_partitioned(
                field,
                method,
                k,
                model,
                fit_cfg.model_copy(update={"seed": derive_seed(cfg.seed, Stream.MULTISTART, rep)}),
                cfg.iters,
                derive_seed(cfg.seed, Stream.PARTITION, rep),
            )
            est = _surfaces(result, field.coords)
            heat[(method, k)] += _surfaces(result, grid)
            fits.append(
                ReplicateFit(
                    replicate=rep,
                    method=method,
                    k=k,
                    loglik=result.loglik,
                    loglik_truth=loglik_truth,
                    aic=result.aic,
                    n_evals=result.n_evals,
                    partition_score=partition.score,
                    regime_agreement=label_agreement(partition.labels, regimes),
                    mse=tuple(np.mean((est - truth) ** 2, axis=0)),
                    anchor_params=[(p.sigma, p.lambda1, p.nu) for p in result.anchor_params],
                )
            )
            logger.info(
                "setting%d replicate %d %s K=%d: loglik %.4f (truth %.4f)",
                setting,
                rep,
                METHOD_LABELS[method],
                k,
                result.loglik,
                loglik_truth,
            )

    report = StudyReport(
        setting=setting,
        n=cfg.n,
        replicates=cfg.replicates,
        summaries=[
            _summarize(m, k, [f for f in fits if f.method == m and f.k == k]) for m, k in plans
        ],
        fits=fits,
    )
    if out_dir is not None:
        _write_study(report, spec, grid, heat, cfg, Path(out_dir))
    return report


def _write_study(
    report: StudyReport,
    spec: SettingSpec,
    grid: np.ndarray,
    heat: Dict[Tuple[str, int], np.ndarray],
    cfg: ExperimentConfig,
    out: Path,
) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if spec.setting == 3:
        reports.write_table2(report, spec.params[0], out / "table2.csv")
    else:
        reports.write_table1(report, out / "table1.csv")
    reports.write_fits(report.fits, out / "fits.csv")

    side = cfg.heatmap_side
    truth = setting_truth(spec, grid)
    for col, name in enumerate(PARAM_LABELS):
        reports.write_heatmap(truth[:, col].reshape(side, side), out / "heatmaps", f"truth_{name}")
    for (method, k), total in heat.items():
        mean = total / cfg.replicates
        for col, name in enumerate(PARAM_LABELS):
            reports.write_heatmap(
                mean[:, col].reshape(side, side), out / "heatmaps", f"{method}_k{k}_{name}"
            )


def _histogram(indices: np.ndarray, labels: np.ndarray, bins: int) -> List[HistogramBin]:
    edges = np.linspace(0.0, 1.0, bins + 1)
    stat, _ = np.histogram(indices[labels == Label.STATIONARY], bins=edges)
    nonstat, _ = np.histogram(indices[labels == Label.NONSTATIONARY], bins=edges)
    return [
        HistogramBin(
            lo=edges[i],
            hi=edges[i + 1],
            stationary=int(stat[i]),
            nonstationary=int(nonstat[i]),
        )
        for i in range(bins)
    ]


def run_accuracy(
    cfg: ExperimentConfig,
    out_dir: PathLike,
    corpus: Optional[PathLike] = None,
    model: Optional[ConvNetModel] = None,
) -> AccuracyReport:
    """
    Build (or reuse) a labeled corpus, train on a per-class split unless a model
    is given, and score the held-out part.
    """
    acc: AccuracyConfig = cfg.accuracy
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if corpus is None:
        corpus = out / "corpus"
        build_corpus(corpus, acc.n_stationary, acc.n_nonstationary, n=cfg.n, seed=cfg.seed)
    samples = load_corpus(corpus, acc.g)
    train_set, test_set = split_corpus(samples, acc.test_fraction, cfg.seed)
    if model is None:
        model = train(train_set, acc.train)
        save_model(model, out / "model.bin")
    if not test_set:
        raise ConfigError("test split is empty; raise test_fraction or the corpus size")

    evaluation = evaluate(model, test_set)
    indices = np.array(evaluation.indices)
    labels = np.array([int(v) for v in evaluation.labels])
    report = AccuracyReport(
        accuracy=evaluation.accuracy,
        stationary_accuracy=evaluation.stationary_accuracy,
        nonstationary_accuracy=evaluation.nonstationary_accuracy,
        n_train=len(train_set),
        n_stationary=evaluation.n_stationary,
        n_nonstationary=evaluation.n_nonstationary,
        histogram=_histogram(indices, labels, acc.histogram_bins),
    )
    reports.write_accuracy(report, out / "accuracy.csv")
    reports.write_histogram(report, out / "index_histogram.csv")
    logger.info(
        "held-out accuracy %.1f%% (stationary %.1f%%, nonstationary %.1f%%)",
        100 * report.accuracy,
        100 * report.stationary_accuracy,
        100 * report.nonstationary_accuracy,
    )
    return report


def run_experiment(
    name: ExperimentName,
    cfg: ExperimentConfig,
    out_dir: PathLike,
    model: Optional[ConvNetModel] = None,
    corpus: Optional[PathLike] = None,
) -> Union[AccuracyReport, StudyReport]:
    if name == "accuracy":
        return run_accuracy(cfg, out_dir, corpus=corpus, model=model)
    return run_setting(int(name[len("setting") :]), cfg, model, out_dir)
