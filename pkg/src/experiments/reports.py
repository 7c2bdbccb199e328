"""CSV and raster reports of the experiment harness."""

import csv
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

from ..covariance import LocalParams
from ..field import write_pgm, write_raster_csv
from .models import METHOD_LABELS, AccuracyReport, ReplicateFit, StudyReport

PathLike = Union[str, Path]

MSE_NOTE = (
    "# MSE: mean over observation locations of (estimate - truth)^2 averaged over"
    " replicates; SE: standard error of the per-replicate MSEs"
)
TABLE1_HEADER = [
    "method",
    "K",
    "MSE_sigma",
    "SE_sigma",
    "MSE_lambda",
    "SE_lambda",
    "MSE_nu",
    "SE_nu",
]
TABLE2_HEADER = ["method", "K", "subregion", "sigma", "lambda", "nu"]


def fmt(value: float) -> str:
    return format(float(value), ".10g")


def _write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence], note: str = ""):
    with open(path, "w", newline="", encoding="utf-8") as f:
        if note:
            f.write(note + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_table1(report: StudyReport, path: PathLike) -> None:
    rows = []
    for s in report.summaries:
        cells = [s.label, s.k]
        for mse, se in zip(s.mse, s.se):
            cells += [fmt(mse), fmt(se)]
        rows.append(cells)
    _write_rows(path, TABLE1_HEADER, rows, note=MSE_NOTE)


def write_table2(report: StudyReport, truth: LocalParams, path: PathLike) -> None:
    truth_row = [fmt(truth.sigma), fmt(truth.lambda1), fmt(truth.nu)]
    rows: List[List] = [["True parameters", "", ""] + truth_row]
    for s in report.summaries:
        for k, means in enumerate(s.subregion_means, start=1):
            rows.append([s.label, s.k, k] + [fmt(v) for v in means])
        overall = np.mean(np.array(s.subregion_means), axis=0)
        rows.append([s.label, s.k, "mean"] + [fmt(v) for v in overall])
    _write_rows(path, TABLE2_HEADER, rows)


def write_fits(fits: Sequence[ReplicateFit], path: PathLike) -> None:
    header = [
        "replicate", "method", "K", "loglik", "loglik_truth", "aic", "n_evals",
        "partition_score", "regime_agreement", "mse_sigma", "mse_lambda", "mse_nu",
    ]
    rows = [
        [
            f.replicate,
            METHOD_LABELS[f.method],
            f.k,
            fmt(f.loglik),
            fmt(f.loglik_truth),
            fmt(f.aic),
            f.n_evals,
            "" if f.partition_score is None else fmt(f.partition_score),
            fmt(f.regime_agreement),
        ]
        + [fmt(v) for v in f.mse]
        for f in fits
    ]
    _write_rows(path, header, rows)


def write_accuracy(report: AccuracyReport, path: PathLike) -> None:
    rows = [
        ["stationary", report.n_stationary, fmt(100 * report.stationary_accuracy)],
        ["nonstationary", report.n_nonstationary, fmt(100 * report.nonstationary_accuracy)],
        ["overall", report.n_stationary + report.n_nonstationary, fmt(100 * report.accuracy)],
    ]
    _write_rows(path, ["class", "n", "accuracy_percent"], rows)


def write_histogram(report: AccuracyReport, path: PathLike) -> None:
    rows = [[fmt(b.lo), fmt(b.hi), b.stationary, b.nonstationary] for b in report.histogram]
    _write_rows(path, ["bin_lo", "bin_hi", "stationary", "nonstationary"], rows)


def map_view(raster: np.ndarray) -> np.ndarray:
    """[i, j] = (x index, y index) to image rows running from y = 1 down to y = 0"""
    return np.flipud(np.asarray(raster).T)


def write_heatmap(raster: np.ndarray, out_dir: PathLike, name: str) -> None:
    """
    `name.csv` raster plus a `name.pgm` preview of a grid indexed [x, y].
    Both files are written in map view: the first row is the top edge (y = 1).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    image = map_view(raster)
    write_raster_csv(image, out / f"{name}.csv")
    write_pgm(image, out / f"{name}.pgm")
