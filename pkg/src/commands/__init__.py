import csv
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Type, TypeVar

import yaml
from pydantic import BaseModel, ValidationError

from ..config import settings
from ..convnet import classify, evaluate, train
from ..convnet.models import ConvNetModel
from ..convnet.serialization import load_model, save_model
from ..covariance import smooth_param_arrays
from ..datagen import SettingSpec, gen_setting
from ..datagen.corpus import build_corpus, load_corpus, split_corpus
from ..errors import ConfigError
from ..experiments import AccuracyReport, fit_partitioned, run_experiment
from ..experiments.reports import fmt, write_heatmap
from ..field import read_field_csv, regular_grid_locations, write_field_csv
from ..partition import partition_field
from .config import (
    ClassifyConfig,
    CorpusConfig,
    ExperimentCommandConfig,
    FitCommandConfig,
    PartitionConfig,
    RunConfig,
    SimulateConfig,
    TrainCommandConfig,
)

__all__ = [
    "COMMANDS",
    "RESOLVED_CONFIG",
    "load_run_config",
    "write_resolved_config",
    "cmd_simulate",
    "cmd_corpus",
    "cmd_train",
    "cmd_classify",
    "cmd_partition",
    "cmd_fit",
    "cmd_experiment",
    "run_command",
]

logger = logging.getLogger(__name__)

RESOLVED_CONFIG = "resolved_config.yaml"
HEATMAP_PARAMS = (("sigma", 0), ("lambda", 1), ("nu", 4))

C = TypeVar("C", bound=RunConfig)


def _set_dotted(data: Dict[str, Any], key: str, value: Any) -> None:
    *parents, leaf = key.split(".")
    node = data
    for part in parents:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override {key}: {part} is not a mapping")
    node[leaf] = value


def load_run_config(
    config_cls: Type[C],
    command: str,
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> C:
    """YAML file values, then flag overrides (dotted keys reach nested sections)"""
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                loaded = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {path} must be a mapping")
        data = loaded
    for key, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(data, key, value)
    data.setdefault("out_dir", str(settings.output_dir / command))
    try:
        return config_cls.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid {command} config:\n{e}") from e


def write_resolved_config(cfg: BaseModel, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / RESOLVED_CONFIG
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(cfg.model_dump(mode="json"), f, sort_keys=False)
    return path


def _write_yaml(data: Dict[str, Any], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, sort_keys=False)


def _load_model(path: Optional[Path]) -> Optional[ConvNetModel]:
    return load_model(path) if path is not None else None


def cmd_simulate(cfg: SimulateConfig) -> str:
    spec = SettingSpec.standard(cfg.setting, n=cfg.n, bandwidth=cfg.bandwidth)
    field = gen_setting(spec, cfg.seed)
    field_path = cfg.out_dir / "field.csv"
    write_field_csv(field, field_path)
    field_path.with_suffix(".json").write_text(
        spec.param_field().model_dump_json(indent=2) + "\n", encoding="utf-8"
    )
    return f"setting {cfg.setting}: {field.n} observations written to {field_path}"


def cmd_corpus(cfg: CorpusConfig) -> str:
    manifest = build_corpus(
        cfg.out_dir, cfg.n_stationary, cfg.n_nonstationary, n=cfg.n, seed=cfg.seed
    )
    return f"corpus of {len(manifest.entries)} samples in {cfg.out_dir}"


def cmd_train(cfg: TrainCommandConfig) -> str:
    samples = load_corpus(cfg.corpus, cfg.g)
    train_set, test_set = split_corpus(samples, cfg.test_fraction, cfg.split_seed)
    model = train(train_set, cfg.train)
    model_path = cfg.out_dir / "model.bin"
    save_model(model, model_path)
    report: Dict[str, Any] = {
        "n_train": len(train_set),
        "n_test": len(test_set),
        "loss_history": [float(v) for v in model.loss_history],
    }
    summary = f"trained on {len(train_set)} samples, model written to {model_path}"
    if test_set:
        evaluation = evaluate(model, test_set)
        report.update(
            accuracy=evaluation.accuracy,
            stationary_accuracy=evaluation.stationary_accuracy,
            nonstationary_accuracy=evaluation.nonstationary_accuracy,
        )
        summary += f"; held-out accuracy {100 * evaluation.accuracy:.1f}%"
    _write_yaml(report, cfg.out_dir / "train_report.yaml")
    return summary


def cmd_classify(cfg: ClassifyConfig) -> str:
    model = load_model(cfg.model)
    index = classify(model, read_field_csv(cfg.field))
    label = "nonstationary" if index >= 0.5 else "stationary"
    _write_yaml(
        {"field": str(cfg.field), "index": float(index), "label": label},
        cfg.out_dir / "classify.yaml",
    )
    return f"nonstationarity index {index:.4f} ({label})"


def cmd_partition(cfg: PartitionConfig) -> str:
    field = read_field_csv(cfg.field)
    partition = partition_field(
        field, cfg.method, cfg.k, _load_model(cfg.model), iters=cfg.iters, seed=cfg.seed
    )
    path = cfg.out_dir / "partition.csv"
    partition.to_csv(field, path)
    score = "" if partition.score is None else f", score {partition.score:.4f}"
    return f"{cfg.method} partition into {cfg.k} subregions written to {path}{score}"


def _write_aic(rows: List[Dict[str, Any]], path: Path) -> None:
    best = min(range(len(rows)), key=lambda i: rows[i]["aic"])
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["K", "n_params", "loglik", "aic", "best"])
        for i, row in enumerate(rows):
            writer.writerow(
                [
                    row["k"],
                    row["n_params"],
                    fmt(row["loglik"]),
                    fmt(row["aic"]),
                    "*" if i == best else "",
                ]
            )


def cmd_fit(cfg: FitCommandConfig) -> str:
    field = read_field_csv(cfg.field)
    model = _load_model(cfg.model)
    grid = regular_grid_locations(cfg.heatmap_side**2)
    rows = []
    for k in cfg.k:
        partition, result = fit_partitioned(
            field, cfg.partition, k, model, cfg.fit, cfg.iters, cfg.seed
        )
        partition.to_csv(field, cfg.out_dir / f"partition_k{k}.csv")
        (cfg.out_dir / f"fit_k{k}.json").write_text(
            result.model_dump_json(indent=2) + "\n", encoding="utf-8"
        )
        surfaces = smooth_param_arrays(result.param_field(), grid)
        for name, col in HEATMAP_PARAMS:
            write_heatmap(
                surfaces[:, col].reshape(cfg.heatmap_side, cfg.heatmap_side),
                cfg.out_dir / "heatmaps",
                f"k{k}_{name}",
            )
        rows.append(
            {"k": k, "n_params": result.n_params, "loglik": result.loglik, "aic": result.aic}
        )
        logger.info(
            "K=%d: loglik %.4f, AIC %.4f, %d evaluations",
            k,
            result.loglik,
            result.aic,
            result.n_evals,
        )
    _write_aic(rows, cfg.out_dir / "aic.csv")
    best = min(rows, key=lambda r: r["aic"])
    return (
        f"{cfg.partition} partitions, K in {list(cfg.k)}: "
        f"smallest AIC {best['aic']:.4f} at K={best['k']}"
    )


def cmd_experiment(cfg: ExperimentCommandConfig) -> str:
    report = run_experiment(
        cfg.name,
        cfg.experiment,
        cfg.out_dir,
        model=_load_model(cfg.model),
        corpus=cfg.corpus,
    )
    if isinstance(report, AccuracyReport):
        return (
            f"accuracy {100 * report.accuracy:.1f}% (stationary "
            f"{100 * report.stationary_accuracy:.1f}%, nonstationary "
            f"{100 * report.nonstationary_accuracy:.1f}%)"
        )
    return f"{cfg.name}: {len(report.fits)} fits over {report.replicates} replicates"


COMMANDS: Dict[str, Tuple[Type[RunConfig], Callable[[Any], str]]] = {
    "simulate": (SimulateConfig, cmd_simulate),
    "corpus": (CorpusConfig, cmd_corpus),
    "train": (TrainCommandConfig, cmd_train),
    "classify": (ClassifyConfig, cmd_classify),
    "partition": (PartitionConfig, cmd_partition),
    "fit": (FitCommandConfig, cmd_fit),
    "experiment": (ExperimentCommandConfig, cmd_experiment),
}


def run_command(name: str, cfg: RunConfig) -> str:
    """Snapshot the resolved config next to the outputs, then run the command"""
    write_resolved_config(cfg, cfg.out_dir)
    _, command = COMMANDS[name]
    return command(cfg)
