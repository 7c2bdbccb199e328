import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from .commands import COMMANDS, load_run_config, run_command
from .config import settings
from .errors import ConfigError, NsconvError

logger = logging.getLogger("nsconv")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

_handlers: List[logging.Handler] = []

# flag dest -> config key, per command
OVERRIDES: Dict[str, Dict[str, str]] = {
    "simulate": {
        "setting": "setting",
        "n": "n",
        "seed": "seed",
        "bandwidth": "bandwidth",
    },
    "corpus": {
        "n_stationary": "n_stationary",
        "n_nonstationary": "n_nonstationary",
        "n": "n",
        "seed": "seed",
    },
    "train": {
        "corpus": "corpus",
        "g": "g",
        "test_fraction": "test_fraction",
        "epochs": "train.epochs",
        "batch_size": "train.batch_size",
        "learning_rate": "train.learning_rate",
        "seed": "train.seed",
    },
    "classify": {"model": "model", "field": "field"},
    "partition": {
        "field": "field",
        "model": "model",
        "method": "method",
        "k": "k",
        "iters": "iters",
        "seed": "seed",
    },
    "fit": {
        "field": "field",
        "model": "model",
        "partition": "partition",
        "k": "k",
        "iters": "iters",
        "seed": "seed",
        "n_starts": "fit.n_starts",
        "max_evals": "fit.max_evals",
    },
    "experiment": {
        "name": "name",
        "model": "model",
        "corpus": "corpus",
        "replicates": "experiment.replicates",
        "n": "experiment.n",
        "seed": "experiment.seed",
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsconv",
        description="Nonstationary Matérn fields: simulate, classify, partition, fit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", type=Path, help="YAML run configuration")
        p.add_argument("--out-dir", dest="out_dir", type=Path, help="Output directory")
        return p

    p = command("simulate", "Simulate one of the estimation settings")
    p.add_argument("--setting", type=int, choices=[1, 2, 3])
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bandwidth", type=float)

    p = command("corpus", "Build a labeled classifier corpus")
    p.add_argument("--n-stationary", dest="n_stationary", type=int)
    p.add_argument("--n-nonstationary", dest="n_nonstationary", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)

    p = command("train", "Train the classifier on a corpus")
    p.add_argument("--corpus", type=Path)
    p.add_argument("--g", type=int)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--seed", type=int)

    p = command("classify", "Nonstationarity index of a field")
    p.add_argument("--model", type=Path)
    p.add_argument("--field", type=Path)

    p = command("partition", "Split a field into subregions")
    p.add_argument("--field", type=Path)
    p.add_argument("--model", type=Path)
    p.add_argument("--method", choices=["convnet", "user"])
    p.add_argument("--k", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)

    p = command("fit", "Fit the nonstationary model for one or more K")
    p.add_argument("--field", type=Path)
    p.add_argument("--model", type=Path)
    p.add_argument("--partition", choices=["convnet", "user"])
    p.add_argument("--k", type=int, nargs="+")
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-starts", dest="n_starts", type=int)
    p.add_argument("--max-evals", dest="max_evals", type=int)

    p = command("experiment", "Run a replicated study and write its report tables")
    p.add_argument(
        "name", nargs="?", choices=["accuracy", "setting1", "setting2", "setting3"]
    )
    p.add_argument("--model", type=Path)
    p.add_argument("--corpus", type=Path)
    p.add_argument("--replicates", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    out = {key: getattr(args, dest) for dest, key in OVERRIDES[args.command].items()}
    out["out_dir"] = args.out_dir
    return {k: str(v) if isinstance(v, Path) else v for k, v in out.items()}


def setup_logging(out_dir: Optional[Path]) -> None:
    """stderr without timestamps; `run.log` in the output directory with them"""
    root = logging.getLogger()
    root.setLevel(settings.log_level.upper())
    while _handlers:
        handler = _handlers.pop()
        root.removeHandler(handler)
        handler.close()
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    _handlers.append(console)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        logfile = logging.FileHandler(out_dir / "run.log", encoding="utf-8")
        logfile.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        _handlers.append(logfile)
    for handler in _handlers:
        root.addHandler(handler)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    config_cls, _ = COMMANDS[args.command]
    setup_logging(None)
    try:
        cfg = load_run_config(config_cls, args.command, args.config, _overrides(args))
    except ConfigError as e:
        print(f"nsconv {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(cfg.out_dir)
    try:
        summary = run_command(args.command, cfg)
    except ConfigError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except (NsconvError, ValueError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return EXIT_RUNTIME
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
