"""Labeled classifier corpora on disk: one field CSV per sample plus a YAML manifest."""

import functools
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError
from tqdm import tqdm

from ..config import settings
from ..convnet.models import Label, LabeledSample
from ..errors import ConfigError
from ..field import Stream, read_field_csv, rng_for, write_field_csv
from ..preprocess import DEFAULT_GRID, preprocess
from . import (
    gen_nonstationary_sample,
    pattern_specs,
    pick_combos,
    sample_seed_for,
    stationary_combos,
    stationary_sample,
)
from .models import CorpusEntry, CorpusManifest, PatternSpec

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MANIFEST = "manifest.yaml"
N_PATTERNS = 5


def _stationary_entry(
    out_dir: Path, combo: Tuple[float, float], index: int, n: int, seed: int
) -> CorpusEntry:
    nu, h_eff = combo
    sample_seed = sample_seed_for(seed, Label.STATIONARY, index)
    rel = f"stationary/{index:05d}.csv"
    write_field_csv(stationary_sample(nu, h_eff, n, sample_seed), out_dir / rel)
    return CorpusEntry(path=rel, label=Label.STATIONARY, seed=sample_seed, nu=nu, h_eff=h_eff)


def _nonstationary_entry(
    out_dir: Path, spec: PatternSpec, index: int, n: int, seed: int
) -> CorpusEntry:
    sample_seed = sample_seed_for(seed, Label.NONSTATIONARY, index)
    rel = f"nonstationary/{index:05d}.csv"
    sample = gen_nonstationary_sample(spec, n, sample_seed)
    write_field_csv(sample.field, out_dir / rel)
    return CorpusEntry(
        path=rel,
        label=Label.NONSTATIONARY,
        seed=sample_seed,
        nu=spec.base.nu,
        h_eff=spec.h_eff,
        pattern=spec,
    )


def _nonstationary_specs(count: int, seed: int) -> List[PatternSpec]:
    """Cycle through patterns 1..5, drawing combinations within each without replacement"""
    per_pattern = [count // N_PATTERNS + (u < count % N_PATTERNS) for u in range(N_PATTERNS)]
    chosen = []
    for u, quota in enumerate(per_pattern, start=1):
        specs = pattern_specs(u)
        picks = rng_for(seed, Stream.CORPUS, 0, u).choice(len(specs), quota, replace=False)
        chosen.append([specs[int(i)] for i in picks])
    return [chosen[i % N_PATTERNS][i // N_PATTERNS] for i in range(count)]


def build_corpus(
    out_dir: PathLike,
    n_stationary: int,
    n_nonstationary: int,
    n: int = 2500,
    seed: int = 0,
) -> CorpusManifest:
    """Simulate both classes into `out_dir` and write the manifest next to them"""
    out = Path(out_dir)
    (out / "stationary").mkdir(parents=True, exist_ok=True)
    (out / "nonstationary").mkdir(parents=True, exist_ok=True)

    combos = stationary_combos()
    picks = pick_combos(len(combos), n_stationary, seed)
    specs = _nonstationary_specs(n_nonstationary, seed)
    jobs = [
        functools.partial(_stationary_entry, out, combos[int(p)], i, n, seed)
        for i, p in enumerate(picks)
    ] + [
        functools.partial(_nonstationary_entry, out, spec, i, n, seed)
        for i, spec in enumerate(specs)
    ]
    with ThreadPoolExecutor(max_workers=settings.num_threads) as pool:
        entries = list(
            tqdm(
                pool.map(lambda job: job(), jobs),
                total=len(jobs),
                desc="corpus",
                disable=not settings.show_progress,
            )
        )
    manifest = CorpusManifest(seed=seed, n=n, entries=entries)
    with open(out / MANIFEST, "w", encoding="utf-8") as f:
        yaml.safe_dump(manifest.model_dump(mode="json"), f, sort_keys=False)
    logger.info(
        "wrote %d stationary and %d nonstationary samples to %s",
        n_stationary,
        n_nonstationary,
        out,
    )
    return manifest


def read_manifest(path: PathLike) -> CorpusManifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST
    with open(path, encoding="utf-8") as f:
        raw = yaml.safe_load(f)
    try:
        return CorpusManifest.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid corpus manifest {path}: {e}") from e


def load_corpus(path: PathLike, g: int = DEFAULT_GRID) -> List[LabeledSample]:
    """Read every manifest entry and preprocess it onto a g × g grid"""
    path = Path(path)
    root = path if path.is_dir() else path.parent
    manifest = read_manifest(path)

    def load(entry: CorpusEntry) -> LabeledSample:
        field = read_field_csv(root / entry.path)
        return LabeledSample(image=preprocess(field, g), label=entry.label)

    with ThreadPoolExecutor(max_workers=settings.num_threads) as pool:
        return list(
            tqdm(
                pool.map(load, manifest.entries),
                total=len(manifest.entries),
                desc="load corpus",
                disable=not settings.show_progress,
            )
        )


def split_corpus(
    samples: List[LabeledSample], test_fraction: float, seed: int
) -> Tuple[List[LabeledSample], List[LabeledSample]]:
    """Per-class random split into (train, test)"""
    if not 0.0 <= test_fraction < 1.0:
        raise ValueError("test_fraction must lie in [0, 1)")
    rng = rng_for(seed, Stream.SPLIT)
    labels = np.array([int(s.label) for s in samples])
    test = np.zeros(len(samples), dtype=bool)
    for label in (Label.NONSTATIONARY, Label.STATIONARY):
        idx = np.flatnonzero(labels == label)
        n_test = int(round(test_fraction * idx.size))
        test[rng.permutation(idx)[:n_test]] = True
    return (
        [s for s, t in zip(samples, test) if not t],
        [s for s, t in zip(samples, test) if t],
    )
