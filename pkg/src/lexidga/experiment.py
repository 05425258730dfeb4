"""Experiment runners: single-DGA models across observation counts and
multi-DGA models, with exact split bookkeeping.

Split arithmetic is fixed: benign 14,000 / 3,000 / 3,000 for train /
validation / test (scalable by ``benign_scale`` for desk-size runs while
preserving ratios), 1,000 held-out test domains per DGA family, and an
80/20 train/validation split of the observations seen during training.
All sampling is sorted-then-shuffled with splitmix64 so dataset
assignment is identical across platforms.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import metrics
from .dga import (SplitMix64, NotEnoughDomains, generate, load_family_specs,
                  default_family_specs)
from .embed import HashNgramProvider, CacheProvider, load_cache, DEFAULT_DIMENSION
from .model import TrainConfig, train_on_arrays, forward_batch
from .preprocess import default_suffixes, load_suffixes, normalize
from .segment import default_lexicon, load_lexicon, segment

__all__ = [
    "ExperimentConfig",
    "SingleDgaResult",
    "MultiDgaResult",
    "train_validation_split",
    "run_single_dga",
    "run_multi_dga",
    "bench_inference",
]


def train_validation_split(observations: int) -> tuple[int, int]:
    """80/20 observation split: 120 -> (96, 24), 30 -> (24, 6)."""
    train = observations * 4 // 5
    return train, observations - train


def derive_seed(base: int, tag: str) -> int:
    """Portable per-purpose sub-seed: blake2b(tag) xor base, scrambled."""
    tag_bits = int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "little")
    return SplitMix64(base ^ tag_bits).next_u64()


@dataclass
class ExperimentConfig:
    families: tuple[str, ...] = ("matsnu", "rovnix", "pizd", "suppobox")
    observation_counts: tuple[int, ...] = (30, 60, 90, 120, 240, 480, 960)
    benign_train: int = 14_000
    benign_val: int = 3_000
    benign_test: int = 3_000
    benign_scale: float = 1.0
    dga_test_count: int = 1_000
    seed: int = 1
    provider: str = "hash"  # "hash" or "cache:<path>"
    dimension: int = DEFAULT_DIMENSION
    threshold: float = 0.5
    benign_path: str | None = None
    presets_path: str | None = None
    suffix_path: str | None = None
    lexicon_path: str | None = None
    train_config: TrainConfig = field(default_factory=TrainConfig)

    def scaled_benign(self) -> tuple[int, int, int]:
        s = self.benign_scale
        return (round(self.benign_train * s), round(self.benign_val * s),
                round(self.benign_test * s))

    def make_provider(self):
        if self.provider == "hash":
            return HashNgramProvider(dimension=self.dimension)
        if self.provider.startswith("cache:"):
            return CacheProvider(load_cache(self.provider[6:], self.dimension))
        raise ValueError(f"unknown provider {self.provider!r}")


@dataclass
class SingleDgaResult:
    family: str
    rows: list[list]
    reports: dict[int, metrics.MetricsReport]
    rocs: dict[int, metrics.RocCurve]
    log_lines: list[str]


@dataclass
class MultiDgaResult:
    rows: list[list]
    reports: dict[tuple[int, str], metrics.MetricsReport]
    rocs: dict[tuple[int, str], metrics.RocCurve]
    log_lines: list[str]


def _derive_train_config(cfg: ExperimentConfig, tag: str) -> TrainConfig:
    base = cfg.train_config
    return TrainConfig(
        learning_rate=base.learning_rate,
        batch_size=base.batch_size,
        max_epochs=base.max_epochs,
        patience=base.patience,
        seed=derive_seed(cfg.seed, tag),
        hidden=base.hidden,
        weight_classes=base.weight_classes,
    )


class _Pipeline:
    """Shared handles for one experiment run: suffixes, lexicon, provider."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.suffixes = (
            load_suffixes(cfg.suffix_path) if cfg.suffix_path else default_suffixes()
        )
        self.lexicon = (
            load_lexicon(cfg.lexicon_path) if cfg.lexicon_path else default_lexicon()
        )
        self.provider = cfg.make_provider()
        self.specs = (
            load_family_specs(cfg.presets_path) if cfg.presets_path
            else default_family_specs()
        )

    def tokens(self, core: str) -> tuple[str, ...]:
        return segment(core, self.lexicon).tokens

    def embed_cores(self, cores) -> np.ndarray:
        out = np.empty((len(cores), self.provider.dimension), dtype=np.float64)
        for i, core in enumerate(cores):
            out[i] = self.provider.embed_tokens(self.tokens(core))
        return out

    def benign_pool(self) -> list[str]:
        n_train, n_val, n_test = self.cfg.scaled_benign()
        total = n_train + n_val + n_test
        if self.cfg.benign_path:
            cores = self._benign_cores(Path(self.cfg.benign_path), total)
        else:
            ref = resources.files("lexidga.data").joinpath("benign_snapshot.txt")
            with resources.as_file(ref) as path:
                cores = self._benign_cores(path, total)
        _shuffle(cores, derive_seed(self.cfg.seed, "benign"))
        return cores

    def _benign_cores(self, path, total: int) -> list[str]:
        """First ``total`` benign cores, deduplicated: "foo.com" and
        "foo.net" would otherwise leak one embedding across splits."""
        cores: list[str] = []
        seen: set[str] = set()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if len(cores) >= total:
                    break
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    core = normalize(line, self.suffixes).core
                except Exception:
                    continue
                if core not in seen:
                    seen.add(core)
                    cores.append(core)
        if len(cores) < total:
            raise NotEnoughDomains(f"{path}: {len(cores)} distinct cores, wanted {total}")
        return cores

    def family_pool(self, family: str, max_obs: int, exclude: set[str]) -> list[str]:
        spec = self.specs[family]
        count = self.cfg.dga_test_count + max_obs
        # headroom so cores colliding with the benign pool can be dropped
        examples = generate(spec, derive_seed(self.cfg.seed, f"dga:{family}"), count + 64)
        cores, seen = [], set()
        for ex in examples:  # distinct raws can share a core across TLDs
            core = ex.domain.core
            if core not in exclude and core not in seen:
                seen.add(core)
                cores.append(core)
        if len(cores) < count:
            raise NotEnoughDomains(f"{family}: generator pool too small after exclusions")
        cores = cores[:count]
        cores.sort()
        _shuffle(cores, derive_seed(self.cfg.seed, f"sample:{family}"))
        return cores


def _shuffle(items: list, seed: int) -> None:
    """Fisher-Yates with splitmix64 draws; platform-independent."""
    rng = SplitMix64(seed)
    for i in range(len(items) - 1, 0, -1):
        j = rng.below(i + 1)
        items[i], items[j] = items[j], items[i]


def _assert_disjoint(*groups: list[str]) -> None:
    seen: set[str] = set()
    for group in groups:
        gset = set(group)
        overlap = seen & gset
        if overlap:
            raise AssertionError(f"split leakage: {sorted(overlap)[:5]}")
        seen |= gset


def _split_hash(items) -> str:
    h = hashlib.sha256()
    for item in items:
        h.update(item.encode())
        h.update(b"\n")
    return h.hexdigest()[:16]


def run_single_dga(cfg: ExperimentConfig, family: str) -> SingleDgaResult:
    """One model per observation count, all sharing the benign splits and
    the family's held-out 1,000-domain test set."""
    if any(o < 1 for o in cfg.observation_counts):
        raise ValueError("observation counts must be positive")
    pipe = _Pipeline(cfg)
    n_train, n_val, n_test = cfg.scaled_benign()
    benign = pipe.benign_pool()
    ben_train = benign[:n_train]
    ben_val = benign[n_train : n_train + n_val]
    ben_test = benign[n_train + n_val :]

    max_obs = max(cfg.observation_counts)
    pool = pipe.family_pool(family, max_obs, exclude=set(benign))
    dga_test = pool[: cfg.dga_test_count]
    obs_pool = pool[cfg.dga_test_count :]
    _assert_disjoint(ben_train, ben_val, ben_test, dga_test, obs_pool)

    fingerprint_before = pipe.provider.state_fingerprint()
    x_ben_train = pipe.embed_cores(ben_train)
    x_ben_val = pipe.embed_cores(ben_val)
    x_ben_test = pipe.embed_cores(ben_test)
    x_dga_test = pipe.embed_cores(dga_test)
    x_obs = pipe.embed_cores(obs_pool)

    x_test = np.vstack([x_ben_test, x_dga_test])
    y_test = np.concatenate([np.zeros(len(ben_test), dtype=np.int8),
                             np.ones(len(dga_test), dtype=np.int8)])

    log = [
        f"experiment=single family={family} seed={cfg.seed}",
        f"benign_counts={n_train}/{n_val}/{n_test} scale={cfg.benign_scale}",
        f"benign_split_hashes={_split_hash(ben_train)}/{_split_hash(ben_val)}/{_split_hash(ben_test)}",
        f"dga_test_hash={_split_hash(dga_test)} obs_pool_hash={_split_hash(obs_pool)}",
        f"provider={cfg.provider} dimension={cfg.dimension} threshold={cfg.threshold}",
    ]
    rows, reports, rocs = [], {}, {}
    for obs in cfg.observation_counts:
        obs_train_n, obs_val_n = train_validation_split(obs)
        x_train = np.vstack([x_ben_train, x_obs[:obs_train_n]])
        y_train = np.concatenate([np.zeros(n_train, dtype=np.int8),
                                  np.ones(obs_train_n, dtype=np.int8)])
        x_val = np.vstack([x_ben_val, x_obs[obs_train_n:obs]])
        y_val = np.concatenate([np.zeros(n_val, dtype=np.int8),
                                np.ones(obs_val_n, dtype=np.int8)])
        tc = _derive_train_config(cfg, f"train:{family}:{obs}")
        result = train_on_arrays(x_train, y_train, x_val, y_val, tc)
        scores = forward_batch(x_test, result.weights)
        report = metrics.compute_report(scores, y_test, cfg.threshold)
        rows.append(metrics.report_row(family, obs, obs_train_n, obs_val_n, report))
        reports[obs] = report
        rocs[obs] = metrics.roc(scores, y_test)
        log.append(
            f"family={family} obs={obs} train={obs_train_n} val={obs_val_n} "
            f"epochs={len(result.history)} best_epoch={result.best_epoch}"
        )
    if pipe.provider.state_fingerprint() != fingerprint_before:
        raise AssertionError("embedding provider state changed during training")
    return SingleDgaResult(family, rows, reports, rocs, log)


def train_model(cfg: ExperimentConfig, family: str, observations: int):
    """Train one single-family model; returns (weights, validation ROC,
    info dict).  The validation ROC carries thresholds so a serving
    cutoff can later be picked for a target FPR."""
    pipe = _Pipeline(cfg)
    n_train, n_val, n_test = cfg.scaled_benign()
    benign = pipe.benign_pool()
    ben_train = benign[:n_train]
    ben_val = benign[n_train : n_train + n_val]
    pool = pipe.family_pool(family, observations, exclude=set(benign))
    obs_pool = pool[cfg.dga_test_count :]
    obs_train_n, obs_val_n = train_validation_split(observations)

    x_train = np.vstack([pipe.embed_cores(ben_train),
                         pipe.embed_cores(obs_pool[:obs_train_n])])
    y_train = np.concatenate([np.zeros(n_train, dtype=np.int8),
                              np.ones(obs_train_n, dtype=np.int8)])
    x_val = np.vstack([pipe.embed_cores(ben_val),
                       pipe.embed_cores(obs_pool[obs_train_n:observations])])
    y_val = np.concatenate([np.zeros(n_val, dtype=np.int8),
                            np.ones(obs_val_n, dtype=np.int8)])
    tc = _derive_train_config(cfg, f"train:{family}:{observations}")
    result = train_on_arrays(x_train, y_train, x_val, y_val, tc)
    val_scores = forward_batch(x_val, result.weights)
    val_roc = metrics.roc(val_scores, y_val)
    info = {
        "family": family,
        "observations": observations,
        "training": obs_train_n,
        "validation": obs_val_n,
        "epochs": len(result.history),
        "best_epoch": result.best_epoch,
        "val_loss": result.history[result.best_epoch - 1]["val_loss"],
    }
    return result.weights, val_roc, info


def run_multi_dga(cfg: ExperimentConfig) -> MultiDgaResult:
    """One model per observation count trained on the union of all
    families' observations; per-family evaluation plus a micro average
    from pooled confusion counts (benign test counted once)."""
    pipe = _Pipeline(cfg)
    n_train, n_val, n_test = cfg.scaled_benign()
    benign = pipe.benign_pool()
    ben_train = benign[:n_train]
    ben_val = benign[n_train : n_train + n_val]
    ben_test = benign[n_train + n_val :]

    max_obs = max(cfg.observation_counts)
    exclude = set(benign)
    pools = {}
    for fam in cfg.families:
        pools[fam] = pipe.family_pool(fam, max_obs, exclude=exclude)
        exclude |= set(pools[fam])
    tests = {fam: pool[: cfg.dga_test_count] for fam, pool in pools.items()}
    obs_pools = {fam: pool[cfg.dga_test_count :] for fam, pool in pools.items()}
    _assert_disjoint(ben_train, ben_val, ben_test,
                     *tests.values(), *obs_pools.values())

    fingerprint_before = pipe.provider.state_fingerprint()
    x_ben_train = pipe.embed_cores(ben_train)
    x_ben_val = pipe.embed_cores(ben_val)
    x_ben_test = pipe.embed_cores(ben_test)
    x_tests = {fam: pipe.embed_cores(t) for fam, t in tests.items()}
    x_obs = {fam: pipe.embed_cores(o) for fam, o in obs_pools.items()}

    log = [
        f"experiment=multi families={','.join(cfg.families)} seed={cfg.seed}",
        f"benign_counts={n_train}/{n_val}/{n_test} scale={cfg.benign_scale}",
        f"benign_split_hashes={_split_hash(ben_train)}/{_split_hash(ben_val)}/{_split_hash(ben_test)}",
        f"provider={cfg.provider} dimension={cfg.dimension} threshold={cfg.threshold}",
    ]
    rows, reports, rocs = [], {}, {}
    for obs in cfg.observation_counts:
        obs_train_n, obs_val_n = train_validation_split(obs)
        x_train = np.vstack([x_ben_train] + [x_obs[f][:obs_train_n] for f in cfg.families])
        y_train = np.concatenate(
            [np.zeros(n_train, dtype=np.int8),
             np.ones(obs_train_n * len(cfg.families), dtype=np.int8)])
        x_val = np.vstack([x_ben_val] + [x_obs[f][obs_train_n:obs] for f in cfg.families])
        y_val = np.concatenate(
            [np.zeros(n_val, dtype=np.int8),
             np.ones(obs_val_n * len(cfg.families), dtype=np.int8)])
        tc = _derive_train_config(cfg, f"train:multi:{obs}")
        result = train_on_arrays(x_train, y_train, x_val, y_val, tc)

        ben_scores = forward_batch(x_ben_test, result.weights)
        pooled_scores = [ben_scores]
        pooled_labels = [np.zeros(len(ben_test), dtype=np.int8)]
        for fam in cfg.families:
            fam_scores = forward_batch(x_tests[fam], result.weights)
            scores = np.concatenate([ben_scores, fam_scores])
            labels = np.concatenate([np.zeros(len(ben_test), dtype=np.int8),
                                     np.ones(len(fam_scores), dtype=np.int8)])
            report = metrics.compute_report(scores, labels, cfg.threshold)
            rows.append(metrics.report_row(fam, obs, obs_train_n, obs_val_n, report))
            reports[(obs, fam)] = report
            rocs[(obs, fam)] = metrics.roc(scores, labels)
            pooled_scores.append(fam_scores)
            pooled_labels.append(np.ones(len(fam_scores), dtype=np.int8))
        micro_scores = np.concatenate(pooled_scores)
        micro_labels = np.concatenate(pooled_labels)
        micro = metrics.compute_report(micro_scores, micro_labels, cfg.threshold)
        k = len(cfg.families)
        rows.append(metrics.report_row(
            "micro_average", obs * k, obs_train_n * k, obs_val_n * k, micro))
        reports[(obs, "micro_average")] = micro
        rocs[(obs, "micro_average")] = metrics.roc(micro_scores, micro_labels)
        log.append(f"multi obs={obs} epochs={len(result.history)} "
                   f"best_epoch={result.best_epoch}")
    if pipe.provider.state_fingerprint() != fingerprint_before:
        raise AssertionError("embedding provider state changed during training")
    return MultiDgaResult(rows, reports, rocs, log)


def bench_inference(weights, provider, domains, repetitions: int = 1,
                    suffixes=None, lexicon=None) -> dict:
    """Wall-clock per-domain latency of the full inline pipeline
    (normalize -> segment -> embed -> forward)."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not domains:
        raise ValueError("need at least one domain")
    suffixes = suffixes or default_suffixes()
    lexicon = lexicon or default_lexicon()
    samples = []
    for _ in range(repetitions):
        for raw in domains:
            t0 = time.perf_counter()
            dom = normalize(raw, suffixes)
            tokens = segment(dom.core, lexicon).tokens
            vec = provider.embed_tokens(tokens)
            forward_batch(vec[None, :], weights)
            samples.append(time.perf_counter() - t0)
    arr = np.asarray(samples)
    return {
        "count": len(samples),
        "mean_s": float(arr.mean()),
        "p50_s": float(np.percentile(arr, 50)),
        "p95_s": float(np.percentile(arr, 95)),
        "domains_per_s": float(len(samples) / arr.sum()),
    }
