import numpy as np
import pytest

from lexidga.embed import HashNgramProvider
from lexidga.experiment import (
    ExperimentConfig,
    bench_inference,
    run_multi_dga,
    run_single_dga,
    train_model,
    train_validation_split,
)
from lexidga.model import TrainConfig, init_weights


# the Observations / Training / Validation triples reported for both
# experimental designs
SINGLE_SPLITS = [(30, 24, 6), (60, 48, 12), (90, 72, 18), (120, 96, 24),
                 (240, 192, 48), (480, 384, 96), (960, 768, 192)]
MULTI_SPLITS = [(100, 80, 20), (200, 160, 40), (400, 320, 80)]


@pytest.mark.parametrize("obs,train,val", SINGLE_SPLITS + MULTI_SPLITS)
def test_split_arithmetic(obs, train, val):
    assert train_validation_split(obs) == (train, val)
    assert train + val == obs


def _tiny_cfg(**kw):
    base = dict(
        families=("pizd", "suppobox"),
        observation_counts=(10, 20),
        benign_scale=0.02,       # 280 / 60 / 60
        dga_test_count=50,
        seed=5,
        train_config=TrainConfig(max_epochs=3, patience=3, hidden=16),
        dimension=128,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_single_dga_rows_and_arithmetic():
    cfg = _tiny_cfg()
    result = run_single_dga(cfg, "pizd")
    assert [r[:4] for r in result.rows] == [
        ["pizd", 10, 8, 2], ["pizd", 20, 16, 4]]
    assert set(result.reports) == {10, 20}
    for report in result.reports.values():
        total = sum([report.counts.tp, report.counts.fp,
                     report.counts.tn, report.counts.fn])
        assert total == 60 + 50  # benign test + dga test


def test_run_single_dga_deterministic():
    cfg = _tiny_cfg()
    a = run_single_dga(cfg, "suppobox")
    b = run_single_dga(cfg, "suppobox")
    assert a.rows == b.rows
    assert all(a.rocs[o].points() == b.rocs[o].points() for o in a.rocs)
    c = run_single_dga(_tiny_cfg(seed=6), "suppobox")
    assert c.rows != a.rows


def test_run_single_dga_rejects_zero_observations():
    with pytest.raises(ValueError):
        run_single_dga(_tiny_cfg(observation_counts=(0,)), "pizd")


def test_run_multi_dga_micro_average_pools_counts():
    cfg = _tiny_cfg(observation_counts=(20,))
    result = run_multi_dga(cfg)
    fam_reports = [result.reports[(20, f)] for f in cfg.families]
    micro = result.reports[(20, "micro_average")]
    # hand-pool the confusion counts: DGA predictions from every family,
    # the shared benign test set counted once
    assert micro.counts.tp == sum(r.counts.tp for r in fam_reports)
    assert micro.counts.fn == sum(r.counts.fn for r in fam_reports)
    assert micro.counts.fp == fam_reports[0].counts.fp
    assert micro.counts.tn == fam_reports[0].counts.tn
    pooled_recall = micro.counts.tp / (micro.counts.tp + micro.counts.fn)
    assert micro.recall == pytest.approx(pooled_recall)
    # micro row carries the summed split arithmetic
    micro_row = [r for r in result.rows if r[0] == "micro_average"][0]
    assert micro_row[1:4] == [40, 32, 8]


def test_run_multi_dga_single_family_micro_equals_family():
    cfg = _tiny_cfg(families=("pizd",), observation_counts=(10,))
    result = run_multi_dga(cfg)
    fam = result.reports[(10, "pizd")]
    micro = result.reports[(10, "micro_average")]
    assert fam == micro


def test_train_model_returns_thresholded_roc(tmp_path):
    cfg = _tiny_cfg()
    weights, val_roc, info = train_model(cfg, "pizd", 10)
    assert weights.dimension == cfg.dimension
    assert info["observations"] == 10
    assert info["training"] == 8 and info["validation"] == 2
    assert len(val_roc.thresholds) == len(val_roc.fpr)
    assert val_roc.thresholds[0] == np.inf


def test_bench_inference_stats():
    w = init_weights(dim=64, hidden=8, seed=0)
    provider = HashNgramProvider(dimension=64)
    stats = bench_inference(w, provider, ["middleapple.net", "example.com"],
                            repetitions=3)
    assert stats["count"] == 6
    assert 0 < stats["p50_s"] <= stats["p95_s"]
    assert stats["mean_s"] > 0 and stats["domains_per_s"] > 0


def test_bench_inference_repeated_domain_stable():
    # no data-dependent branching: the same input repeated should keep
    # p95 within ordinary jitter of p50 (cold-start call excluded by the
    # 50-sample window)
    w = init_weights(dim=64, hidden=8, seed=0)
    provider = HashNgramProvider(dimension=64)
    bench_inference(w, provider, ["middleapple.net"], repetitions=3)  # warm-up
    stats = bench_inference(w, provider, ["middleapple.net"], repetitions=50)
    assert stats["p95_s"] <= stats["p50_s"] * 10


def test_bench_inference_rejects_zero_repetitions():
    w = init_weights(dim=64, hidden=8, seed=0)
    with pytest.raises(ValueError):
        bench_inference(w, HashNgramProvider(dimension=64), ["a.com"], repetitions=0)


def test_bench_inference_requires_domains():
    w = init_weights(dim=64, hidden=8, seed=0)
    with pytest.raises(ValueError):
        bench_inference(w, HashNgramProvider(dimension=64), [], repetitions=1)


def test_training_from_exported_cache(tmp_path):
    """A cache holding every pooled vector the run needs reproduces the
    hash-provider results exactly; a missing key fails fast."""
    from lexidga.embed import CacheMiss, EmbeddingCache, save_cache
    from lexidga.experiment import _Pipeline

    cfg = _tiny_cfg(observation_counts=(10,), families=("pizd",))
    hash_result = run_single_dga(cfg, "pizd")

    # collect every core the experiment touches and pre-export it
    pipe = _Pipeline(cfg)
    benign = pipe.benign_pool()
    pool = pipe.family_pool("pizd", 10, exclude=set(benign))
    entries = {}
    for core in benign + pool:
        tokens = pipe.tokens(core)
        entries[" ".join(tokens)] = pipe.provider.embed_tokens(tokens).astype(np.float32)
    cache_path = tmp_path / "full.bin"
    save_cache(EmbeddingCache(dimension=cfg.dimension, entries=entries), cache_path)

    cached_cfg = _tiny_cfg(observation_counts=(10,), families=("pizd",),
                           provider=f"cache:{cache_path}")
    cached_result = run_single_dga(cached_cfg, "pizd")
    # float32 round-trip of float64 hash vectors shifts scores a hair, so
    # compare the confusion counts and AUC loosely rather than bitwise
    assert cached_result.reports[10].auc == pytest.approx(
        hash_result.reports[10].auc, abs=0.05)

    # drop one key: training data is no longer fully pre-exported
    victim = " ".join(pipe.tokens(pool[0]))
    del entries[victim]
    partial_path = tmp_path / "partial.bin"
    save_cache(EmbeddingCache(dimension=cfg.dimension, entries=entries), partial_path)
    broken_cfg = _tiny_cfg(observation_counts=(10,), families=("pizd",),
                           provider=f"cache:{partial_path}")
    with pytest.raises(CacheMiss):
        run_single_dga(broken_cfg, "pizd")


def test_scaled_benign_counts():
    cfg = ExperimentConfig(benign_scale=0.1)
    assert cfg.scaled_benign() == (1400, 300, 300)
    assert ExperimentConfig().scaled_benign() == (14000, 3000, 3000)
