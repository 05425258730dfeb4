import math

import numpy as np
import pytest

from lexidga.embed import HashNgramProvider
from lexidga.model import (
    BadMagic,
    ChecksumMismatch,
    TruncatedFile,
    ModelWeights,
    ShapeMismatch,
    SingleClassData,
    TrainConfig,
    TrainResult,
    forward,
    forward_batch,
    gradient,
    init_weights,
    load,
    loss,
    save,
    train,
    train_on_arrays,
)

EPS = 1e-7


def fd_oracle_loss(w1, b1, w2, b2, x, y, sw=None):
    """Independent float64 restatement of the loss for finite differences."""
    z1 = x @ w1.T + b1
    a1 = np.maximum(z1, 0.0)
    p = 1.0 / (1.0 + np.exp(-(a1 @ w2 + b2)))
    p = np.clip(p, EPS, 1.0 - EPS)
    per = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    if sw is not None:
        per = per * sw
    return float(np.mean(per))


def test_forward_zero_weights_is_half():
    w = ModelWeights(w1=np.zeros((4, 3)), b1=np.zeros(4), w2=np.zeros(4), b2=0.0)
    assert forward(np.array([1.0, -2.0, 3.0]), w) == 0.5


def test_forward_reduced_width_oracle():
    # one hidden unit: relu(-3) = 0 so the output is sigmoid(0) = 0.5
    w = ModelWeights(w1=np.array([[1.0, 0.0]]), b1=np.zeros(1),
                     w2=np.array([1.0]), b2=0.0)
    assert forward(np.array([-3.0, 7.0]), w) == 0.5


def test_forward_open_interval():
    w = init_weights(dim=8, hidden=16, seed=0)
    rng = np.random.default_rng(1)
    p = forward_batch(rng.normal(0, 10, (50, 8)), w)
    assert np.all(p > 0.0) and np.all(p < 1.0)


def test_forward_monotone_in_b2():
    x = np.array([0.5, -0.2, 1.0, 0.0])
    w = init_weights(dim=4, hidden=8, seed=3)
    outputs = []
    for b2 in (-1.0, 0.0, 1.0, 2.0):
        outputs.append(forward(x, ModelWeights(w.w1, w.b1, w.w2, b2)))
    assert outputs == sorted(outputs)
    assert len(set(outputs)) == len(outputs)


def test_forward_dimension_mismatch():
    w = init_weights(dim=4, hidden=8, seed=0)
    with pytest.raises(ShapeMismatch):
        forward(np.zeros(5), w)


def _identity_net():
    # two antisymmetric hidden units pass x through: relu(x) - relu(-x) = x
    return ModelWeights(w1=np.array([[1.0], [-1.0]]), b1=np.zeros(2),
                        w2=np.array([1.0, -1.0]), b2=0.0)


def test_loss_half_probability_is_ln2():
    w = ModelWeights(w1=np.zeros((2, 3)), b1=np.zeros(2), w2=np.zeros(2), b2=0.0)
    x = np.zeros((4, 3))
    y = np.array([0, 1, 1, 0])
    assert loss(x, y, w) == pytest.approx(math.log(2), rel=1e-12)


def test_loss_hand_computed_batch():
    w = _identity_net()
    x = np.array([[math.log(9.0)], [math.log(0.25)]])  # sigmoid -> 0.9, 0.2
    y = np.array([1, 0])
    expected = (-math.log(0.9) - math.log(0.8)) / 2
    assert loss(x, y, w) == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(0.1643, abs=1e-4)


def test_loss_perfect_predictions_clamped():
    w = _identity_net()
    x = np.array([[40.0], [-40.0]])  # saturates past the clamp
    y = np.array([1, 0])
    assert loss(x, y, w) <= 1.2e-7


def test_gradient_matches_finite_differences():
    h = 1e-4
    for seed in range(6):
        rng = np.random.default_rng(seed)
        d, hid, n = 8, 8, 8
        w = init_weights(dim=d, hidden=hid, seed=seed)
        x = rng.normal(0, 1, (n, d))
        y = rng.integers(0, 2, n).astype(np.float64)
        sw = rng.uniform(0.5, 2.0, n) if seed % 2 else None
        g = gradient(x, y, w, sw)
        params = {"w1": w.w1.astype(np.float64), "b1": w.b1.astype(np.float64),
                  "w2": w.w2.astype(np.float64), "b2": np.array([float(w.b2)])}
        grads = {"w1": g.w1, "b1": g.b1, "w2": g.w2, "b2": np.array([g.b2])}
        for name, base in params.items():
            analytic = np.atleast_1d(np.asarray(grads[name]))
            for idx in np.ndindex(*base.shape):
                def eval_at(delta):
                    p = {k: v.copy() for k, v in params.items()}
                    p[name][idx] += delta
                    return fd_oracle_loss(p["w1"], p["b1"], p["w2"],
                                          float(p["b2"][0]), x, y, sw)
                numeric = (eval_at(h) - eval_at(-h)) / (2 * h)
                a = analytic.reshape(base.shape)[idx]
                rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
                assert rel < 1e-4, f"{name}{idx}: {rel}"


def test_gradient_b2_zero_at_symmetric_stationary_point():
    w = ModelWeights(w1=np.zeros((4, 2)), b1=np.zeros(4), w2=np.zeros(4), b2=0.0)
    x = np.array([[1.0, 2.0], [-1.0, -2.0]])
    y = np.array([1, 0])  # p = 0.5 everywhere; mean(p - y) = 0
    assert gradient(x, y, w).b2 == 0.0


def test_gradient_w2_zero_in_dead_relu_region():
    w = ModelWeights(w1=-np.ones((3, 2)), b1=np.zeros(3), w2=np.ones(3), b2=0.0)
    x = np.abs(np.random.default_rng(0).normal(1, 0.1, (5, 2)))  # all z1 < 0
    y = np.array([1, 0, 1, 0, 1])
    g = gradient(x, y, w)
    assert np.array_equal(g.w2, np.zeros(3))


def _clusters(seed=0, n=200, d=16, sep=4.0):
    rng = np.random.default_rng(seed)
    x0 = rng.normal(-sep / 2, 1.0, (n, d))
    x1 = rng.normal(+sep / 2, 1.0, (n, d))
    x = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(n, dtype=np.int8), np.ones(n, dtype=np.int8)])
    order = rng.permutation(len(x))
    return x[order], y[order]


def test_train_separates_gaussian_clusters():
    x, y = _clusters(seed=0)
    xv, yv = _clusters(seed=1)
    cfg = TrainConfig(max_epochs=10, patience=10, seed=0, hidden=16)
    result = train_on_arrays(x, y, xv, yv, cfg)
    pred = forward_batch(xv, result.weights) >= 0.5
    assert np.mean(pred == yv) >= 0.99
    assert len(result.history) <= 10


def test_patience_zero_trains_exactly_one_epoch():
    x, y = _clusters(seed=2, n=40)
    cfg = TrainConfig(max_epochs=10, patience=0, seed=0, hidden=8)
    result = train_on_arrays(x, y, x, y, cfg)
    assert len(result.history) == 1
    assert result.best_epoch == 1


def test_single_class_data_rejected():
    x = np.zeros((10, 4))
    y = np.zeros(10, dtype=np.int8)
    with pytest.raises(SingleClassData):
        train_on_arrays(x, y, x, y, TrainConfig(seed=0, hidden=4))


def test_train_deterministic():
    x, y = _clusters(seed=3, n=60)
    cfg = TrainConfig(max_epochs=5, patience=5, seed=42, hidden=8)
    a = train_on_arrays(x, y, x, y, cfg).weights
    b = train_on_arrays(x, y, x, y, cfg).weights
    assert a.w1.tobytes() == b.w1.tobytes()
    assert a.b1.tobytes() == b.b1.tobytes()
    assert a.w2.tobytes() == b.w2.tobytes()
    assert a.b2 == b.b2


def test_early_stopping_returns_best_epoch_weights():
    x, y = _clusters(seed=4, n=80)
    xv, yv = _clusters(seed=5, n=80)
    cfg = TrainConfig(max_epochs=15, patience=15, seed=1, hidden=8)
    result = train_on_arrays(x, y, xv, yv, cfg)
    # returned weights realize the minimum recorded validation loss
    recorded = result.history[result.best_epoch - 1]["val_loss"]
    assert all(recorded <= h["val_loss"] for h in result.history)


def test_train_config_invariants():
    with pytest.raises(ValueError):
        TrainConfig(max_epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(max_epochs=5, patience=6)


def test_frozen_provider_through_train():
    provider = HashNgramProvider(dimension=32)
    fingerprint = provider.state_fingerprint()

    class Ex:
        def __init__(self, core, label):
            self.domain = type("D", (), {"core": core})()
            self.label = label

    examples = [Ex("middleapple", "dga"), Ex("alphabeta", "dga"),
                Ex("google", "benign"), Ex("wikipedia", "benign")]
    tokenizer = lambda core: (core[:3], core[3:])
    result = train(examples, examples, provider, TrainConfig(
        max_epochs=3, patience=3, seed=0, hidden=4), tokenizer)
    assert provider.state_fingerprint() == fingerprint
    assert isinstance(result, TrainResult)


def test_parameter_count():
    w = init_weights(dim=1024, hidden=128, seed=0)
    assert w.n_parameters == 128 * 1024 + 128 + 128 + 1


def test_save_load_round_trip_bit_exact(tmp_path):
    w = init_weights(dim=12, hidden=6, seed=9)
    w.b2 = np.float32(0.125)
    path = tmp_path / "m.bin"
    save(w, path)
    w2 = load(path)
    assert w2.w1.tobytes() == w.w1.tobytes()
    assert w2.b1.tobytes() == w.b1.tobytes()
    assert w2.w2.tobytes() == w.w2.tobytes()
    assert w2.b2 == w.b2
    assert w2.dimension == 12 and w2.hidden == 6


def test_load_bad_magic(tmp_path):
    path = tmp_path / "m.bin"
    path.write_bytes(b"WRONGMAG" + b"\x00" * 64)
    with pytest.raises(BadMagic):
        load(path)


def test_load_truncated(tmp_path):
    path = tmp_path / "m.bin"
    save(init_weights(dim=4, hidden=3, seed=0), path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(TruncatedFile):
        load(path)


def test_load_checksum_mismatch(tmp_path):
    path = tmp_path / "m.bin"
    save(init_weights(dim=4, hidden=3, seed=0), path)
    data = bytearray(path.read_bytes())
    data[20] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(ChecksumMismatch):
        load(path)


def test_load_dimension_check(tmp_path):
    path = tmp_path / "m.bin"
    save(init_weights(dim=4, hidden=3, seed=0), path)
    with pytest.raises(ShapeMismatch):
        load(path, expect_dimension=1024)
