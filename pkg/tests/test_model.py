import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from egogate.errors import EgogateError, TrainingError
from egogate.imbalance import ClassWeights
from egogate.metrics import evaluate
from egogate.model import (
    ClassifierHead,
    TrainConfig,
    dropout_masks,
    forward,
    load_model,
    loss_and_grads,
    predict_proba,
    save_model,
    softmax2,
    train,
    weighted_ce_loss,
)
from oracles import numeric_grad, separable_features, separation_margin


# -- softmax / loss ----------------------------------------------------------


def test_softmax_examples():
    np.testing.assert_allclose(softmax2([0.0, 0.0]), [0.5, 0.5])
    np.testing.assert_allclose(softmax2([0.0, math.log(3)]), [0.25, 0.75], rtol=1e-12)
    p = softmax2([1000.0, 0.0])
    assert np.all(np.isfinite(p))
    assert p[0] == pytest.approx(1.0) and p[1] == pytest.approx(0.0, abs=1e-300)


@given(st.floats(-500, 500), st.floats(-500, 500), st.floats(-100, 100))
def test_softmax_sums_to_one_and_shift_invariant(a, b, c):
    p = softmax2([a, b])
    assert abs(p.sum() - 1.0) <= 1e-12
    np.testing.assert_allclose(softmax2([a + c, b + c]), p, atol=1e-12)


def test_loss_examples():
    assert weighted_ce_loss([0.0, 800.0], 1) == pytest.approx(0.0, abs=1e-300)
    assert weighted_ce_loss([0.0, 0.0], 1, (5.6577, 0.5485)) == pytest.approx(0.5485 * math.log(2))
    assert weighted_ce_loss([0.0, 0.0], 1, (5.6577, 0.5485)) == pytest.approx(0.38020, abs=1e-4)
    for y in (0, 1):
        assert weighted_ce_loss([0.0, 0.0], y) == pytest.approx(math.log(2))


def test_loss_is_batch_mean():
    z = np.array([[0.0, 0.0], [2.0, -1.0]])
    y = np.array([1, 0])
    per = [0.5485 * math.log(2), 5.6577 * -math.log(softmax2(z[1])[0])]
    assert weighted_ce_loss(z, y, (5.6577, 0.5485)) == pytest.approx(np.mean(per))


def test_loss_matches_unweighted_binary_ce():
    # -[y log f + (1-y) log(1-f)] with f = P(C1)
    z = np.array([0.3, -1.2])
    f = softmax2(z)[1]
    assert weighted_ce_loss(z, 1) == pytest.approx(-math.log(f))
    assert weighted_ce_loss(z, 0) == pytest.approx(-math.log(1 - f))


def test_loss_stable_for_extreme_logits():
    assert weighted_ce_loss([1000.0, -1000.0], 1) == pytest.approx(2000.0)


# -- forward -----------------------------------------------------------------


def test_zero_head_gives_zero_logits(rng):
    head = ClassifierHead.zeros(128)
    np.testing.assert_array_equal(forward(head, rng.standard_normal(128)), [0.0, 0.0])
    np.testing.assert_allclose(predict_proba(head, rng.standard_normal((5, 128))), 0.5)


def test_forward_deterministic_in_inference(rng):
    head = ClassifierHead.initialize(128, seed=1)
    x = rng.standard_normal(128)
    np.testing.assert_array_equal(forward(head, x), forward(head, x))


def test_toy_head_by_hand():
    head = ClassifierHead(
        weights=[np.array([[1.0], [-2.0]]), np.array([[3.0, -1.0]])],
        biases=[np.array([0.5]), np.array([0.1, 0.2])],
        dropout_rates=(0.5,),
    )
    # x=(2, 0.5): h = relu(2 - 1 + 0.5) = 1.5 -> z = (4.5 + 0.1, -1.5 + 0.2)
    np.testing.assert_allclose(forward(head, [2.0, 0.5]), [4.6, -1.3])
    # x=(0, 1): pre-activation -1.5 is rectified away
    np.testing.assert_allclose(forward(head, [0.0, 1.0]), [0.1, 0.2])


def test_dropout_training_mode(rng):
    head = ClassifierHead.initialize(16, seed=2)
    x = rng.standard_normal((4, 16))
    a = forward(head, x, training=True, dropout_seed=5)
    b = forward(head, x, training=True, dropout_seed=5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, forward(head, x))
    for mask, p in zip(dropout_masks(head, 200, np.random.default_rng(0)), head.dropout_rates):
        assert set(np.unique(mask)) <= {0.0, 1.0 / (1.0 - p)}
        assert np.mean(mask == 0) == pytest.approx(p, abs=0.02)


def test_forward_rejects_bad_input():
    head = ClassifierHead.initialize(8, (4,), (0.1,), seed=0)
    with pytest.raises(ValueError):
        forward(head, np.zeros(9))
    head.weights[0][0, 0] = np.nan
    with pytest.raises(ValueError):
        forward(head, np.zeros(8))


def test_head_layer_dims():
    head = ClassifierHead.initialize(128, seed=0)
    assert head.layer_dims == (128, 256, 384, 192, 384, 2)
    assert head.dropout_rates == (0.15, 0.2, 0.25, 0.2)


# -- gradients ---------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    head = ClassifierHead.initialize(8, (4, 6, 3, 6), seed=seed)
    for p in head.biases:
        p[:] = rng.normal(0, 0.3, p.shape)
    X = rng.standard_normal((5, 8))
    y = rng.integers(0, 2, 5)
    w = tuple(rng.uniform(0.2, 5.0, 2))
    masks = dropout_masks(head, 5, rng)
    _, analytic = loss_and_grads(head, X, y, w, masks)
    numeric = numeric_grad(lambda: loss_and_grads(head, X, y, w, masks)[0], head.params())
    for a, n in zip(analytic, numeric):
        np.testing.assert_allclose(a, n, rtol=1e-4, atol=1e-8)


# -- training ----------------------------------------------------------------


def test_zero_learning_rate_is_null_update():
    X, y = separable_features(64, 0.25, dim=6, seed=0)
    start = ClassifierHead.initialize(6, (8, 8), (0.1, 0.1), seed=0)
    for wd in (0.0, 0.01):
        cfg = TrainConfig(learning_rate=0.0, weight_decay=wd, epochs=2,
                          hidden_dims=(8, 8), dropout_rates=(0.1, 0.1))
        head, _ = train(X, y, cfg, head=start)
        for a, b in zip(head.params(), start.rounded_to_float32().params()):
            np.testing.assert_array_equal(a, b)


def test_weight_decay_alone_shrinks_parameters():
    # a zero-gradient setting: zero head, decay applies p -= lr*wd*p which keeps zeros at zero,
    # so instead check one AdamW step with a zero gradient scales parameters by (1 - lr*wd)
    from egogate.model import AdamW
    p = [np.array([1.0, -2.0])]
    opt = AdamW(p, lr=0.1, weight_decay=0.5)
    opt.step([np.zeros(2)])
    np.testing.assert_allclose(p[0], [0.95, -1.9])


def test_training_reaches_high_f1_on_separable_data():
    X, y = separable_features(600, 0.2, dim=8, seed=1)
    assert separation_margin(X, y) > 0
    cfg = TrainConfig(epochs=20, seed=3)
    head, log = train(X, y, cfg, ClassWeights())
    assert len(log.epoch_losses) == 20
    assert log.epoch_losses[-1] < log.epoch_losses[0]
    Xt, yt = separable_features(600, 0.2, dim=8, seed=2)
    m = evaluate(predict_proba(head, Xt), yt, tau=0.5)
    assert m.c1.f1 >= 0.95 and m.c0.f1 >= 0.95


def test_training_deterministic():
    X, y = separable_features(200, 0.3, dim=4, seed=0)
    cfg = TrainConfig(epochs=3, seed=9, hidden_dims=(8, 8), dropout_rates=(0.2, 0.2))
    a, la = train(X, y, cfg)
    b, lb = train(X, y, cfg)
    assert la.epoch_losses == lb.epoch_losses
    for p, q in zip(a.params(), b.params()):
        np.testing.assert_array_equal(p, q)


def test_training_rejects_single_class():
    with pytest.raises(TrainingError, match="both classes"):
        train(np.zeros((10, 3)), np.ones(10))


def test_training_aborts_on_nan():
    X, y = separable_features(50, 0.3, dim=3, seed=0)
    X[0, 0] = np.nan
    with pytest.raises(TrainingError, match="loss became"):
        train(X, y, TrainConfig(epochs=1, hidden_dims=(4,), dropout_rates=(0.1,)))


# -- model file --------------------------------------------------------------


def test_model_roundtrip(tmp_path):
    head = ClassifierHead.initialize(128, seed=4).rounded_to_float32()
    save_model(tmp_path / "m.egm", head)
    raw = (tmp_path / "m.egm").read_bytes()
    assert raw[:8] == b"EGOGATE1"
    back = load_model(tmp_path / "m.egm")
    assert back.layer_dims == head.layer_dims
    assert back.dropout_rates == head.dropout_rates
    for a, b in zip(head.params(), back.params()):
        np.testing.assert_array_equal(a, b)


def test_model_file_layout(tmp_path):
    head = ClassifierHead([np.array([[1.0, 2.0, 3.0]]).T @ np.ones((1, 2))],
                          [np.array([0.5, -0.5])], ())
    save_model(tmp_path / "t.egm", head)
    raw = (tmp_path / "t.egm").read_bytes()
    # magic, feat=3, layers=1, out=2, ndrop=0, W (3x2 row-major), b
    expected = (b"EGOGATE1" + np.array([3, 1, 2, 0], "<u4").tobytes()
                + np.array([1, 1, 2, 2, 3, 3, 0.5, -0.5], "<f4").tobytes())
    assert raw == expected


def test_model_load_rejects_garbage(tmp_path):
    (tmp_path / "g.egm").write_bytes(b"NOTAMODEL")
    with pytest.raises(EgogateError):
        load_model(tmp_path / "g.egm")
    head = ClassifierHead.initialize(4, (3,), (0.1,), seed=0)
    save_model(tmp_path / "t.egm", head)
    (tmp_path / "t.egm").write_bytes((tmp_path / "t.egm").read_bytes()[:-3])
    with pytest.raises(EgogateError):
        load_model(tmp_path / "t.egm")
