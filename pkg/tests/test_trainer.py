import numpy as np
import pytest

from conftest import er_graph
from orbalign.errors import DimensionError, TrainingError
from orbalign.orbits import count_orbits_fast
from orbalign.spectral import build_laplacians
from orbalign.trainer import TrainConfig, train


def setup(seed=0, n=25):
    rng = np.random.default_rng(seed)
    g_s, g_t = er_graph(n, 0.2, rng), er_graph(n, 0.2, rng)
    laps_s = build_laplacians(count_orbits_fast(g_s))
    laps_t = build_laplacians(count_orbits_fast(g_t))
    return laps_s, laps_t, rng.standard_normal((n, 6)), rng.standard_normal((n, 6))


SMALL = TrainConfig(epochs=30, hidden_dims=(16, 16), seed=3)


def test_identical_inputs_give_identical_embeddings_every_epoch():
    laps, _, x, _ = setup(1)
    seen = []

    def check(epoch, params, emb):
        for hs, ht in zip(emb.source, emb.target):
            np.testing.assert_array_equal(hs, ht)
        seen.append(epoch)

    res = train(laps, laps, x, x.copy(), SMALL, on_epoch=check)
    assert seen == list(range(30))
    for hs, ht in zip(res.embeddings.source, res.embeddings.target):
        np.testing.assert_array_equal(hs, ht)


def test_loss_decreases_over_training():
    laps_s, laps_t, x_s, x_t = setup(2)
    res = train(laps_s, laps_t, x_s, x_t, TrainConfig(epochs=200, hidden_dims=(32, 32)))
    assert len(res.history) == 200
    assert res.history[-1] < res.history[0]
    assert min(res.history) < 0.5 * res.history[0]


def test_single_parameter_set_shared_by_all_orbits():
    laps_s, laps_t, x_s, x_t = setup(3)
    res = train(laps_s, laps_t, x_s, x_t, SMALL)
    assert [w.shape for w in res.params.weights] == [(6, 16), (16, 16)]
    from orbalign.encoder import embed
    for k in range(13):
        np.testing.assert_array_equal(embed(laps_s[k], x_s, res.params), res.embeddings.source[k])


def test_orbit_order_invariance():
    laps_s, laps_t, x_s, x_t = setup(4)
    order = np.random.default_rng(9).permutation(13)
    a = train(laps_s, laps_t, x_s, x_t, SMALL)
    b = train([laps_s[i] for i in order], [laps_t[i] for i in order], x_s, x_t, SMALL)
    for wa, wb in zip(a.params.weights, b.params.weights):
        np.testing.assert_allclose(wb, wa, rtol=1e-9, atol=1e-12)


def test_deterministic_for_fixed_seed():
    laps_s, laps_t, x_s, x_t = setup(5)
    a = train(laps_s, laps_t, x_s, x_t, SMALL)
    b = train(laps_s, laps_t, x_s, x_t, SMALL)
    assert a.history == b.history
    for wa, wb in zip(a.params.weights, b.params.weights):
        np.testing.assert_array_equal(wa, wb)


def test_progress_lines(tmp_path):
    import io
    import json
    laps_s, laps_t, x_s, x_t = setup(6)
    buf = io.StringIO()
    train(laps_s[:2], laps_t[:2], x_s, x_t, TrainConfig(epochs=3, hidden_dims=(4,)), progress=buf)
    rows = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert [r["epoch"] for r in rows] == [0, 1, 2]
    assert len(rows[0]["orbit_loss"]) == 2
    assert rows[0]["total"] == pytest.approx(sum(rows[0]["orbit_loss"]))


def test_divergence_raises_training_error():
    laps_s, laps_t, x_s, x_t = setup(7)
    x_s = x_s.copy()
    x_s[0, 0] = np.inf
    with np.errstate(invalid="ignore"), pytest.raises(TrainingError) as info:
        train(laps_s, laps_t, x_s, x_t, SMALL)
    assert info.value.epoch == 0


def test_mismatched_inputs():
    laps_s, laps_t, x_s, x_t = setup(8)
    with pytest.raises(DimensionError):
        train(laps_s, laps_t[:5], x_s, x_t, SMALL)
    with pytest.raises(DimensionError):
        train(laps_s, laps_t, x_s, x_t[:, :3], SMALL)
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
