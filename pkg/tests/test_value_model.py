import json

import numpy as np
import pytest

from f2c import ffsim, trajgen, value_model
from f2c.env import Action
from f2c.value_model import (
    FeatureSpec,
    TrainConfig,
    ValueNet,
    build_training_set,
    featurize,
    forward,
    init_value_net,
    load_weights,
    mc_loss,
    save_weights,
    td_loss,
    train,
)


def tiny_net(spec, seed=0, act="tanh"):
    return init_value_net(spec, hidden=(5, 4), seed=seed, activation=act)


def test_featurize_identity_empty_history():
    spec = FeatureSpec(3)
    x = featurize(ffsim.identity_state(3), [], 0, spec)
    assert x.shape == (spec.dim,)
    assert np.allclose(x[:3], 0)  # angles
    assert x[3] == 0  # phi
    assert x[4] == 1.0  # fidelity
    assert np.allclose(x[5:], 0)


def test_featurize_single_rotation_leading_angle():
    spec = FeatureSpec(3)
    s = ffsim.identity_state(3)
    r = s.R.copy()
    th = 0.3
    r[0, 0] = r[1, 1] = np.cos(th)
    r[0, 1], r[1, 0] = -np.sin(th), np.sin(th)
    x = featurize(ffsim.FFState(3, r), [], 0, spec)
    assert x[0] == pytest.approx(0.3, abs=1e-12)
    assert x[3] == pytest.approx(0.09, abs=1e-12)


def test_featurize_angle_only_difference():
    # two actions differing only in k: features differ only in the
    # angle-value coordinate of the last-action slot
    spec = FeatureSpec(3)
    s = ffsim.identity_state(3)
    a1, a2 = Action("XX", 0, 1, 5), Action("XX", 0, 1, 6)
    x1 = featurize(s, [a1], 1, spec)
    x2 = featurize(s, [a2], 1, spec)
    differing = np.nonzero(x1 != x2)[0]
    base = spec.n + 2 + 5 + 1 + (spec.m - 1) * value_model.ACTION_ENC_DIM
    # angle coordinate (offset 5) and global-index coordinate (offset 8)
    assert set(differing) <= {base + 5, base + 8}
    assert base + 5 in set(differing)


def test_featurize_history_counts_and_step():
    spec = FeatureSpec(3)
    hist = [Action("Z", 0, 1, 1), Action("Z", 1, -1, 2), Action("XY", 0, 1, 3)]
    x = featurize(ffsim.identity_state(3), hist, 3, spec)
    counts = x[spec.n + 2 : spec.n + 7]
    assert counts[ffsim.KINDS.index("Z")] == 2
    assert counts[ffsim.KINDS.index("XY")] == 1
    assert x[spec.n + 7] == pytest.approx(3 / spec.h_max)


def test_mc_loss_zero_at_joint_optimum():
    spec = FeatureSpec(3)
    net = tiny_net(spec)
    x = np.zeros(spec.dim)
    v = float(forward(net, x))
    net.alpha = v  # anchor matches V at phi = 0
    assert mc_loss(net, x, np.array([v]), np.array([0.0])) == pytest.approx(0.0)


def test_mc_loss_huber_quadratic_branch():
    spec = FeatureSpec(3)
    net = tiny_net(spec)
    x = np.zeros(spec.dim)
    v = float(forward(net, x))
    net.alpha = v
    # V - G = 0.5 with delta 1 and zero regularizer residual: loss 0.125
    assert mc_loss(net, x, np.array([v - 0.5]), np.array([0.0])) == pytest.approx(0.125)


def test_td_loss_terminal_target():
    spec = FeatureSpec(3)
    net = tiny_net(spec)
    x = np.zeros(spec.dim)
    v = float(forward(net, x))
    loss = td_loss(net, x, x, np.array([True]))
    r = v - (-1.0)
    expect = 0.5 * r * r if abs(r) <= 1 else abs(r) - 0.5
    assert loss == pytest.approx(expect)


def test_td_target_bootstraps_next_value():
    spec = FeatureSpec(3)
    net = tiny_net(spec)
    x = np.zeros(spec.dim)
    xn = np.ones(spec.dim)
    vn = float(forward(net, xn))
    v = float(forward(net, x))
    loss = td_loss(net, x, xn, np.array([False]), delta=100.0)
    assert loss == pytest.approx(0.5 * (v - (-1 + vn)) ** 2)


def _flatten_params(net):
    parts = [np.concatenate([l.w.ravel(), l.b]) for l in net.layers]
    return np.concatenate(parts + [[net.alpha, net.beta]])


def _set_params(net, vec):
    pos = 0
    for l in net.layers:
        size = l.w.size
        l.w = vec[pos : pos + size].reshape(l.w.shape).copy()
        pos += size
        l.b = vec[pos : pos + l.b.size].copy()
        pos += l.b.size
    net.alpha = float(vec[pos])
    net.beta = float(vec[pos + 1])


def _fd_check(loss_fn, grad_fn, net, step=1e-5, rel_tol=1e-5):
    base = _flatten_params(net)
    analytic = grad_fn()
    num = np.zeros_like(base)
    for i in range(base.size):
        bumped = base.copy()
        bumped[i] = base[i] + step
        _set_params(net, bumped)
        up = loss_fn()
        bumped[i] = base[i] - step
        _set_params(net, bumped)
        down = loss_fn()
        num[i] = (up - down) / (2 * step)
    _set_params(net, base)
    scale = np.maximum(np.abs(analytic), np.abs(num)).max()
    err = np.abs(analytic - num).max()
    assert err <= rel_tol * max(scale, 1.0), (err, scale)


def _mc_grad_vector(net, x, g, phi, delta=1.0, use_reg=True):
    loss, grads, da, db = value_model._mc_grads(net, x, g, phi, delta, use_reg)
    parts = [np.concatenate([dw.ravel(), db_]) for dw, db_ in grads]
    return np.concatenate(parts + [[da, db]])


def _td_grad_vector(net, x, xn, done, delta=1.0):
    loss, grads = value_model._td_grads(net, x, xn, done, delta)
    parts = [np.concatenate([dw.ravel(), db_]) for dw, db_ in grads]
    return np.concatenate(parts + [[0.0, 0.0]])


def test_mc_gradients_match_finite_differences(rng):
    spec = FeatureSpec(2, m=2)
    for trial in range(3):
        net = tiny_net(spec, seed=trial)
        x = rng.normal(size=(4, spec.dim))
        g = rng.normal(size=4) - 2
        phi = rng.uniform(0, 3, size=4)
        _fd_check(
            lambda: mc_loss(net, x, g, phi),
            lambda: _mc_grad_vector(net, x, g, phi),
            net,
        )


def test_td_gradients_match_finite_differences(rng):
    # gradients are semi-gradients: the bootstrap target is frozen, so the
    # finite-difference loss must hold it fixed too
    spec = FeatureSpec(2, m=2)
    for trial in range(3):
        net = tiny_net(spec, seed=10 + trial)
        x = rng.normal(size=(4, spec.dim))
        xn = rng.normal(size=(4, spec.dim))
        done = rng.uniform(size=4) < 0.5
        target = value_model.td_targets(net, xn, done)
        _fd_check(
            lambda: float(
                value_model.huber(forward(net, x) - target, 1.0).mean()
            ),
            lambda: _td_grad_vector(net, x, xn, done),
            net,
        )


def test_regularizer_optimum_is_least_squares_fit(rng):
    # for fixed V the mc loss is minimized over (alpha, beta) at the
    # least-squares fit of V against phi
    spec = FeatureSpec(2, m=2)
    net = tiny_net(spec, seed=3)
    x = rng.normal(size=(32, spec.dim))
    g = rng.normal(size=32)
    phi = rng.uniform(0, 4, size=32)
    v = forward(net, x)
    design = np.stack([np.ones_like(phi), phi], axis=1)
    alpha_star, beta_star = np.linalg.lstsq(design, v, rcond=None)[0]
    # gradient descent on (alpha, beta) alone reaches the same point
    for _ in range(8000):
        _, _, da, db = value_model._mc_grads(net, x, g, phi, 1.0, True)
        net.alpha -= 0.05 * da
        net.beta -= 0.05 * db
    assert net.alpha == pytest.approx(alpha_star, abs=1e-6)
    assert net.beta == pytest.approx(beta_star, abs=1e-6)


def test_train_fits_constant_labels():
    episodes = trajgen.sample_episodes(3, 40, seed=8, length_range=(3, 3))
    spec = FeatureSpec(3)
    data = build_training_set(episodes, spec)
    data.g[:] = -2.0
    cfg = TrainConfig(mc_epochs=100, lr=1e-2, seed=0, hidden=(32,))
    net, trace = train(data, cfg)
    assert trace[-1]["loss"] < 0.05
    assert trace[-1]["loss"] < trace[0]["loss"]


def test_train_deterministic():
    episodes = trajgen.sample_episodes(3, 20, seed=8, length_range=(2, 6))
    data = build_training_set(episodes, FeatureSpec(3))
    cfg = TrainConfig(mc_epochs=5, seed=42, hidden=(16,))
    net1, _ = train(data, cfg)
    net2, _ = train(data, cfg)
    for l1, l2 in zip(net1.layers, net2.layers):
        assert np.array_equal(l1.w, l2.w) and np.array_equal(l1.b, l2.b)
    assert (net1.alpha, net1.beta) == (net2.alpha, net2.beta)


def test_no_geometric_reg_changes_training():
    episodes = trajgen.sample_episodes(3, 20, seed=8, length_range=(2, 6))
    data = build_training_set(episodes, FeatureSpec(3))
    base = TrainConfig(mc_epochs=5, seed=42, hidden=(16,))
    ablated = TrainConfig(mc_epochs=5, seed=42, hidden=(16,), use_geometric_reg=False)
    net1, _ = train(data, base)
    net2, _ = train(data, ablated)
    assert not np.array_equal(net1.layers[0].w, net2.layers[0].w)
    # without the anchor, (alpha, beta) receive no gradient at all
    assert (net2.alpha, net2.beta) == (0.0, 0.0)


def test_td_phase_runs_after_mc():
    episodes = trajgen.sample_episodes(3, 20, seed=8, length_range=(2, 6))
    data = build_training_set(episodes, FeatureSpec(3))
    cfg = TrainConfig(mc_epochs=3, td_epochs=2, seed=0, hidden=(16,))
    _, trace = train(data, cfg)
    assert [r["phase"] for r in trace] == ["mc"] * 3 + ["td"] * 2


def test_save_load_roundtrip(tmp_path, rng):
    spec = FeatureSpec(3)
    net = init_value_net(spec, hidden=(8, 8), seed=1)
    net.alpha, net.beta = -0.5, 1.25
    path = tmp_path / "net.json"
    save_weights(net, path)
    loaded = load_weights(path, spec)
    x = rng.normal(size=(100, spec.dim))
    assert np.array_equal(forward(net, x), forward(loaded, x))
    assert loaded.alpha == -0.5 and loaded.beta == 1.25


def test_load_rejects_hash_mismatch(tmp_path):
    net = init_value_net(FeatureSpec(3), hidden=(4,), seed=1)
    path = tmp_path / "net.json"
    save_weights(net, path)
    with pytest.raises(ValueError, match="feature spec"):
        load_weights(path, FeatureSpec(4))


def test_load_handbuilt_golden_file(tmp_path):
    # a file written from scratch per the documented format must load and predict
    spec = FeatureSpec(2, m=1)
    doc = {
        "format": "f2-valuenet",
        "version": 1,
        "feature_spec_hash": spec.hash,
        "alpha": 0.0,
        "beta": 2.0,
        "layers": [
            {
                "rows": 1,
                "cols": spec.dim,
                "w": [0.0] * spec.dim,
                "b": [-3.0],
                "act": "identity",
            }
        ],
    }
    path = tmp_path / "hand.json"
    path.write_text(json.dumps(doc))
    net = load_weights(path, spec)
    assert forward(net, np.zeros(spec.dim)) == pytest.approx(-3.0)


def test_load_rejects_wrong_format(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "other", "version": 1}')
    with pytest.raises(ValueError):
        load_weights(path)


def test_feature_spec_hash_stability():
    # pinned so external tools can reproduce it from the documented formula
    assert FeatureSpec(6).hash == FeatureSpec(6, m=8, h_max=100).hash
    assert FeatureSpec(6).hash != FeatureSpec(7).hash
    assert len(FeatureSpec(6).hash) == 16
