"""Trainable value function over (state, action history).

Features are engineered rather than learned: the state contributes its
canonical angles (sorted by magnitude), geometric distance phi and fidelity;
the history contributes per-kind action counts, the normalized step index and
a compositional encoding of the last m actions in which kind, angle, Pauli
weight, site and global alphabet index occupy separate coordinates.  Actions
that differ only in one component therefore differ in few coordinates.

Training minimizes Huber(V - G) plus the learned geometric anchor
(V - (alpha + beta * phi))^2 during the Monte Carlo phase; the optional TD
phase bootstraps one-step targets without the anchor and without discounting.
All gradients are hand-rolled numpy so they can be checked against finite
differences.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from . import ffsim
from .env import KINDS, Action, alphabet

FORMAT_NAME = "f2-valuenet"
FORMAT_VERSION = 1
FEATURE_VERSION = 1
ACTION_ENC_DIM = 9  # kind one-hot (5) + angle + weight + site/n + index/|A|
_ACTIVATIONS = ("relu", "tanh", "identity")


@dataclass(frozen=True)
class FeatureSpec:
    """Pins the feature layout; hashed into weight files."""

    n: int
    m: int = 8  # history window
    h_max: int = 100

    @property
    def dim(self) -> int:
        return self.n + 2 + len(KINDS) + 1 + ACTION_ENC_DIM * self.m

    @property
    def hash(self) -> str:
        key = f"f2-features:v{FEATURE_VERSION}:n={self.n}:m={self.m}:h_max={self.h_max}"
        return hashlib.sha256(key.encode()).hexdigest()[:16]


def encode_action(a: Action, n: int, index: int, n_actions: int) -> np.ndarray:
    out = np.zeros(ACTION_ENC_DIM)
    out[KINDS.index(a.kind)] = 1.0
    out[5] = a.angle
    out[6] = 1.0 if a.kind == "Z" else 2.0
    out[7] = a.site / n
    out[8] = index / n_actions
    return out


def action_encoding_table(n: int) -> np.ndarray:
    """(|A|, ACTION_ENC_DIM) encodings for the whole alphabet, in index order."""
    acts = alphabet(n)
    return np.stack([encode_action(a, n, i, len(acts)) for i, a in enumerate(acts)])


def featurize_parts(
    angles: np.ndarray,
    fid: float,
    history,
    t: int,
    spec: FeatureSpec,
    index_of: dict[Action, int],
    enc_table: np.ndarray,
) -> np.ndarray:
    """Assemble the feature vector from precomputed canonical angles."""
    x = np.zeros(spec.dim)
    x[: spec.n] = angles
    x[spec.n] = float(np.dot(angles, angles))
    x[spec.n + 1] = fid
    base = spec.n + 2
    for a in history:
        x[base + KINDS.index(a.kind)] += 1.0
    x[base + 5] = t / spec.h_max
    tail = history[-spec.m :]
    off = base + 6 + (spec.m - len(tail)) * ACTION_ENC_DIM
    for a in tail:
        x[off : off + ACTION_ENC_DIM] = enc_table[index_of[a]]
        off += ACTION_ENC_DIM
    return x


def featurize(s: ffsim.FFState, history, t: int, spec: FeatureSpec) -> np.ndarray:
    """Feature vector for a state plus the actions taken to reach it."""
    form = ffsim.canonical_form(s)
    return featurize_parts(
        form.angles,
        ffsim.fidelity_from_angles(form.angles),
        list(history),
        t,
        spec,
        alphabet_index_cached(spec.n),
        action_encoding_table_cached(spec.n),
    )


_IDX_CACHE: dict[int, dict[Action, int]] = {}
_ENC_CACHE: dict[int, np.ndarray] = {}


def alphabet_index_cached(n: int) -> dict[Action, int]:
    if n not in _IDX_CACHE:
        _IDX_CACHE[n] = {a: i for i, a in enumerate(alphabet(n))}
    return _IDX_CACHE[n]


def action_encoding_table_cached(n: int) -> np.ndarray:
    if n not in _ENC_CACHE:
        _ENC_CACHE[n] = action_encoding_table(n)
    return _ENC_CACHE[n]


# ------------------------------------------------------------------- network


@dataclass
class Layer:
    w: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)
    act: str

    def __post_init__(self):
        if self.act not in _ACTIVATIONS:
            raise ValueError(f"unsupported activation {self.act!r}")


@dataclass
class ValueNet:
    layers: list[Layer]
    alpha: float
    beta: float
    feature_spec_hash: str

    @property
    def in_dim(self) -> int:
        return self.layers[0].w.shape[1]


def init_value_net(
    spec: FeatureSpec, hidden=(256, 256), seed: int = 0, activation: str = "relu"
) -> ValueNet:
    rng = np.random.default_rng(seed)
    widths = [spec.dim, *hidden, 1]
    layers = []
    for i in range(len(widths) - 1):
        fan_in = widths[i]
        w = rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(widths[i + 1], fan_in))
        b = np.zeros(widths[i + 1])
        act = activation if i < len(widths) - 2 else "identity"
        layers.append(Layer(w, b, act))
    return ValueNet(layers, alpha=0.0, beta=0.0, feature_spec_hash=spec.hash)


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _act_grad(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (z > 0.0).astype(z.dtype)
    if kind == "tanh":
        return 1.0 - np.tanh(z) ** 2
    return np.ones_like(z)


def forward(net: ValueNet, x: np.ndarray) -> np.ndarray:
    """Predictions V for inputs of shape (B, dim) or (dim,)."""
    single = x.ndim == 1
    a = x[None] if single else x
    for layer in net.layers:
        a = _act(a @ layer.w.T + layer.b, layer.act)
    v = a[:, 0]
    return v[0] if single else v


def _forward_cache(net: ValueNet, x: np.ndarray):
    a = x
    zs, acts = [], [x]
    for layer in net.layers:
        z = a @ layer.w.T + layer.b
        a = _act(z, layer.act)
        zs.append(z)
        acts.append(a)
    return a[:, 0], zs, acts


def _backward(net: ValueNet, zs, acts, dv: np.ndarray):
    """Parameter gradients given dL/dV per sample; returns [(dW, db), ...]."""
    grads = [None] * len(net.layers)
    delta = dv[:, None]
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        delta = delta * _act_grad(zs[i], layer.act)
        grads[i] = (delta.T @ acts[i], delta.sum(axis=0))
        if i:
            delta = delta @ layer.w
    return grads


def huber(r: np.ndarray, delta: float) -> np.ndarray:
    absr = np.abs(r)
    return np.where(absr <= delta, 0.5 * r**2, delta * (absr - 0.5 * delta))


def huber_grad(r: np.ndarray, delta: float) -> np.ndarray:
    return np.clip(r, -delta, delta)


def mc_loss(
    net: ValueNet,
    x: np.ndarray,
    g: np.ndarray,
    phi: np.ndarray,
    delta: float = 1.0,
    use_geometric_reg: bool = True,
) -> float:
    """Mean Huber(V - G) + (V - (alpha + beta phi))^2 over the batch."""
    v = forward(net, np.atleast_2d(x))
    g = np.atleast_1d(np.asarray(g, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    loss = huber(v - g, delta)
    if use_geometric_reg:
        loss = loss + (v - (net.alpha + net.beta * phi)) ** 2
    out = float(loss.mean())
    if not math.isfinite(out):
        raise FloatingPointError("non-finite forward pass in mc_loss")
    return out


def _mc_grads(net, x, g, phi, delta, use_reg):
    v, zs, acts = _forward_cache(net, x)
    batch = x.shape[0]
    r1 = v - g
    dv = huber_grad(r1, delta) / batch
    dalpha = dbeta = 0.0
    loss = huber(r1, delta)
    if use_reg:
        r2 = v - (net.alpha + net.beta * phi)
        loss = loss + r2**2
        dv = dv + 2.0 * r2 / batch
        dalpha = float((-2.0 * r2).mean())
        dbeta = float((-2.0 * r2 * phi).mean())
    return float(loss.mean()), _backward(net, zs, acts, dv), dalpha, dbeta


def td_targets(net: ValueNet, x_next: np.ndarray, done_success: np.ndarray) -> np.ndarray:
    """Bootstrap targets -1 + V(next), 0 at successful terminals; no discount.

    Targets are constants with respect to the update (semi-gradient TD): the
    gradient of td_loss flows only through V(S_t).
    """
    done = np.atleast_1d(done_success)
    return -1.0 + np.where(done, 0.0, forward(net, np.atleast_2d(x_next)))


def td_loss(
    net: ValueNet,
    x: np.ndarray,
    x_next: np.ndarray,
    done_success: np.ndarray,
    delta: float = 1.0,
) -> float:
    """Huber TD error against the frozen bootstrap targets."""
    v = forward(net, np.atleast_2d(x))
    return float(huber(v - td_targets(net, x_next, done_success), delta).mean())


def _td_grads(net, x, x_next, done, delta):
    target = td_targets(net, x_next, done)
    v, zs, acts = _forward_cache(net, x)
    r = v - target
    dv = huber_grad(r, delta) / x.shape[0]
    return float(huber(r, delta).mean()), _backward(net, zs, acts, dv)


# ------------------------------------------------------------------ training


@dataclass(frozen=True)
class TrainConfig:
    huber_delta: float = 1.0
    lr: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 128
    mc_epochs: int = 30
    td_epochs: int = 0
    seed: int = 0
    use_geometric_reg: bool = True
    hidden: tuple[int, ...] = (256, 256)

    def __post_init__(self):
        if self.huber_delta <= 0:
            raise ValueError("huber delta must be positive")


@dataclass
class TrainingSet:
    spec: FeatureSpec
    x: np.ndarray
    g: np.ndarray
    phi: np.ndarray
    x_next: np.ndarray
    done_success: np.ndarray


def build_training_set(episodes, spec: FeatureSpec) -> TrainingSet:
    """Featurize every frame of every episode (labels, phi, TD successors)."""
    from . import trajgen

    idx = alphabet_index_cached(spec.n)
    enc = action_encoding_table_cached(spec.n)
    xs, gs, phis, xns, dones = [], [], [], [], []
    for e in episodes:
        frs = trajgen.frames(e)
        hist: list[Action] = []
        for fr in frs:
            ang = ffsim.canonical_angles(fr.state.R)
            xs.append(
                featurize_parts(
                    ang, ffsim.fidelity_from_angles(ang), hist, fr.t, spec, idx, enc
                )
            )
            gs.append(fr.g)
            phis.append(float(np.dot(ang, ang)))
            hist = hist + [fr.action]
            ang_n = ffsim.canonical_angles(fr.next_state.R)
            xns.append(
                featurize_parts(
                    ang_n,
                    ffsim.fidelity_from_angles(ang_n),
                    hist,
                    fr.t + 1,
                    spec,
                    idx,
                    enc,
                )
            )
            dones.append(fr.t + 1 == len(e.actions))
    return TrainingSet(
        spec,
        np.array(xs),
        np.array(gs, dtype=float),
        np.array(phis),
        np.array(xns),
        np.array(dones),
    )


class TrainingDiverged(RuntimeError):
    pass


def train(data: TrainingSet, cfg: TrainConfig) -> tuple[ValueNet, list[dict]]:
    """MC pretraining then optional TD refinement; returns (net, loss trace)."""
    if data.x.shape[0] == 0:
        raise ValueError("empty training set")
    net = init_value_net(data.spec, hidden=cfg.hidden, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed + 1)
    vel = [(np.zeros_like(l.w), np.zeros_like(l.b)) for l in net.layers]
    vel_ab = [0.0, 0.0]
    trace: list[dict] = []

    def sgd_step(grads, dalpha, dbeta):
        for i, (dw, db) in enumerate(grads):
            vw, vb = vel[i]
            vw *= cfg.momentum
            vw += dw
            vb *= cfg.momentum
            vb += db
            net.layers[i].w -= cfg.lr * vw
            net.layers[i].b -= cfg.lr * vb
        vel_ab[0] = cfg.momentum * vel_ab[0] + dalpha
        vel_ab[1] = cfg.momentum * vel_ab[1] + dbeta
        net.alpha -= cfg.lr * vel_ab[0]
        net.beta -= cfg.lr * vel_ab[1]

    count = data.x.shape[0]
    for phase, epochs in (("mc", cfg.mc_epochs), ("td", cfg.td_epochs)):
        for epoch in range(epochs):
            order = rng.permutation(count)
            total = 0.0
            batches = 0
            for lo in range(0, count, cfg.batch_size):
                sel = order[lo : lo + cfg.batch_size]
                if phase == "mc":
                    loss, grads, dalpha, dbeta = _mc_grads(
                        net,
                        data.x[sel],
                        data.g[sel],
                        data.phi[sel],
                        cfg.huber_delta,
                        cfg.use_geometric_reg,
                    )
                else:
                    loss, grads = _td_grads(
                        net,
                        data.x[sel],
                        data.x_next[sel],
                        data.done_success[sel],
                        cfg.huber_delta,
                    )
                    dalpha = dbeta = 0.0
                if not math.isfinite(loss):
                    raise TrainingDiverged(
                        f"non-finite loss in {phase} epoch {epoch} "
                        f"(batch {batches}, lr={cfg.lr})"
                    )
                sgd_step(grads, dalpha, dbeta)
                total += loss
                batches += 1
            trace.append({"phase": phase, "epoch": epoch, "loss": total / batches})
    return net, trace


# ---------------------------------------------------------------- weight I/O


def save_weights(net: ValueNet, path):
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "feature_spec_hash": net.feature_spec_hash,
        "alpha": net.alpha,
        "beta": net.beta,
        "layers": [
            {
                "rows": l.w.shape[0],
                "cols": l.w.shape[1],
                "w": [float(v) for v in l.w.ravel()],
                "b": [float(v) for v in l.b],
                "act": l.act,
            }
            for l in net.layers
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_weights(path, expected_spec: FeatureSpec | None = None) -> ValueNet:
    """Load a weight file, refusing silently-incompatible feature layouts."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported version {doc.get('version')}")
    got = doc.get("feature_spec_hash")
    if expected_spec is not None and got != expected_spec.hash:
        raise ValueError(
            f"feature spec mismatch: file has {got}, expected {expected_spec.hash}"
        )
    layers = []
    for i, ld in enumerate(doc["layers"]):
        w = np.array(ld["w"], dtype=float).reshape(ld["rows"], ld["cols"])
        b = np.array(ld["b"], dtype=float)
        if b.shape != (ld["rows"],):
            raise ValueError(f"layer {i}: bias shape mismatch")
        layers.append(Layer(w, b, ld["act"]))
    for prev, nxt in zip(layers, layers[1:]):
        if nxt.w.shape[1] != prev.w.shape[0]:
            raise ValueError("inconsistent layer shapes")
    return ValueNet(layers, float(doc["alpha"]), float(doc["beta"]), got)
