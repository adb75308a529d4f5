"""Acceptance criteria P1-P8.

Each test enforces one criterion at its stated tolerance and prints a
one-line verdict (run with -s to see them).  Slow criteria report their
runtime against the stated budget.
"""

import time

import numpy as np
import pytest

from conftest import random_actions
from f2c import ffsim, oracle, planner, trajgen, value_model
from f2c.cli import evaluate, random_free_target
from f2c.env import EnvConfig
from f2c.planner import SearchConfig, fallback_compile
from f2c.value_model import FeatureSpec, TrainConfig, init_value_net
from f2c.pauli import Hamiltonian, PauliString, PauliTerm
from f2c.pipeline import trotter_bound
from test_ffsim import action_string, dense_unitary


def _verdict(name, detail=""):
    print(f"\n{name}: PASS {detail}")


def test_p1_simulator_oracle_equivalence(rng):
    start = time.perf_counter()
    checked = 0
    for n in (2, 3, 4, 5):
        for _ in range(50):
            length = int(rng.integers(1, 31))
            acts = random_actions(rng, n, length)
            state = ffsim.apply_actions(ffsim.identity_state(n), acts)
            u = dense_unitary(acts, n)
            r_dense = oracle.majorana_conjugation(u, n)
            assert np.abs(state.R - r_dense).max() <= 1e-10
            fid_dense = abs(np.trace(u)) / 2**n
            assert abs(ffsim.fidelity(state) - fid_dense) <= 1e-9
            checked += 1
    elapsed = time.perf_counter() - start
    assert checked == 200
    assert elapsed < 120
    _verdict("P1 free-fermion simulator oracle equivalence", f"({elapsed:.1f}s)")


def test_p2_reversal_data_guarantee():
    start = time.perf_counter()
    episodes = trajgen.sample_episodes(6, 1000, seed=202, length_range=(1, 64))
    cfg = EnvConfig(6, epsilon=1e-6)
    for e in episodes:
        assert trajgen.replay(e, cfg).success
        frs = trajgen.frames(e)
        assert frs[0].g == -len(e.actions)
        assert frs[-1].g == -1
        for a, b in zip(frs, frs[1:]):
            assert b.g == a.g + 1  # exact integer telescoping
    elapsed = time.perf_counter() - start
    assert elapsed < 60
    _verdict("P2 reversal episodes replay 100% successful", f"(1000 episodes, {elapsed:.1f}s)")


def test_p3_compilation_accuracy_small_angle_targets():
    start = time.perf_counter()
    # 500 targets at n = 6 through the fallback-backed path
    report = evaluate(n=6, targets=500, dt=0.02, seed=303, fallback_only=True)
    assert report["success_rate"] == 1.0
    for bucket, count in report["error_histogram"].items():
        if count and bucket != "<=1e-12":
            assert int(bucket[2:]) <= -7  # every error below 1e-6

    # the hybrid search-then-fallback route must also never fail
    cfg = SearchConfig(epsilon=1e-6, h_max=100, fallback_on_failure=True)
    rng = np.random.default_rng(304)
    for _ in range(30):
        target = random_free_target(6, 0.02, rng)
        plan = planner.compile_free_part(target, None, cfg)
        assert plan.success and plan.final_fidelity > 1 - 1e-6

    # dense-oracle recheck at n <= 5: every instance within 1e-6
    from f2c.cli import random_free_generator

    for n in (3, 4, 5):
        for i in range(50):
            rng_i = np.random.default_rng(np.random.SeedSequence([305, n, i]))
            terms, step = random_free_generator(n, 0.02, rng_i)
            target = ffsim.assemble_generator(terms, step, n=n)
            plan = fallback_compile(target, 1e-6)
            assert plan.success
            exact = oracle.expm_hermitian(Hamiltonian.build(n, terms), step)
            realized = dense_unitary(plan.actions, n)
            assert 1 - oracle.trace_fidelity(exact, realized) <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 600
    _verdict("P3 compilation accuracy at 1e-6", f"({elapsed:.1f}s)")


def test_p4_trotter_bound(rng):
    start = time.perf_counter()
    h = Hamiltonian.build(
        1,
        [
            PauliTerm(PauliString.from_text("X"), 1.0),
            PauliTerm(PauliString.from_text("Z"), 1.0),
        ],
    )
    assert trotter_bound(h, 0.1, 10) == pytest.approx(0.001, abs=1e-15)

    letters = "IXYZ"
    for _ in range(20):
        n = int(rng.integers(1, 4))
        terms = []
        for _ in range(int(rng.integers(2, 6))):
            text = "".join(letters[i] for i in rng.integers(0, 4, n))
            p = PauliString.from_text(text)
            if p.weight:
                terms.append(PauliTerm(p, float(rng.normal()) or 0.5))
        hm = Hamiltonian.build(n, terms)
        dense = 0.0
        for i in range(len(hm.terms)):
            for j in range(i + 1, len(hm.terms)):
                ma = hm.terms[i].coeff * oracle.pauli_matrix(hm.terms[i].string)
                mb = hm.terms[j].coeff * oracle.pauli_matrix(hm.terms[j].string)
                dense += np.linalg.norm(ma @ mb - mb @ ma, 2)
        t, steps = 0.2, 3
        assert abs(trotter_bound(hm, t, steps) - t * t / (2 * steps) * dense) <= 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 60
    _verdict("P4 Trotter bound matches dense commutator sums", f"({elapsed:.1f}s)")


def test_p5_gradient_checks(rng):
    from test_value_model import (
        _fd_check,
        _mc_grad_vector,
        _td_grad_vector,
        tiny_net,
    )

    start = time.perf_counter()
    spec = FeatureSpec(2, m=2)
    for trial in range(20):
        net = tiny_net(spec, seed=trial)
        x = rng.normal(size=(3, spec.dim))
        g = rng.normal(size=3) - 2
        phi = rng.uniform(0, 3, size=3)
        _fd_check(
            lambda: value_model.mc_loss(net, x, g, phi),
            lambda: _mc_grad_vector(net, x, g, phi),
            net,
        )
        xn = rng.normal(size=(3, spec.dim))
        done = rng.uniform(size=3) < 0.5
        target = value_model.td_targets(net, xn, done)
        _fd_check(
            lambda: float(value_model.huber(value_model.forward(net, x) - target, 1.0).mean()),
            lambda: _td_grad_vector(net, x, xn, done),
            net,
        )
    elapsed = time.perf_counter() - start
    assert elapsed < 60
    _verdict("P5 analytic gradients match finite differences", f"(20 trials, {elapsed:.1f}s)")


def test_p6_learning_signal():
    start = time.perf_counter()
    n = 6
    episodes = trajgen.sample_episodes(n, 1200, seed=42, length_range=(1, 20))
    spec = FeatureSpec(n)
    data = value_model.build_training_set(episodes, spec)
    assert data.x.shape[0] >= 10_000

    trained, _ = value_model.train(data, TrainConfig(mc_epochs=40, lr=2e-3, seed=0))
    untrained = init_value_net(spec, seed=123)

    targets = [
        trajgen.episode_target(
            trajgen.sample_episodes(n, 1, seed=90_000 + i, length_range=(1, 12))[0]
        )
        for i in range(200)
    ]
    cfg = SearchConfig(epsilon=1e-6, h_max=100)

    def run(policy):
        results = []
        for t in targets:
            if policy is None:
                results.append(planner.heuristic_rollout(t, cfg))
            else:
                results.append(planner.greedy_rollout(t, policy, cfg))
        solved = [r for r in results if r.success]
        mean_steps = float(np.mean([r.steps for r in solved])) if solved else np.inf
        return len(solved) / len(results), mean_steps

    rate_heur, steps_heur = run(None)
    rate_trained, steps_trained = run(trained)
    rate_untrained, steps_untrained = run(untrained)

    detail = (
        f"(success trained {rate_trained:.1%} / untrained {rate_untrained:.1%} "
        f"/ heuristic {rate_heur:.1%}; solved mean steps trained "
        f"{steps_trained:.2f} vs heuristic {steps_heur:.2f})"
    )
    assert rate_trained >= rate_untrained
    assert steps_trained <= steps_heur
    elapsed = time.perf_counter() - start
    assert elapsed < 1800
    _verdict("P6 learning signal", detail + f" ({elapsed:.0f}s)")


def test_p7_circuit_accounting(rng):
    from f2c import circuit
    from f2c.env import Action
    from test_circuit import _random_circuit

    start = time.perf_counter()
    frag = circuit.lower_action(Action("XX", 0, 1, 4), 2)
    assert circuit.gate_count(frag) == 7
    assert circuit.depth(frag) == 5
    assert circuit.two_qubit_count(frag) == 2

    for _ in range(10):
        c = _random_circuit(rng, 4, 200)
        out = circuit.peephole(c)
        assert circuit.gate_count(out) <= circuit.gate_count(c)
        assert circuit.depth(out) <= circuit.depth(c)
        fid = oracle.trace_fidelity(
            oracle.circuit_unitary(c), oracle.circuit_unitary(out)
        )
        assert abs(fid - 1.0) <= 1e-10
    elapsed = time.perf_counter() - start
    assert elapsed < 60
    _verdict("P7 circuit accounting and peephole safety", f"({elapsed:.1f}s)")


def test_p8_scale_performance():
    rng_warm = np.random.default_rng(0)
    fallback_compile(random_free_target(4, 0.02, rng_warm), 1e-6)  # JIT warmup

    rng = np.random.default_rng(808)
    target_100 = random_free_target(100, 0.02, rng)
    start = time.perf_counter()
    plan = fallback_compile(target_100, 1e-6)
    t_100 = time.perf_counter() - start
    assert plan.success
    assert t_100 < 10.0

    target_222 = random_free_target(222, 0.02, rng)
    start = time.perf_counter()
    plan = fallback_compile(target_222, 1e-6)
    t_222 = time.perf_counter() - start
    assert plan.success
    assert t_222 < 60.0
    _verdict("P8 scale", f"(n=100 in {t_100:.2f}s, n=222 in {t_222:.2f}s)")
