"""Command-line entry point.

Subcommands: gen-model, gen-data, train, compile, eval, bound.  Exit codes:
0 success, 1 bad input, 2 compile failure.  Every subcommand is deterministic
under a fixed --seed (env var F2C_SEED is the fallback when --seed is
omitted); compile writes its metrics file even when compilation fails.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import circuit, ffsim, models, pipeline, planner, trajgen, value_model
from .env import KINDS
from .pauli import Hamiltonian, PauliString, PauliTerm, parse_hamiltonian, render_hamiltonian
from .pipeline import CompileError, CompileJob
from .planner import SearchConfig
from .value_model import FeatureSpec, TrainConfig

EVAL_FORMAT = "f2-evalreport"
EVAL_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (bad input) instead of the default 2 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed_from(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("F2C_SEED", "0"))


def _load_hamiltonian(path: str) -> Hamiltonian:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_hamiltonian(fh.read())
    except FileNotFoundError:
        raise ValueError(f"Hamiltonian file not found: {path}") from None


# ------------------------------------------------------------------ gen-model


def cmd_gen_model(args) -> int:
    if args.family == "fermi-hubbard-1d":
        h = models.fermi_hubbard_1d(args.sites, args.t_hop, args.u_int)
    elif args.family == "heisenberg-1d":
        h = models.heisenberg_1d(args.sites, args.jx, args.jy, args.jz)
    elif args.family == "heisenberg-2d":
        h = models.heisenberg_2d(args.rows, args.cols, args.jx, args.jy, args.jz)
    elif args.family == "tj-1d":
        h = models.tj_1d(args.sites, args.t_hop, args.j_ex)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown family {args.family}")
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(render_hamiltonian(h) + "\n")
    print(f"wrote {args.family} on {h.n} qubits ({len(h.terms)} terms) to {args.out}")
    return 0


# ------------------------------------------------------------------- gen-data


def _gen_chunk(params) -> list[str]:
    n, seed, lo, hi, max_len = params
    lines = []
    for i in range(lo, hi):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        e = trajgen.sample_episode(n, (1, max_len), rng)
        lines.append(
            json.dumps(
                {"actions": [trajgen._action_doc(a) for a in e.actions]}
            )
        )
    return lines


def cmd_gen_data(args) -> int:
    seed = _seed_from(args)
    if not 1 <= args.max_len <= 100:
        raise ValueError("--max-len must be in [1, 100]")
    header = {
        "format": trajgen.FORMAT_NAME,
        "version": trajgen.FORMAT_VERSION,
        "n_qubits": args.n_qubits,
        "seed": seed,
    }
    chunks = _split_ranges(args.episodes, args.jobs)
    params = [(args.n_qubits, seed, lo, hi, args.max_len) for lo, hi in chunks]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            parts = list(pool.map(_gen_chunk, params))
    else:
        parts = [_gen_chunk(p) for p in params]
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for part in parts:
            for line in part:
                fh.write(line + "\n")
    print(f"wrote {args.episodes} episodes (n={args.n_qubits}) to {args.out}")
    return 0


def _split_ranges(total: int, jobs: int) -> list[tuple[int, int]]:
    jobs = max(1, min(jobs, total)) if total else 1
    size = math.ceil(total / jobs) if total else 0
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)] if total else []


# ---------------------------------------------------------------------- train


def cmd_train(args) -> int:
    seed = _seed_from(args)
    episodes, header = trajgen.read_dataset(args.data)
    spec = FeatureSpec(header["n_qubits"])
    data = value_model.build_training_set(episodes, spec)
    cfg = TrainConfig(
        huber_delta=args.huber_delta,
        lr=args.lr,
        batch_size=args.batch_size,
        mc_epochs=args.epochs,
        td_epochs=args.td_epochs,
        seed=seed,
        use_geometric_reg=not args.no_geometric_reg,
    )
    net, trace = value_model.train(data, cfg)
    value_model.save_weights(net, args.out)
    trace_path = args.out + ".losses.csv"
    with open(trace_path, "w", encoding="utf-8") as fh:
        fh.write("phase,epoch,loss\n")
        for row in trace:
            fh.write(f"{row['phase']},{row['epoch']},{row['loss']:.8f}\n")
    final = trace[-1]["loss"] if trace else float("nan")
    print(
        f"trained on {data.x.shape[0]} frames; final loss {final:.6f}; "
        f"weights -> {args.out}, trace -> {trace_path}"
    )
    return 0


# -------------------------------------------------------------------- compile


def cmd_compile(args) -> int:
    h = _load_hamiltonian(args.hamiltonian)
    net = None
    if args.model:
        net = value_model.load_weights(args.model, FeatureSpec(h.n))
    search = SearchConfig(
        beam=args.beam,
        epsilon=args.epsilon,
        h_max=args.h_max,
        fallback_on_failure=not args.no_fallback,
    )
    job = CompileJob(
        hamiltonian=h,
        time=args.time,
        steps=args.steps,
        epsilon=args.epsilon,
        net=net,
        search=search,
        fallback_only=args.fallback_only,
    )
    if args.oracle_check and h.n > 10:
        raise ValueError(f"--oracle-check needs n <= 10, got n = {h.n}")
    try:
        report = pipeline.compile(job)
    except CompileError as exc:
        with open(args.metrics, "w", encoding="utf-8") as fh:
            json.dump({"error": str(exc), "method": "failed"}, fh, indent=2)
        print(f"compile failed: {exc}", file=sys.stderr)
        return 2
    metrics = pipeline.metrics_dict(report)
    if args.oracle_check:
        from . import oracle

        exact = oracle.expm_hermitian(h, args.time)
        realized = oracle.circuit_unitary(report.circuit)
        metrics["oracle_fidelity"] = oracle.trace_fidelity(exact, realized)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(circuit.emit_qasm(report.circuit))
    with open(args.metrics, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2)
    print(
        f"compiled: {report.gates} gates, depth {report.depth}, "
        f"{report.two_qubit} two-qubit, method {report.method}"
    )
    return 0


# ----------------------------------------------------------------------- eval


def random_free_generator(
    n: int, dt: float, rng: np.random.Generator
) -> tuple[list[PauliTerm], float]:
    """Random generating-set coefficients in U(-1, 1) and a step in U(-dt, dt)."""
    terms = []
    for kind in KINDS:
        top = n if kind == "Z" else n - 1
        for site in range(top):
            coeff = float(rng.uniform(-1.0, 1.0))
            letters = {site: "Z"} if kind == "Z" else {site: kind[0], site + 1: kind[1]}
            text = "".join(letters.get(q, "I") for q in range(n))
            terms.append(PauliTerm(PauliString.from_text(text), coeff))
    return terms, float(rng.uniform(-dt, dt))


def random_free_target(n: int, dt: float, rng: np.random.Generator) -> ffsim.FFState:
    """exp(h * dt') as an SO(2n) state; the Fig.-4-style evaluation targets."""
    terms, step = random_free_generator(n, dt, rng)
    return ffsim.assemble_generator(terms, step, n=n)


def error_bucket(err: float) -> str:
    if err < 1e-12:
        return "<=1e-12"
    if err >= 1e-1:
        return ">=1e-01"
    return f"1e{math.floor(math.log10(err)):+03d}"


def _eval_one(params) -> dict:
    n, dt, seed, index, epsilon, h_max, beam, fallback_only, no_fallback, net = params
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    target = random_free_target(n, dt, rng)
    cfg = SearchConfig(
        beam=beam, epsilon=epsilon, h_max=h_max,
        fallback_on_failure=not no_fallback,
    )
    if fallback_only:
        plan = planner.fallback_compile(target, epsilon)
    else:
        plan = planner.compile_free_part(target, net, cfg)
    lowered = circuit.peephole(
        circuit.concat(
            *[circuit.lower_action(a, n) for a in plan.actions]
        )
        if plan.actions
        else circuit.CircuitIR(n, ())
    )
    return {
        "success": plan.success,
        "error": max(0.0, 1.0 - plan.final_fidelity),
        "steps": plan.steps,
        "gates": circuit.gate_count(lowered),
        "depth": circuit.depth(lowered),
        "method": plan.method,
    }


def evaluate(
    n: int,
    targets: int,
    dt: float,
    seed: int,
    net=None,
    epsilon: float = 1e-6,
    h_max: int = 100,
    beam: int = 1,
    fallback_only: bool = False,
    no_fallback: bool = False,
    jobs: int = 1,
) -> dict:
    params = [
        (n, dt, seed, i, epsilon, h_max, beam, fallback_only, no_fallback, net)
        for i in range(targets)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_eval_one, params, chunksize=4))
    else:
        rows = [_eval_one(p) for p in params]
    solved = [r for r in rows if r["success"]]
    hist: dict[str, int] = {}
    for r in rows:
        label = error_bucket(r["error"])
        hist[label] = hist.get(label, 0) + 1

    def stats(key):
        vals = [r[key] for r in rows]
        return {
            "mean": float(np.mean(vals)) if vals else 0.0,
            "min": min(vals, default=0),
            "max": max(vals, default=0),
        }

    return {
        "format": EVAL_FORMAT,
        "version": EVAL_VERSION,
        "n_qubits": n,
        "targets": targets,
        "dt": dt,
        "seed": seed,
        "mode": "fallback-only" if fallback_only else ("model" if net else "heuristic"),
        "success_rate": len(solved) / targets if targets else 0.0,
        "mean_steps": float(np.mean([r["steps"] for r in solved])) if solved else 0.0,
        "mean_error": float(np.mean([r["error"] for r in rows])) if rows else 0.0,
        "gates": stats("gates"),
        "depth": stats("depth"),
        "error_histogram": dict(sorted(hist.items())),
    }


def cmd_eval(args) -> int:
    seed = _seed_from(args)
    net = None
    if args.model:
        net = value_model.load_weights(args.model, FeatureSpec(args.n_qubits))
    report = evaluate(
        n=args.n_qubits,
        targets=args.targets,
        dt=args.dt,
        seed=seed,
        net=net,
        epsilon=args.epsilon,
        h_max=args.h_max,
        beam=args.beam,
        fallback_only=args.fallback_only,
        no_fallback=args.no_fallback,
        jobs=args.jobs,
    )
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    print(
        f"evaluated {args.targets} targets: success {report['success_rate']:.1%}, "
        f"mean error {report['mean_error']:.2e}; report -> {args.report}"
    )
    return 0


# ---------------------------------------------------------------------- bound


def cmd_bound(args) -> int:
    h = _load_hamiltonian(args.hamiltonian)
    value = pipeline.trotter_bound(h, args.time, args.steps)
    print(f"{value:.12g}")
    return 0


# --------------------------------------------------------------------- parser


def build_parser() -> _Parser:
    parser = _Parser(prog="f2c", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-model", help="write a benchmark Hamiltonian JSON file")
    p.add_argument(
        "--family",
        required=True,
        choices=["fermi-hubbard-1d", "heisenberg-1d", "heisenberg-2d", "tj-1d"],
    )
    p.add_argument("--sites", type=int, default=4)
    p.add_argument("--rows", type=int, default=2)
    p.add_argument("--cols", type=int, default=2)
    p.add_argument("--t-hop", type=float, default=1.0)
    p.add_argument("--u-int", type=float, default=2.0)
    p.add_argument("--jx", type=float, default=1.0)
    p.add_argument("--jy", type=float, default=1.0)
    p.add_argument("--jz", type=float, default=1.0)
    p.add_argument("--j-ex", type=float, default=0.4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_model)

    p = sub.add_parser("gen-data", help="sample reversal episodes to a JSONL dataset")
    p.add_argument("--n-qubits", type=int, required=True)
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--max-len", type=int, default=64)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="fit the value net (MC phase, optional TD phase)")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--td-epochs", type=int, default=0)
    p.add_argument("--huber-delta", type=float, default=1.0)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--no-geometric-reg", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compile", help="compile a Hamiltonian evolution to QASM")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--model", default=None)
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--h-max", type=int, default=100)
    p.add_argument("--fallback-only", action="store_true")
    p.add_argument("--no-fallback", action="store_true")
    p.add_argument("--oracle-check", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--metrics", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("eval", help="compile random small-angle targets, report errors")
    p.add_argument("--model", default=None)
    p.add_argument("--n-qubits", type=int, required=True)
    p.add_argument("--targets", type=int, default=500)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--h-max", type=int, default=100)
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--fallback-only", action="store_true")
    p.add_argument("--no-fallback", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bound", help="print the first-order Trotter error bound")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(func=cmd_bound)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CompileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
