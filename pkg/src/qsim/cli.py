"""Command-line experiment runner.

`qsim run --experiment <name> --seed S --shots N [...]` executes one
experiment and emits JSON-lines rows (CSV with --format csv); every row
carries the seed, so published numbers are reproducible byte for byte.
`qsim acceptance` runs the acceptance criteria and prints one pass/fail
line per criterion.

Exit codes: 0 success, 2 validation or parameter error, 3 assertion or
acceptance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import acceptance, algorithms, entangle, gates, hamsim, qec, qstate, statharness
from .errors import NotFoundError, QsimError
from .pool import default_threads
from .rng import Stream

EXPERIMENTS = {}


def experiment(name):
    def register(fn):
        EXPERIMENTS[name] = fn
        return fn

    return register


def _row(args, metric, value, stderr=None, reference=None, **params):
    row = {"experiment": args.experiment, "seed": args.seed, "shots": args.shots}
    row.update(params)
    row["metric"] = metric
    row["value"] = value
    if stderr is not None:
        row["stderr"] = stderr
    if reference is not None:
        row["reference"] = reference
    for key, val in row.items():
        if isinstance(val, float) and not math.isfinite(val):
            raise QsimError(f"non-finite value in output row field {key!r}")
    return row


@experiment("bell")
def _run_bell(args):
    axis = entangle.SpinAxis(*args.axis)
    rng = Stream(args.seed, "cli/bell")
    pairs = entangle.anticorrelation_experiment(axis, args.shots, rng, threads=args.threads)
    violations = sum(1 for a, b in pairs if a * b != -1)
    alice_mean = sum(a for a, _ in pairs) / len(pairs)
    rows = [
        _row(args, "anticorrelation_violations", violations, reference=0,
             axis=",".join(f"{c:g}" for c in args.axis)),
        _row(args, "alice_mean", alice_mean,
             stderr=1.0 / math.sqrt(len(pairs)), reference=0.0,
             axis=",".join(f"{c:g}" for c in args.axis)),
    ]
    return rows, violations == 0


@experiment("chsh")
def _run_chsh(args):
    result = entangle.chsh_experiment(
        args.shots, Stream(args.seed, "cli/chsh"), collect_rows=args.emit_shots,
        threads=args.threads,
    )
    reference = 2.0 * math.sqrt(2.0)
    rows = [_row(args, "chsh_value", result.value, stderr=result.stderr, reference=reference)]
    for label, corr in result.correlators.items():
        rows.append(_row(args, f"correlator_{label}", corr, pairs=result.counts[label]))
    if args.emit_shots:
        for shot, label, a, b in result.rows:
            rows.append(_row(args, "shot", a * b, shot=shot, setting=label, alice=a, bob=b))
    return rows, abs(result.value - reference) <= 4.0 * result.stderr


@experiment("teleport")
def _run_teleport(args):
    rng = Stream(args.seed, "cli/teleport")
    worst = 1.0
    counts = {"00": 0, "01": 0, "10": 0, "11": 0}
    for i in range(args.shots):
        psi = qstate.random_state(1, rng.substream(2 * i))
        bob, bits = entangle.teleport(psi, rng.substream(2 * i + 1))
        worst = min(worst, qstate.fidelity(bob, psi))
        counts[bits] += 1
    rows = [_row(args, "min_fidelity", worst, reference=1.0)]
    for bits in sorted(counts):
        rows.append(_row(args, f"bits_{bits}_fraction", counts[bits] / args.shots,
                         reference=0.25))
    return rows, worst >= 1.0 - 1e-10


@experiment("qft")
def _run_qft(args):
    n = args.bits
    dense = algorithms.dft_matrix(n)
    circuit = algorithms.qft(n)
    worst = 0.0
    for j in range(1 << n):
        out = gates.run_circuit(circuit, qstate.basis_state(n, j))
        worst = max(worst, float(np.max(np.abs(out.amps - dense[:, j]))))
    s = qstate.random_state(n, Stream(args.seed, "cli/qft"))
    fid = qstate.fidelity(gates.run_circuit(algorithms.inverse_qft(n), algorithms.apply_qft(s)), s)
    rows = [
        _row(args, "max_amplitude_error", worst, bits=n, reference=0.0),
        _row(args, "roundtrip_fidelity", fid, bits=n, reference=1.0),
    ]
    return rows, worst <= 1e-9 and fid >= 1.0 - 1e-9


@experiment("phase-est")
def _run_phase_est(args):
    plan = algorithms.PhasePlan(zeta=args.zeta, epsilon=args.epsilon)
    phi = args.phase
    u = gates.GateOp("u", np.diag([1.0, np.exp(2j * math.pi * phi)]), [0])
    eigenstate = qstate.basis_state(1, 1)
    rng = Stream(args.seed, "cli/phase-est")
    hits = 0
    for i in range(args.shots):
        estimate = algorithms.phase_estimate(u, eigenstate, plan, rng.substream(i))
        if algorithms.phase_distance(estimate, phi) <= plan.zeta:
            hits += 1
    coverage = hits / args.shots
    rows = [_row(args, "coverage", coverage, reference=1.0 - args.epsilon,
                 zeta=args.zeta, epsilon=args.epsilon, phase=phi, register_qubits=plan.b)]
    sigma = math.sqrt(max(coverage * (1 - coverage), 1e-12) / args.shots)
    return rows, coverage >= 1.0 - args.epsilon - 3.0 * sigma


@experiment("grover")
def _run_grover(args):
    if args.marked >= (1 << args.bits):
        raise QsimError("marked index out of range")
    f = gates.BooleanOracle.from_solutions(args.bits, [args.marked])
    n = 1 << args.bits
    plan = algorithms.GroverPlan.for_counts(n, 1)
    rng = Stream(args.seed, "cli/grover")
    hits = sum(1 for i in range(args.shots)
               if algorithms.grover_search(f, 1, rng.substream(i)) == args.marked)
    rate = hits / args.shots
    reference = math.sin((2 * plan.R + 1) * plan.theta / 2.0) ** 2
    rows = [_row(args, "success_rate", rate, reference=reference,
                 bits=args.bits, marked=args.marked, iterations=plan.R)]
    sigma = math.sqrt(max(reference * (1 - reference), 1e-12) / args.shots)
    return rows, rate >= 1.0 - 1.0 / n - 3.0 * sigma


@experiment("count")
def _run_count(args):
    f = gates.BooleanOracle.from_solutions(args.bits, list(range(args.m_count)))
    plan = algorithms.PhasePlan(zeta=args.zeta, epsilon=args.epsilon)
    rng = Stream(args.seed, "cli/count")
    estimates = [algorithms.quantum_count(f, plan, rng.substream(i)) for i in range(args.shots)]
    correct = sum(1 for m in estimates if m == args.m_count)
    rows = [
        _row(args, "count_mode", max(set(estimates), key=estimates.count),
             reference=args.m_count, bits=args.bits, zeta=args.zeta, epsilon=args.epsilon),
        _row(args, "count_accuracy", correct / args.shots, reference=1.0 - args.epsilon),
    ]
    return rows, correct / args.shots >= 1.0 - args.epsilon - 3.0 / math.sqrt(args.shots)


@experiment("order-find")
def _run_order_find(args):
    reference = algorithms.order_brute_force(args.x_base, args.modulus)
    try:
        found = algorithms.order_find(
            args.x_base, args.modulus, Stream(args.seed, "cli/order"), max_runs=25
        )
    except NotFoundError:
        found = -1
    rows = [_row(args, "order", found, reference=reference,
                 x_base=args.x_base, modulus=args.modulus)]
    return rows, found == reference


@experiment("trotter")
def _run_trotter(args):
    model = hamsim.ising_chain(2)
    psi0 = qstate.random_state(2, Stream(args.seed, "cli/trotter"))
    plan = hamsim.TrotterPlan(args.t_final, args.steps)
    error = hamsim.trotter_error(model, plan, psi0)
    rows = [_row(args, "terminal_error", error, t_final=args.t_final,
                 steps=args.steps, delta=plan.delta)]
    return rows, True


@experiment("grover-ham")
def _run_grover_ham(args):
    uniform = gates.hadamard_layer(args.bits)
    h, t_measure = hamsim.grover_hamiltonian(args.marked, uniform)
    evolved = hamsim.exact_evolve(h, t_measure, uniform)
    prob = float(np.abs(evolved.amps[args.marked]) ** 2)
    rows = [_row(args, "success_probability", prob, reference=1.0,
                 bits=args.bits, marked=args.marked, t_measure=t_measure)]
    return rows, prob >= 1.0 - 1e-9


@experiment("qec-sweep")
def _run_qec_sweep(args):
    rows = []
    ok = True
    for entry in qec.qec_sweep(args.p, args.shots, args.seed, threads=args.threads):
        entry = dict(entry)
        entry["experiment"] = args.experiment
        entry["seed"] = args.seed
        rows.append(entry)
        ok &= abs(entry["rate"] - entry["predicted"]) <= max(
            3.0 * entry["stderr"], 3.0 / args.shots
        ) + 3.0 * math.sqrt(entry["predicted"] / args.shots)
    return rows, ok


@experiment("qrng")
def _run_qrng(args):
    values = statharness.quantum_rng(args.bits, args.shots,
                                     Stream(args.seed, "cli/qrng"), threads=args.threads)
    counts = [0] * (1 << args.bits)
    for v in values:
        counts[v] += 1
    stat = statharness.chi_square_uniform(counts)
    critical = acceptance.CHI2_99_9_DF15 if args.bits == 4 else float("inf")
    rows = [_row(args, "chi_square", stat, bits=args.bits,
                 reference=critical if math.isfinite(critical) else None)]
    return rows, stat < critical


@experiment("qmc")
def _run_qmc(args):
    model = hamsim.ising_chain(2, coupling=0.6, field=0.7)
    psi0 = qstate.basis_state(2, 0)
    plan = hamsim.TrotterPlan(args.t_final, args.steps)
    obs = qstate.Observable(np.kron(gates.PAULI_Z, np.eye(2)))
    target = hamsim.exact_evolve(model, args.t_final, psi0)
    prepare = lambda: hamsim.trotter_evolve(model, plan, psi0)[-1]
    result = statharness.qmc_estimate(obs, prepare, args.shots,
                                      Stream(args.seed, "cli/qmc"), target)
    rows = [
        _row(args, "theta_hat", result.theta_hat, stderr=result.stderr,
             reference=result.theta_prepared, steps=args.steps, t_final=args.t_final),
        _row(args, "bias", result.bias, reference=result.theta_prepared - result.theta_true),
        _row(args, "theta_true", result.theta_true),
    ]
    return rows, abs(result.theta_hat - result.theta_prepared) <= 4.0 * result.stderr


@experiment("stats-bound")
def _run_stats_bound(args):
    bound = statharness.trimmed_success_bound(args.n_runs, args.epsilon, args.alpha)
    rows = [
        _row(args, "exact_binomial", bound.exact, n_runs=args.n_runs,
             epsilon=args.epsilon, alpha=args.alpha),
        _row(args, "normal_approx", bound.normal_approx, n_runs=args.n_runs,
             epsilon=args.epsilon, alpha=args.alpha),
        _row(args, "verified_success", 1.0 - args.epsilon**args.n_runs,
             n_runs=args.n_runs, epsilon=args.epsilon),
    ]
    return rows, True


def _emit(rows, fmt, out):
    if fmt == "jsonl":
        import json

        for row in rows:
            out.write(json.dumps(row) + "\n")
    else:
        if not rows:
            return
        header = []
        for row in rows:
            for key in row:
                if key not in header:
                    header.append(key)
        writer = csv.DictWriter(out, fieldnames=header, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsim",
                                     description="state-vector quantum experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and emit result rows")
    run.add_argument("--experiment", required=True, choices=sorted(EXPERIMENTS))
    run.add_argument("--seed", type=int, default=20260808,
                     help="root seed; printed in every row (default: %(default)s)")
    run.add_argument("--shots", type=int, default=10_000)
    run.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    run.add_argument("--threads", type=int, default=default_threads(),
                     help="worker pool size (results are thread-count independent)")
    run.add_argument("--assert", dest="assert_", action="store_true",
                     help="exit 3 unless the experiment meets its reference")
    run.add_argument("--emit-shots", action="store_true",
                     help="also emit one row per shot where supported")
    run.add_argument("--axis", type=float, nargs=3, default=(0.0, 0.0, 1.0),
                     metavar=("AX", "AY", "AZ"))
    run.add_argument("--bits", type=int, default=4)
    run.add_argument("--marked", type=int, default=3, help="marked search index")
    run.add_argument("--m-count", type=int, default=4, help="solution count for counting")
    run.add_argument("--zeta", type=float, default=2.0**-4)
    run.add_argument("--epsilon", type=float, default=0.1)
    run.add_argument("--alpha", type=float, default=0.2)
    run.add_argument("--phase", type=float, default=1.0 / 3.0)
    run.add_argument("--p", type=float, nargs="+", default=[0.01, 0.05, 0.1, 0.2])
    run.add_argument("--t-final", type=float, default=1.0)
    run.add_argument("--steps", type=int, default=2)
    run.add_argument("--x-base", type=int, default=2)
    run.add_argument("--modulus", type=int, default=15)
    run.add_argument("--n-runs", type=int, default=20)

    acc = sub.add_parser("acceptance", help="run the acceptance criteria")
    acc.add_argument("--criteria", type=str, default=None,
                     help="comma-separated criterion ids (default: all)")
    acc.add_argument("--corrupt", type=int, default=None,
                     help="test mode: corrupt the named criterion's tolerance")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            rows, ok = EXPERIMENTS[args.experiment](args)
            buffer = io.StringIO()
            _emit(rows, args.format, buffer)
            sys.stdout.write(buffer.getvalue())
            if args.assert_ and not ok:
                print("assertion failed: experiment missed its reference", file=sys.stderr)
                return 3
            return 0
        ids = None
        if args.criteria:
            ids = [int(part) for part in args.criteria.split(",") if part.strip()]
            unknown = [i for i in ids if i not in acceptance.CRITERIA]
            if unknown:
                print(f"unknown criteria: {unknown}", file=sys.stderr)
                return 2
        results = acceptance.run_acceptance(ids=ids, corrupt=args.corrupt)
        for result in results:
            print(result.line())
        if not all(r.passed for r in results):
            failed = ", ".join(r.name for r in results if not r.passed)
            print(f"acceptance failed: {failed}", file=sys.stderr)
            return 3
        return 0
    except QsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
