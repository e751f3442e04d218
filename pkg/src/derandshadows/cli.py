"""Command-line front end (``dss``).

Exit codes: 0 ok, 2 usage, 3 parse, 4 dimension or state, 5 invariant violation.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import click
import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .ansatz import Kind, SlotRef, circuits_from_json, circuits_to_json
from .clifford import (
    StateVector,
    ground_state,
    make_rng,
    outcome_distributions,
    read_outcomes,
    sample_indices,
    sample_records,
    write_outcomes,
)
from .derandomize import (
    CostParams,
    RunConfig,
    derandomize,
    derandomize_best_order,
    derandomize_self_consistent,
    derandomize_until_covered,
    relaxed_dominates_shallow_check,
    reversed_two_qubit_order,
)
from .errors import DimensionError, DomainError, DSSError, ParseError
from .estimator import MeasurementPlan, as_circuits, build_report
from .models import (
    HubbardParams,
    direct_measurement_plan,
    hubbard_hamiltonian,
    load_dataset,
    naive_grouping_bases,
    square_hamiltonian,
)
from .pauli import parse_pauli, read_pauli_list

PUBLISHED_REFERENCE = {
    ("h2", "mean_abs_error"): 0.0096,
    ("hubbard", "dss_d0_shots"): 1236,
}


# ------------------------------------------------------------ manifest


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Manifest:
    def __init__(self, command: str, flags: dict, inputs: dict, record_time: bool):
        self.started = time.time()
        self.data = {
            "tool": "derandshadows",
            "version": __version__,
            "command": command,
            "flags": {k: (str(v) if isinstance(v, Path) else v) for k, v in flags.items()},
            "inputs": {k: _digest(p) for k, p in inputs.items() if p is not None and Path(p).is_file()},
        }
        self.record_time = record_time

    def finish(self) -> dict:
        out = dict(self.data)
        if self.record_time:
            out["wall_clock_start"] = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(self.started))
            out["wall_clock_seconds"] = round(time.time() - self.started, 3)
        return out

    def comment(self) -> str:
        return "manifest " + json.dumps(self.finish(), sort_keys=True)


def _emit(text: str, out) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


def _threads(ctx_threads):
    return threadpool_limits(limits=ctx_threads) if ctx_threads else threadpool_limits(limits=None)


# ------------------------------------------------------------ helpers


def _parse_order(spec: str | None, n: int, d: int):
    """``None``/``default``, ``reversed``, ``scan`` or a file of slot labels (``T2.1``, ``S1.3``)."""
    if spec in (None, "default"):
        return None
    if spec in ("reversed", "scan"):
        return spec
    path = Path(spec)
    if not path.is_file():
        raise DomainError(f"--order: no such file {spec!r}")
    slots = []
    for tok in path.read_text().split():
        try:
            tag, rest = tok[0], tok[1:]
            if tag not in ("T", "S"):
                raise ValueError
            layer, pos = (int(v) - 1 for v in rest.split("."))
            slots.append(SlotRef(Kind.TWO if tag == "T" else Kind.SINGLE, layer, pos))
        except ValueError:
            raise ParseError(f"{spec}: bad slot label {tok!r}") from None
    return slots


def _load_state(spec: str, n: int) -> StateVector:
    kind, _, arg = spec.partition(":")
    if kind == "zero":
        return StateVector.zero(n)
    if not arg:
        raise DomainError("--state must be zero, ground:FILE or file:FILE")
    if kind == "ground":
        return ground_state(read_pauli_list(arg)).state
    if kind == "file":
        path = Path(arg)
        try:
            if path.suffix == ".npy":
                vec = np.load(path)
            else:
                raw = np.loadtxt(path, ndmin=2)
                vec = raw[:, 0] + 1j * raw[:, 1] if raw.shape[1] == 2 else raw[:, 0]
        except (OSError, ValueError) as exc:
            raise ParseError(f"{arg}: cannot read state vector ({exc})") from None
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        m = int(round(np.log2(vec.size))) if vec.size else -1
        if m < 0 or 2**m != vec.size:
            raise DimensionError(f"{arg}: length {vec.size} is not a power of two")
        return StateVector(m, vec / np.linalg.norm(vec))
    raise DomainError(f"unknown state kind {kind!r}")


def _read_truth(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected '<PAULI> <value>'")
        try:
            out[parse_pauli(parts[0]).hermitian()] = float(parts[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad value {parts[1]!r}") from None
    return out


# ------------------------------------------------------------ commands


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Cap on numeric library threads.")
@click.option("--record-time", is_flag=True, help="Add wall-clock fields to the manifest.")
@click.pass_context
def cli(ctx, threads, record_time):
    """Derandomized shallow shadows: design, simulate and estimate Pauli measurements."""
    ctx.ensure_object(dict)
    ctx.obj.update(threads=threads, record_time=record_time)


@cli.command("derandomize")
@click.option("--paulis", "paulis_path", type=click.Path(dir_okay=False), required=True)
@click.option("--depth", type=click.IntRange(min=0), required=True)
@click.option("--epsilon", type=float, required=True)
@click.option("--shots", type=int, default=None)
@click.option("--per-observable", type=int, default=None)
@click.option("--weights", type=click.Choice(["uniform", "abs-coeff"]), default="uniform")
@click.option("--relaxed", is_flag=True)
@click.option("--order", default=None, help="default, reversed, scan, or a file of slot labels.")
@click.option("--horizon", default=None, help="Coverage-mode product horizon: an integer or 'self-consistent'.")
@click.option("--seed", type=int, default=0, help="Recorded in the manifest; the greedy search is deterministic.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None, help="Cost trajectory (TSV).")
@click.pass_context
def cmd_derandomize(ctx, paulis_path, depth, epsilon, shots, per_observable, weights, relaxed, order, horizon, seed, out, log_path):
    """Greedily derandomize a brickwork ensemble for a Pauli list."""
    flags = dict(paulis=paulis_path, depth=depth, epsilon=epsilon, shots=shots, per_observable=per_observable,
                 weights=weights, relaxed=relaxed, order=order, horizon=horizon, seed=seed)
    manifest = Manifest("derandomize", flags, {"paulis": paulis_path}, ctx.obj["record_time"])
    if (shots is None) == (per_observable is None):
        raise DomainError("give exactly one of --shots and --per-observable")
    if shots is not None and shots < 1:
        raise DomainError("--shots must be at least 1")
    if per_observable is not None and per_observable < 1:
        raise DomainError("--per-observable must be at least 1")
    if not epsilon > 0:
        raise DomainError("--epsilon must be positive")
    if not Path(paulis_path).is_file():
        raise DomainError(f"--paulis: no such file {paulis_path!r}")
    paulis = read_pauli_list(paulis_path)
    slot_order = _parse_order(order, paulis.n, depth)
    hz = None
    if horizon not in (None, "self-consistent"):
        try:
            hz = int(horizon)
        except ValueError:
            raise DomainError("--horizon must be an integer or 'self-consistent'") from None
    params = CostParams(epsilon, measurement_horizon=hz)
    fixed = None if slot_order in (None, "scan") else (
        reversed_two_qubit_order(paulis.n, depth) if slot_order == "reversed" else slot_order)
    config = RunConfig(paulis.n, depth, shots=shots, per_observable=per_observable, relaxed=relaxed,
                       weights=weights, slot_order=tuple(fixed) if fixed else None)
    with _threads(ctx.obj["threads"]):
        if shots is not None:
            result = (derandomize_best_order if slot_order == "scan" else derandomize)(paulis, config, params)
        elif horizon == "self-consistent":
            result = derandomize_self_consistent(paulis, per_observable, config, params)
        else:
            result = derandomize_until_covered(paulis, per_observable, config, params)
    m = manifest.finish()
    _emit(circuits_to_json(result.specs, m, cost=result.cost, shots=result.shots, fallbacks=result.fallbacks) + "\n", out)
    if log_path:
        Path(log_path).write_text("# " + manifest.comment() + "\n" + result.run_log())
    click.echo(f"shots={result.shots} cost={result.cost!r}", err=True)


@cli.command("simulate")
@click.option("--circuits", "circuits_path", type=click.Path(dir_okay=False), required=True)
@click.option("--state", "state_spec", required=True, help="zero, ground:PAULIFILE or file:VECTORFILE")
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cmd_simulate(ctx, circuits_path, state_spec, seed, out):
    """Sample one bitstring per circuit from a dense state."""
    kind, _, arg = state_spec.partition(":")
    manifest = Manifest("simulate", dict(circuits=circuits_path, state=state_spec, seed=seed),
                        {"circuits": circuits_path, "state": arg or None}, ctx.obj["record_time"])
    if not Path(circuits_path).is_file():
        raise DomainError(f"--circuits: no such file {circuits_path!r}")
    specs = circuits_from_json(Path(circuits_path).read_text())
    if not specs:
        raise DomainError("circuit file is empty")
    state = _load_state(state_spec, specs[0].n)
    with _threads(ctx.obj["threads"]):
        records = sample_records(as_circuits(specs), state, seed)
    _emit(write_outcomes(records, header=manifest.comment()), out)


@cli.command("estimate")
@click.option("--circuits", "circuits_path", type=click.Path(dir_okay=False), required=True)
@click.option("--outcomes", "outcomes_path", type=click.Path(dir_okay=False), required=True)
@click.option("--paulis", "paulis_path", type=click.Path(dir_okay=False), required=True)
@click.option("--epsilon", type=float, required=True)
@click.option("--true-values", "truth_path", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cmd_estimate(ctx, circuits_path, outcomes_path, paulis_path, epsilon, truth_path, fmt, out):
    """Per-Pauli estimates, bounds and the recombined scalar."""
    inputs = {"circuits": circuits_path, "outcomes": outcomes_path, "paulis": paulis_path, "true_values": truth_path}
    manifest = Manifest("estimate", dict(inputs, epsilon=epsilon, format=fmt), inputs, ctx.obj["record_time"])
    for name, p in inputs.items():
        if p is not None and not Path(p).is_file():
            raise DomainError(f"--{name.replace('_', '-')}: no such file {p!r}")
    if not epsilon > 0:
        raise DomainError("--epsilon must be positive")
    specs = circuits_from_json(Path(circuits_path).read_text())
    records = read_outcomes(Path(outcomes_path).read_text(), outcomes_path)
    paulis = read_pauli_list(paulis_path)
    if specs and specs[0].n != paulis.n:
        raise DimensionError(f"circuits have {specs[0].n} qubits, Paulis have {paulis.n}")
    for r in records:
        r.validate(paulis.n)
        if r.index >= len(specs):
            raise DimensionError(f"outcome for circuit {r.index} but only {len(specs)} circuits")
    truth = None
    if truth_path:
        table = _read_truth(truth_path)
        missing = [str(p) for p in paulis.paulis if p.hermitian() not in table]
        if missing:
            raise DomainError(f"--true-values lacks {', '.join(missing[:5])}")
        truth = [table[p.hermitian()] for p in paulis.paulis]
    report = build_report(specs, records, paulis, epsilon, truth, meta=manifest.finish())
    if fmt == "json":
        _emit(report.to_json() + "\n", out)
    else:
        _emit("# " + manifest.comment() + "\n" + report.to_csv(), out)
    flagged = report.unmeasured
    if flagged:
        click.echo(f"{len(flagged)} Pauli(s) never measured; estimates set to 0", err=True)


@cli.command("benchmark")
@click.argument("target", type=click.Choice(["h2", "bell", "hubbard", "random30"]))
@click.option("--epsilon", type=float, required=True)
@click.option("--shots", type=click.IntRange(min=1), default=None)
@click.option("--depth", type=click.IntRange(min=0), default=None)
@click.option("--sims", type=click.IntRange(min=1), default=100)
@click.option("--seed", type=int, default=0)
@click.option("--qubits", type=click.IntRange(min=4), default=12, help="Hubbard qubit count (even).")
@click.option("--per-observable", type=click.IntRange(min=1), default=25)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cmd_benchmark(ctx, target, epsilon, shots, depth, sims, seed, qubits, per_observable, out):
    """Scripted benchmark pipelines; prints a CSV table."""
    flags = dict(target=target, epsilon=epsilon, shots=shots, depth=depth, sims=sims, seed=seed,
                 qubits=qubits, per_observable=per_observable)
    manifest = Manifest("benchmark", flags, {}, ctx.obj["record_time"])
    if not epsilon > 0:
        raise DomainError("--epsilon must be positive")
    params = CostParams(epsilon)
    with _threads(ctx.obj["threads"]):
        rows = _BENCH[target](params, shots, depth, sims, seed, qubits, per_observable)
    buf = io.StringIO()
    buf.write("# " + manifest.comment() + "\n")
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _emit(buf.getvalue(), out)


def _bench_h2(params, shots, depth, sims, seed, qubits, per_observable):
    h = load_dataset("h2")
    shots, depth = shots or 1000, 1 if depth is None else depth
    result = derandomize(h, RunConfig(h.n, depth, shots=shots, weights="abs-coeff"), params)
    gs = ground_state(h)
    plan = MeasurementPlan(result.specs, h.paulis)
    errs = h2_error_samples(plan, gs.state, gs.energy, np.array(h.coefficients), sims, seed)
    return [{
        "strategy": f"dss_d{depth}", "shots": shots, "sims": sims, "mean_abs_error": float(np.mean(errs)),
        "reference": PUBLISHED_REFERENCE[("h2", "mean_abs_error")], "cost": result.cost,
    }]


def h2_error_samples(plan: MeasurementPlan, state: StateVector, exact: float, coefficients, sims: int, seed) -> np.ndarray:
    """Absolute error of the recombined scalar over ``sims`` independent shot sets."""
    cdfs, rows = outcome_distributions(plan.circuits, state)
    rng = make_rng(seed)
    n = state.n
    shifts = np.arange(n - 1, -1, -1)
    idx_all = np.arange(len(plan.circuits))
    out = np.empty(sims)
    for s in range(sims):
        idx = sample_indices(cdfs, rows, rng)
        bits = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
        est, _ = plan.estimates(idx_all, bits)
        out[s] = abs(float(np.dot(coefficients, est)) - exact)
    return out


def _bench_bell(params, shots, depth, sims, seed, qubits, per_observable):
    p = load_dataset("bell")
    shots, depth = shots or 100, 3 if depth is None else depth
    result = derandomize_best_order(p, RunConfig(p.n, depth, shots=shots), params)
    plan = MeasurementPlan(result.specs, p.paulis)
    return [{"pauli": str(q), "hits": int(h), "shots": shots, "cost": result.cost} for q, h in zip(p.paulis, plan.hits)]


def _bench_hubbard(params, shots, depth, sims, seed, qubits, per_observable):
    if qubits % 2:
        raise DomainError("--qubits must be even")
    h2 = square_hamiltonian(hubbard_hamiltonian(HubbardParams(qubits // 2)))
    depths = [0, 1, 2] if depth is None else [depth]
    rows = []
    for d in depths:
        r = derandomize_self_consistent(h2, per_observable, RunConfig(h2.n, d, per_observable=per_observable), params)
        ref = PUBLISHED_REFERENCE[("hubbard", "dss_d0_shots")] if d == 0 and qubits == 12 else ""
        rows.append({"strategy": f"dss_d{d}", "shots": r.shots, "reference": ref})
    rows.append({"strategy": "direct", "shots": len(direct_measurement_plan(h2, per_observable)), "reference": ""})
    rows.append({"strategy": "naive_grouping", "shots": len(naive_grouping_bases(qubits)) * per_observable,
                 "reference": (7 * qubits - 11) * per_observable})
    return rows


def _bench_random30(params, shots, depth, sims, seed, qubits, per_observable):
    p = load_dataset("random30")
    shots, depth = shots or 100, 3 if depth is None else depth
    strict = derandomize(p, RunConfig(p.n, depth, shots=shots), params)
    dss, shallow = relaxed_dominates_shallow_check(p, RunConfig(p.n, depth, shots=shots, relaxed=True), params)
    return [
        {"strategy": "dss_strict", "shots": shots, "cost": strict.cost, "min_hits": strict.hitting_counts.minimum()},
        {"strategy": "dss_relaxed", "shots": shots, "cost": dss, "min_hits": ""},
        {"strategy": "shallow_shadows", "shots": shots, "cost": shallow, "min_hits": ""},
    ]


_BENCH = {"h2": _bench_h2, "bell": _bench_bell, "hubbard": _bench_hubbard, "random30": _bench_random30}


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="dss", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 1
    except DSSError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except AssertionError as exc:
        click.echo(f"internal invariant violated: {exc}", err=True)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
