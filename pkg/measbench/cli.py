"""
measbench command line.

    measbench plan --task qse --method fc-si --integrals h2.fcidump --out plan.json
    measbench evaluate --plan plan.json --epsilon 1e-3 --out result.json
    measbench bench --config bench.yaml --out-dir results/
    measbench qse-solve --hmat H.npy --smat S.npy
    measbench ncrit --mc 1.2 --ground 0.2 --qse 10
    measbench hydrogen-chain --atoms 4 --spacing 1.0 --out h4.fcidump
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from measbench.chemistry.hydrogen import hydrogen_chain
from measbench.chemistry.integrals import write_fcidump
from measbench.config import configure_logging, get_settings
from measbench.core.errors import MeasbenchError
from measbench.core.models import (
    BenchmarkConfig,
    BenchmarkResult,
    Mapping,
    MoleculeEntry,
    Task,
)
from measbench.metrics.figures import n_crit, to_millions
from measbench.metrics.qse import S_THRESHOLD, solve_qse
from measbench.registry.registry import MethodRegistry
from measbench.runtime.context import RunContext
from measbench.runtime.documents import StrategyDocument, document_for, load_strategy
from measbench.runtime.runtime import BenchmarkRuntime, run_benchmark

logger = logging.getLogger(__name__)


def _load_matrix(path: str) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".npy":
        return np.load(path)
    return np.loadtxt(path)


# ==================== Commands ====================

def cmd_plan(args: argparse.Namespace) -> int:
    registry = MethodRegistry()
    spec = registry.require(args.method)
    integrals = Path(args.integrals).resolve()
    molecule = MoleculeEntry(
        label=args.label or integrals.stem,
        integrals=integrals,
        n_electrons=args.n_electrons,
        n_states=args.ns,
    )
    mapping = Mapping.JW if spec.mapping_independent else Mapping(args.mapping)
    if mapping.value != args.mapping:
        logger.warning(f"{spec.name} runs under Jordan-Wigner; ignoring --mapping {args.mapping}")

    runtime = BenchmarkRuntime(registry)
    problem = runtime.problems.get(molecule, args.task, mapping)
    context = RunContext(
        molecule=molecule.label,
        task=problem.task,
        method=spec.name,
        mapping=mapping,
        seed=args.seed,
        shadow_frames=args.frames,
        max_sweeps=args.max_sweeps,
    )
    strategy = runtime.plan(spec, problem, context)
    document = document_for(strategy, problem, molecule)
    document.save(Path(args.out))
    print(
        f"{spec.name} {problem.task.value} {mapping.value}: N_op={problem.observables.n_op} "
        f"N_P={problem.observables.n_paulis} groups={strategy.n_groups} -> {args.out}"
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    document = StrategyDocument.load(Path(args.plan))
    molecule = document.molecule
    if args.ns is not None:
        molecule = molecule.model_copy(update={"n_states": args.ns})
    if args.seed is not None and document.kind == "shadow":
        document.payload["seed"] = args.seed

    runtime = BenchmarkRuntime()
    problem = runtime.problems.get(molecule, document.task, document.mapping)
    strategy = load_strategy(document, problem)
    context = RunContext(
        molecule=molecule.label,
        task=document.task,
        method=document.method,
        mapping=document.mapping,
        seed=args.seed or 0,
        epsilon=args.epsilon,
        partial_qse_fraction=args.partial,
    )
    spec = runtime.registry.require(document.method)
    metric = runtime.executor_for(spec).evaluate(strategy, problem, context, args.states)
    result = BenchmarkResult(
        molecule=molecule.label,
        task=document.task,
        method=document.method,
        mapping=document.mapping,
        epsilon=args.epsilon,
        seed=context.seed,
        metric=metric.value,
        stderr=metric.stderr,
        n_groups=strategy.n_groups,
        n_paulis=problem.observables.n_paulis,
        lower_bound=metric.lower_bound,
        warnings=list(context.warnings),
        provenance={"states": args.states, "checksum": problem.integrals.checksum},
        execution_time_ms=context.elapsed_ms(),
    )
    if args.out:
        Path(args.out).write_text(result.model_dump_json(indent=2), encoding="utf-8")
    bound = ">= " if metric.lower_bound else ""
    print(
        f"{document.method} {document.task.value}: eps^2 M = {metric.value:.6g}, "
        f"M = {bound}{to_millions(metric.value, args.epsilon):.4g} million"
        + (f" (stderr {to_millions(metric.stderr, args.epsilon):.2g})" if metric.stderr else "")
    )
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    config = BenchmarkConfig.from_yaml(Path(args.config))
    if args.max_parallel is not None:
        config.max_parallel = args.max_parallel
    results = run_benchmark(config, Path(args.out_dir) if args.out_dir else None)
    failed = [r for r in results if not r.success]
    print(f"{len(results)} rows, {len(failed)} failed")
    return 1 if failed else 0


def cmd_qse_solve(args: argparse.Namespace) -> int:
    h = _load_matrix(args.hmat)
    s = _load_matrix(args.smat)
    values = solve_qse(h, s, args.threshold)
    for value in values:
        print(f"{value:.12f}")
    return 0


def cmd_ncrit(args: argparse.Namespace) -> int:
    print(n_crit(args.mc, args.ground, args.qse))
    return 0


def cmd_hydrogen_chain(args: argparse.Namespace) -> int:
    integrals = hydrogen_chain(args.atoms, args.spacing, args.charge)
    write_fcidump(integrals, Path(args.out))
    print(
        f"H{args.atoms} (charge {args.charge}, {args.spacing} A): "
        f"E_HF = {integrals.metadata['hf_energy']:.10f} -> {args.out}"
    )
    return 0


# ==================== Parser ====================

def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="measbench",
        description="Measurement-cost planning and benchmarking for excited-state VQE",
    )
    parser.add_argument("--log-level", default=None, help="Overrides MEASBENCH_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    methods = MethodRegistry().list_names()
    plan = sub.add_parser("plan", help="Build a measurement strategy from the proxy states")
    plan.add_argument("--task", choices=[t.value for t in Task], required=True)
    plan.add_argument("--method", choices=methods, required=True)
    plan.add_argument("--mapping", choices=[m.value for m in Mapping], default="jw")
    plan.add_argument("--integrals", required=True, help="FCIDUMP or .json integral file")
    plan.add_argument("--label", default=None, help="Molecule label (file stem by default)")
    plan.add_argument("--n-electrons", type=int, default=None)
    plan.add_argument("--ns", type=int, default=10, help="MC-VQE ensemble size")
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--frames", type=int, default=None, help="Shadow frame budget (exact when omitted)")
    plan.add_argument("--max-sweeps", type=int, default=20)
    plan.add_argument("--out", required=True)
    plan.set_defaults(func=cmd_plan)

    evaluate = sub.add_parser("evaluate", help="Evaluate a saved strategy on exact states")
    evaluate.add_argument("--plan", required=True)
    evaluate.add_argument("--epsilon", type=float, default=settings.default_epsilon)
    evaluate.add_argument("--states", choices=["fci", "cisd"], default="fci")
    evaluate.add_argument("--ns", type=int, default=None)
    evaluate.add_argument("--seed", type=int, default=None)
    evaluate.add_argument("--partial", type=float, default=None, help="Evaluated QSE fraction")
    evaluate.add_argument("--out", default=None)
    evaluate.set_defaults(func=cmd_evaluate)

    bench = sub.add_parser("bench", help="Run a benchmark config and write reports")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out-dir", default=None)
    bench.add_argument("--max-parallel", type=int, default=None)
    bench.set_defaults(func=cmd_bench)

    qse = sub.add_parser("qse-solve", help="Thresholded QSE generalized eigenproblem")
    qse.add_argument("--hmat", required=True)
    qse.add_argument("--smat", required=True)
    qse.add_argument("--threshold", type=float, default=S_THRESHOLD)
    qse.set_defaults(func=cmd_qse_solve)

    crit = sub.add_parser("ncrit", help="Iterations after which MC-VQE outspends QSE")
    crit.add_argument("--mc", type=float, required=True, help="MC-VQE cost per iteration")
    crit.add_argument("--ground", type=float, required=True, help="Ground VQE cost per iteration")
    crit.add_argument("--qse", type=float, required=True, help="One-time QSE cost")
    crit.set_defaults(func=cmd_ncrit)

    chain = sub.add_parser("hydrogen-chain", help="Write STO-3G integrals of a linear hydrogen chain")
    chain.add_argument("--atoms", type=int, required=True)
    chain.add_argument("--spacing", type=float, default=1.0, help="H-H distance in angstrom")
    chain.add_argument("--charge", type=int, default=0)
    chain.add_argument("--out", required=True)
    chain.set_defaults(func=cmd_hydrogen_chain)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except MeasbenchError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
