"""Batch front-end: solve instances, export QUBOs, run oracles and benches.

Exit codes: 0 success / valid route; 1 input error; 2 no valid solution,
export refusal, or failed validation; 3 oracle budget or size limits.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
import zlib
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import (
    InfeasibleEndpoints,
    InputError,
    NoOddVertices,
    NoValidSolution,
    PostquboError,
    SearchBudgetExceeded,
    SpecError,
    TooLarge,
    TooManyOddVertices,
    UnsupportedCombination,
)
from .general import compile_general, default_penalties
from .graphs import odd_degree_vertices
from .oracle import euler_shortcut, exact_walk_oracle
from .pairing import (
    augment_and_route,
    compile_pairing,
    default_pairing_penalty,
    euler_route,
    exact_pairing_oracle,
)
from .problem import ProblemSpec
from .qubo import PENALTY_FAMILIES, PenaltyConfig, format_qubo_text, format_registry_text
from .routes import RouteSolution
from .serialization import (
    GraphDocument,
    SpecDocument,
    dump_json,
    load_instance,
    render_dot,
    revalidate_route,
    route_from_json,
    route_to_json,
)
from .solvers import CompiledInstance, SOLVER_NAMES, make_sampler, solve_with_retune

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_SOLUTION = 2
EXIT_ORACLE_LIMIT = 3


@dataclass
class RunConfig:
    command: str
    input_path: Path
    pipeline: str = "auto"
    solver: str = "sa+greedy"
    seed: int = 0
    out: Path | None = None
    i_max: int | None = None
    penalties: dict[str, float] = dataclasses.field(default_factory=dict)
    force_qubo: bool = False
    dot: bool = False
    max_retunes: int = 5
    reads: int = 1000
    sweeps: int = 1000
    starts: int = 64
    tenure: int | None = None
    iterations: int | None = None
    beta_min: float = 0.1
    beta_max: float = 10.0
    seeds: tuple[int, ...] = (0,)
    timings: bool = False
    node_limit: int = 2_000_000
    instance_path: Path | None = None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="postqubo",
        description="Compile postman-problem variants to QUBOs, solve, and decode routes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, solver: bool = True) -> None:
        p.add_argument("input", type=Path, help="graph or spec JSON file")
        p.add_argument("--pipeline", choices=("auto", "pairing", "general"), default="auto")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--i-max", type=int, default=None, dest="i_max")
        for family in PENALTY_FAMILIES:
            p.add_argument(
                f"--p-{family.replace('_', '-')}",
                type=float,
                default=None,
                dest=f"p_{family}",
                help=f"penalty multiplier for the {family} constraint",
            )
        p.add_argument("--force-qubo", action="store_true", dest="force_qubo")
        if solver:
            p.add_argument("--solver", default="sa+greedy")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--max-retunes", type=int, default=5, dest="max_retunes")
            p.add_argument("--reads", type=int, default=1000)
            p.add_argument("--sweeps", type=int, default=1000)
            p.add_argument("--starts", type=int, default=64)
            p.add_argument("--tenure", type=int, default=None)
            p.add_argument("--iterations", type=int, default=None)
            p.add_argument("--beta-min", type=float, default=0.1, dest="beta_min")
            p.add_argument("--beta-max", type=float, default=10.0, dest="beta_max")

    p_solve = sub.add_parser("solve", help="solve one instance and write the route")
    add_common(p_solve)
    p_solve.add_argument("--dot", action="store_true", help="also write a DOT overlay")

    p_export = sub.add_parser("export-qubo", help="write the QUBO text and registry")
    add_common(p_export, solver=False)

    p_oracle = sub.add_parser("oracle", help="exact ground truth for small instances")
    p_oracle.add_argument("input", type=Path, help="instance file or suite directory")
    p_oracle.add_argument("--out", type=Path, default=None, help="output directory")
    p_oracle.add_argument("--node-limit", type=int, default=2_000_000, dest="node_limit")

    p_validate = sub.add_parser("validate", help="re-check a route file")
    p_validate.add_argument("input", type=Path, help="route JSON file")
    p_validate.add_argument("--instance", type=Path, required=True, help="original instance")

    p_bench = sub.add_parser("bench", help="run a suite and emit a CSV")
    p_bench.add_argument("input", type=Path, help="suite directory")
    p_bench.add_argument("--solver", default="sa+greedy", help="comma-separated solver list")
    p_bench.add_argument("--seeds", default="0", help="comma-separated seed list")
    p_bench.add_argument("--out", type=Path, default=None, help="CSV path")
    p_bench.add_argument("--timings", action="store_true", help="include wall_time column")
    p_bench.add_argument("--i-max", type=int, default=None, dest="i_max")
    for family in PENALTY_FAMILIES:
        p_bench.add_argument(
            f"--p-{family.replace('_', '-')}", type=float, default=None, dest=f"p_{family}"
        )
    p_bench.add_argument("--max-retunes", type=int, default=5, dest="max_retunes")
    p_bench.add_argument("--reads", type=int, default=1000)
    p_bench.add_argument("--sweeps", type=int, default=1000)
    p_bench.add_argument("--starts", type=int, default=64)
    p_bench.add_argument("--tenure", type=int, default=None)
    p_bench.add_argument("--iterations", type=int, default=None)
    p_bench.add_argument("--beta-min", type=float, default=0.1, dest="beta_min")
    p_bench.add_argument("--beta-max", type=float, default=10.0, dest="beta_max")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    penalties = {
        family: getattr(args, f"p_{family}")
        for family in PENALTY_FAMILIES
        if getattr(args, f"p_{family}", None) is not None
    }
    cfg = RunConfig(command=args.command, input_path=args.input, penalties=penalties)
    for name in (
        "pipeline", "solver", "seed", "out", "i_max", "force_qubo", "dot",
        "max_retunes", "reads", "sweeps", "starts", "tenure", "iterations",
        "beta_min", "beta_max", "timings", "node_limit",
    ):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "seeds"):
        cfg.seeds = tuple(int(s) for s in str(args.seeds).split(",") if s != "")
    return cfg


def _sampler_for(cfg: RunConfig, solver: str, seed: int):
    return make_sampler(
        solver,
        seed=seed,
        starts=cfg.starts,
        sweeps=cfg.sweeps,
        reads=cfg.reads,
        beta_schedule=(cfg.beta_min, cfg.beta_max),
        tenure=cfg.tenure,
        iterations=cfg.iterations,
    )


def _resolve_pipeline(cfg_pipeline: str, instance) -> str:
    if cfg_pipeline != "auto":
        if cfg_pipeline == "pairing" and isinstance(instance, SpecDocument):
            raise InputError("the pairing pipeline takes a graph file, not a spec")
        return cfg_pipeline
    return "pairing" if isinstance(instance, GraphDocument) else "general"


def _spec_of(instance, cfg: RunConfig) -> tuple[ProblemSpec, GraphDocument]:
    if isinstance(instance, SpecDocument):
        spec, doc = instance.spec, instance.graph_doc
    else:
        spec, doc = ProblemSpec(graph=instance.graph), instance
    if cfg.i_max is not None:
        spec = replace(spec, i_max=cfg.i_max)
    return spec, doc


def _penalties_for(spec_or_graph, cfg: RunConfig) -> PenaltyConfig:
    if isinstance(spec_or_graph, ProblemSpec):
        pen = default_penalties(spec_or_graph)
    else:
        pen = PenaltyConfig.for_max_weight(spec_or_graph.max_weight)
    overrides = {f"p_{fam}": value for fam, value in cfg.penalties.items()}
    return dataclasses.replace(pen, **overrides) if overrides else pen


def _solve_one(
    instance, cfg: RunConfig, solver: str, seed: int
) -> tuple[RouteSolution, dict, GraphDocument]:
    """Shared solve path; returns (solution, report dict, graph doc)."""
    pipeline = _resolve_pipeline(cfg.pipeline, instance)
    sampler = _sampler_for(cfg, solver, seed)
    if pipeline == "pairing":
        doc = instance
        g = doc.graph
        if not odd_degree_vertices(g) and not cfg.force_qubo:
            solution = euler_route(g)
            meta = {"pipeline": pipeline, "solver": "euler-shortcut", "seed": seed,
                    "energy": None, "retunes": 0, "report": None}
            return solution, meta, doc
        pen = _penalties_for(g, cfg)
        if "pairing" not in cfg.penalties:
            pen = dataclasses.replace(pen, p_pairing=default_pairing_penalty(g))

        def builder(p: PenaltyConfig) -> CompiledInstance:
            compiled = compile_pairing(g, p.p_pairing)
            return CompiledInstance(compiled.qubo(), compiled.decode, compiled.constraint_values)

        report, solution = solve_with_retune(builder, pen, sampler, cfg.max_retunes)
        meta = {"pipeline": pipeline, "solver": solver, "seed": seed,
                "energy": report.best_energy, "retunes": report.retunes, "report": report}
        return solution, meta, doc

    spec, doc = _spec_of(instance, cfg)
    if not cfg.force_qubo:
        shortcut = euler_shortcut(spec)
        if shortcut is not None:
            meta = {"pipeline": pipeline, "solver": "euler-shortcut", "seed": seed,
                    "energy": None, "retunes": 0, "report": None}
            return shortcut, meta, doc
    pen = _penalties_for(spec, cfg)
    compiled = compile_general(spec)

    def builder(p: PenaltyConfig) -> CompiledInstance:
        return CompiledInstance(compiled.qubo(p), compiled.decode, compiled.constraint_values)

    report, solution = solve_with_retune(builder, pen, sampler, cfg.max_retunes)
    meta = {"pipeline": pipeline, "solver": solver, "seed": seed,
            "energy": report.best_energy, "retunes": report.retunes, "report": report}
    return solution, meta, doc


def _summary_text(solution: RouteSolution, meta: dict) -> str:
    lines = [
        f"pipeline: {meta['pipeline']}",
        f"solver:   {meta['solver']} (seed {meta['seed']})",
        f"energy:   {meta['energy']}",
        f"retunes:  {meta['retunes']}",
        f"weight:   {solution.objective_weight!r}",
        f"turns:    {solution.turn_extra!r}",
        f"valid:    {solution.is_valid}",
    ]
    if not solution.is_valid:
        lines.append("failures: " + ", ".join(solution.validity.failures()))
    for p, walk in enumerate(solution.walks):
        path = " ".join(f"{s.frm}->{s.to}[{s.mode[0]}]" for s in walk.steps)
        lines.append(f"walk {p} (weight {walk.weight!r}): {path}")
    return "\n".join(lines) + "\n"


def cmd_solve(cfg: RunConfig) -> int:
    instance = load_instance(cfg.input_path)
    solution, meta, doc = _solve_one(instance, cfg, cfg.solver, cfg.seed)
    out = cfg.out if cfg.out is not None else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.input_path.stem
    route = route_to_json(
        solution, doc, meta["pipeline"], meta["solver"], meta["seed"],
        meta["energy"], meta["retunes"],
    )
    dump_json(route, out / f"{stem}.route.json")
    report = meta["report"]
    report_obj = {
        "solver": meta["solver"],
        "seed": meta["seed"],
        "best_energy": meta["energy"],
        "samples_evaluated": report.samples_evaluated if report else 0,
        "wall_time": report.wall_time if report else 0.0,
        "retunes": meta["retunes"],
    }
    dump_json(report_obj, out / f"{stem}.report.json")
    (out / f"{stem}.summary.txt").write_text(_summary_text(solution, meta))
    if cfg.dot:
        (out / f"{stem}.route.dot").write_text(render_dot(doc, solution))
    print(f"route weight {solution.objective_weight!r}, valid={solution.is_valid}")
    return EXIT_OK if solution.is_valid else EXIT_NO_SOLUTION


def cmd_export_qubo(cfg: RunConfig) -> int:
    instance = load_instance(cfg.input_path)
    pipeline = _resolve_pipeline(cfg.pipeline, instance)
    if pipeline == "pairing":
        g = instance.graph
        if not odd_degree_vertices(g):
            print(
                "ShortcutApplies: graph is already Eulerian; there is no pairing "
                "QUBO to export",
                file=sys.stderr,
            )
            return EXIT_NO_SOLUTION
        p = cfg.penalties.get("pairing", default_pairing_penalty(g))
        compiled = compile_pairing(g, p)
        qubo, registry = compiled.qubo(), compiled.registry
    else:
        spec, _ = _spec_of(instance, cfg)
        if not cfg.force_qubo and euler_shortcut(spec) is not None:
            print(
                "ShortcutApplies: the required edges admit a direct Euler circuit; "
                "re-run with --force-qubo to export anyway",
                file=sys.stderr,
            )
            return EXIT_NO_SOLUTION
        compiled = compile_general(spec)
        qubo, registry = compiled.qubo(_penalties_for(spec, cfg)), compiled.registry
    out = cfg.out if cfg.out is not None else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.input_path.stem
    (out / f"{stem}.qubo.txt").write_text(format_qubo_text(qubo))
    (out / f"{stem}.registry.txt").write_text(format_registry_text(registry))
    print(f"wrote {qubo.n}-variable QUBO")
    return EXIT_OK


def _oracle_route(instance, cfg: RunConfig) -> tuple[RouteSolution, GraphDocument, str]:
    if isinstance(instance, GraphDocument):
        pairing, _added = exact_pairing_oracle(instance.graph)
        return augment_and_route(instance.graph, pairing), instance, "pairing"
    solution = exact_walk_oracle(instance.spec, node_limit=cfg.node_limit)
    return solution, instance.graph_doc, "general"


def cmd_oracle(cfg: RunConfig) -> int:
    paths = (
        sorted(
            p
            for p in cfg.input_path.glob("*.json")
            if not p.name.endswith((".oracle.json", ".route.json", ".report.json"))
        )
        if cfg.input_path.is_dir()
        else [cfg.input_path]
    )
    if not paths:
        print("no instances found", file=sys.stderr)
        return EXIT_INPUT
    limited = False
    for path in paths:
        instance = load_instance(path)
        out_dir = cfg.out if cfg.out is not None else path.parent
        out_dir.mkdir(parents=True, exist_ok=True)
        try:
            solution, doc, pipeline = _oracle_route(instance, cfg)
        except (TooLarge, TooManyOddVertices, SearchBudgetExceeded) as exc:
            print(f"{path.name}: {exc}", file=sys.stderr)
            limited = True
            continue
        route = route_to_json(solution, doc, pipeline, "oracle", 0, None, 0)
        dump_json(route, out_dir / (path.stem + ".oracle.json"))
        print(f"{path.name}: optimum weight {solution.objective_weight!r}")
    return EXIT_ORACLE_LIMIT if limited else EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    import json

    assert cfg.instance_path is not None
    instance = load_instance(cfg.instance_path)
    doc = instance if isinstance(instance, GraphDocument) else instance.graph_doc
    try:
        with open(cfg.input_path, "r", encoding="utf-8") as fh:
            route_obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read route: {exc}") from exc
    solution = route_from_json(route_obj, doc)
    problems = revalidate_route(instance, solution)
    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        return EXIT_NO_SOLUTION
    print("route is valid")
    return EXIT_OK


def _bench_rows(cfg: RunConfig):
    suite = sorted(
        p
        for p in cfg.input_path.glob("*.json")
        if not p.name.endswith((".oracle.json", ".route.json", ".report.json"))
    )
    if not suite:
        raise InputError(f"no instances in {cfg.input_path}")
    solvers = [s.strip() for s in cfg.solver.split(",") if s.strip()]
    for name in solvers:
        if name not in SOLVER_NAMES:
            raise InputError(f"unknown solver {name!r}")
    for path in suite:
        oracle_path = path.with_name(path.stem + ".oracle.json")
        oracle_weight = None
        if oracle_path.exists():
            import json

            with open(oracle_path, "r", encoding="utf-8") as fh:
                oracle_weight = float(json.load(fh)["weight"])
        for solver in solvers:
            for seed in cfg.seeds:
                yield path, solver, seed, oracle_weight


def cmd_bench(cfg: RunConfig) -> int:
    out_path = cfg.out if cfg.out is not None else cfg.input_path / "bench.csv"
    header = ["instance", "solver", "seed", "valid", "energy", "weight", "gap_vs_oracle"]
    if cfg.timings:
        header.append("wall_time")
    rows = []
    successes = 0
    bench_cfg = dataclasses.replace(cfg, force_qubo=True, pipeline="auto")
    for path, solver, seed, oracle_weight in _bench_rows(cfg):
        row = {"instance": path.stem, "solver": solver, "seed": seed,
               "valid": "false", "energy": "", "weight": "", "gap_vs_oracle": ""}
        try:
            instance = load_instance(path)
            # per-instance seed stream so suite composition does not couple runs
            row_seed = (seed + zlib.crc32(path.stem.encode())) % (1 << 32)
            solution, meta, _doc = _solve_one(instance, bench_cfg, solver, row_seed)
            row["valid"] = "true" if solution.is_valid else "false"
            row["energy"] = repr(meta["energy"]) if meta["energy"] is not None else ""
            row["weight"] = repr(solution.objective_weight)
            if oracle_weight is not None:
                row["gap_vs_oracle"] = repr(solution.objective_weight - oracle_weight)
            if cfg.timings:
                row["wall_time"] = (
                    f"{meta['report'].wall_time:.3f}" if meta["report"] else "0.000"
                )
            successes += 1
        except PostquboError as exc:
            print(f"{path.name} [{solver} seed {seed}]: {exc}", file=sys.stderr)
            if cfg.timings:
                row["wall_time"] = ""
        rows.append(row)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {out_path}")
    return EXIT_OK if successes else EXIT_INPUT


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = _config_from_args(args)
    if args.command == "validate":
        cfg.instance_path = args.instance
    handlers = {
        "solve": cmd_solve,
        "export-qubo": cmd_export_qubo,
        "oracle": cmd_oracle,
        "validate": cmd_validate,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](cfg)
    except NoValidSolution as exc:
        print(f"no valid solution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (TooLarge, TooManyOddVertices, SearchBudgetExceeded) as exc:
        print(f"oracle limit: {exc}", file=sys.stderr)
        return EXIT_ORACLE_LIMIT
    except (InputError, SpecError, UnsupportedCombination, InfeasibleEndpoints, NoOddVertices) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PostquboError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
