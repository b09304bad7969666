"""Command-line front end: gen, solve, validate, render and bench."""
from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from .errors import GenerationError, InputError
from .instances import (FAMILIES, Instance, InstanceSpec, SolutionRecord, dump_records, generate, load_instance,
                        load_records, random_tspsd, write_instance)
from .placement import PlacementParams
from .sdgraph import SelfDeletingGraph
from .svg import render_svg
from .tspcp import Roadmap, TspCpParams, solve_dtspcp, solve_tsp_initial, solve_tspcp, tspcp_fixed_radius
from .tspsd import GraspParams, StopCondition, grasp
from .validate import validate_record

log = logging.getLogger("cptour")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_INVALID = 0, 2, 3, 4


class Infeasible(Exception):
    pass


def gap(score: float, ref: float) -> float:
    """Relative difference in percent: 100 (score / ref - 1)."""
    if ref == 0:
        raise InputError("gap reference must be non-zero")
    return 100.0 * (score / ref - 1.0)


def gap_sigma(sigma: float, ref: float) -> float:
    if ref == 0:
        raise InputError("gap reference must be non-zero")
    return 100.0 * sigma / ref


# --------------------------------------------------------------------------
# run configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    variant: str
    seed: int = 0
    runs: int = 1
    time_budget: float | None = None
    budget_per_node: float | None = None
    iterations: int | None = None
    eps: float = 0.1
    radius: float | None = None
    dubins_radius: float | None = None
    headings: int = 8
    guide: list[int] | None = None
    test_profile: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise InputError("--runs must be at least 1")
        for name in ("time_budget", "budget_per_node", "eps", "radius", "dubins_radius"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise InputError(f"--{name.replace('_', '-')} must be positive")
        if self.iterations is not None and self.iterations < 1:
            raise InputError("--iterations must be at least 1")
        if self.headings < 2:
            raise InputError("--headings must be at least 2")

    @property
    def timed(self) -> bool:
        return self.time_budget is not None or self.budget_per_node is not None or self.iterations is None

    def budget(self, n: int) -> float:
        if self.time_budget is not None:
            return self.time_budget
        factor = self.budget_per_node
        if factor is None:
            factor = 0.1 if self.test_profile else 10.0
        return factor * n

    def grasp_params(self, n: int, seed: int, default_iterations: int | None = None) -> GraspParams:
        explicit_time = self.time_budget is not None or self.budget_per_node is not None
        iterations = self.iterations
        if iterations is None and not explicit_time:
            iterations = default_iterations
        budget = self.budget(n) if explicit_time or iterations is None else None
        attempts, limit = (5, 2.0) if self.test_profile else (20, 20.0)
        node_limit = None
        if budget is None:
            # clock-free construction cap keeps iteration-capped runs reproducible
            limit, node_limit = None, (20_000 if self.test_profile else 200_000)
        return GraspParams(stop=StopCondition(budget, iterations), construction_attempts=attempts,
                           construction_time_limit=limit, construction_node_limit=node_limit, rng_seed=seed)


def _circles(placement) -> list[list[float]]:
    return [[d.center.x, d.center.y, d.radius] for d in placement.disks]


def run_once(inst: Instance, cfg: RunConfig, seed: int) -> SolutionRecord:
    t0 = time.perf_counter()
    n = inst.n
    if cfg.variant == "tspsd":
        graph = SelfDeletingGraph.euclidean(inst.points, inst.delete_sets)
        guide = None if cfg.guide is None else [v - 1 for v in cfg.guide]
        best = grasp(graph, guide, cfg.grasp_params(n, seed))
        if best is None:
            raise Infeasible(f"{inst.name}: no f-conforming cycle found (seed {seed})")
        rec = SolutionRecord(inst.name, "tspsd", seed, None, best.cost, [v + 1 for v in best.order])
        timed = cfg.timed
    else:
        params = TspCpParams(eps=cfg.eps, grasp=cfg.grasp_params(n, seed, default_iterations=10),
                             placement=PlacementParams(seed=seed), seed=seed, headings=cfg.headings)
        timed = cfg.time_budget is not None or cfg.budget_per_node is not None
        if cfg.variant == "dtspcp":
            if cfg.dubins_radius is None:
                raise InputError("dtspcp needs --dubins-radius")
            if cfg.radius is not None:
                raise InputError("--radius is only supported for tspcp")
            sol = solve_dtspcp(inst.points, cfg.dubins_radius, params)
        elif cfg.radius is not None:
            c_tsp = solve_tsp_initial(inst.points, seed)
            roadmap = Roadmap.euclidean(inst.points)
            res = tspcp_fixed_radius(roadmap, cfg.radius, c_tsp, params)
            if res is None:
                raise Infeasible(f"{inst.name}: radius {cfg.radius} infeasible (seed {seed})")
            cycle, placement = res
            rec = SolutionRecord(inst.name, "euclidean", seed, placement.radius, roadmap.tour_cost(cycle.order),
                                 [v + 1 for v in cycle.order], circles=_circles(placement))
            sol = None
        else:
            sol = solve_tspcp(inst.points, params)
        if sol is not None:
            rec = SolutionRecord(inst.name, sol.variant, seed, sol.radius, sol.cost, [v + 1 for v in sol.cycle.order],
                                 None if sol.headings is None else list(sol.headings), _circles(sol.placement),
                                 sol.dubins_radius, wpccp_radius=sol.wpccp_radius)
    elapsed = 1000.0 * (time.perf_counter() - t0)
    log.info("%s seed=%d done in %.0f ms", inst.name, seed, elapsed)
    # wall time would break byte-identical output of clock-free runs
    rec.wall_time_ms = round(elapsed, 3) if timed else None
    rec.valid = not validate_record(rec, inst)
    return rec


def _run_job(job):
    inst, cfg, seed = job
    try:
        return run_once(inst, cfg, seed)
    except Infeasible as exc:
        return exc


def workers(jobs: int) -> int:
    env = os.environ.get("TSPCP_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise InputError("TSPCP_THREADS must be an integer") from None
    return max(1, min(cap, jobs))


def run_many(insts: list[Instance], cfg: RunConfig) -> list[SolutionRecord]:
    """All (instance, seed) runs; results ordered by instance then seed."""
    jobs = [(inst, cfg, cfg.seed + r) for inst in insts for r in range(cfg.runs)]
    for inst, _, seed in jobs:
        log.info("queued %s seed=%d", inst.name, seed)
    k = workers(len(jobs))
    if k == 1:
        results = [_run_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=k) as pool:
            results = list(pool.map(_run_job, jobs))
    for res in results:
        if isinstance(res, Infeasible):
            raise res
    return results


# --------------------------------------------------------------------------
# bench
# --------------------------------------------------------------------------

@dataclass
class BenchRow:
    instance: str
    n: int
    runs: int
    best: float
    mean: float
    std: float
    ref: float | None
    gap_best: float | None
    gap_mean: float | None
    gap_sigma: float | None
    mean_time_ms: float | None


@dataclass
class BenchReport:
    variant: str
    rows: list[BenchRow]
    records: list[SolutionRecord]

    def to_json(self) -> str:
        data = {"variant": self.variant, "rows": [asdict(r) for r in self.rows],
                "records": [r.to_dict() for r in self.records]}
        return json.dumps(data, indent=1, sort_keys=True) + "\n"

    def table(self) -> str:
        score = "cost" if self.variant == "tspsd" else "radius"
        head = ["instance", "n", "runs", f"best {score}", "mean", "std", "ref", "gap best", "gap mean", "gap sd",
                "time ms"]
        body = []
        for r in self.rows:
            body.append([r.instance, str(r.n), str(r.runs), f"{r.best:.3f}", f"{r.mean:.3f}", f"{r.std:.3f}",
                         "-" if r.ref is None else f"{r.ref:.3f}",
                         *("-" if g is None else f"{g:.2f}" for g in (r.gap_best, r.gap_mean, r.gap_sigma)),
                         "-" if r.mean_time_ms is None else f"{r.mean_time_ms:.0f}"])
        widths = [max(len(row[c]) for row in [head] + body) for c in range(len(head))]
        lines = ["  ".join(cell.rjust(w) if c else cell.ljust(w) for c, (cell, w) in enumerate(zip(row, widths)))
                 for row in [head] + body]
        return "\n".join(lines) + "\n"


def bench_report(variant: str, insts: list[Instance], records: list[SolutionRecord],
                 refs: dict[str, float] | None = None) -> BenchReport:
    refs = refs or {}
    rows = []
    maximize = variant != "tspsd"
    for inst in sorted(insts, key=lambda i: i.name):
        mine = sorted((r for r in records if r.instance == inst.name), key=lambda r: r.seed)
        scores = [r.radius if maximize else r.cost for r in mine]
        best = max(scores) if maximize else min(scores)
        mean = statistics.fmean(scores)
        std = statistics.stdev(scores) if len(scores) > 1 else 0.0
        ref = refs.get(inst.name)
        times = [r.wall_time_ms for r in mine if r.wall_time_ms is not None]
        rows.append(BenchRow(inst.name, inst.n, len(mine), best, mean, std, ref,
                             None if ref is None else gap(best, ref), None if ref is None else gap(mean, ref),
                             None if ref is None else gap_sigma(std, ref),
                             statistics.fmean(times) if times else None))
    recs = sorted(records, key=lambda r: (r.instance, r.seed))
    return BenchReport(variant, rows, recs)


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-budget", type=float, help="seconds per run (tspcp: per rerouting subproblem)")
    p.add_argument("--budget-per-node", type=float, help="seconds per node, replaces --time-budget")
    p.add_argument("--iterations", type=int, help="GRASP iteration cap; without a time flag runs are clock-free")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="run r uses seed + r")
    p.add_argument("--eps", type=float, default=0.1, help="radius bisection tolerance")
    p.add_argument("--radius", type=float, help="tspcp only: solve for this fixed radius")
    p.add_argument("--dubins-radius", type=float, help="turning radius for dtspcp")
    p.add_argument("--headings", type=int, default=8, help="sampled headings per node for dtspcp")
    p.add_argument("--guide-tour", help="tspsd only: file of 1-based node ids to guide construction")
    p.add_argument("--test-profile", action="store_true", help="short budgets for quick runs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cptour", description="Tours with circle placement and self-deleting graphs.")
    ap.add_argument("-q", "--quiet", action="store_true", help="only warnings on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated instance file")
    g.add_argument("--family", required=True, choices=FAMILIES + ("random",))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--spacing", type=float, default=50.0)
    g.add_argument("--noise", type=float)
    g.add_argument("--density", type=float, default=2.0, help="random family: mean deletions per node")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--name")
    g.add_argument("--out", help="output path (default stdout)")

    s = sub.add_parser("solve", help="solve instances and write solution records")
    s.add_argument("variant", choices=("tspsd", "tspcp", "dtspcp"))
    s.add_argument("instances", nargs="+")
    _add_run_flags(s)
    s.add_argument("--out", help="records file (default stdout)")

    v = sub.add_parser("validate", help="re-check solution records against an instance")
    v.add_argument("instance")
    v.add_argument("records")

    r = sub.add_parser("render", help="draw a solution as SVG")
    r.add_argument("instance")
    r.add_argument("records", nargs="?")
    r.add_argument("--index", type=int, default=0)
    r.add_argument("--out", help="SVG path (default stdout)")

    b = sub.add_parser("bench", help="multi-run statistics per instance")
    b.add_argument("variant", choices=("tspsd", "tspcp", "dtspcp"))
    b.add_argument("instances", nargs="+")
    _add_run_flags(b)
    b.add_argument("--reference", help="JSON object mapping instance name to reference score")
    b.add_argument("--out", help="machine-readable report path")
    return ap


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _config(args) -> RunConfig:
    guide = None
    if args.guide_tour:
        if args.variant != "tspsd":
            raise InputError("--guide-tour is only supported for tspsd")
        try:
            guide = [int(t) for t in _read(args.guide_tour).split()]
        except ValueError:
            raise InputError("guide tour must list integer node ids") from None
    if args.radius is not None and args.variant != "tspcp":
        raise InputError("--radius is only supported for tspcp")
    return RunConfig(args.variant, args.seed, args.runs, args.time_budget, args.budget_per_node, args.iterations,
                     args.eps, args.radius, args.dubins_radius, args.headings, guide, args.test_profile)


def _check_variant(insts: list[Instance], variant: str) -> None:
    for inst in insts:
        if variant == "tspsd" and inst.type != "TSPSD":
            raise InputError(f"{inst.name} is a {inst.type} instance, tspsd needs TSPSD")
        if inst.n < 3:
            raise InputError(f"{inst.name} has fewer than three nodes")


def cmd_gen(args) -> int:
    if args.family == "random":
        graph = random_tspsd(args.n, args.density, args.seed)
        inst = Instance.from_graph(args.name or f"random-{args.n}-d{args.density:g}-s{args.seed}", graph)
    else:
        spec = InstanceSpec(args.family, args.n, args.spacing, args.noise, args.seed, args.name)
        inst = Instance(spec.name, "TSPCP", generate(spec))
    _write(args.out, write_instance(inst))
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _config(args)
    insts = [load_instance(p) for p in args.instances]
    _check_variant(insts, cfg.variant)
    if cfg.guide is not None:
        if len(insts) != 1 or sorted(cfg.guide) != list(range(1, insts[0].n + 1)):
            raise InputError("guide tour must be a permutation of the instance's node ids")
    records = run_many(insts, cfg)
    _write(args.out, dump_records(records))
    bad = [r for r in records if not r.valid]
    for r in bad:
        log.error("%s seed=%d produced an invalid solution", r.instance, r.seed)
    return EXIT_INVALID if bad else EXIT_OK


def cmd_validate(args) -> int:
    inst = load_instance(args.instance)
    records = load_records(_read(args.records))
    status = EXIT_OK
    for k, rec in enumerate(records):
        if rec.instance != inst.name:
            log.warning("record %d names instance %s, checking against %s", k, rec.instance, inst.name)
        problems = validate_record(rec, inst)
        if problems:
            status = EXIT_INVALID
            for p in problems:
                print(f"record {k} (seed {rec.seed}): {p}")
        else:
            print(f"record {k} (seed {rec.seed}): ok")
    return status


def cmd_render(args) -> int:
    inst = load_instance(args.instance)
    record = None
    if args.records:
        records = load_records(_read(args.records))
        if not 0 <= args.index < len(records):
            raise InputError(f"record index {args.index} out of range")
        record = records[args.index]
    _write(args.out, render_svg(record, inst.points))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _config(args)
    insts = [load_instance(p) for p in args.instances]
    _check_variant(insts, cfg.variant)
    if len({i.name for i in insts}) != len(insts):
        raise InputError("bench instances need distinct names")
    refs = None
    if args.reference:
        try:
            refs = {str(k): float(v) for k, v in json.loads(_read(args.reference)).items()}
        except (ValueError, AttributeError, TypeError):
            raise InputError("reference file must be a JSON object of numbers") from None
    records = run_many(insts, cfg)
    report = bench_report(cfg.variant, insts, records, refs)
    sys.stdout.write(report.table())
    if args.out:
        _write(args.out, report.to_json())
    return EXIT_OK if all(r.valid for r in records) else EXIT_INVALID


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "validate": cmd_validate, "render": cmd_render, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (InputError, GenerationError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except Infeasible as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
