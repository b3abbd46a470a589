"""Command-line interface.

Exit codes: 0 ok, 1 validation, 2 I/O, 3 no solution, 4 budget.
Set ``REORG_LOG`` (DEBUG, INFO, ...) for log output on stderr.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib.resources import files
from pathlib import Path

from .agents import GeneralAgentType, instantiate, parse_type_spec
from .capability import efficacy_cs, efficacy_type, support_set
from .csg import CsgBudget, enumerate_structures, find_feasible_structure
from .errors import BudgetExceeded, NoSolution, ParseError, ReorgError
from .mission import check_temporal_consistency, load_mission_file
from .ontology import load_model_file
from .policies import pvalue_composite
from .reconfig import ReconfigParams
from .reliability import demand_profile, exact_instance_reliability, monte_carlo_reliability, reliability

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_NO_SOLUTION, EXIT_BUDGET = 0, 1, 2, 3, 4
LANDSCAPE_HEADER = ["candidate_id", "psi_m", "energy_kwh", "sat", "saf", "efficacy", "cost"]

log = logging.getLogger("reorg")


def bundled_model() -> str:
    return str(files("reorg") / "data" / "moreorg_model.yaml")


def _functionalities(args: list[str]) -> list[str]:
    return [f for a in args for f in (p.strip() for p in a.split(",")) if f]


def _agent_type(model, spec: str) -> GeneralAgentType:
    t = parse_type_spec(spec)
    for name in t:
        model.agent_type(name)
    return t


def _load(args, need_mission=False):
    model = load_model_file(args.model)
    if not need_mission:
        return model, None
    mission = load_mission_file(args.mission, model)
    if args.t_a is not None or args.t_b is not None:
        rc = ReconfigParams(mission.reconfig.t_a if args.t_a is None else args.t_a,
                            mission.reconfig.t_b if args.t_b is None else args.t_b)
        mission = dataclasses.replace(mission, reconfig=rc)
    return model, mission


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args, out) -> int:
    model = load_model_file(args.model)
    print(f"model ok: {len(model.concepts)} concepts, {len(model.functionalities)} functionalities, "
          f"{len(model.agent_types)} agent types", file=out)
    if not args.mission:
        return EXIT_OK
    _, mission = _load(args, need_mission=True)
    report = check_temporal_consistency(mission)
    if not report.consistent:
        print(f"mission invalid: {report.describe()}", file=out)
        return EXIT_INVALID
    print(f"mission ok: {len(mission.requirements)} requirements, {len(mission.timepoints)} timepoints, "
          f"{len(mission.locations)} locations", file=out)
    print(report.describe(), file=out)
    return EXIT_OK


def cmd_reliability(args, out) -> int:
    model, _ = _load(args)
    t = _agent_type(model, args.type)
    fs = _functionalities(args.functionalities)
    for f in fs:
        model.functionality(f)
    print(f"{'resource':<24}{'req':>5}{'avl':>5}{'p':>10}", file=out)
    for c, e in sorted(demand_profile(model, t, fs).items()):
        print(f"{c:<24}{e.required:>5}{e.available:>5}{e.p:>10.4f}", file=out)
    r = reliability(model, t, fs)
    print(f"R = {r:.6f}", file=out)
    if r == 0:
        print(f"efficacy 0: {t!r} does not support {', '.join(fs)}", file=out)
    if args.monte_carlo:
        est, err = monte_carlo_reliability(model, t, fs, args.monte_carlo, args.seed)
        print(f"monte carlo ({args.monte_carlo} trials, seed {args.seed}): {est:.6f} +/- {err:.6f}", file=out)
        try:
            print(f"exact instance-level = {exact_instance_reliability(model, t, fs):.6f}", file=out)
        except ReorgError:
            pass
    return EXIT_OK


def cmd_efficacy(args, out) -> int:
    model, _ = _load(args)
    t = _agent_type(model, args.type)
    fs = _functionalities(args.functionalities)
    print(f"support = {float(support_set(model, t, fs)):.6f}", file=out)
    print(f"efficacy = {efficacy_type(model, t, fs)}", file=out)
    return EXIT_OK


def cmd_pvalue(args, out) -> int:
    model, _ = _load(args)
    t = _agent_type(model, args.type)
    print(f"{args.property} = {pvalue_composite(model, t, args.property, args.seed):g}", file=out)
    return EXIT_OK


def cmd_coalitions(args, out) -> int:
    model, _ = _load(args)
    pool = instantiate(_agent_type(model, args.pool))
    fs = _functionalities(args.functionalities)
    budget = CsgBudget(max_atoms=args.max_atoms)
    try:
        structures = enumerate_structures(pool, budget, model)
        if fs:
            structures = [cs for cs in structures if efficacy_cs(model, cs, fs)]
        witness = find_feasible_structure(model, pool, fs, budget) if structures else None
    except BudgetExceeded as exc:
        raise BudgetExceeded(f"{exc}; raise --max-atoms or split the pool") from None
    print(f"count {len(structures)}", file=out)
    print(f"witness {witness!r}" if witness is not None else "none", file=out)
    return EXIT_OK


def _plan_one(job) -> dict:
    """Run one planner configuration; returns plain data so it can cross process boundaries."""
    from .planner import Bounds, Budget, Weights, constellations, plan

    args, psi_m = job
    _, mission = _load(args, need_mission=True)
    bounds = Bounds(psi_m, args.psi_im)
    weights = Weights(args.alpha, args.beta, args.epsilon)
    budget = Budget(args.epoch_seconds, args.total_seconds, args.deterministic)
    result = plan(mission, bounds, weights, budget, args.seed)
    rows = [[c.id, psi_m, f"{c.score.energy:.3f}", f"{c.score.sat:.6f}", f"{c.score.saf:.6f}",
             c.score.efficacy, f"{c.score.cost:.6f}"] for c in result.candidates]
    best = result.best
    report = {
        "mission": mission.name,
        "psi_m": psi_m,
        "psi_im": args.psi_im,
        "weights": {"alpha": args.alpha, "beta": args.beta, "epsilon": args.epsilon},
        "seed": args.seed,
        "iterations": result.iterations,
        "candidates": len(result.candidates),
        "best": {
            "id": best.id,
            "energy_kwh": round(best.score.energy, 3),
            "sat": best.score.sat,
            "saf": best.score.saf,
            "efficacy": best.score.efficacy,
            "cost": best.score.cost,
            "reconfiguration_s": best.score.reconfig_total,
            "assignments": {k: list(v) for k, v in best.candidate.assignments.items()},
            "notes": list(best.candidate.notes),
            "constellations": constellations(mission, best.candidate),
        },
    }
    return {"psi_m": psi_m, "rows": rows, "report": report}


def _landscape_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LANDSCAPE_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def _report_text(report) -> str:
    b = report["best"]
    lines = [
        f"mission {report['mission'] or '(unnamed)'}  psi_m={report['psi_m']} psi_im={report['psi_im']}",
        f"{report['candidates']} candidates from {report['iterations']} iterations",
        f"best {b['id']}: energy {b['energy_kwh']:.3f} kWh, SAT {b['sat']:.3f}, SAF {b['saf']:.3f}, "
        f"cost {b['cost']:.4f}, reconfiguration {b['reconfiguration_s']:.0f} s",
    ]
    for row in b["constellations"]:
        safety = "-" if row["safety"] is None else f"{row['safety']:.3f}"
        lines.append(f"  {row['location']:<12}{row['timepoint']:<6}safety {safety:<7}"
                     f"reconf {row['reconfiguration_s']:>6.0f} s  {row['agents']}")
    return "\n".join(lines)


def cmd_plan(args, out) -> int:
    psi = sorted({int(p) for p in str(args.psi_m).split(",") if p.strip()})
    _load(args, need_mission=True)  # fail fast before spawning workers
    jobs = [(args, k) for k in psi]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(args.jobs, len(jobs))) as pool:
            results = list(pool.map(_plan_one, jobs))
    else:
        results = [_plan_one(j) for j in jobs]
    # every file is written here, by the coordinating process
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for res in results:
        k = res["psi_m"]
        (outdir / f"landscape_psi_m{k}.csv").write_text(_landscape_text(res["rows"]), encoding="utf-8")
        (outdir / f"best_psi_m{k}.json").write_text(json.dumps(res["report"], indent=2) + "\n", encoding="utf-8")
        print(_report_text(res["report"]), file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default=bundled_model(), help="resource model document (default: bundled)")
    common.add_argument("--seed", type=int, default=0)

    mission = argparse.ArgumentParser(add_help=False)
    mission.add_argument("--t-a", type=float, default=None, help="attach time override, seconds")
    mission.add_argument("--t-b", type=float, default=None, help="base reconfiguration time override, seconds")

    p = argparse.ArgumentParser(prog="reorg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common, mission], help="check a model and optionally a mission")
    s.add_argument("--mission")
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("reliability", parents=[common], help="probability of survival of an agent type")
    s.add_argument("type", help="agent type, e.g. SherpaTT,Payload:3")
    s.add_argument("functionalities", nargs="+")
    s.add_argument("--monte-carlo", type=int, default=0, metavar="N", help="also sample N trials")
    s.set_defaults(run=cmd_reliability)

    s = sub.add_parser("efficacy", parents=[common], help="support and efficacy of an agent type")
    s.add_argument("type")
    s.add_argument("functionalities", nargs="*")
    s.set_defaults(run=cmd_efficacy)

    s = sub.add_parser("pvalue", parents=[common], help="numeric property of an agent type")
    s.add_argument("type")
    s.add_argument("property")
    s.set_defaults(run=cmd_pvalue)

    s = sub.add_parser("coalitions", parents=[common], help="feasible coalition structures of a pool")
    s.add_argument("pool", help="pool spec, e.g. SherpaTT,CoyoteIII,Payload:2")
    s.add_argument("functionalities", nargs="*")
    s.add_argument("--max-atoms", type=int, default=8)
    s.set_defaults(run=cmd_coalitions)

    s = sub.add_parser("plan", parents=[common, mission], help="search solution candidates for a mission")
    s.add_argument("--mission", required=True)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=-100.0)
    s.add_argument("--epsilon", type=float, default=-10.0)
    s.add_argument("--psi-m", default="0", help="comma-separated list, one landscape per value")
    s.add_argument("--psi-im", type=int, default=0)
    s.add_argument("--epoch-seconds", type=float, default=60.0)
    s.add_argument("--total-seconds", type=float, default=1200.0)
    s.add_argument("--deterministic", action="store_true", help="count iterations instead of seconds")
    s.add_argument("--jobs", type=int, default=1, help="worker processes, one per psi_m value")
    s.add_argument("--out", default=".")
    s.set_defaults(run=cmd_plan)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    level = os.environ.get("REORG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.run(args, out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NoSolution as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ReorgError, ParseError, ValueError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
