"""Command-line front end: ``run <plan.json>``, ``list``, ``snapshot <config>``.

Exit codes: 0 when every verdict passes, 1 when any verdict is fail or
inconclusive, 2 on an invalid plan or an execution error.  The output
directory named in the plan can be overridden with ``ISINGPERC_OUTPUT_DIR``.
"""
from __future__ import annotations

import argparse
import inspect
import json
import logging
import os
import sys
from dataclasses import dataclass, field

from . import experiments as ex
from . import geometry as geo
from . import io as iio
from .lattice import PRESETS, LatticeError, build_lattice
from .sampler import PLUS, Mode, Sampler, make_dobrushin_bc

__all__ = ["RunPlan", "PlanError", "parse_plan", "plan_from_dict", "execute", "list_registry",
           "snapshot", "main", "OUTPUT_ENV"]

OUTPUT_ENV = "ISINGPERC_OUTPUT_DIR"
log = logging.getLogger("isingperc")

_TOP_KEYS = {"lattice", "model", "seed", "experiments", "L", "samples", "output", "mode",
             "workers", "snapshots", "exact_max_L", "sweeps", "theta_L", "theta_n", "radius",
             "core", "pattern_size"}
_REQUIRED = ("lattice", "model", "seed")


class PlanError(ValueError):
    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class RunPlan:
    lattice: str
    family: str
    params: dict
    seed: int
    experiments: list            # [(id, overrides)]
    output: str = "results"
    config: ex.SuiteConfig = field(default_factory=ex.SuiteConfig)
    mode: Mode | None = None
    exact_max_L: int = 32
    sweeps: int = 2048
    workers: int | None = None
    snapshots: bool = False

    def to_dict(self) -> dict:
        return {
            "lattice": self.lattice, "model": dict(self.params, family=self.family),
            "seed": self.seed, "experiments": [dict(o, id=i) for i, o in self.experiments],
            "output": self.output, "L": list(self.config.L_list), "samples": self.config.n,
            "theta_L": self.config.theta_L, "theta_n": self.config.theta_n,
            "radius": self.config.radius, "core": self.config.core,
            "pattern_size": self.config.w, "exact_max_L": self.exact_max_L,
            "sweeps": self.sweeps, "workers": self.workers, "snapshots": self.snapshots,
            "mode": None if self.mode is None else
            {"kind": self.mode.kind, "sweeps": self.mode.sweeps, "start": self.mode.start},
        }


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_model(m, lattice, errors):
    if not isinstance(m, dict):
        errors.append("model: must be an object with 'family' and parameters")
        return None, {}
    fam = m.get("family")
    if fam not in ex.MODEL_FAMILIES:
        errors.append(f"model.family: {fam!r} not one of {sorted(ex.MODEL_FAMILIES)}")
        return None, {}
    allowed = set(ex.MODEL_FAMILIES[fam]) | {"family"} | ({"force"} if fam == "ferro" else set())
    for k in sorted(set(m) - allowed):
        errors.append(f"model.{k}: unknown parameter for {fam}")
    params = {}
    for k in ex.MODEL_FAMILIES[fam]:
        if k not in m:
            errors.append(f"model.{k}: missing")
            continue
        v = m[k]
        if not _is_num(v):
            errors.append(f"model.{k}: must be a number")
            continue
        params[k] = v
    force = bool(m.get("force", False))
    if "beta" in params and not (params["beta"] > 0 or (force and params["beta"] >= 0)):
        errors.append(f"model.beta: must be > 0 (got {params['beta']})")
    if "lam" in params and not params["lam"] > 0:
        errors.append(f"model.lam: must be > 0 (got {params['lam']})")
    if force:
        params["force"] = True
    if fam in ("staggered", "hardcore") and lattice in PRESETS:
        if not build_lattice(lattice, 2).bipartite:
            errors.append(f"model.family: {fam} needs a bipartite lattice, {lattice} is not")
    return fam, params


def _check_experiments(v, errors):
    valid = list(ex.SUITE_ORDER) + list(ex.CONTROLS)
    if v is None or v == "all":
        return [(e, {}) for e in ex.SUITE_ORDER]
    if not isinstance(v, list) or not v:
        errors.append("experiments: must be 'all' or a non-empty list")
        return []
    out = []
    for j, item in enumerate(v):
        if isinstance(item, str):
            eid, over = item, {}
        elif isinstance(item, dict) and "id" in item:
            eid = item["id"]
            over = {k: w for k, w in item.items() if k != "id"}
        else:
            errors.append(f"experiments[{j}]: must be an id or an object with 'id'")
            continue
        if eid not in valid:
            errors.append(f"experiments[{j}]: unknown experiment {eid!r}; valid ids: {', '.join(valid)}")
            continue
        fn = (ex.REGISTRY.get(eid) or ex.CONTROLS[eid])[0]
        params = set(inspect.signature(fn).parameters) - {"m", "lattice", "seed", "runner"}
        for k in sorted(set(over) - params):
            errors.append(f"experiments[{j}].{k}: unknown option for {eid}; valid: {sorted(params)}")
        for k, w in over.items():
            if k in ("L_list", "floors") and isinstance(w, list):
                over[k] = tuple(w)
            if k in ("n", "L", "radius", "core", "w", "theta_n", "theta_L") and \
                    (not _is_int(w) or w < 1):
                errors.append(f"experiments[{j}].{k}: must be a positive integer")
        out.append((eid, over))
    return out


def plan_from_dict(d: dict) -> RunPlan:
    """Validate a plan mapping; raises :class:`PlanError` listing every problem."""
    errors = []
    if not isinstance(d, dict):
        raise PlanError(["plan: must be a JSON object"])
    for k in sorted(set(d) - _TOP_KEYS):
        errors.append(f"{k}: unknown key; valid keys: {', '.join(sorted(_TOP_KEYS))}")
    for k in _REQUIRED:
        if k not in d:
            errors.append(f"{k}: missing required field")
    lattice = d.get("lattice")
    if "lattice" in d and lattice not in PRESETS:
        errors.append(f"lattice: {lattice!r} not one of {sorted(PRESETS)}")
    fam, params = _check_model(d["model"], lattice, errors) if "model" in d else (None, {})
    seed = d.get("seed")
    if "seed" in d and (not _is_int(seed) or seed < 0):
        errors.append("seed: must be a non-negative integer")
    exps = _check_experiments(d.get("experiments", "all"), errors)
    cfg = ex.SuiteConfig()
    Ls = d.get("L", list(cfg.L_list))
    if not isinstance(Ls, list) or not Ls or not all(_is_int(x) and x >= 2 for x in Ls):
        errors.append("L: must be a non-empty list of integers >= 2")
    elif Ls != sorted(Ls):
        errors.append("L: must be increasing")
    else:
        cfg.L_list = tuple(Ls)
    for key, attr, lo in (("samples", "n", 1), ("theta_L", "theta_L", 2), ("theta_n", "theta_n", 1),
                          ("radius", "radius", 1), ("core", "core", 1), ("pattern_size", "w", 1)):
        if key in d:
            if not _is_int(d[key]) or d[key] < lo:
                errors.append(f"{key}: must be an integer >= {lo}")
            else:
                setattr(cfg, attr, d[key])
                if key == "samples":
                    cfg.n_semicircuit = d[key]
    mode = None
    if "mode" in d:
        mv = d["mode"]
        try:
            if isinstance(mv, str):
                mode = Mode(mv)
            elif isinstance(mv, dict) and set(mv) <= {"kind", "sweeps", "start"}:
                mode = Mode(mv.get("kind", "exact"), int(mv.get("sweeps", 0)), mv.get("start", "plus"))
            else:
                errors.append("mode: must be 'exact' or an object with kind/sweeps/start")
        except (ValueError, TypeError) as e:
            errors.append(f"mode: {e}")
    for key in ("exact_max_L", "sweeps", "workers"):
        if key in d and d[key] is not None and (not _is_int(d[key]) or d[key] < 1):
            errors.append(f"{key}: must be a positive integer")
    if "output" in d and not isinstance(d["output"], str):
        errors.append("output: must be a string")
    if "snapshots" in d and not isinstance(d["snapshots"], bool):
        errors.append("snapshots: must be true or false")
    if errors:
        raise PlanError(errors)
    for eid, over in exps:
        if eid in ex.REGISTRY:
            cfg.overrides[eid] = over
    return RunPlan(lattice, fam, params, seed, exps, d.get("output", "results"), cfg, mode,
                   d.get("exact_max_L", 32), d.get("sweeps", 2048), d.get("workers"),
                   d.get("snapshots", False))


def parse_plan(path) -> RunPlan:
    try:
        with open(path) as f:
            d = json.load(f)
    except FileNotFoundError:
        raise PlanError([f"{path}: no such file"]) from None
    except json.JSONDecodeError as e:
        raise PlanError([f"{path}: invalid JSON ({e})"]) from None
    return plan_from_dict(d)


def _output_dir(plan: RunPlan) -> str:
    return os.environ.get(OUTPUT_ENV) or plan.output


def execute(plan: RunPlan, out_dir: str | None = None) -> int:
    """Run a plan and write results.csv, summary.txt and optional snapshots."""
    out_dir = out_dir or _output_dir(plan)
    try:
        runner = ex.Runner(workers=plan.workers, exact_max_L=plan.exact_max_L,
                           sweeps=plan.sweeps, mode=plan.mode)
        results = []
        regular = [e for e, _ in plan.experiments if e in ex.REGISTRY]
        if regular:
            results += ex.run_suite(plan.family, plan.params, plan.lattice, plan.seed,
                                    plan.config, runner, regular)
        for eid, over in plan.experiments:
            if eid in ex.CONTROLS:
                results.append(ex.run_experiment(eid, None, plan.lattice, plan.seed, runner, **over))
        order = {e: i for i, (e, _) in enumerate(plan.experiments)}
        results.sort(key=lambda r: order.get(r.experiment, len(order)))
        os.makedirs(out_dir, exist_ok=True)
        iio.write_results_csv(results, os.path.join(out_dir, "results.csv"))
        summary = "\n".join(r.summary() for r in results) + "\n"
        head = f"plan: {json.dumps(plan.to_dict(), sort_keys=True)}\n"
        iio.atomic_write(os.path.join(out_dir, "summary.txt"), head + summary)
        if plan.snapshots:
            _plan_snapshots(plan, runner, os.path.join(out_dir, "snapshots"))
    except (OSError, LatticeError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for r in results:
        log.info("%s: %s", r.experiment, r.verdict)
    return 0 if all(r.verdict == "pass" for r in results) else 1


def _plan_snapshots(plan, runner, d):
    bundle = ex.make_model(plan.family, plan.params, plan.lattice)
    for L in plan.config.L_list:
        g = build_lattice(plan.lattice, L)
        c = runner.batch(bundle, g, PLUS, 1, plan.seed)[0]
        iio.write_pgm(iio.render_pgm(c), os.path.join(d, f"plus_L{L}.pgm"))
        c = runner.batch(bundle, g, make_dobrushin_bc(g, "left", 0), 1, plan.seed)[0]
        rep = geo.open_interface(c, None)
        overlay = [rep.contour] if rep.contour is not None else []
        iio.write_pgm(iio.render_pgm(c, overlay), os.path.join(d, f"dobrushin_L{L}.pgm"))


def list_registry() -> str:
    lines = [f"{eid} - {ex.REGISTRY[eid][1]}" for eid in ex.SUITE_ORDER]
    lines += [f"{eid} - {ex.CONTROLS[eid][1]}" for eid in ex.CONTROLS]
    lines.append("suite (all of the exp_* ids above, in this order) - run_suite")
    return "\n".join(lines)


_SNAP_KEYS = {"lattice", "L", "model", "bc", "seed", "replica", "output", "overlay", "grid"}


def snapshot(path, out: str | None = None) -> str:
    """Render a grid file, or sample and render the configuration a JSON file describes."""
    with open(path) as f:
        text = f.read()
    if text.startswith(iio.GRID_MAGIC):
        c = iio.read_grid(path)
        target = out or os.path.splitext(path)[0] + ".pgm"
        overlay = True
    else:
        d = json.loads(text)
        unknown = sorted(set(d) - _SNAP_KEYS)
        if unknown:
            raise PlanError([f"{k}: unknown key; valid keys: {sorted(_SNAP_KEYS)}" for k in unknown])
        g = build_lattice(d["lattice"], int(d["L"]))
        mdl = dict(d.get("model", {"family": "ferro", "beta": 0.6}))
        bundle = ex.make_model(mdl.pop("family"), mdl, d["lattice"])
        bcv = d.get("bc", "plus")
        if isinstance(bcv, dict):
            bc = make_dobrushin_bc(g, bcv.get("orientation", "up"), int(bcv.get("k", 0)))
        elif bcv in ("plus", "minus"):
            bc = PLUS if bcv == "plus" else PLUS.flipped()
        else:
            raise PlanError([f"bc: {bcv!r} must be 'plus', 'minus' or a Dobrushin object"])
        c = Sampler(bundle.sampled, g, bc).cftp(int(d.get("seed", 0)), int(d.get("replica", 0)))
        target = out or d.get("output", "snapshot.pgm")
        overlay = bool(d.get("overlay", True))
        if d.get("grid"):
            iio.write_grid(c, d["grid"])
    contours = geo.trace_contours(c) if overlay else []
    iio.write_pgm(iio.render_pgm(c, contours), target)
    return target


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="isingperc", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="execute a run plan (JSON)")
    p_run.add_argument("plan")
    p_run.add_argument("--output", help="output directory (overrides plan and environment)")
    sub.add_parser("list", help="list experiment ids")
    p_snap = sub.add_parser("snapshot", help="render a configuration to PGM")
    p_snap.add_argument("config")
    p_snap.add_argument("--output")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.cmd == "list":
        print(list_registry())
        return 0
    if args.cmd == "snapshot":
        try:
            print(snapshot(args.config, args.output))
        except (OSError, ValueError, KeyError, RuntimeError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        return 0
    try:
        plan = parse_plan(args.plan)
    except PlanError as e:
        for msg in e.errors:
            print(f"plan error: {msg}", file=sys.stderr)
        return 2
    return execute(plan, args.output)


if __name__ == "__main__":
    sys.exit(main())
