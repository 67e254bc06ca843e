"""Command-line front end: ``scpanneal {gen,reduce,solve,embed,bench}``.

Every command writes its outputs plus a ``<command>.manifest.json`` into the
output directory (``--out``, else ``$SCPANNEAL_OUTPUT_DIR``, else the working
directory).  Exit codes: 0 ok, 1 target not reached, 2 invalid input,
3 infeasible instance, 4 capacity exceeded, 5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bench import DEFAULT_SWEEPS_GRID, fit_exponent, median_by_size, run_bench, sample_ensemble
from .chimera import dump_embedding, embed_instance, to_dot, verify_minor_embedding
from .exceptions import CapacityError, InfeasibleInstanceError, IntegrationError, TargetUnreachableError
from .instance import ScpInstance, dump_instance, gen_random_dummy_free, solve_exact, verify_cover
from .ising import IsingModel, ReductionConfig, decode, ground_states_exhaustive, reduce
from .qa import AnnealSchedule, build_success_spec, evolve, find_min_anneal_time
from .sa import SaConfig, anneal, optimize_sweeps

log = logging.getLogger("scpanneal")

OUTPUT_ENV = "SCPANNEAL_OUTPUT_DIR"

EXIT_OK, EXIT_UNREACHED, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_CAPACITY, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3, 4, 5, 6


class VerificationFailure(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    argv: list
    seed: object
    config: dict
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "command": self.command,
            "argv": self.argv,
            "seed": self.seed,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timings": self.timings,
            "warnings": self.warnings,
            "version": __version__,
        }

    def write(self, out_dir):
        path = Path(out_dir) / f"{self.command}.manifest.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, default=str) + "\n")
        return path


def _out_dir(args):
    d = Path(args.out or os.environ.get(OUTPUT_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")
    return str(path)


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return str(path)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc


def _load_input(path):
    """An instance document, or an Ising document (has ``h``)."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object")
    if "h" in data:
        return IsingModel.from_dict(data)
    return ScpInstance.from_dict(data)


def _load_instance(path):
    obj = _load_input(path)
    if not isinstance(obj, ScpInstance):
        raise ValueError(f"{path}: expected an instance document, got an Ising model")
    return obj


def _int_range(text):
    lo, _, hi = text.partition(":")
    lo, hi = int(lo), int(hi or lo)
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _grid(text):
    try:
        vals = sorted({int(v) for v in text.split(",") if v.strip()})
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sweep grid {text!r}") from exc
    if not vals or vals[0] < 1:
        raise argparse.ArgumentTypeError("sweep grid needs positive integers")
    return tuple(vals)


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad rational {text!r}") from exc


def cmd_gen(args, manifest):
    out = _out_dir(args)
    if args.count < 0:
        raise ValueError("count must be non-negative")
    children = np.random.SeedSequence(args.seed).spawn(args.count) if args.count else []
    if args.n < 1 or args.m < 1:
        raise ValueError("gen needs n >= 1 and m >= 1")
    for idx, child in enumerate(children):
        inst = gen_random_dummy_free(args.n, args.m, child)
        path = out / f"instance_n{args.n}_m{args.m}_{idx:04d}.json"
        dump_instance(inst, path)
        manifest.outputs.append(str(path))
    return EXIT_OK


def cmd_reduce(args, manifest):
    inst = _load_instance(args.instance)
    manifest.inputs.append(args.instance)
    model, layout = reduce(inst, ReductionConfig(args.alpha))
    doc = model.to_dict()
    doc["labels"] = [layout.name(i) for i in range(model.M)]
    out = _out_dir(args) / (Path(args.instance).stem + ".ising.json")
    manifest.outputs.append(_write_json(out, doc))
    print(f"M={model.M} couplings={len(model.J)} -> {out}")
    return EXIT_OK


def _solve_model(args, model, manifest):
    """Ising input: ground energy by enumeration or SA."""
    e0, states = ground_states_exhaustive(model)
    record = {"M": model.M, "backend": args.backend, "optimal_energy": str(e0)}
    if args.backend == "oracle":
        record["ground_states"] = [s.tolist() for s in states]
    elif args.backend == "sa":
        opt = optimize_sweeps(model, args.sweeps_grid, args.runs, e0, seed=args.seed, p=args.target_p)
        record.update(S_star=opt.S_star, T_star=opt.T_star, curve=opt.rows())
    else:
        raise ValueError("the qa backend needs an instance document, not an Ising model")
    return record


def _solve_instance(args, inst, manifest):
    model, layout = reduce(inst, ReductionConfig(args.alpha))
    record = {"M": model.M, "n": inst.n, "m": inst.m, "backend": args.backend, "seed": args.seed}
    if args.backend == "oracle":
        _, states = ground_states_exhaustive(model)
        cover = decode(layout, states[0])
    elif args.backend == "qa":
        spec = build_success_spec(inst, layout, args.convention)
        T, p, ev = find_min_anneal_time(model, spec, target=args.target_p, t_max=args.t_max, tol=args.tol)
        psi = evolve(model, AnnealSchedule(T), tol=args.tol)
        probs = np.abs(psi.amplitudes) ** 2
        low = np.arange(probs.size) & ((1 << inst.m) - 1)
        best = int(np.argmax(np.bincount(low, weights=probs, minlength=1 << inst.m)))
        cover = decode(layout, [(best >> i) & 1 if i < inst.m else 0 for i in range(model.M)])
        record.update(T=T, p=p, tol=args.tol, T_star=T, p_at_T_star=p, evaluations={str(k): v for k, v in sorted(ev.items())})
    else:
        e0, _ = ground_states_exhaustive(model)
        opt = optimize_sweeps(model, args.sweeps_grid, args.runs, e0, seed=args.seed, p=args.target_p)
        R = next(r["R"] for r in opt.curve if r["S"] == opt.S_star)
        seed = np.random.SeedSequence(args.seed, spawn_key=(2**31,))
        bits, energy = anneal(model, SaConfig(opt.S_star, R, seed=seed))
        cover = decode(layout, bits)
        record.update(S_star=opt.S_star, T_star=opt.T_star, R=R, energy=str(energy), optimal_energy=str(e0))
        curve = Path(manifest.config["out"]) / (Path(args.instance).stem + ".sa_curve.csv")
        manifest.outputs.append(_write_csv(curve, ["S", "w", "w_ci_low", "w_ci_high", "R", "T"], opt.rows()))
    record["cover"] = list(cover.chosen)
    record["cover_size"] = cover.size
    record["valid"] = verify_cover(inst, cover)
    if model.M <= 24:
        optimum = solve_exact(inst)
        record["oracle_cover"] = list(optimum.chosen)
        record["oracle_agrees"] = record["valid"] and cover.size == optimum.size
    return record


def cmd_solve(args, manifest):
    obj = _load_input(args.instance)
    manifest.inputs.append(args.instance)
    out = _out_dir(args)
    manifest.config["out"] = str(out)
    if isinstance(obj, IsingModel):
        record = _solve_model(args, obj, manifest)
    else:
        record = _solve_instance(args, obj, manifest)
    path = out / (Path(args.instance).stem + f".{args.backend}.json")
    manifest.outputs.append(_write_json(path, record))
    summary = {k: record[k] for k in ("M", "cover", "valid", "T_star", "p", "S_star") if k in record}
    print(json.dumps(summary))
    if record.get("valid") is False:
        raise VerificationFailure(f"decoded cover {record['cover']} is not a valid pair cover")
    return EXIT_OK


def cmd_embed(args, manifest):
    inst = _load_instance(args.instance)
    manifest.inputs.append(args.instance)
    res = embed_instance(inst, cfg=ReductionConfig(args.alpha))
    out = _out_dir(args)
    stem = Path(args.instance).stem
    emb_path = out / f"{stem}.embedding.json"
    dump_embedding(res.embedding, emb_path)
    dot_path = out / f"{stem}.embedding.dot"
    dot_path.write_text(to_dot(res.hardware, res.embedding))
    manifest.outputs += [str(emb_path), str(dot_path)]
    check = verify_minor_embedding(res.logical, res.hardware, res.embedding)
    report = {
        "f1": res.f1,
        "f2": res.f2,
        "qubits": res.embedding.qubits,
        "hardware_vertices": res.hardware.number_of_nodes(),
        "verified": check.ok,
        "reason": check.reason,
    }
    manifest.config["report"] = report
    print(json.dumps(report))
    if not check:
        raise VerificationFailure(f"embedding failed verification: {check.reason} ({check.detail})")
    return EXIT_OK


def cmd_bench(args, manifest):
    out = _out_dir(args)
    M_lo, M_hi = args.M_range
    bins, draws = sample_ensemble(
        range(M_lo, M_hi + 1), args.per_size, args.n_range, args.m_range, args.seed, args.max_draws
    )
    inst_dir = out / "instances"
    inst_dir.mkdir(exist_ok=True)
    for M, insts in bins.items():
        if len(insts) < args.per_size:
            manifest.warnings.append(f"M={M}: only {len(insts)} of {args.per_size} instances after {draws} draws")
        for idx, inst in enumerate(insts):
            dump_instance(inst, inst_dir / f"M{M:02d}_{idx:03d}.json")
    backends = [b for b in args.backend.split(",") if b]
    for b in backends:
        if b not in ("qa", "sa"):
            raise ValueError(f"unknown bench backend {b!r}")
    rows = run_bench(
        bins,
        backends,
        qa_opts={"target": args.target_p, "t_max": args.t_max, "tol": args.tol, "alpha": args.alpha},
        sa_opts={"grid": args.sweeps_grid, "runs": args.runs, "target": args.target_p, "seed": args.seed, "alpha": args.alpha},
        workers=args.workers,
    )
    fits = {}
    for b in backends:
        mine = [r for r in rows if r["backend"] == b]
        for r in mine:
            if r["status"] != "ok":
                manifest.warnings.append(f"{b} M={r['M']} id={r['instance_id']}: {r['status']}")
        cols = ["M", "instance_id", "n", "m", "T_star", "p_at_T_star"] if b == "qa" else \
            ["M", "instance_id", "n", "m", "S_star", "T_star", "w_at_S_star"]
        manifest.outputs.append(_write_csv(out / f"bench_{b}.csv", cols, [r for r in mine if r["status"] == "ok"]))
        med = median_by_size(mine)
        manifest.outputs.append(_write_csv(
            out / f"medians_{b}.csv", ["M", "median_T_star", "count"],
            [{"M": M, "median_T_star": v, "count": c} for M, v, c in med],
        ))
        if len(med) >= 2:
            slope, intercept = fit_exponent([M for M, _, _ in med], [v for _, v, _ in med])
            fits[b] = {"exponent": slope, "intercept": intercept, "sizes": len(med)}
            print(f"{b}: median T* ~ 2^({slope:.3f} M {intercept:+.3f}) over {len(med)} sizes")
    manifest.outputs.append(_write_json(out / "fit.json", fits))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="scpanneal", description="Set Cover with Pairs via Ising annealing.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or .)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("gen", help="generate random dummy-free instances")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    common(g)

    r = sub.add_parser("reduce", help="reduce an instance to Ising JSON")
    r.add_argument("instance")
    r.add_argument("--alpha", type=_fraction, default=Fraction(1, 4))
    common(r, seed=False)

    s = sub.add_parser("solve", help="reduce, solve, decode and verify")
    s.add_argument("instance", help="instance JSON, or Ising JSON for the sa/oracle backends")
    s.add_argument("--backend", "--mode", choices=("qa", "sa", "oracle"), default="oracle")
    s.add_argument("--alpha", type=_fraction, default=Fraction(1, 4))
    s.add_argument("--target-p", type=float, default=0.25)
    s.add_argument("--t-max", type=int, default=4096)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--convention", choices=("squared", "norm"), default="squared")
    s.add_argument("--sweeps-grid", type=_grid, default=DEFAULT_SWEEPS_GRID)
    s.add_argument("--runs", type=int, default=1000)
    common(s)

    e = sub.add_parser("embed", help="embed an instance into a Chimera graph")
    e.add_argument("instance")
    e.add_argument("--alpha", type=_fraction, default=Fraction(1, 4))
    common(e, seed=False)

    b = sub.add_parser("bench", help="runtime scaling over random ensembles")
    b.add_argument("--M-range", type=_int_range, default=(3, 15), help="spin counts LO:HI")
    b.add_argument("--n-range", type=_int_range, default=(1, 5))
    b.add_argument("--m-range", type=_int_range, default=(2, 5))
    b.add_argument("--per-size", type=int, default=10)
    b.add_argument("--max-draws", type=int, default=200_000, help="generator draws before giving up on short bins")
    b.add_argument("--backend", default="qa", help="comma list of qa, sa")
    b.add_argument("--alpha", type=_fraction, default=Fraction(1, 4))
    b.add_argument("--target-p", type=float, default=0.25)
    b.add_argument("--t-max", type=int, default=4096)
    b.add_argument("--tol", type=float, default=1e-8)
    b.add_argument("--sweeps-grid", type=_grid, default=DEFAULT_SWEEPS_GRID)
    b.add_argument("--runs", type=int, default=1000)
    b.add_argument("--workers", type=int, default=1)
    common(b)
    return p


COMMANDS = {"gen": cmd_gen, "reduce": cmd_reduce, "solve": cmd_solve, "embed": cmd_embed, "bench": cmd_bench}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    config = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in vars(args).items()
              if k not in ("command", "out", "verbose")}
    manifest = RunManifest(args.command, argv, getattr(args, "seed", None), config)
    start = time.perf_counter()
    try:
        code = COMMANDS[args.command](args, manifest)
    except InfeasibleInstanceError as exc:
        code, msg = EXIT_INFEASIBLE, f"infeasible: {exc}"
    except CapacityError as exc:
        code, msg = EXIT_CAPACITY, f"capacity: {exc}"
    except VerificationFailure as exc:
        code, msg = EXIT_VERIFY, f"verification failed: {exc}"
    except TargetUnreachableError as exc:
        code, msg = EXIT_UNREACHED, f"target not reached: {exc} (best {exc.best})"
    except IntegrationError as exc:
        code, msg = EXIT_NUMERIC, f"integration failed: {exc}"
    except (ValueError, OSError) as exc:
        code, msg = EXIT_INVALID, f"invalid input: {exc}"
    else:
        msg = None
    if msg:
        print(f"scpanneal {args.command}: {msg}", file=sys.stderr)
        manifest.warnings.append(msg)
    manifest.timings["wall_s"] = round(time.perf_counter() - start, 3)
    manifest.config["exit_code"] = code
    try:
        manifest.write(_out_dir(args))
    except OSError as exc:
        print(f"scpanneal: could not write manifest: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
