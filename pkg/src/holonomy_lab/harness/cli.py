"""Command line entry point: ``holonomy-lab <command> [options]``.

Exit codes: 0 success, 1 failed test or degenerate input, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .. import freegroup as fg
from .. import liegroup as lg
from ..braid import BraidWord, invariance_test, sphere_slot
from ..geometry import DegenerateError, PolyPath, PunctureSet, close_loop
from ..homotopy import CutIndex
from ..model import (Experiment, diffeo_check, sample_brownian, sample_punctures, stream,
                     word_statistics)
from ..stable import StableParams, nu_sigma_sample, nu_star_sample, sigma_for_group
from . import io

log = logging.getLogger("holonomy_lab")

_CLI_PATH = 201
_CLI_PUNCTURES = 202
_CLI_STABLE = 203
_CLI_BRAID = 204


class UsageError(Exception):
    pass


def _load_points(path: str) -> np.ndarray:
    p = Path(path)
    if p.suffix == ".json":
        data = json.loads(p.read_text())
        if isinstance(data, dict):
            data = data.get("vertices", data.get("points"))
        arr = np.asarray(data, dtype=float)
    else:
        arr = np.loadtxt(p, delimiter=",", ndmin=2, comments="#")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise UsageError(f"{path}: expected a list of 2D points")
    return arr


def _inputs(args):
    """Path (open) and punctures, from files or sampled from the config and seed."""
    cfg = io.load_config(args.config, seed=args.seed)
    if args.path:
        v = _load_points(args.path)
        if np.allclose(v[0], v[-1]) and len(v) > 2:
            v = v[:-1]
        path = PolyPath(v)
    else:
        path = sample_brownian(cfg.n_steps, stream(cfg.seed, _CLI_PATH))
    if args.punctures:
        ps = PunctureSet(_load_points(args.punctures))
    else:
        ps = sample_punctures(cfg, stream(cfg.seed, _CLI_PUNCTURES))[0].ps
    return cfg, path, ps


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _word(path: PolyPath, ps: PunctureSet) -> tuple[PolyPath, fg.Word]:
    loop = close_loop(path)
    index = CutIndex(ps, max_radius=loop.max_norm() + 1e-9)
    return loop, fg.Word(index.crossings(loop).codes())


def cmd_windings(args) -> int:
    cfg, path, ps = _inputs(args)
    loop, word = _word(path, ps)
    table = word_statistics(word, ps, path, cfg.K, cfg.epsilon, loop)
    dest = _out_dir(args) / "windings.csv"
    io.write_windings_csv(dest, table)
    print(dest)
    return 0


def cmd_word(args) -> int:
    _, path, ps = _inputs(args)
    _, word = _word(path, ps)
    text = str(fg.run_form(word))
    if args.out:
        (_out_dir(args) / "word.txt").write_text(text + "\n")
    print(text if text else "1")
    return 0


def cmd_decompose(args) -> int:
    try:
        g = fg.Word.parse(args.word)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    lines = []
    for x, c in fg.semidirect_components(g).items():
        lines.append(f"x{x}: {fg.run_form(c) if len(c) else '1'}")
    text = "\n".join(lines)
    if args.out:
        (_out_dir(args) / "decompose.txt").write_text(text + "\n")
    print(text)
    return 0


def cmd_holonomy(args) -> int:
    cfg = io.load_config(args.config, seed=args.seed, replicas=args.replicas)
    report = Experiment(cfg).run()
    doc = report.to_dict()
    io.validate_report(doc)
    out = _out_dir(args)
    io.write_json(out / "report.json", doc)
    io.write_holonomy_csv(out / "holonomy.csv", report)
    if cfg.statistics and report.replicas and report.replicas[0].table is not None:
        io.write_windings_csv(out / "windings_replica0.csv", report.replicas[0].table)
    print(json.dumps(doc["summary"], sort_keys=True))
    return 0


def cmd_stable_sample(args) -> int:
    rng = stream(args.seed, _CLI_STABLE)
    if args.law == "nu-sigma":
        sigma = args.sigma if args.sigma is not None else sigma_for_group(args.d)
        samples = nu_sigma_sample(StableParams(args.d, sigma), rng, args.n)
    else:
        kind = lg.parse_kind(args.group)
        g = nu_star_sample(kind, args.steps, rng, size=args.n)
        samples = np.atleast_2d(g)
    dest = _out_dir(args) / "stable.csv"
    io.write_samples_csv(dest, samples)
    print(dest)
    return 0


def cmd_braid_test(args) -> int:
    kind = lg.parse_kind(args.group)
    gens = [int(t) for t in args.braid.replace(",", " ").split()]
    try:
        b = BraidWord(args.strands, tuple(gens))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    slots = [sphere_slot(kind, 0.2 * i + 0.1, 0.2 * i + 0.9) for i in range(b.strands)]
    res = invariance_test(kind, slots, b, args.samples, stream(args.seed, _CLI_BRAID), alpha=args.alpha)
    doc = {"braid": b.to_json(), "strands": b.strands, "min_p": res.min_p, "rejected": res.rejected,
           "tests": [r.to_dict() for r in res.reports]}
    if args.out:
        io.write_json(_out_dir(args) / "braid.json", doc)
    print(f"min p = {res.min_p:.4g}; {'rejected' if res.rejected else 'not rejected'}")
    return 1 if res.rejected else 0


def cmd_diffeo_test(args) -> int:
    cfg = io.load_config(args.config, seed=args.seed)
    path = sample_brownian(args.loop_steps, stream(cfg.seed, _CLI_PATH))
    loop = close_loop(path).transformed(np.eye(2) / path.max_norm())
    rep = diffeo_check(cfg, args.shear, loop, args.draws)
    if args.out:
        io.write_json(_out_dir(args) / "diffeo.json", rep.to_dict())
    print(f"KS = {rep.value:.4g}, p = {rep.p_value:.4g}; {'pass' if rep.passed else 'rejected'}")
    return 0 if rep.passed else 1


def cmd_verify(args) -> int:
    from .acceptance import run_all

    only = set(args.only) if args.only else None
    results = []
    all_ok = True
    for c, rep, dt in run_all(seed=args.seed, quick=args.quick, only=only):
        ok = rep.passed
        all_ok &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] #{c.number} {rep.name}: value={float(rep.value):.6g} "
              f"threshold={float(rep.threshold):.6g}", flush=True)
        d = rep.to_dict()
        d["criterion"] = c.number
        results.append(d)
    if args.out:
        io.write_json(_out_dir(args) / "verify.json",
                      {"seed": args.seed, "quick": args.quick, "results": results})
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--config", help="JSON model configuration")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="holonomy-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    geo = argparse.ArgumentParser(add_help=False)
    geo.add_argument("--path", help="open path vertices (CSV x,y or JSON list); sampled if absent")
    geo.add_argument("--punctures", help="puncture points (CSV or JSON); sampled if absent")

    s = sub.add_parser("windings", parents=[common, geo], help="per-puncture winding statistics as CSV")
    s.set_defaults(func=cmd_windings, out_default=".")
    s = sub.add_parser("word", parents=[common, geo], help="homotopy word of the closed path")
    s.set_defaults(func=cmd_word)
    s = sub.add_parser("decompose", parents=[common], help="semidirect components of a word")
    s.add_argument("word", help='e.g. "x3 x2 x1 x4 x2 x4^-1"')
    s.set_defaults(func=cmd_decompose)
    s = sub.add_parser("holonomy", parents=[common], help="run the experiment and write a report")
    s.add_argument("--replicas", type=int)
    s.set_defaults(func=cmd_holonomy, out_default=".")
    s = sub.add_parser("stable-sample", parents=[common], help="samples of nu^sigma or nu*")
    s.add_argument("--law", choices=["nu-sigma", "nu-star"], default="nu-sigma")
    s.add_argument("-d", type=int, default=3)
    s.add_argument("--sigma", type=float)
    s.add_argument("--group", default="su2")
    s.add_argument("--steps", type=int, default=4096)
    s.add_argument("-n", type=int, default=1000)
    s.set_defaults(func=cmd_stable_sample, out_default=".")
    s = sub.add_parser("braid-test", parents=[common], help="braid invariance test")
    s.add_argument("--strands", type=int, required=True)
    s.add_argument("--braid", required=True, help='signed generators, e.g. "1 -2 3"')
    s.add_argument("--group", default="su2")
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--alpha", type=float, default=0.01)
    s.set_defaults(func=cmd_braid_test)
    s = sub.add_parser("diffeo-test", parents=[common], help="shear invariance of holonomy laws")
    s.add_argument("--shear", type=float, default=0.7)
    s.add_argument("--draws", type=int, default=10_000)
    s.add_argument("--loop-steps", type=int, default=1000)
    s.set_defaults(func=cmd_diffeo_test)
    s = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    s.add_argument("--quick", action="store_true", help="small sample sizes (smoke run)")
    s.add_argument("--only", type=int, nargs="+", metavar="N")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out is None and getattr(args, "out_default", None):
        args.out = args.out_default
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"holonomy-lab: error: {exc}", file=sys.stderr)
        return 2
    except jsonschema.ValidationError as exc:
        print(f"holonomy-lab: error: invalid config: {exc.message}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"holonomy-lab: error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, DegenerateError) else 2


if __name__ == "__main__":
    sys.exit(main())
