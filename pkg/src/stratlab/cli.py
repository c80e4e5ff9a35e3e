"""Command-line workbench over the library modules.

One entry point, JSON-lines output on stdout, diagnostics on stderr.
Every record carries the tool version and a full echo of the parameters
that produced it, so a transcript is self-describing, and identical
invocations produce byte-identical output.  ``--expect pass`` turns any
negative verdict into exit code 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import formulas as F
from .errors import MissingTypesError, NoHomogeneousSetError, StratlabError
from .parser import parse_corpus
from .stratify import Stratification, infer, check_typed
from .natmodel import (Interpretation, build_default, build_tstu_family,
                       evaluate, evaluate_tstu)
from .ambiguity import (color_by_theory, coloring_from_table,
                        find_homogeneous, jensen_witness)
from .web import (cardinality_profile, check_elementarity_profile,
                  check_naturality, fragment_from_json, impossibility_sweep)
from .fm.universe import FMParams, build_universe, near_litters_of
from .fm.perms import extension_lemma_check
from .fm.supports import (clan_subset_support_lemma_check,
                          parent_injection_check, symmetric_census)
from .fm.orbits import enumerate_strong_supports, orbit_spec, same_orbit


def _plain(x):
    """Recursively strip values down to JSON-serializable data."""
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (set, frozenset)):
        return sorted((_plain(v) for v in x), key=repr)
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return str(x)


def _emit(records, args):
    params = {k: _plain(v) for k, v in sorted(vars(args).items())
              if k not in ("run",)}
    for rec in records:
        rec = dict(rec)
        rec["version"] = __version__
        rec["params"] = params
        if args.format == "json":
            sys.stdout.write(json.dumps(_plain(rec), sort_keys=True,
                                        separators=(",", ":")) + "\n")
        else:
            body = " ".join(f"{k}={json.dumps(_plain(v), sort_keys=True)}"
                            for k, v in sorted(rec.items())
                            if k not in ("kind", "version", "params"))
            sys.stdout.write(f"{rec['kind']}: {body}\n")


def _read_corpus(path):
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh.read())


def _csv_ints(text):
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def _positive(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


# ---------------------------------------------------------------------------
# subcommands

def _cmd_stratify(args):
    records = []
    ok = True
    for lineno, phi in _read_corpus(args.corpus):
        verdict = infer(phi)
        rec = {"kind": "stratify", "line": lineno, "formula": F.pretty(phi)}
        if isinstance(verdict, Stratification):
            rec["stratified"] = True
            rec["assignment"] = dict(sorted(verdict.assignment.items()))
        else:
            rec["stratified"] = False
            rec["cycle"] = [F.pretty(atom) for atom in verdict.cycle]
            rec["offset_sum"] = verdict.offset_sum
            ok = False
        records.append(rec)
    return records, ok


def _cmd_raise(args):
    records = []
    for lineno, phi in _read_corpus(args.corpus):
        records.append({"kind": "raise", "line": lineno,
                        "formula": F.pretty(phi),
                        "raised": F.pretty(F.raise_types(phi))})
    return records, True


def _cmd_typecheck(args):
    records = []
    ok = True
    mode = F.Mode(args.mode)
    for lineno, phi in _read_corpus(args.corpus):
        rec = {"kind": "typecheck", "line": lineno,
               "formula": F.pretty(phi), "mode": args.mode}
        try:
            rec["well_typed"] = check_typed(phi, mode)
        except MissingTypesError as exc:
            rec["well_typed"] = False
            rec["error"] = str(exc)
        ok = ok and rec["well_typed"]
        records.append(rec)
    return records, ok


def _cmd_model_eval(args):
    model = build_default(args.base, args.depth, budget=args.budget)
    records = []
    ok = True
    for lineno, phi in _read_corpus(args.corpus):
        rec = {"kind": "model-eval", "line": lineno, "formula": F.pretty(phi)}
        try:
            rec["value"] = evaluate(model, phi)
        except (ValueError, StratlabError) as exc:
            rec["value"] = None
            rec["error"] = str(exc)
        ok = ok and bool(rec["value"])
        records.append(rec)
    return records, ok


def _cmd_tstu_eval(args):
    family = build_tstu_family(args.sizes)
    interp = Interpretation(family, args.s)
    records = []
    ok = True
    for lineno, phi in _read_corpus(args.corpus):
        rec = {"kind": "tstu-eval", "line": lineno, "formula": F.pretty(phi)}
        try:
            rec["value"] = evaluate_tstu(interp, phi, budget=args.budget)
        except (ValueError, StratlabError) as exc:
            rec["value"] = None
            rec["error"] = str(exc)
        ok = ok and bool(rec["value"])
        records.append(rec)
    return records, ok


def _coloring_summary(coloring):
    classes = {}
    for color in coloring.color_of.values():
        key = json.dumps(_plain(color))
        classes[key] = classes.get(key, 0) + 1
    return {"subsets": len(coloring.color_of),
            "classes": len(classes),
            "class_sizes": sorted(classes.values(), reverse=True)}


def _cmd_ambiguity(args):
    family = build_tstu_family(args.sizes)
    sigma = tuple(phi for _, phi in _read_corpus(args.sigma))
    rec = {"kind": "ambiguity", "sentences": [F.pretty(p) for p in sigma]}
    try:
        witness = jensen_witness(family, sigma, budget=args.budget)
    except NoHomogeneousSetError as exc:
        rec["found"] = False
        if exc.coloring is not None:
            rec["coloring"] = _coloring_summary(exc.coloring)
        return [rec], False
    rec["found"] = True
    rec["H"] = sorted(witness.H)
    rec["s"] = list(witness.s)
    rec["verdicts"] = [list(v) for v in witness.verdicts]
    n = max(len(witness.s) - 1, 1)
    coloring = color_by_theory(family, sigma, n, budget=args.budget)
    rec["coloring"] = _coloring_summary(coloring)
    ok = True
    if args.k is not None:
        found = find_homogeneous(coloring, args.k)
        rec["H_k"] = sorted(found) if found is not None else None
        ok = found is not None
    return [rec], ok


def _cmd_ramsey(args):
    with open(args.colors, encoding="utf-8") as fh:
        raw = json.load(fh)
    # keys are JSON lists rendered as strings, e.g. "[1,2]": 2
    table = {tuple(json.loads(key)): color for key, color in raw.items()}
    coloring = coloring_from_table(args.lambda_fin, args.n, table)
    found = find_homogeneous(coloring, args.k)
    rec = {"kind": "ramsey", "lambda_fin": args.lambda_fin, "n": args.n,
           "k": args.k, "found": found is not None,
           "coloring": _coloring_summary(coloring)}
    if found is not None:
        members = sorted(found)
        rec["H"] = members
        rec["color"] = _plain(coloring.color_of[tuple(members[:args.n])])
    else:
        rec["H"] = None
    return [rec], found is not None


def _cmd_web_check(args):
    with open(args.fragment, encoding="utf-8") as fh:
        fragment = fragment_from_json(fh.read())
    nat = check_naturality(fragment)
    profile = cardinality_profile(args.cap)
    elem = check_elementarity_profile(fragment, args.n, profile)
    nat_ok = not nat.violations and not nat.missing
    elem_ok = not elem.violations
    rec = {"kind": "web-check",
           "lambda_fin": fragment.lambda_fin,
           "indices": len(fragment.tau),
           "naturality_ok": nat_ok,
           "naturality_violations": [sorted(v) for v in nat.violations],
           "naturality_missing": [sorted(v) for v in nat.missing],
           "elementarity_ok": elem_ok,
           "elementarity_violations": [
               {"pair": [sorted(v[0]), sorted(v[1])],
                "base_sizes": [v[2], v[3]]} for v in elem.violations]}
    return [rec], nat_ok and elem_ok


def _cmd_web_sweep(args):
    rep = impossibility_sweep(args.lambda_fin, args.cap, args.n)
    rec = {"kind": "web-sweep", "lambda_fin": rep.lambda_fin,
           "cap": rep.cap, "n": rep.n, "space_size": rep.space_size,
           "consistent": rep.consistent_count,
           "pass_naturality": len(rep.naturality_passers),
           "pass_both": len(rep.both_passers)}
    return [rec], not rep.both_passers


def _universe(args):
    params = FMParams(k=args.k, s_max=args.smax, litters0=args.litters)
    return build_universe(params, stages=args.stages)


def _cmd_fm_build(args):
    u = _universe(args)
    first = sorted(u.clans["c0"])[0]
    rec = {"kind": "fm-build", "k": u.params.k, "smax": u.params.s_max,
           "litters0": u.params.litters0, "stages": u.stages,
           "atoms": len(u.atoms),
           "litters": len(u.litters),
           "clans": {clan: len(lids) for clan, lids in sorted(u.clans.items())},
           "parent_zone": len(u.parent_zone),
           "near_litters_each": len(near_litters_of(u, first))}
    return [rec], True


def _cmd_fm_census(args):
    u = _universe(args)
    rep = symmetric_census(u, args.clan)
    rec = {"kind": "fm-census", "clan": rep.clan, "total": rep.total,
           "symmetric": len(rep.symmetric),
           "mismatches": [sorted(m) for m in rep.mismatches]}
    return [rec], not rep.mismatches


def _cmd_fm_lemma(args):
    u = _universe(args)
    if args.which == "clan-subset":
        rep = clan_subset_support_lemma_check(u, args.clan)
        rec = {"kind": "fm-lemma-clan-subset", "clan": args.clan,
               "total": rep.total, "decomposed": len(rep.decompositions),
               "violations": [sorted(v) for v in rep.violations]}
        return [rec], not rep.violations
    if args.which == "extension":
        rep = extension_lemma_check(u)
        rec = {"kind": "fm-lemma-extension", "total": rep.total,
               "passed": rep.passed,
               "failures": [_plain(f) for f in rep.failures]}
        return [rec], rep.passed == rep.total
    rep = parent_injection_check(u)
    entries = [{"source": sorted(e.source), "image_size": e.image_size,
                "symmetric": e.symmetric} for e in rep.entries]
    rec = {"kind": "fm-lemma-injection", "clan": rep.clan,
           "inputs": len(rep.entries), "injective": rep.injective,
           "entries": entries}
    return [rec], rep.injective and all(e.symmetric for e in rep.entries)


def _cmd_fm_orbit(args):
    u = _universe(args)
    supports = enumerate_strong_supports(u, args.max_len, args.clan)
    classes = {}
    for s in supports:
        classes.setdefault(orbit_spec(u, s), []).append(s)
    ordered = sorted(classes.items(), key=lambda kv: (len(kv[1][0]), repr(kv[0])))
    verified = 0
    for spec, members in ordered:
        probe = members[-1]
        if same_orbit(u, members[0], probe) is not None:
            verified += 1
    cross_none = 0
    cross_total = 0
    for (_, left), (_, right) in zip(ordered, ordered[1:]):
        if len(left[0]) == len(right[0]):
            cross_total += 1
            if same_orbit(u, left[0], right[0]) is None:
                cross_none += 1
    rec = {"kind": "fm-orbit", "clan": args.clan, "max_len": args.max_len,
           "supports": len(supports), "classes": len(ordered),
           "class_sizes": sorted((len(m) for _, m in ordered), reverse=True),
           "verified_mappings": verified,
           "cross_class_checks": cross_total,
           "cross_class_distinct": cross_none}
    ok = verified == len(ordered) and cross_none == cross_total
    return [rec], ok


# ---------------------------------------------------------------------------
# argument wiring

def _add_common(sp):
    sp.add_argument("--format", choices=("json", "text"), default="json")
    sp.add_argument("--expect", choices=("pass", "any"), default="any")
    sp.add_argument("--seed", type=int, default=0,
                    help="echoed into records; fixes any randomized sweep")


def _add_universe_flags(sp):
    sp.add_argument("--k", type=_positive, default=4)
    sp.add_argument("--smax", type=_positive, default=3)
    sp.add_argument("--litters", type=_positive, default=3)
    sp.add_argument("--stages", type=_positive, default=1)


def _build_parser():
    top = argparse.ArgumentParser(prog="stratlab")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("stratify", help="stratification verdicts for a corpus")
    sp.add_argument("corpus")
    _add_common(sp)
    sp.set_defaults(run=_cmd_stratify)

    sp = sub.add_parser("raise", help="shift every type up by one")
    sp.add_argument("corpus")
    _add_common(sp)
    sp.set_defaults(run=_cmd_raise)

    sp = sub.add_parser("typecheck", help="declared-type discipline check")
    sp.add_argument("corpus")
    sp.add_argument("--mode", choices=("tst", "tstu", "ttt"), default="tst")
    _add_common(sp)
    sp.set_defaults(run=_cmd_typecheck)

    sp = sub.add_parser("model", help="natural-model evaluation")
    msub = sp.add_subparsers(dest="model_command", required=True)
    mp = msub.add_parser("eval")
    mp.add_argument("corpus")
    mp.add_argument("--base", type=int, default=1)
    mp.add_argument("--depth", type=_positive, default=2)
    mp.add_argument("--budget", type=_positive, default=10**6)
    _add_common(mp)
    mp.set_defaults(run=_cmd_model_eval)

    sp = sub.add_parser("tstu", help="urelement-family evaluation")
    tsub = sp.add_subparsers(dest="tstu_command", required=True)
    tp = tsub.add_parser("eval")
    tp.add_argument("corpus")
    tp.add_argument("--sizes", type=_csv_ints, default=(1, 2, 4, 16))
    tp.add_argument("--s", type=_csv_ints, default=(0, 1, 2))
    tp.add_argument("--budget", type=_positive, default=10**6)
    _add_common(tp)
    tp.set_defaults(run=_cmd_tstu_eval)

    sp = sub.add_parser("ambiguity", help="homogeneous-level witness search")
    sp.add_argument("--sizes", type=_csv_ints, required=True)
    sp.add_argument("--sigma", required=True, help="corpus file of sentences")
    sp.add_argument("--k", type=_positive, default=None)
    sp.add_argument("--budget", type=_positive, default=10**6)
    _add_common(sp)
    sp.set_defaults(run=_cmd_ambiguity)

    sp = sub.add_parser("ramsey", help="homogeneous search on an explicit coloring")
    sp.add_argument("--lambda", dest="lambda_fin", type=_positive, required=True)
    sp.add_argument("--n", type=_positive, required=True)
    sp.add_argument("--k", type=_positive, default=3)
    sp.add_argument("--colors", required=True, help="JSON subset->color table")
    _add_common(sp)
    sp.set_defaults(run=_cmd_ramsey)

    sp = sub.add_parser("web", help="tangled-web condition checks")
    wsub = sp.add_subparsers(dest="web_command", required=True)
    wp = wsub.add_parser("check")
    wp.add_argument("fragment", help="JSON index->value fragment")
    wp.add_argument("--n", type=_positive, default=1)
    wp.add_argument("--cap", type=_positive, default=16)
    _add_common(wp)
    wp.set_defaults(run=_cmd_web_check)
    wp = wsub.add_parser("sweep")
    wp.add_argument("--lambda", dest="lambda_fin", type=_positive, default=3)
    wp.add_argument("--cap", type=_positive, default=16)
    wp.add_argument("--n", type=_positive, default=1)
    _add_common(wp)
    wp.set_defaults(run=_cmd_web_sweep)

    sp = sub.add_parser("fm", help="permutation-model workbench")
    fsub = sp.add_subparsers(dest="fm_command", required=True)
    fp = fsub.add_parser("build")
    _add_universe_flags(fp)
    _add_common(fp)
    fp.set_defaults(run=_cmd_fm_build)
    fp = fsub.add_parser("census")
    _add_universe_flags(fp)
    fp.add_argument("--clan", default="c0")
    _add_common(fp)
    fp.set_defaults(run=_cmd_fm_census)
    fp = fsub.add_parser("lemma")
    fp.add_argument("which", choices=("clan-subset", "extension", "injection"))
    _add_universe_flags(fp)
    fp.add_argument("--clan", default="c0")
    _add_common(fp)
    fp.set_defaults(run=_cmd_fm_lemma)
    fp = fsub.add_parser("orbit")
    _add_universe_flags(fp)
    fp.add_argument("--clan", default="c0")
    fp.add_argument("--max-len", type=_positive, default=2)
    _add_common(fp)
    fp.set_defaults(run=_cmd_fm_orbit)

    return top


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        records, ok = args.run(args)
    except StratlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # malformed input data: tables, fragments, flag combinations
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    _emit(records, args)
    if args.expect == "pass" and not ok:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
