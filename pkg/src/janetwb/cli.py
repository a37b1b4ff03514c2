"""``janetwb <command> --input file.sys`` pipeline driver."""

import argparse
import os
import sys

from .dsl import load_system, parse_system
from .errors import DSLSyntaxError, SemanticError, WorkbenchError
from .homology import (
    _to_std,
    differential_rank,
    ROUTES,
    ext_modules,
    janet_sequence,
    resolve,
    short_resolution,
    torsion_submodule,
)
from .involution import characters, hilbert_function
from .jets import Echelon, JetSystem, section_coordinates, sections_at_order, spencer_apply
from .ore import coef_text, form_text
from .purity import embed_pure_module, purity_test, relative_parametrization
from .report import FORMATS, Report, involutive_payload, jsonable, to_json

COMMANDS = ("complete", "characters", "janet", "ext", "torsion", "purity", "parametrize",
            "embed", "sections")


def _complete(spec, P, opts):
    I = P.involutive
    pay = involutive_payload(I)
    pay["characters"] = list(I.alpha)
    return Report("complete", pay, {"system": pay["system"]}, {"system": (I.board(), I.n)})


def _characters(spec, P, opts):
    I = P.involutive
    alpha, beta, cd, rk = characters(I)
    upto = opts.order if opts.order is not None else 4
    pay = {
        "q": I.q,
        "alpha": list(alpha),
        "beta": list(beta),
        "cd": cd,
        "rank": rk,
        "hilbert": [hilbert_function(I, r) for r in range(upto + 1)],
    }
    return Report("characters", pay)


def _janet(spec, P, opts):
    R = P.ring
    route = "janet" if opts.route == "auto" else opts.route
    if route == "short":
        res = short_resolution(P)
        dims, ops = res.ranks, res.maps
        vanish = res.composites_vanish()
    else:
        J = janet_sequence(P.involutive)
        dims, ops = J.dims, J.operators
        vanish = J.composites_vanish()
    euler = sum((-1) ** i * d for i, d in enumerate(dims))
    pay = {
        "route": route,
        "dims": list(dims),
        "euler": euler,
        "composites_vanish": vanish,
        "operators": [A.text_rows() for A in ops],
    }
    systems = {f"stage{t}": [form_text(R, r, None, "jet") for r in A.rows]
               for t, A in enumerate(ops)}
    return Report("janet", pay, systems)


def _ext(spec, P, opts):
    res = resolve(P, opts.route)
    pay = ext_modules(P, res).to_json()
    pay["resolution"] = res.ranks
    return Report("ext", pay)


def _torsion(spec, P, opts):
    T = torsion_submodule(P)
    R, names = P.ring, P.names
    gens = [{"element": form_text(R, g.element, names),
             "annihilator": form_text(R, g.annihilator, ["z"])} for g in T.generators]
    return Report("torsion", {"torsion_free": T.torsion_free, "generators": gens,
                              "rank": differential_rank(P)})


def _purity(spec, P, opts):
    rep = purity_test(P)
    pay = rep.to_json()
    pay["parametrization"] = None
    if rep.pure and rep.cd > 0:
        pay["parametrization"] = relative_parametrization(P, report=rep).to_json()
    return Report("purity", pay)


def _parametrize(spec, P, opts):
    par = relative_parametrization(P)
    pay = par.to_json()
    pay["localized"] = par.localized_text()
    pay["certified"] = par.verify(P)
    pay["resolution"] = par.resolution_ranks
    return Report("parametrize", pay, {"constraints": par.constraints.text_rows(par.potentials,
                                                                                 "jet")})


def _embed(spec, P, opts):
    E = embed_pure_module(P, route=opts.route)
    return Report("embed", E.to_json())


def _sections(spec, P, opts):
    # sections of the formally integrable system, in standard coordinates
    I = P.involutive
    conv = _to_std(I)
    S = JetSystem(P.ring, P.m, [conv(r) for r in I.rows])
    q = opts.order if opts.order is not None else S.q
    basis = sections_at_order(S, q)
    names = [f"f{t + 1}" for t in range(len(basis))]
    pay = {"order": q,
           "basis": {nm: [coef_text(S.ring.field, v) for v in b.vector()]
                     for nm, b in zip(names, basis)}}
    if q >= 1:
        lower = sections_at_order(S, q - 1) if q - 1 >= S.q else [b.truncate(q - 1) for b in basis]
        # express d_i f in the truncated basis when it is independent there
        trunc = [b.truncate(q - 1) for b in basis]
        if _independent(trunc):
            target, tnames = trunc, names
        else:
            target, tnames = lower, [f"g{t + 1}" for t in range(len(lower))]
        actions = []
        for i in range(1, S.n + 1):
            for nm, b in zip(names, basis):
                c = section_coordinates(spencer_apply(S.ring, b, i), target)
                actions.append({"i": i, "section": nm,
                                "image": _combo_text(S.ring.field, c, tnames)})
        pay["spencer"] = actions
    return Report("sections", pay)


def _independent(secs):
    E = Echelon()
    return all(E.add(s.values) is not None for s in secs)


def _combo_text(field, c, names):
    if c is None:
        return None
    parts = []
    for a, nm in zip(c, names):
        if not a:
            continue
        s = coef_text(field, a)
        if s == "1":
            parts.append(("+", nm))
        elif s == "-1":
            parts.append(("-", nm))
        elif s.startswith("-"):
            parts.append(("-", f"({s[1:]})*{nm}"))
        else:
            parts.append(("+", f"({s})*{nm}"))
    if not parts:
        return "0"
    out = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
    for sg, b in parts[1:]:
        out += f" {sg} {b}"
    return out


_RUNNERS = {
    "complete": _complete,
    "characters": _characters,
    "janet": _janet,
    "ext": _ext,
    "torsion": _torsion,
    "purity": _purity,
    "parametrize": _parametrize,
    "embed": _embed,
    "sections": _sections,
}


def run_pipeline(spec, command, opts):
    """Report for one command; ``opts`` carries seed, max_order, order, route."""
    cfg = spec.config(seed=opts.seed, max_order=opts.max_order)
    P = spec.presentation(cfg)
    return _RUNNERS[command](spec, P, opts)


def build_parser():
    ap = argparse.ArgumentParser(prog="janetwb", description="Exact workbench for linear PDE systems.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", "-i", required=True, help="system file, or - for stdin")
    ap.add_argument("--format", "-f", choices=FORMATS, default="json")
    ap.add_argument("--seed", type=int, default=None, help="frame search seed (JANETWB_SEED overrides)")
    ap.add_argument("--max-order", type=int, default=None, help="order bound for completion")
    ap.add_argument("--order", type=int, default=None, help="section order / Hilbert range")
    ap.add_argument("--route", choices=ROUTES, default="auto",
                    help="resolution used by janet, ext and embed; auto takes the Janet "
                         "sequence unless its total rank is large")
    return ap


class _Opts:
    def __init__(self, seed=None, max_order=None, order=None, route="auto"):
        self.seed = seed
        self.max_order = max_order
        self.order = order
        self.route = route


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code else 0
    env = os.environ.get("JANETWB_SEED")
    if env is not None:
        try:
            args.seed = int(env)
        except ValueError:
            print(f"janetwb: JANETWB_SEED must be an integer, got {env!r}", file=sys.stderr)
            return 1
    try:
        spec = parse_system(sys.stdin.read()) if args.input == "-" else load_system(args.input)
    except OSError as e:
        print(f"janetwb: {e}", file=sys.stderr)
        return 1
    except (DSLSyntaxError, SemanticError) as e:
        _emit_error(e, args.format)
        return 1
    opts = _Opts(args.seed, args.max_order, args.order, args.route)
    try:
        rep = run_pipeline(spec, args.command, opts)
    except (ValueError, TypeError) as e:
        if isinstance(e, WorkbenchError):
            _emit_error(e, args.format)
            return e.exit_status
        print(f"janetwb: {e}", file=sys.stderr)
        return 1
    except WorkbenchError as e:
        _emit_error(e, args.format)
        return e.exit_status
    sys.stdout.write(rep.render(args.format))
    return 0


def _emit_error(e, fmt):
    body = {"error": e.code, "message": str(e)}
    if getattr(e, "partial", None):
        body["partial"] = jsonable(e.partial)
    if fmt == "json":
        sys.stderr.write(to_json(body))
    else:
        sys.stderr.write(f"janetwb: {e.code}: {e}\n")


if __name__ == "__main__":
    sys.exit(main())
