"""Command line front end: ``hypervol --command NAME --input FILE [--output FILE]``.

Exit status is 0 on success, 2 when an input fails to parse or validate,
and 3 when a numerical check fails.  The JSON report depends only on the
inputs and the seed; wall time goes to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from contextlib import nullcontext

import numpy as np

from . import forms as F
from . import hyperhermitian as H
from . import psh as S
from . import valuations as V
from . import verify
from .errors import CheckFailed, HypervolError, ParseError, ValidationError
from .loaders import load_density, load_grid, load_hyperhermitian, load_model, load_polytope, read_json

COMMANDS = (
    "moore-det",
    "mixed-disc",
    "gram-rank",
    "positivity",
    "hessian",
    "ma-density",
    "current-pair",
    "blocki",
    "pseudovolume",
    "kazarnovskii",
    "support-measure",
    "additivity",
    "verify-all",
)

ADDITIVITY_SIGMAS = 3.0
ADDITIVITY_FLOOR = 1e-12


def _need(doc, key):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"input needs field {key!r}")
    return doc[key]


def _matrix_doc(doc):
    return doc["matrix"] if isinstance(doc, dict) and "matrix" in doc else doc


def cmd_moore_det(doc, args):
    a = load_hyperhermitian(_matrix_doc(doc)).data
    spectral = float(H.moore_det_spectral(a))
    schur = H.moore_det_schur(a, np.random.default_rng(args.seed))
    gap = abs(spectral - schur) / (1 + abs(spectral))
    if gap > 1e-8:
        raise CheckFailed(f"spectral and Schur routes differ by {gap:.2e}")
    return {"value": float(H.moore_det(a)), "spectral": spectral, "schur": schur, "route_gap": gap}, {"route_gap": 1e-8}


def cmd_mixed_disc(doc, args):
    mats = [load_hyperhermitian(m).data for m in _need(doc, "matrices")]
    return {"value": float(H.mixed_discriminant(mats))}, {}


def cmd_gram_rank(doc, args):
    n, k = int(_need(doc, "n")), int(_need(doc, "k"))
    rank = F.gram_rank(n, k, samples=args.samples, seed=args.seed)
    return {"rank": rank, "expected": F.expected_dimension(n, k)}, {"rank_rtol": 1e-8}


def cmd_positivity(doc, args):
    form = F.FormClass.from_json(doc["form"] if "form" in doc else doc)
    cert = F.certify_positivity(form, trials=args.samples or 400, seed=args.seed)
    return cert.to_json(), {}


def _model_and_point(doc):
    model = load_model(_need(doc, "model"))
    pts = np.atleast_2d(np.asarray(_need(doc, "points" if "points" in doc else "point"), dtype=float))
    if pts.shape[1] != model.dim:
        raise ValidationError(f"points have {pts.shape[1]} coordinates, model needs {model.dim}")
    return model, pts


def cmd_hessian(doc, args):
    model, pts = _model_and_point(doc)
    return {"hessians": [{"n": model.n, "entries": h.tolist()} for h in S.hessian(model, pts)]}, {}


def cmd_ma_density(doc, args):
    model, pts = _model_and_point(doc)
    return {"values": np.atleast_1d(S.ma_density(model, pts)).tolist()}, {}


def cmd_current_pair(doc, args):
    models = [load_model(m) for m in _need(doc, "models")]
    n = models[0].n
    dens = load_density(_need(doc, "density"), n)
    grid = load_grid(doc.get("grid"), dens.profile, args.grid_spacing)
    value = S.current_pair(models, dens, grid)
    return {"value": value, "grid": grid.to_json(), "cells": grid.size()}, {}


def cmd_blocki(doc, args):
    p = int(_need(doc, "p"))
    relation = doc.get("relation", "standard")
    out = {"p": p, "symbolic": S.blocki_symbolic_check(p, doc.get("n"), relation)}
    if "u" in doc:
        u, v = load_model(doc["u"]), load_model(_need(doc, "v"))
        dens = load_density(_need(doc, "density"), u.n)
        grid = load_grid(doc.get("grid"), dens.profile, args.grid_spacing)
        out["numeric"] = S.blocki_numeric_check(u, v, p, dens, doc.get("j_sweep", [2, 8, 32]), grid)
    if relation == "standard" and not out["symbolic"]:
        raise CheckFailed(f"symbolic identity failed for p={p}")
    return out, {}


def cmd_pseudovolume(doc, args):
    rep = V.pseudovolume_q(load_polytope(doc), args.samples or V.DEFAULT_ANGLE_SAMPLES, args.seed)
    return rep.to_json(), {}


def cmd_kazarnovskii(doc, args):
    rep = V.kazarnovskii(load_polytope(doc), args.samples or V.DEFAULT_ANGLE_SAMPLES, args.seed)
    return rep.to_json(), {}


def cmd_support_measure(doc, args):
    poly = load_polytope(doc["polytope"] if "polytope" in doc else doc)
    meas = V.ma_support_measure(poly, args.variant)
    out = meas.to_json()
    bumps = doc.get("bumps", []) if isinstance(doc, dict) else []
    out["pairings"] = [meas.pair(S.Bump(b["center"], b["radius"]), args.grid_spacing) for b in bumps]
    return out, {}


def cmd_additivity(doc, args):
    k1, k2 = load_polytope(_need(doc, "k1")), load_polytope(_need(doc, "k2"))
    union = load_polytope(doc["union"]) if "union" in doc else None
    fn = {"pseudovolume": V.pseudovolume_q, "kazarnovskii": V.kazarnovskii}.get(doc.get("valuation", "pseudovolume"))
    if fn is None:
        raise ValidationError(f"unknown valuation {doc.get('valuation')!r}")
    samples = args.samples or V.DEFAULT_ANGLE_SAMPLES
    res = V.valuation_additivity_check(k1, k2, lambda p: fn(p, samples, args.seed), union=union, seed=args.seed)
    bound = ADDITIVITY_SIGMAS * res["stderr"] + ADDITIVITY_FLOOR
    res["bound"] = bound
    if res["gap"] > bound:
        raise CheckFailed(f"additivity gap {res['gap']:.3e} exceeds {bound:.3e}")
    return res, {"sigmas": ADDITIVITY_SIGMAS, "floor": ADDITIVITY_FLOOR}


def cmd_verify_all(doc, args):
    def show(res):
        print(res.line, file=sys.stderr, flush=True)

    results = verify.run_all(seed=args.seed, fail_fast=True, progress=show)
    report = {"criteria": [r.to_json() for r in results]}
    failed = [r.id for r in results if not r.passed]
    if failed:
        raise CheckFailed(f"criterion {failed[0]} failed", report)
    return report, {}


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypervol", description=__doc__.splitlines()[0])
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--input", help="JSON input file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=None, help="Monte Carlo samples or sampled trials")
    p.add_argument("--grid-spacing", type=float, default=None)
    p.add_argument("--output", help="report file (default: stdout)")
    p.add_argument("--variant", choices=("proof", "statement"), default="proof", help="support-measure density")
    return p


def _thread_limit():
    value = os.environ.get("HYPERVOL_THREADS")
    if not value:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(value))


def _emit(report: dict, path: str | None):
    text = json.dumps(report, indent=2, default=_jsonable) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    report = {
        "command": args.command,
        "inputs": {"path": args.input, "document": None},
        "seed": args.seed,
        "options": {"samples": args.samples, "grid_spacing": args.grid_spacing, "variant": args.variant},
    }
    t0 = time.perf_counter()
    code = 0
    try:
        with _thread_limit():
            doc = {}
            if args.input:
                doc = read_json(args.input)
                report["inputs"]["document"] = doc
            elif args.command != "verify-all":
                raise ParseError("--input is required for this command")
            results, tolerances = HANDLERS[args.command](doc, args)
        report.update(status="ok", results=results, tolerances=tolerances)
    except CheckFailed as exc:
        code = 3
        report.update(status="check_failed", error=str(exc.args[0]))
        if len(exc.args) > 1:
            report["results"] = exc.args[1]
    except ValidationError as exc:
        code = 2
        report.update(status="invalid_input", error=str(exc))
    except HypervolError as exc:
        code = 3
        report.update(status="numerical_failure", error=f"{type(exc).__name__}: {exc}")
    except (KeyError, TypeError, ValueError) as exc:
        # malformed documents that slipped past the loaders
        code = 2
        report.update(status="invalid_input", error=f"{type(exc).__name__}: {exc}")
    _emit(report, args.output)
    print(f"wall time {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
