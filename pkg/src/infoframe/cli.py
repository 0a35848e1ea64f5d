"""Command-line frontend.

Subcommands: ``compare``, ``mc``, ``verify``, ``frame-info``.  Exit status
is 0 on success, 1 when a verification check fails, 2 on usage errors.
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import covariant as cov
from . import frames
from . import mcverify as mc
from .descriptors import DescriptorError, parse_operator
from .haar import EnsembleKind, RngStream
from .opalg import (
    antisymmetric_projector,
    partial_trace,
    symmetric_projector,
)

CSV_COLUMNS = ("operator", "ensemble", "family", "closed_form", "mc_value", "mc_stderr", "supported")
FAMILIES = ("local", "global", "bell")
SEED_ENV = "INFOFRAME_SEED"


class UsageError(Exception):
    pass


def _fmt(x):
    # repr of a Python float round-trips exactly
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def noise_report(ops, d, ensemble, samples=0, seed=0, workers=1, block_size=mc.DEFAULT_BLOCK_SIZE,
                 closed_form=True):
    """Rows and per-operator comparisons for a set of ``(name, operator)`` pairs."""
    kind = EnsembleKind.parse(ensemble)
    rows, comparisons = [], []
    for op_index, (name, op) in enumerate(ops):
        for fam_index, tag in enumerate(FAMILIES):
            family = cov.CovariantFamily.from_tag(tag, d)
            supported = tag != "bell" or cov.bell_support_contains(op, d)[0]
            row = {"operator": name, "ensemble": kind.value, "family": tag,
                   "closed_form": None, "mc_value": None, "mc_stderr": None,
                   "supported": supported}
            if not supported:
                row["closed_form"] = "unsupported"
            else:
                if closed_form:
                    row["closed_form"] = cov.closed_form_noise(family, op, kind).total
                if samples:
                    rng = RngStream(seed, stream_id=op_index * len(FAMILIES) + fam_index)
                    est = mc.mc_noise(family, op, kind, samples, rng,
                                      block_size=block_size, workers=workers)
                    row["mc_value"], row["mc_stderr"] = est.value, est.stderr
            rows.append(row)
        rep = cov.comparison(op, kind, d)
        comparisons.append({
            "operator": name,
            "glob_minus_bell": rep.glob_minus_bell if rep.bell_estimable else None,
            "loc_minus_glob": rep.loc_minus_glob,
            "loc_minus_bell": rep.loc_minus_bell if rep.bell_estimable else None,
            "bell_estimable": rep.bell_estimable,
            "ordering": rep.ordering,
        })
    return rows, comparisons


def render_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) if c != "supported" else str(r[c]).lower() for c in CSV_COLUMNS])
    return buf.getvalue()


def render_json(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def _operators(args):
    if not args.op:
        raise UsageError("at least one --op is required")
    return [(desc, parse_operator(desc, args.dim)) for desc in args.op]


def cmd_compare(args, closed_form=True):
    ops = _operators(args)
    if not closed_form and args.samples < 2:
        raise UsageError("mc needs --samples >= 2")
    rows, comps = noise_report(ops, args.dim, args.ensemble, args.samples, _seed(args),
                               args.workers, args.block_size, closed_form=closed_form)
    if args.format == "csv":
        text = render_csv(rows)
    else:
        text = render_json({"dim": args.dim, "ensemble": args.ensemble, "samples": args.samples,
                            "seed": _seed(args), "rows": rows, "comparisons": comps})
    _emit(text, args.out)
    return 0


def verification_checks(d, samples, seed, workers=1, block_size=mc.DEFAULT_BLOCK_SIZE):
    """Run the identity/invariant battery; yields ``(name, passed, detail)``."""
    rng_id = iter(range(10_000))

    def stream():
        return RngStream(seed, next(rng_id))

    eye = np.eye(d * d)
    for fam in FAMILIES:
        family = cov.CovariantFamily.from_tag(fam, d)
        worst = max(abs(cov.closed_form_noise(family, eye, k).total) for k in EnsembleKind)
        yield f"zero_noise_identity[{fam}]", worst < 1e-12, worst

    # random operators with vanishing partial traces
    gen = stream().generator()
    violations = 0
    for _ in range(50):
        x = gen.standard_normal((d * d, d * d)) + 1j * gen.standard_normal((d * d, d * d))
        x -= np.kron(partial_trace(x, 2, d), np.eye(d)) / d
        x -= np.kron(np.eye(d), partial_trace(x, 1, d)) / d
        noises = [cov.closed_form_noise(cov.CovariantFamily.from_tag(t, d), x, "a").total
                  for t in ("bell", "global", "local")]
        violations += int(noises[0] > noises[1] + 1e-10 or noises[1] > noises[2] + 1e-10)
    yield "inequality_chain", violations == 0, violations

    povm = frames.random_povm(d, d * d + 2, stream())
    dual = frames.canonical_dual(povm)
    worst = 0.0
    for i in range(d):
        for j in range(d):
            o = np.zeros((d, d), dtype=complex)
            o[i, j] = 1.0
            worst = max(worst, frames.expansion_and_reconstruct(dual, o).residual)
    yield "reconstruction_round_trip", worst < 1e-9, worst

    if samples >= 2:
        x1 = np.zeros((d, d), dtype=complex)
        x1[0, 0] = 1.0
        est = mc.mc_twirl(x1, 1, d, samples, stream(), block_size, workers)
        yield "twirl_order1", est.within(np.trace(x1) * np.eye(d)), float(np.max(np.abs(est.value - np.eye(d))))
        x2 = np.zeros((d * d, d * d), dtype=complex)
        x2[1, 1] = 1.0  # |0><0| (x) |1><1|
        ps, pa = symmetric_projector(d), antisymmetric_projector(d)
        expect = (2 / (d + 1) * np.trace(ps @ x2) * ps + 2 / (d - 1) * np.trace(pa @ x2) * pa)
        est = mc.mc_twirl(x2, 2, d, samples, stream(), block_size, workers)
        yield "twirl_order2", est.within(expect), float(np.max(np.abs(est.value - expect)))
        z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
        op = np.kron(z, z.conj())
        for fam in FAMILIES:
            family = cov.CovariantFamily.from_tag(fam, d)
            exact = cov.closed_form_noise(family, op, "a").total
            est = mc.mc_noise(family, op, "a", samples, stream(), block_size, workers)
            yield f"mc_noise[{fam}]", est.within(exact), est.value - exact


def cmd_verify(args):
    seed = _seed(args)
    results = list(verification_checks(args.dim, args.samples, seed, args.workers, args.block_size))
    ok = all(bool(passed) for _, passed, _ in results)
    if args.format == "json":
        text = render_json({"dim": args.dim, "samples": args.samples, "seed": seed, "passed": ok,
                            "checks": [{"name": n, "passed": bool(p), "detail": float(v)}
                                       for n, p, v in results]})
    else:
        text = "".join(f"{'PASS' if p else 'FAIL'} {n} {_fmt(v)}\n" for n, p, v in results)
    _emit(text, args.out)
    return 0 if ok else 1


def cmd_frame_info(args):
    try:
        with open(args.path) as fh:
            frame = frames.frame_from_json(json.load(fh))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read frame from {args.path}: {exc}") from None
    fop = frames.frame_operator(frame)
    dual = frames.canonical_dual(frame)
    payload = {
        "dim": frame.dim,
        "n_elements": len(frame),
        "is_povm": isinstance(frame, frames.DiscretePovm),
        "rank": fop.rank,
        "infocomplete": fop.infocomplete,
        "spectrum": [float(v) for v in fop.eigenvalues()],
        "canonical_dual": frames.frame_to_json(dual),
    }
    _emit(render_json(payload), args.out)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="infoframe", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, ops=True, ensemble=True):
        sp.add_argument("--dim", type=int, default=2)
        if ensemble:
            sp.add_argument("--ensemble", choices=[k.value for k in EnsembleKind], default="a")
        if ops:
            sp.add_argument("--op", action="append", metavar="DESCRIPTOR")
        sp.add_argument("--samples", type=int, default=0)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--block-size", type=int, default=mc.DEFAULT_BLOCK_SIZE)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", default=None)

    common(sub.add_parser("compare", help="closed-form noises, optional Monte Carlo"))
    common(sub.add_parser("mc", help="Monte Carlo noises with standard errors"))
    common(sub.add_parser("verify", help="identity and invariant battery"), ops=False, ensemble=False)
    fi = sub.add_parser("frame-info", help="frame operator spectrum and canonical dual")
    fi.add_argument("path")
    fi.add_argument("--out", default=None)
    return p


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "dim", 2) < 2:
            raise UsageError("--dim must be >= 2")
        if getattr(args, "samples", 0) < 0:
            raise UsageError("--samples must be >= 0")
        if getattr(args, "workers", 1) < 1 or getattr(args, "block_size", 1) < 1:
            raise UsageError("--workers and --block-size must be >= 1")
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "mc":
            return cmd_compare(args, closed_form=False)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_frame_info(args)
    except (UsageError, DescriptorError) as exc:
        print(f"infoframe: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())
