"""Command-line front end.

Every command writes one JSON document (sorted keys, fixed float repr) to
standard output or to ``--out``; identical invocations give identical bytes.
Exit status: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy

from . import __version__
from . import determinant as det
from . import formal, fuchsian, index, specfun, zeta
from .errors import CuspdetError, IncompleteCutoff

__all__ = ["CommandSpec", "build_parser", "run", "main"]

CACHE_ENV = "CUSPDET_CACHE_DIR"


@dataclass(frozen=True)
class CommandSpec:
    subcommand: str
    flags: dict = field(default_factory=dict)
    output_path: str | None = None


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_range(text):
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--digits", type=int, default=specfun.DEFAULT_DIGITS,
                        help=f"working precision in decimal digits (default {specfun.DEFAULT_DIGITS}, "
                             f"minimum {specfun.MIN_DIGITS})")
    common.add_argument("--out", help="write the JSON result to this file instead of stdout")

    parser = _Parser(prog="cuspdet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("spectrum", parents=[common], help="enumerate a geodesic length spectrum")
    p.add_argument("--group", required=True, choices=sorted(fuchsian.BUILTIN_GROUPS))
    p.add_argument("--L", type=float, required=True, dest="L", help="length cutoff")
    p.add_argument("--max-word", type=int, required=True, help="maximal word length")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("zeta", parents=[common], help="Selberg zeta function from a spectrum file")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--s", type=float)
    p.add_argument("--derivative", action="store_true", help="also report Z'/Z")
    p.add_argument("--at-one", action="store_true", help="extrapolate Z'(1)")
    p.add_argument("--eps", type=_float_list, default=[0.2, 0.1, 0.05],
                   help="decreasing eps grid for --at-one (default 0.2,0.1,0.05)")

    p = sub.add_parser("det", parents=[common], help="determinant of Delta + s(s-1)")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--dbar", action="store_true", help="d-bar Laplacian instead")
    p.add_argument("--compact-g", type=int, help="treat the spectrum as a compact surface of genus G")
    p.add_argument("--cusp-normalization", choices=det.CUSP_NORMALIZATIONS, default="asymptotic")

    p = sub.add_parser("index", parents=[common], help="Riemann-Roch index table")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l-range", type=_int_range, default=(-3, 3), help="inclusive 'lo,hi'")

    p = sub.add_parser("classes", parents=[common], help="exact characteristic-class identities")
    p.add_argument("--D", type=int, default=6, help="truncation degree")
    p.add_argument("--n", type=int, default=1, help="cusp count for the comparison")
    p.add_argument("--g", type=int, default=2)
    p.add_argument("--l-range", type=_int_range, default=(-2, 3))

    sub.add_parser("selftest", parents=[common], help="dump constants and run the acceptance suite")
    return parser


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _provenance(spec: CommandSpec, assumptions=()):
    return {
        "package": "cuspdet",
        "version": __version__,
        "mpmath": mpmath.__version__,
        "numpy": numpy.__version__,
        "command": spec.subcommand,
        "parameters": spec.flags,
        "assumptions": list(assumptions),
    }


def _cached_spectrum(args):
    cache = os.environ.get(CACHE_ENV)
    path = None
    if cache:
        path = Path(cache) / f"{args.group}_L{args.L!r}_w{args.max_word}.jsonl"
        if path.exists():
            return fuchsian.read_spectrum(path), True
    grp = fuchsian.builtin_group(args.group)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IncompleteCutoff)
        sp = fuchsian.enumerate_spectrum(grp, args.L, args.max_word, workers=args.workers)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fuchsian.write_spectrum(sp, path)
    return sp, False


def _cmd_spectrum(args, spec):
    sp, from_cache = _cached_spectrum(args)
    result = {"entries": len(sp), "min_length": sp.min_length, "cutoff": sp.cutoff,
              "spectrum_provenance": dict(sp.provenance), "from_cache": from_cache}
    if args.out:
        fuchsian.write_spectrum(sp, args.out)
        result["path"] = str(args.out)
        return result, None
    # without --out the spectrum itself goes to stdout
    return None, fuchsian.dumps_spectrum(sp)


def _cmd_zeta(args, spec):
    sp = fuchsian.read_spectrum(args.spectrum)
    result = {"spectrum_provenance": dict(sp.provenance)}
    if args.s is None and not args.at_one:
        raise _UsageError("zeta: error: --s is required unless --at-one is given")
    if args.s is not None:
        z = zeta.log_selberg_zeta(sp, args.s)
        result.update(z.to_json())
        if args.derivative:
            d = zeta.zeta_log_derivative(sp, args.s)
            result["log_derivative"] = d.log_value
            result["log_derivative_tail_estimate"] = d.tail_estimate
    if args.at_one:
        r = zeta.zeta_prime_at_1(sp, args.eps)
        result["zeta_prime_at_1"] = r.to_json()
    return result, None


def _cmd_det(args, spec):
    sp = fuchsian.read_spectrum(args.spectrum)
    if args.compact_g is not None:
        if (sp.surface.g, sp.surface.n) != (args.compact_g, 0):
            raise CuspdetError(f"--compact-g {args.compact_g} needs a spectrum of type "
                               f"({args.compact_g}, 0), got ({sp.surface.g}, {sp.surface.n})")
        z = zeta.log_selberg_zeta(sp, args.s)
        factor = det.sarnak_compact_factor(args.compact_g, args.s)
        report = det.DetReport(z.log_value + factor.value,
                               {"s": args.s, "g": args.compact_g, "n": 0,
                                "spectrum": dict(sp.provenance), "log_zeta": z.log_value,
                                "log_factor": factor.value},
                               tuple(z.assumptions) + (f"tail_estimate={z.tail_estimate!r}",))
        if args.dbar:
            st = index.SurfaceType(args.compact_g, 0)
            shift = -float(index.zeta_at_zero(st, args.s)) * math.log(2)
            report = det.DetReport(report.log_det + shift, dict(report.inputs),
                                   report.assumptions + ("dbar-Laplacian = Delta / 2",))
        return report.to_json(), None
    fn = det.det_dbar if args.dbar else det.det_geometric
    return fn(sp.surface, sp, args.s, args.cusp_normalization).to_json(), None


def _cmd_index(args, spec):
    lo, hi = args.l_range
    return {"g": args.g, "n": args.n, "rows": index.index_table(args.g, args.n, range(lo, hi + 1))}, None


def _cmd_classes(args, spec):
    D, n, g = args.D, args.n, args.g
    lo, hi = args.l_range
    eta = formal.univariate_kernel("eta_form", D)
    hc = formal.univariate_kernel("half_coth", D)
    x = formal.GradedSeries.generator(hc.alphabet, D, "x")
    half_coth_ok = (hc - formal.univariate_kernel("x_over_expm1", D) - x * Fraction(1, 2)).is_zero()
    rows = []
    alphabet = formal.GeneratorAlphabet.moduli(0, D + 1)
    for ell in range(lo, hi + 1):
        kernel = formal.univariate_kernel("todd_twisted", D + 1, ell=ell)
        pushed = formal.fiber_integrate(formal.substitute_univariate(kernel, alphabet, "psi_1"))
        tc1 = pushed == formal.kappa_bernoulli_sum(ell, alphabet, D)
        dens = formal.index_density(ell, g, n, D)
        rows.append({
            "ell": ell,
            "tc1_identity": tc1,
            "degree_zero_value": str(formal.degree_zero_value(dens, g, n)),
            "index_dbar": index.index_dbar(ell, index.SurfaceType(g, n)),
            "kappa_1_coefficient": str(dens.coefficient(kappa_1=1)),
        })
    bini = [formal.bini_compare(ell, n, D).to_json() for ell in (0, 1)]
    return {"D": D, "g": g, "n": n,
            "eta_form": eta.pretty(), "half_coth_identity": half_coth_ok,
            "rows": rows, "bini": bini}, None


def _constants():
    out = {}
    for name, fn in (("E", specfun.constant_E), ("zeta_prime_minus_one", specfun.zeta_prime_minus_one),
                     ("gamma_log_minus_half", lambda: specfun.gamma_log(-0.5))):
        out[name] = fn().to_json()
    out["zeta_minus_one"] = str(specfun.riemann_zeta_minus_one())
    for ell in range(4):
        out[f"c_{ell}"] = specfun.dhoker_phong_c(ell).to_json()
    return out


def _cmd_selftest(args, spec):
    from .acceptance import format_line, run_all
    results = run_all(lambda line: print(line, file=sys.stderr))
    failed = [r.number for r in results if not r.passed]
    doc = {"constants": _constants(), "criteria": [r.to_json() for r in results],
           "failed": failed}
    # runtimes vary between runs; keep them out of the deterministic document
    for c in doc["criteria"]:
        c.pop("runtime_s", None)
        c["detail"].pop("runtime_budget_s", None)
    summary = [format_line(r).rsplit(" (", 1)[0] for r in results]
    doc["summary"] = summary
    return doc, None, (1 if failed else 0)


COMMANDS = {
    "spectrum": _cmd_spectrum,
    "zeta": _cmd_zeta,
    "det": _cmd_det,
    "index": _cmd_index,
    "classes": _cmd_classes,
    "selftest": _cmd_selftest,
}


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


_VALUE_FLAGS = ("--l-range", "--eps", "--s", "--L")


def _join_negative_values(argv):
    # argparse treats "-2,3" as an option; bind such values to their flag
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None) -> int:
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    flags = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("command", "out")}
    spec = CommandSpec(args.command, flags, args.out)
    try:
        with specfun.precision(args.digits):
            outcome = COMMANDS[args.command](args, spec)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return 2
    except (CuspdetError, OSError, ValueError) as exc:
        print(f"cuspdet: error: {exc}", file=sys.stderr)
        return 1
    result, raw = outcome[0], outcome[1]
    status = outcome[2] if len(outcome) > 2 else 0
    if raw is not None:
        sys.stdout.write(raw)
        return status
    result["provenance"] = _provenance(spec, result.get("assumptions", ()))
    text = _dump(result)
    if spec.output_path and args.command != "spectrum":
        Path(spec.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return status


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
