"""Command-line front end.

Every command prints a JSON report on stdout (and writes it to ``--out`` when
given).  Exit codes: 0 positive verdict, 1 negative verdict, 2 inconclusive,
64 usage, parse, or size errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import NamedTuple

from . import __version__, fourier, numeric, reconstruct, sis, weaving
from .errors import FormatError, WovenError
from .formats import Report, complex_to_json, read_matrix, read_spectrum, read_vector

EXIT_OK, EXIT_NEGATIVE, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64

_STATUS_EXIT = {
    weaving.IN_W: EXIT_OK,
    weaving.NOT_IN_W: EXIT_NEGATIVE,
    weaving.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    fourier.YES: EXIT_OK,
    fourier.NO: EXIT_NEGATIVE,
    sis.CERTIFIED: EXIT_OK,
    sis.NOT_CERTIFIED: EXIT_NEGATIVE,
}

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _precision(args, default_bits: int = 53) -> numeric.PrecisionConfig:
    bits = args.precision if args.precision is not None else default_bits
    if bits < 53:
        raise UsageError("--precision must be at least 53 bits")
    kw = {"zero_tol": args.tol} if args.tol is not None else {}
    if bits == 53:
        return numeric.PrecisionConfig(**kw)
    return numeric.PrecisionConfig.extended(bits, escalation_bits=bits, max_bits=max(bits, 1024), **kw)


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise UsageError(f"--range expects a..b, got {text!r}") from None


def _subset(text: str, n: int) -> weaving.IndexSet:
    try:
        items = [int(t) for t in text.split(",") if t.strip()]
        return weaving.IndexSet.of(n, items)
    except ValueError as exc:
        raise UsageError(f"bad --subset {text!r}: {exc}") from None


def _spectrum(ref: str, args) -> sis.SpectrumSamples:
    if ref == "sinc":
        K = args.kmax if args.kmax is not None else sis.DEFAULT_KMAX
        return sis.sinc_spectrum(args.grid or sis.DEFAULT_GRID, K)
    s = read_spectrum(ref)
    if args.grid is not None and s.grid_size != args.grid:
        raise UsageError(f"{ref}: grid_size {s.grid_size} differs from --grid {args.grid}")
    if args.kmax is not None and s.k_max != args.kmax:
        raise UsageError(f"{ref}: k_max {s.k_max} differs from --kmax {args.kmax}")
    return s


# -- commands -----------------------------------------------------------------
# Each returns (config, result, exit_code).


def cmd_check_w(args):
    A, label = read_matrix(args.matrix)
    cfg = _precision(args)
    cert = weaving.classify_class_w(A, cfg, max_n=args.max_n)
    config = {"precision": cfg.to_dict(), "max_n": args.max_n, "matrix": args.matrix, "label": label}
    return config, {"certificate": cert.to_dict()}, _STATUS_EXIT[cert.status]


def cmd_woven(args):
    V, _ = read_matrix(args.v)
    W, _ = read_matrix(args.w)
    cfg = _precision(args)
    pair = weaving.BasisPair(V, W)
    max_n = args.max_n if args.max_n is not None else (8 if args.permutations else weaving.DEFAULT_MAX_N)
    config = {"precision": cfg.to_dict(), "max_n": max_n, "permutations": args.permutations}
    if args.permutations:
        search = weaving.woven_up_to_permutation(pair, cfg, max_n=max_n)
        result = {
            "found": search.found,
            "message": "permutation found" if search.found else "no permutation found",
            "sigma": list(search.sigma) if search.found else None,
            "permutations_classified": search.permutations_classified,
            "certificate": search.certificate.to_dict() if search.certificate else None,
            "change_of_basis": complex_to_json(search.change_of_basis),
        }
        return config, result, EXIT_OK if search.found else EXIT_NEGATIVE
    A = weaving.change_of_basis(pair, cfg)
    cert = weaving.classify_class_w(A, cfg, max_n=max_n)
    result = {"certificate": cert.to_dict(), "change_of_basis": complex_to_json(A)}
    return config, result, _STATUS_EXIT[cert.status]


def cmd_reconstruct(args):
    A, _ = read_matrix(args.matrix)
    y = read_vector(args.samples)
    J = _subset(args.subset, A.shape[0])
    cfg = _precision(args)
    config = {"precision": cfg.to_dict(), "subset": list(J.members)}
    try:
        x = reconstruct.recover(A, reconstruct.MixedSamples(J, y), cfg)
    except reconstruct.RecoveryImpossibleError as exc:
        result = {"recovered": None, "error": str(exc), "witness": exc.witness.to_dict()}
        return config, result, EXIT_NEGATIVE
    return config, {"recovered": complex_to_json(x)}, EXIT_OK


def cmd_fourier(args):
    cfg = _precision(args, default_bits=192)
    if cfg.mode == "double" and args.fourier_cmd != "minors":
        cfg = fourier.DEFAULT_SCAN_CONFIG
    max_n = args.max_n if args.max_n is not None else fourier.DEFAULT_MAX_N
    if args.fourier_cmd == "scan":
        lo, hi = _range(args.range)
        rep = fourier.scan(lo, hi, cfg, max_n=max_n)
        rows = [r.to_dict() for r in rep.rows]
        timings = {f"n={r['n']}": r.pop("seconds") for r in rows}
        result = {"rows": rows, "findings": rep.findings}
        code = EXIT_OK
        if any(r.in_W == fourier.INCONCLUSIVE for r in rep.rows):
            code = EXIT_INCONCLUSIVE
        elif rep.findings:
            code = EXIT_NEGATIVE
        return {"precision": cfg.to_dict(), "range": [lo, hi], "max_n": max_n}, result, code, timings
    if args.fourier_cmd == "classify":
        row = fourier.classify_fourier(args.n, cfg, max_n=max_n).to_dict()
        seconds = row.pop("seconds")
        config = {"precision": cfg.to_dict(), "n": args.n, "max_n": max_n}
        return config, {"row": row}, _STATUS_EXIT[row["in_W"]], {"classify": seconds}
    max_p = args.max_n if args.max_n is not None else 11
    mcfg = numeric.PrecisionConfig(
        zero_tol=cfg.zero_tol, escalation_bits=cfg.bits if cfg.mode == "extended" else 192
    )
    scan = fourier.minors_exhaustive(args.p, mcfg, max_p=max_p)
    result = {
        "all_nonzero": scan.all_nonzero,
        "minors_checked": scan.count,
        "min_abs": scan.min_abs,
        "witness": [list(w) for w in scan.witness] if scan.witness else None,
        "escalations": scan.escalations,
    }
    config = {"precision": mcfg.to_dict(), "p": args.p, "max_p": max_p}
    return config, result, EXIT_OK if scan.all_nonzero else EXIT_NEGATIVE


def _spectra_config(args, **extra) -> dict:
    return {"grid": args.grid, "kmax": args.kmax, **extra}


def cmd_sis(args):
    sub = args.sis_cmd
    if sub == "pw":
        psi = _spectrum(args.psi, args)
        cert = sis.pw_corollary_certify(psi)
        config = _spectra_config(args, psi=args.psi, grid=psi.grid_size, kmax=psi.k_max)
        return config, {"certificate": cert.to_dict()}, _STATUS_EXIT[cert.status]
    if sub == "multi":
        if not args.phi or not args.psi:
            raise UsageError("multi needs at least one --phi and one --psi")
        Phi = [_spectrum(p, args) for p in args.phi]
        Psi = [_spectrum(p, args) for p in args.psi]
        cert = sis.multi_perturbation_certify(Phi, Psi)
        config = _spectra_config(args, phi=args.phi, psi=args.psi, grid=Phi[0].grid_size, kmax=Phi[0].k_max)
        return config, {"certificate": cert.to_dict()}, _STATUS_EXIT[cert.status]
    if len(args.phi) != 1 or len(args.psi) != 1:
        raise UsageError(f"{sub} needs exactly one --phi and one --psi")
    phi, psi = _spectrum(args.phi[0], args), _spectrum(args.psi[0], args)
    cert = sis.perturbation_certify(phi, psi)
    config = _spectra_config(args, phi=args.phi[0], psi=args.psi[0], grid=phi.grid_size, kmax=phi.k_max)
    result = {"certificate": cert.to_dict()}
    if sub == "check":
        return config, result, _STATUS_EXIT[cert.status]
    fs = sis.finite_section_validate(phi, psi, N=args.sections, trials=args.trials, seed=args.seed)
    config.update(sections=args.sections, trials=args.trials, seed=args.seed)
    result["finite_section"] = {
        "min_lower_bound": fs.min_lower_bound,
        "max_upper_bound": fs.max_upper_bound,
        "trial_bounds": [list(b) for b in fs.trial_bounds],
    }
    if cert.status == sis.CERTIFIED:
        cb = sis.perturbed_riesz_bounds(cert)
        result["predicted_lower_bound"] = cb.lower
    return config, result, EXIT_OK if fs.min_lower_bound > 0 else EXIT_NEGATIVE


# -- parser -------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, max_n_default=None):
    p.add_argument("--tol", type=float, default=None, help="zero tolerance for singular values")
    p.add_argument("--precision", type=int, default=None, metavar="BITS", help="53 = double, more = ball arithmetic")
    p.add_argument("--max-n", type=int, default=max_n_default, dest="max_n")
    p.add_argument("--out", default=None, metavar="PATH", help="also write the report here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wovenbases", description="Decide and certify woven bases.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("check-w", help="is every central submatrix invertible")
    p.add_argument("matrix")
    _common(p, weaving.DEFAULT_MAX_N)
    p.set_defaults(func=cmd_check_w)

    p = sub.add_parser("woven", help="are the columns of V and W woven bases")
    p.add_argument("v")
    p.add_argument("w")
    p.add_argument("--permutations", action="store_true", help="search over reorderings of W")
    _common(p, None)
    p.set_defaults(func=cmd_woven)

    p = sub.add_parser("reconstruct", help="recover x from mixed samples")
    p.add_argument("matrix")
    p.add_argument("samples")
    p.add_argument("--subset", required=True, help="comma-separated indices where A x was sampled")
    _common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("fourier", help="Fourier matrices")
    fsub = p.add_subparsers(dest="fourier_cmd", required=True, parser_class=_Parser)
    q = fsub.add_parser("scan")
    q.add_argument("--range", required=True, metavar="A..B")
    _common(q)
    q = fsub.add_parser("classify")
    q.add_argument("n", type=int)
    _common(q)
    q = fsub.add_parser("minors")
    q.add_argument("p", type=int)
    _common(q)
    p.set_defaults(func=cmd_fourier)

    p = sub.add_parser("sis", help="shift-invariant space certificates")
    ssub = p.add_subparsers(dest="sis_cmd", required=True, parser_class=_Parser)
    for name in ("check", "pw", "multi", "validate"):
        q = ssub.add_parser(name)
        if name != "pw":
            q.add_argument("--phi", action="append", default=[], help="spectrum file or 'sinc'")
        q.add_argument("--psi", action="append" if name != "pw" else "store", default=[] if name != "pw" else None,
                       required=name == "pw", help="spectrum file or 'sinc'")
        q.add_argument("--grid", type=int, default=None)
        q.add_argument("--kmax", type=int, default=None)
        if name == "validate":
            q.add_argument("--sections", type=int, default=32, help="translates run over -N..N")
            q.add_argument("--trials", type=int, default=50)
            q.add_argument("--seed", type=int, default=0)
        q.add_argument("--out", default=None, metavar="PATH")
    p.set_defaults(func=cmd_sis)
    return parser


class Outcome(NamedTuple):
    code: int
    report: Report | None = None
    error: str | None = None
    out: str | None = None


def run(argv: list[str]) -> Outcome:
    """Execute a command without touching stdout or the filesystem."""
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        out = args.func(args)
    except SystemExit as exc:  # --help / --version
        return Outcome(int(exc.code or 0))
    except (UsageError, FormatError) as exc:
        return Outcome(EXIT_USAGE, error=str(exc))
    except (WovenError, ValueError) as exc:
        return Outcome(EXIT_USAGE, error=f"{type(exc).__name__}: {exc}")
    config, result, code = out[:3]
    timings = dict(out[3]) if len(out) > 3 else {}
    timings["total"] = time.perf_counter() - t0
    report = Report(command=list(argv), config=config, result=result, exit_code=code, timings=timings)
    return Outcome(code, report, None, args.out)


def main(argv: list[str] | None = None) -> int:
    res = run(list(sys.argv[1:] if argv is None else argv))
    if res.error is not None:
        print(res.error, file=sys.stderr)
    if res.report is None:
        return res.code
    text = res.report.to_json()
    sys.stdout.write(text)
    if res.out:
        try:
            Path(res.out).write_text(text)
        except OSError as exc:
            print(f"cannot write {res.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    return res.code


if __name__ == "__main__":
    sys.exit(main())
