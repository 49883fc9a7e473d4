"""Command-line interface: ``qumera <command> [options]``.

Every command prints one JSON report on standard output. Exit codes:
0 success, 1 validation failure, 2 numeric refusal, 3 I/O or schema error.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import observables as ob
from . import oracle
from .channels import NumericRefusal, require_mixing, spectral_data
from .io import SchemaError, digest, dumps, encode_complex, load_matrices, load_spec, spec_to_json
from .model import DEFAULT_TOL, InvalidSpecError, StructuralError, random_spec, require_valid, validate

EXIT_OK, EXIT_INVALID, EXIT_REFUSED, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    """An oracle comparison exceeded the tolerance; the report is still emitted."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_tol():
    raw = os.environ.get("QUMERA_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"QUMERA_TOL is not a number: {raw!r}") from None


def _eigen_table(sd):
    return [[float(x.real), float(x.imag)] for x in sd.eigenvalues]


def _verdicts(sd):
    return {"mixing": sd.mixing, "ergodic": sd.ergodic, "self_adjoint": sd.self_adjoint,
            "spectral_verdict": sd.verdict}


def _value(v):
    if isinstance(v, ob.RealValue):
        return {"value": float(v), "imag_residue": v.imag_residue, "suspect": v.suspect}
    return {"value": [v.real, v.imag], "imag_residue": v.imag, "suspect": True}


def _spec(args, out, validate_it=True):
    spec, dg = load_spec(args.spec)
    out["inputs"]["spec"] = dg
    if validate_it:
        require_valid(spec, args.tol)
    return spec


def _hermitian(rng, D):
    x = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    return (x + x.conj().T) / 2


# -- commands -------------------------------------------------------------------

def cmd_validate(args, out):
    spec = _spec(args, out, validate_it=False)
    rep = validate(spec, args.tol)
    out["results"] = {"residuals": rep.residuals, "passed": rep.passed}
    if not rep.passed:
        raise InvalidSpecError(rep)


def cmd_spectrum(args, out):
    spec = _spec(args, out)
    sd = spectral_data(spec)
    out["results"] = {
        "eigenvalues": _eigen_table(sd),
        "subleading_modulus": sd.subleading,
        "geometric_multiplicity": sd.geometric_multiplicity,
    }
    out["verdicts"] = _verdicts(sd)


def cmd_fixed_point(args, out):
    spec = _spec(args, out)
    sd = spectral_data(spec)
    out["verdicts"] = _verdicts(sd)
    require_mixing(sd)
    out["results"] = {"rho_f": encode_complex(sd.fixed_point)}
    out["diagnostics"] = {"stationarity_residual": sd.fixed_point_residual}


def cmd_expect(args, out):
    spec = _spec(args, out)
    d = spec.d
    mats, dg = load_matrices(args.obs, {"A": d**3, "H3": d**3, "H2": d**2, "H1": d})
    out["inputs"]["obs"] = dg
    if "A" in mats:
        A = mats["A"]
    else:
        try:
            A = ob.HamiltonianTerms.from_parts(d, mats.get("H3"), mats.get("H2"), mats.get("H1")).triple_term()
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
    if args.thermo:
        v = ob.thermo_expectation(spec, A)
        mode = "thermo"
    else:
        if args.N is None:
            raise UsageError("expect needs --N unless --thermo is given")
        if args.symmetric:
            v = ob.symmetric_expectation(spec, args.N, A)
            mode = "symmetric"
        elif args.site is not None:
            v = ob.local_expectation(spec, args.N, args.site, A)
            mode = "site"
        else:
            raise UsageError("expect needs --site K, --symmetric or --thermo")
    out["results"] = {"mode": mode, **_value(v)}


def cmd_correlate(args, out):
    spec = _spec(args, out)
    D = spec.d**3
    A, dga = load_matrices(args.A, {"A": D})
    B, dgb = load_matrices(args.B, {"A": D, "B": D})
    out["inputs"].update({"A": dga, "B": dgb})
    A, B = A["A"], B.get("B", B.get("A"))
    chosen = [bool(args.kA is not None), args.avg, args.thermo]
    if sum(chosen) != 1:
        raise UsageError("choose exactly one of --kA, --avg, --thermo")
    if args.thermo:
        if args.sigma is None:
            raise UsageError("--thermo needs --sigma FILE")
        sig, dgs = load_matrices(args.sigma, {"sigma": spec.d**6})
        out["inputs"]["sigma"] = dgs
        v = ob.connected_correlator(spec, A, B, args.depth, sig["sigma"])
        out["results"] = {"mode": "connected", **_value(v)}
        return
    if args.N is None:
        raise UsageError("--kA and --avg need --N")
    if args.avg:
        v = ob.symmetric_correlator(spec, args.N, A, B, args.depth)
        mode = "average"
    else:
        v = ob.shadow_correlator(spec, args.N, args.kA, args.depth, A, B)
        mode = "shadow"
    out["results"] = {"mode": mode, "separation": 3 * 2**args.depth, **_value(v)}


def cmd_scaling(args, out):
    spec = _spec(args, out)
    sd = spectral_data(spec)
    out["verdicts"] = _verdicts(sd)
    exps = ob.scaling_exponents(spec, args.count, sd)
    out["results"] = {"exponents": exps, "subleading_modulus": sd.subleading}


def cmd_oracle_check(args, out):
    spec = _spec(args, out)
    N, d = args.N, spec.d
    rng = np.random.default_rng(args.seed)
    state = oracle.build_state(spec, N)
    rho_err = max(float(np.max(np.abs(ob.triple_density(spec, N, k) - oracle.triple_density(state, k))))
                  for k in range(1, N + 1))
    sym_err, corr_err = 0.0, 0.0
    for _ in range(args.trials):
        A = _hermitian(rng, d**3)
        direct = np.mean([oracle.direct_expectation(state, k, A) for k in range(1, N + 1)])
        sym_err = max(sym_err, abs(ob.symmetric_expectation(spec, N, A) - direct.real))
        if N >= 16:
            B = _hermitian(rng, d**3)
            kA = ob.shadow_placements(N, 1)[int(rng.integers(N // 2))]
            _, ca, cb = ob.shadow_geometry(N, kA, 1)
            ref = np.mean([oracle.direct_correlator(state, a, b, A, B) for a in ca for b in cb])
            corr_err = max(corr_err, abs(ob.shadow_correlator(spec, N, kA, 1, A, B) - ref.real))
    res = {"triple_density": rho_err, "symmetric_expectation": sym_err}
    if N >= 16:
        res["shadow_correlator"] = corr_err
    passed = all(r <= args.tol for r in res.values())
    out["results"] = {"residuals": res, "passed": passed}
    if not passed:
        raise CheckFailed("oracle residual above tolerance")


def cmd_random(args, out):
    spec = random_spec(args.d, args.seed)
    doc = spec_to_json(spec)
    text = dumps(doc)
    try:
        with open(args.out, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {args.out}: {exc}") from None
    out["results"] = {"path": args.out, "residuals": validate(spec, args.tol).residuals}
    out["inputs"]["spec"] = digest(text.encode())


COMMANDS = {
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
    "fixed-point": cmd_fixed_point,
    "expect": cmd_expect,
    "correlate": cmd_correlate,
    "scaling": cmd_scaling,
    "oracle-check": cmd_oracle_check,
    "random": cmd_random,
}


def build_parser():
    p = _Parser(prog="qumera", description="Homogeneous MERA states through QuMERA channels.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, needs_spec=True):
        sp = sub.add_parser(name)
        if needs_spec:
            sp.add_argument("--spec", required=True)
        sp.add_argument("--tol", type=float, default=None)
        return sp

    add("validate")
    add("spectrum")
    add("fixed-point")
    sp = add("expect")
    sp.add_argument("--N", type=int)
    sp.add_argument("--site", type=int)
    sp.add_argument("--symmetric", action="store_true")
    sp.add_argument("--thermo", action="store_true")
    sp.add_argument("--obs", required=True)
    sp = add("correlate")
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--N", type=int)
    sp.add_argument("--kA", type=int)
    sp.add_argument("--avg", action="store_true")
    sp.add_argument("--thermo", action="store_true")
    sp.add_argument("--sigma")
    sp = add("scaling")
    sp.add_argument("--count", type=int, default=5)
    sp = add("oracle-check")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--trials", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp = add("random", needs_spec=False)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    return p


def _echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "command"}


def run(argv=None, stdout=None):
    """Run one command; returns ``(exit_code, report_dict)`` and prints the report."""
    stdout = stdout or sys.stdout
    t0 = time.perf_counter()
    out = {"command": None, "args": {}, "inputs": {}, "results": {}, "diagnostics": {},
           "verdicts": {}, "seed": None, "status": "ok", "error": None, "wall_time": None}
    code = EXIT_OK
    try:
        args = build_parser().parse_args(argv)
        if args.tol is None:
            args.tol = _default_tol()
        out["command"] = args.command
        out["args"] = _echo(args)
        out["seed"] = getattr(args, "seed", None)
        COMMANDS[args.command](args, out)
    except (InvalidSpecError, CheckFailed) as exc:
        code, out["status"] = EXIT_INVALID, "invalid"
        out["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, InvalidSpecError):
            out["results"].setdefault("residuals", exc.report.residuals)
    except NumericRefusal as exc:
        code, out["status"] = EXIT_REFUSED, "refused"
        out["error"] = {"kind": type(exc).__name__, "message": str(exc), "verdict": exc.verdict}
    except (UsageError, SchemaError, StructuralError, OSError, ValueError) as exc:
        code, out["status"] = EXIT_IO, "error"
        out["error"] = {"kind": type(exc).__name__, "message": str(exc)}
    out["wall_time"] = time.perf_counter() - t0
    stdout.write(dumps(out))
    return code, out


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
