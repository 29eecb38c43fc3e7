"""``symcap`` command-line front end.

Every subcommand prints a JSON report (stable key order) to stdout:
``command``, ``hbar``, ``inputs_digest``, ``outputs``, ``residuals``,
``warnings`` and ``timing``. Exit codes: 0 computed (verdicts are data),
2 input validation, 3 numerical failure. ``batch`` runs a list of commands
and prints one combined document.
"""

import argparse
import csv
import hashlib
import sys
import time
import warnings

import numpy as np

from . import io
from .capacity import (
    PhaseEllipsoid,
    ellipsoid_capacity,
    quadratic_body,
    quartic_perturbed_body,
    quartic_radial_body,
)
from .errors import SymcapError, ValidationError
from .grids import centered_axis, fourier_hbar
from .lagrangian import LagrangianFrame, frame_map, span_distance
from .linalg import is_symplectic
from .metaplectic import heisenberg_translate
from .spectral import pair_diagonalize, symplectic_spectrum, williamson
from .states import hermite_state
from .uncertainty import (
    check_wigner_bound_matrix,
    classify_hardy,
    convex_exponent_analyze,
    equivalence_test,
    robertson_schrodinger,
)
from .wigner import cross_wigner, marginal_p, marginal_x, wigner_transform

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


class _Result:
    def __init__(self):
        self.outputs = {}
        self.residuals = {}
        self.warnings = []
        self.csv = None  # (header, rows)


def _hbar(args, file_hbar=None):
    """Resolve hbar: the flag wins for matrix inputs; grid files carry their own."""
    if file_hbar is not None:
        if args.hbar is not None and args.hbar != file_hbar:
            raise ValidationError(f"--hbar {args.hbar} conflicts with file hbar {file_hbar}")
        return float(file_hbar)
    h = 1.0 if args.hbar is None else args.hbar
    if not h > 0:
        raise ValidationError("--hbar must be positive")
    return float(h)


def _matrix_hbar(args, path):
    M, doc = io.parse_matrix(io.read_json(path), where=str(path))
    if args.hbar is None and "hbar" in doc:
        return M, float(doc["hbar"])
    return M, _hbar(args)


def _grid_csv(W):
    grids = W.coords()
    cols = [g.ravel() for g in grids]
    names = [f"x{i + 1}" for i in range(W.n)] + [f"p{i + 1}" for i in range(W.n)]
    vals = W.values.ravel()
    if W.is_complex:
        return names + ["re", "im"], zip(*cols, vals.real, vals.imag)
    return names + ["value"], zip(*cols, vals)


def _state_csv(psi):
    cols = [g.ravel() for g in psi.coords()]
    v = psi.values.ravel()
    return [f"x{i + 1}" for i in range(psi.n)] + ["re", "im"], zip(*cols, v.real, v.imag)


def _matrix_csv(M):
    M = np.atleast_2d(M)
    return [f"c{j}" for j in range(M.shape[1])], M.tolist()


# -- subcommands ---------------------------------------------------------------


def cmd_spectrum(args, res):
    M, hbar = _matrix_hbar(args, args.matrix)
    dec = williamson(M)
    cap = ellipsoid_capacity(PhaseEllipsoid(M, None, hbar), hbar)
    res.outputs.update(spectrum=dec.spectrum, capacity=cap.capacity,
                       satisfies_quantum_bound=cap.satisfies_quantum_bound)
    res.residuals.update(williamson=dec.residual, symplectic=dec.symplectic_residual)
    res.warnings += dec.warnings
    res.csv = (["index", "lambda"], enumerate(dec.spectrum.tolist()))
    return hbar


def cmd_williamson(args, res):
    M, hbar = _matrix_hbar(args, args.matrix)
    dec = williamson(M, method=args.method)
    res.outputs.update(spectrum=dec.spectrum, S=dec.S, refined=dec.refined, method=args.method)
    res.residuals.update(williamson=dec.residual, symplectic=dec.symplectic_residual)
    res.warnings += dec.warnings
    if args.out:
        io.write_json(args.out, io.matrix_doc(dec.S, "symplectic"))
    res.csv = _matrix_csv(dec.S)
    return hbar


def cmd_pairdiag(args, res):
    A, _ = _matrix_hbar(args, args.A)
    B, hbar = _matrix_hbar(args, args.B)
    r = pair_diagonalize(A, B)
    res.outputs.update(L=r.L, lambda_diag=r.lambda_diag, condition=r.condition)
    res.residuals.update(a=r.residual_a, b=r.residual_b)
    res.warnings += r.warnings
    res.csv = _matrix_csv(r.L)
    return hbar


def cmd_capacity(args, res):
    M, hbar = _matrix_hbar(args, args.matrix)
    level = hbar if args.level is None else args.level
    cap = ellipsoid_capacity(PhaseEllipsoid(M, None, level), hbar)
    res.outputs.update(capacity=cap.capacity, spectrum_max=cap.spectrum_max, level=level,
                       satisfies_quantum_bound=cap.satisfies_quantum_bound)
    return hbar


def cmd_hardy(args, res):
    A, _ = _matrix_hbar(args, args.A)
    B, hbar = _matrix_hbar(args, args.B)
    tol = 1e-9 if args.tol is None else args.tol
    v = classify_hardy(A, B, tol=tol)
    res.outputs.update(classification=v.classification, eigenvalues=v.eigenvalues,
                       margin=v.margin, tol=tol)
    return hbar


def _marginal_residuals(psi, W, res):
    res.residuals["marginal_x"] = float(np.max(np.abs(marginal_x(W) - np.abs(psi.values) ** 2)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        F = fourier_hbar(psi)
    res.residuals["marginal_p"] = float(np.max(np.abs(marginal_p(W) - np.abs(F.values) ** 2)))


def cmd_wigner(args, res):
    psi = io.load_state(args.state)
    hbar = _hbar(args, psi.hbar)
    W = wigner_transform(psi)
    _marginal_residuals(psi, W, res)
    res.residuals["imag"] = W.imag_residual
    res.outputs.update(min=float(W.values.min()), max=float(W.values.max()),
                       total=W.total(), shape=list(W.values.shape))
    if args.out:
        io.write_json(args.out, io.wigner_doc(W))
        res.outputs["written"] = str(args.out)
    res.csv = _grid_csv(W)
    return hbar


def cmd_cross_wigner(args, res):
    psi = io.load_state(args.state)
    phi = io.load_state(args.other)
    hbar = _hbar(args, psi.hbar)
    W = cross_wigner(psi, phi)
    total = W.total()
    res.outputs.update(total_re=total.real, total_im=total.imag,
                       max_abs=float(np.abs(W.values).max()), shape=list(W.values.shape))
    if args.out:
        io.write_json(args.out, io.wigner_doc(W, "cross_wigner"))
        res.outputs["written"] = str(args.out)
    res.csv = _grid_csv(W)
    return hbar


def cmd_rs_check(args, res):
    S, hbar = _matrix_hbar(args, args.sigma)
    r = robertson_schrodinger(S, hbar, tol=1e-10 if args.tol is None else args.tol)
    res.outputs.update(
        passes=r.passes, psd_min_eig=r.psd_min_eig, spectrum_min=r.spectrum_min,
        per_mode=[{"var_x": m.var_x, "var_p": m.var_p, "cov_xp": m.cov_xp,
                   "satisfied": m.satisfied} for m in r.per_mode])
    res.residuals.update(psd_margin=r.psd_min_eig, spectrum_margin=r.spectrum_min - hbar / 2)
    res.warnings += r.warnings
    return hbar


def _ratio(r):
    return {"sup": r.sup, "argmax": list(r.argmax) if r.argmax else None,
            "status": r.status, "degree": r.degree, "gaussian_rate": r.gaussian_rate}


def cmd_equiv(args, res):
    psi = io.load_state(args.state)
    hbar = _hbar(args, psi.hbar)
    A = io.load_matrix(args.A)
    B = io.load_matrix(args.B)
    r = equivalence_test(psi, A, B)
    res.outputs.update(ratio_x=_ratio(r.ratio_x), ratio_p=_ratio(r.ratio_p),
                       ratio_wigner=_ratio(r.ratio_wigner), cond1_bounded=r.cond1_bounded,
                       cond2_bounded=r.cond2_bounded, consistent=r.consistent,
                       hardy=r.hardy.classification)
    res.warnings += r.warnings
    return hbar


def _frame(spec, n):
    if spec == "standard":
        return LagrangianFrame.standard(n)
    if spec == "swapped":
        s = LagrangianFrame.standard(n)
        return LagrangianFrame(s.ell_prime, s.ell)
    return io.load_frame(spec)


def cmd_frame_map(args, res):
    hbar = _hbar(args)
    files = [s for s in (args.source, args.target) if s not in ("standard", "swapped")]
    n = io.load_frame(files[0]).n if files else args.n
    src, tgt = _frame(args.source, n), _frame(args.target, n)
    S = frame_map(src, tgt)
    res.outputs["S"] = S
    res.residuals.update(
        symplectic=is_symplectic(S)[1],
        span_ell=span_distance(S @ src.ell.basis, tgt.ell),
        span_ell_prime=span_distance(S @ src.ell_prime.basis, tgt.ell_prime))
    if args.out:
        io.write_json(args.out, io.matrix_doc(S, "symplectic"))
    res.csv = _matrix_csv(S)
    return hbar


def cmd_convex(args, res):
    hbar = _hbar(args)
    fam = args.family
    if fam == "quartic-radial":
        C = quartic_radial_body(args.n, args.alpha, level=hbar)
    else:
        if args.matrix is None:
            raise ValidationError(f"--matrix is required for family {fam}")
        M = io.load_matrix(args.matrix)
        C = (quadratic_body(M, level=hbar) if fam == "quadratic"
             else quartic_perturbed_body(M, args.eps, level=hbar))
    seed = 0 if args.seed is None else args.seed
    r = convex_exponent_analyze(C, seed=seed)
    res.outputs.update(family=fam, lambda_Q=r.lambda_Q, lambda_upper_ok=r.lambda_upper_ok,
                       enclosing_radius=r.enclosing_radius, inscribed_radius=r.inscribed_radius,
                       inclusion_ok=r.inclusion_ok, john_capacity=r.john_capacity,
                       passes_capacity_bound=r.passes_capacity_bound, center=r.center)
    if r.john is not None:
        res.outputs.update(john_M=r.john.M, john_center=r.john.center)
        res.residuals.update(john_max_q_ratio=r.john.max_q_ratio,
                             john_containment_factor=r.john.containment_factor)
    res.warnings += r.warnings
    return hbar


def cmd_hermite(args, res):
    hbar = _hbar(args)
    k = args.k
    ax = centered_axis(args.points, args.half_width * np.sqrt(hbar))
    psi = hermite_state(k if len(k) > 1 else k[0], (ax,) * len(k), hbar)
    res.outputs.update(k=k, norm=psi.norm(), points=args.points)
    if args.out:
        io.write_json(args.out, io.state_doc(psi))
        res.outputs["written"] = str(args.out)
    res.csv = _state_csv(psi)
    return hbar


def cmd_translate(args, res):
    psi = io.load_state(args.state)
    hbar = _hbar(args, psi.hbar)
    out = heisenberg_translate(np.asarray(args.z0, dtype=float), psi)
    res.outputs.update(norm_in=psi.norm(), norm_out=out.norm())
    res.residuals["norm"] = abs(out.norm() - psi.norm())
    if args.out:
        io.write_json(args.out, io.state_doc(out))
        res.outputs["written"] = str(args.out)
    res.csv = _state_csv(out)
    return hbar


# -- parser --------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--hbar", type=float, default=None, help="reduced Planck constant (default 1)")
    common.add_argument("--tol", type=float, default=None, help="classification tolerance")
    common.add_argument("--out", default=None, help="output file (.gz for gzip)")
    common.add_argument("--dump-csv", default=None, help="write axis/value table to this CSV")
    common.add_argument("--seed", type=int, default=None, help="quasi-random sequence seed")

    p = argparse.ArgumentParser(prog="symcap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("spectrum", cmd_spectrum, "symplectic spectrum and capacity of {Mz^2 <= hbar}")
    sp.add_argument("matrix")
    sp = add("williamson", cmd_williamson, "Williamson normal form S^T M S = diag(L, L)")
    sp.add_argument("matrix")
    sp.add_argument("--method", choices=("eigh", "schur"), default="eigh")
    sp = add("pairdiag", cmd_pairdiag, "simultaneous diagonalization L^T A L = L^-1 B L^-T")
    sp.add_argument("A")
    sp.add_argument("B")
    sp = add("capacity", cmd_capacity, "symplectic capacity of {Mz^2 <= level}")
    sp.add_argument("matrix")
    sp.add_argument("--level", type=float, default=None, help="ellipsoid level (default hbar)")
    sp = add("hardy", cmd_hardy, "Hardy trichotomy for a decay pair (A, B)")
    sp.add_argument("A")
    sp.add_argument("B")
    sp = add("wigner", cmd_wigner, "Wigner transform of a state file")
    sp.add_argument("state")
    sp = add("cross-wigner", cmd_cross_wigner, "cross-Wigner transform of two state files")
    sp.add_argument("state")
    sp.add_argument("other")
    sp = add("rs-check", cmd_rs_check, "Robertson-Schrodinger test of a covariance matrix")
    sp.add_argument("sigma")
    sp = add("equiv", cmd_equiv, "empirical Gaussian-bound equivalence test on a state")
    sp.add_argument("state")
    sp.add_argument("A")
    sp.add_argument("B")
    sp = add("frame-map", cmd_frame_map, "symplectic map between two Lagrangian frames")
    sp.add_argument("source", help="frame file, 'standard' or 'swapped'")
    sp.add_argument("target", help="frame file, 'standard' or 'swapped'")
    sp.add_argument("--n", type=int, default=1, help="dimension for named frames")
    sp = add("convex", cmd_convex, "convex-exponent analysis of a built-in body family")
    sp.add_argument("--family", required=True,
                    choices=("quadratic", "quartic-radial", "quartic-perturbed"))
    sp.add_argument("--matrix", default=None, help="matrix file for quadratic families")
    sp.add_argument("--alpha", type=float, default=1.0, help="quartic-radial coefficient")
    sp.add_argument("--eps", type=float, default=0.5, help="quartic-perturbed coefficient")
    sp.add_argument("--n", type=int, default=1, help="degrees of freedom for quartic-radial")
    sp = add("hermite", cmd_hermite, "sample a Hermite state to a state file")
    sp.add_argument("k", type=int, nargs="+", help="degree per dimension (1 or 2 values)")
    sp.add_argument("--points", type=int, default=None)
    sp.add_argument("--half-width", type=float, default=12.0, help="in units of sqrt(hbar)")
    sp = add("translate", cmd_translate, "apply a Heisenberg translation T(z0) to a state")
    sp.add_argument("state")
    sp.add_argument("--z0", type=float, nargs="+", required=True, help="x0.. p0..")
    sp = sub.add_parser("batch", help="run a JSON list of commands (property sweeps)")
    sp.add_argument("jobs", help='JSON file {"jobs": [["spectrum", "m.json"], ...]}')
    return p


def _digest(args):
    h = hashlib.sha256()
    skip = {"func", "out", "dump_csv"}
    for key in sorted(vars(args)):
        if key in skip:
            continue
        val = getattr(args, key)
        h.update(f"{key}={val!r};".encode())
        if isinstance(val, str) and key not in ("command", "method", "family"):
            try:
                h.update(io.file_digest(val).encode())
            except OSError:
                pass
    return h.hexdigest()


def _execute(args):
    """Run one parsed command; returns ``(exit_code, report or None)``."""
    if args.command == "hermite" and args.points is None:
        args.points = 1024 if len(args.k) == 1 else 128
    res = _Result()
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            hbar = args.func(args, res)
        res.warnings += [str(w.message) for w in caught]
    except ValidationError as exc:
        print(f"symcap {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION, None
    except SymcapError as exc:
        print(f"symcap {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL, None
    except (ValueError, OSError) as exc:
        print(f"symcap {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION, None
    report = {
        "command": args.command,
        "hbar": hbar,
        "inputs_digest": _digest(args),
        "outputs": res.outputs,
        "residuals": res.residuals,
        "warnings": list(res.warnings),
        "timing": {"seconds": time.perf_counter() - t0},
    }
    if args.dump_csv and res.csv is not None:
        header, rows = res.csv
        with open(args.dump_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    return EXIT_OK, report


def _run_batch(parser, path):
    """Run a job file ``{"jobs": [[argv...], ...]}``; exit code is the worst job's."""
    doc = io.read_json(path)
    jobs = doc.get("jobs")
    if not isinstance(jobs, list) or not all(
            isinstance(j, list) and j and all(isinstance(a, str) for a in j) for j in jobs):
        raise ValidationError(f"{path}: 'jobs' must be a list of non-empty argv lists")
    results, worst = [], EXIT_OK
    for argv in jobs:
        if argv[0] == "batch":
            raise ValidationError(f"{path}: nested batch jobs are not allowed")
        try:
            args = parser.parse_args(argv)
        except SystemExit:
            code, report = EXIT_VALIDATION, None
        else:
            code, report = _execute(args)
        worst = max(worst, code)
        results.append({"argv": argv, "exit_code": code, "report": report})
    return worst, results


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "batch":
        t0 = time.perf_counter()
        try:
            code, results = _run_batch(parser, args.jobs)
        except ValidationError as exc:
            print(f"symcap batch: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        print(io.dumps({"command": "batch", "jobs": results,
                        "timing": {"seconds": time.perf_counter() - t0}}, indent=2))
        return code
    code, report = _execute(args)
    if report is not None:
        print(io.dumps(report, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
