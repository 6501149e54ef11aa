"""Command-line driver.

    blockweyl green    --model M --z 0,1 --N 5 --xi 0
    blockweyl disc     --model M --z 0,1 --N 8
    blockweyl classify --model M --z "0,1;0,2"
    blockweyl extension --model M --zeta 0,1 --V '[[1]]' --z "0,1;0,2"
    blockweyl spectrum --model M --N 12
    blockweyl moebius-check --seed 7

``--model`` takes a JSON file, inline JSON, or a built-in shorthand such as
``free``, ``free:2``, ``geometric:2`` or ``block_mixed:2``.

Exit codes: 0 success, 1 unconverged, 2 invalid input, 3 oracle mismatch.
"""
import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import serialize
from ._linalg import dagger, herm, opnorm
from .exceptions import (
    ConditioningError,
    ConvergenceError,
    DiscViolation,
    ModelError,
    MoebiusDomainError,
)
from .extensions import extension_weyl_point, make_extension, resolvent_residual
from .green import green_boundary, green_oracle, spectral_measure
from .limits import limit_disc
from .model import (
    block_mixed_model,
    free_model,
    geometric_model,
    load_model,
    random_model,
)
from .moebius import MoebiusMap, inverse_moebius, moebius
from .transfer import transfer_product
from .weyl import disc, nesting_verdict, radius_bound

OK, UNCONVERGED, INVALID, MISMATCH = 0, 1, 2, 3
IM_WARN, IM_REJECT = 0.1, 0.05
DEFAULT_Z = "0,1"
SPECTRUM_Z = "0,1;0,2;1,1;-1,1;0.5,0.5"


class InputError(ValueError):
    pass


def parse_z_list(text):
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        parts = item.split(",")
        if len(parts) != 2:
            raise InputError(f"energy {item!r} is not of the form RE,IM")
        try:
            out.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise InputError(f"energy {item!r} is not numeric") from None
    if not out:
        raise InputError("no energies given")
    return out


def check_energies(zs, stderr):
    for z in zs:
        if abs(z.imag) < IM_REJECT:
            raise InputError(f"|Im z| = {abs(z.imag):g} < {IM_REJECT} at z = {z}")
        if abs(z.imag) < IM_WARN:
            print(f"warning: |Im z| = {abs(z.imag):g} < {IM_WARN} at z = {z}; "
                  "results may be poorly conditioned", file=stderr)


def parse_ints(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{text!r} is not a comma-separated list of integers") from None
    if not vals or min(vals) < 1:
        raise InputError("volumes must be positive integers")
    return vals


def parse_floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{text!r} is not a comma-separated list of numbers") from None


def load_matrix_arg(text, L, name):
    """Inline JSON, a file path, or a bare real number."""
    if text is None:
        return None
    if os.path.exists(text):
        with open(text) as fh:
            raw = json.load(fh)
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError:
            raise InputError(f"--{name} is neither a file nor valid JSON: {text!r}") from None
    if isinstance(raw, (int, float)):
        return raw * np.eye(L, dtype=complex)
    try:
        return serialize.decode_matrix(raw, L)
    except ValueError as exc:
        raise InputError(f"--{name}: {exc}") from None


def load_model_arg(text):
    if text is None:
        raise InputError("--model is required")
    if text.lstrip().startswith("{"):
        try:
            return load_model(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"inline model is not valid JSON: {exc}") from None
    if os.path.exists(text):
        return serialize.load_model_file(text)
    name, _, arg = text.partition(":")
    try:
        if name == "free":
            return free_model(int(arg or 1))
        if name == "geometric":
            return geometric_model(float(arg or 2.0))
        if name == "block_mixed":
            return block_mixed_model(float(arg or 2.0))
    except ValueError:
        raise InputError(f"bad parameter in model shorthand {text!r}") from None
    raise InputError(f"model {text!r} is not a file, inline JSON, or known family")


def _volumes(args, default, upto=False):
    if args.schedule:
        return parse_ints(args.schedule)
    if args.N is not None:
        if args.N < 1:
            raise InputError("--N must be positive")
        return list(range(1, args.N + 1)) if upto else [args.N]
    return list(default)


def _im_eigs(G):
    return np.linalg.eigvalsh(herm((G - dagger(G)) / 2j))


def _herglotz_margin(G, z):
    """Smallest eigenvalue of sign(Im z) Im G; positive for a Herglotz value."""
    return float(np.min(np.sign(z.imag) * _im_eigs(G)))


def cmd_green(model, args):
    tol = args.tol if args.tol is not None else 1e-9
    zs = parse_z_list(args.z or DEFAULT_Z)
    check_energies(zs, args.stderr)
    xi = load_matrix_arg(args.xi, model.L, "xi")
    rows, status = [], OK
    for z in zs:
        for N in _volumes(args, [1]):
            G = green_boundary(model, N, z, xi)
            ref = green_oracle(model, N, z, None, xi)
            delta = opnorm(G - ref) / max(1.0, opnorm(ref))
            ok = delta <= tol
            if not ok:
                status = MISMATCH
            rows.append({
                "z": z, "N": N, "G": G, "im_eigs": _im_eigs(G),
                "herglotz_margin": _herglotz_margin(G, z), "oracle_delta": delta, "ok": ok,
            })
    return rows, status


def cmd_disc(model, args):
    zs = parse_z_list(args.z or DEFAULT_Z)
    check_energies(zs, args.stderr)
    rng = np.random.default_rng(args.seed)
    rows, status = [], OK
    for z in zs:
        for N in _volumes(args, range(1, 9), upto=True):
            d = disc(model, N, z)
            norm_R = opnorm(d.radius_plus)
            bound = within = nesting = None
            if N >= 2 and z.imag > 0:
                try:
                    bound = radius_bound(model, N, z)
                    within = True
                except ConditioningError:
                    bound = 1.0 / (2 * z.imag ** 2 * sum(
                        1.0 / opnorm(model.T(n)) for n in range(2, N + 1)))
                    within = False
                    status = MISMATCH
                nesting = nesting_verdict(model, N, z, rng, samples=args.samples)
                if nesting != "strict":
                    status = MISMATCH
            rows.append({
                "z": z, "N": N, "center": d.center,
                "radius_plus_eigs": np.linalg.eigvalsh(herm(d.radius_plus)),
                "radius_minus_eigs": np.linalg.eigvalsh(herm(d.radius_minus)),
                "norm_R": norm_R, "bound": bound, "within_bound": within, "nesting": nesting,
            })
    return rows, status


def cmd_classify(model, args):
    tol = args.tol if args.tol is not None else 1e-8
    zs = parse_z_list(args.z or DEFAULT_Z)
    check_energies(zs, args.stderr)
    schedule = parse_ints(args.schedule) if args.schedule else None
    rows, status = [], OK
    for z in zs:
        lim = limit_disc(model, z, schedule, tol)
        rank = int(round(np.trace(lim.Pplus).real))
        label = f"{lim.classification} ({lim.n_z},{lim.n_zbar})"
        if lim.classification == "Intermediate":
            label += f", rank(R^z)={rank}"
        if not lim.converged or lim.ambiguous:
            status = max(status, UNCONVERGED)
        rows.append({
            "z": z, "classification": lim.classification, "label": label,
            "n_z": lim.n_z, "n_zbar": lim.n_zbar,
            "R_eigs": np.linalg.eigvalsh(herm(lim.R_limit)),
            "R_conj_eigs": np.linalg.eigvalsh(herm(lim.R_limit_conj)),
            "S": lim.S_limit, "converged": lim.converged, "ambiguous": lim.ambiguous,
            "N_used": lim.N_used, "report": lim.convergence_report,
        })
    return rows, status


def cmd_extension(model, args):
    tol = args.tol if args.tol is not None else 1e-6
    zeta = parse_z_list(args.zeta or DEFAULT_Z)
    if len(zeta) != 1 or zeta[0].imag <= 0:
        raise InputError("--zeta must be a single energy with Im zeta > 0")
    zeta = zeta[0]
    zs = parse_z_list(args.z or "0,1;0,2;1,1")
    check_energies([zeta] + zs, args.stderr)
    if not any(abs(z - zeta) < 1e-14 for z in zs):
        zs = [zeta] + zs
    V0 = load_matrix_arg(args.V, model.L, "V")
    if V0 is None:
        V0 = np.eye(model.L, dtype=complex)
    thetas = parse_floats(args.theta) if args.theta else [None]
    schedule = parse_ints(args.schedule) if args.schedule else None
    rows, status = [], OK
    seen = []
    for theta in thetas:
        V = V0 if theta is None else np.exp(1j * theta) * V0
        try:
            ext = make_extension(model, zeta, V, schedule)
        except ValueError as exc:
            raise InputError(f"extension data rejected: {exc}") from None
        for z in zs:
            pt = extension_weyl_point(ext, z)
            row = {
                "theta": theta, "z": z, "W": pt.W, "G": pt.G,
                "herglotz_margin": _herglotz_margin(pt.G, z),
                "W_increment": pt.increment, "converged": pt.converged,
            }
            if abs(z - zeta) < 1e-14:
                row["anchor_error"] = opnorm(pt.W + 1j * dagger(V))
                if row["anchor_error"] > 1e-8:
                    status = MISMATCH
            try:
                rep = resolvent_residual(ext, z, pt.G)
                row.update(residual=rep.residual, tail=rep.tail, decaying=rep.decaying,
                           horizon=rep.horizon)
                if rep.residual > tol:
                    status = MISMATCH
            except DiscViolation as exc:
                row.update(residual=None, tail=None, decaying=False, error=str(exc))
                status = MISMATCH
            if not pt.converged:
                status = max(status, UNCONVERGED) if status != MISMATCH else status
            rows.append(row)
            seen.append((theta, z, pt.G))
    if len(thetas) > 1:
        for i, (ta, za, Ga) in enumerate(seen):
            for tb, zb, Gb in seen[i + 1:]:
                if za == zb and ta != tb and opnorm(Ga - Gb) <= 1e-6:
                    status = MISMATCH
    return rows, status


def cmd_spectrum(model, args):
    tol = args.tol if args.tol is not None else 1e-9
    zs = parse_z_list(args.z or SPECTRUM_Z)
    check_energies(zs, args.stderr)
    xi = load_matrix_arg(args.xi, model.L, "xi")
    if xi is not None and opnorm(xi - dagger(xi)) > 1e-12:
        raise InputError("--xi must be Hermitian for the spectral measure")
    rows, status = [], OK
    for N in _volumes(args, [4]):
        mu = spectral_measure(model, N, xi)
        total_error = opnorm(mu.total() - np.eye(model.L))
        worst = 0.0
        for z in zs:
            G = green_boundary(model, N, z, xi)
            worst = max(worst, opnorm(mu.green(z) - G) / max(1.0, opnorm(G)))
        min_weight = min(np.linalg.eigvalsh(herm(w)).min() for w in mu.weights)
        if total_error > 1e-10 or worst > tol or min_weight < -1e-12:
            status = MISMATCH
        rows.append({
            "N": N, "energies": mu.energies, "weights": mu.weights,
            "weight_eigs": [np.linalg.eigvalsh(herm(w)) for w in mu.weights],
            "total_error": total_error, "reconstruction_error": worst,
            "min_weight_eig": float(min_weight),
        })
    return rows, status


def _random_map(rng, L):
    return rng.standard_normal((2 * L, 2 * L)) + 1j * rng.standard_normal((2 * L, 2 * L))


def _well_conditioned(*mats):
    return all(np.linalg.cond(m) < 1e8 for m in mats)


def cmd_moebius_check(model, args):
    tol = args.tol if args.tol is not None else 1e-10
    rng = np.random.default_rng(args.seed)
    trials = args.trials
    worst = {"inverse": 0.0, "composition": 0.0, "inverse_action": 0.0, "green": 0.0}
    discarded = 0
    for _ in range(trials):
        L = int(rng.integers(1, 4))
        T, T2 = _random_map(rng, L), _random_map(rng, L)
        Z = rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))
        W = rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))
        A, B, C, D = T[:L, :L], T[:L, L:], T[L:, :L], T[L:, L:]
        C2, D2 = T2[L:, :L], T2[L:, L:]
        A12 = (T @ T2)[:L, :L]
        C12 = (T @ T2)[L:, :L]
        if not _well_conditioned(T, T2, C @ Z + D, W @ C - A, W @ C12 - A12):
            discarded += 1
            continue
        try:
            m, m2 = MoebiusMap(T), MoebiusMap(T2)
            X = moebius(m, Z)
            Y = inverse_moebius(W, m)
            if not _well_conditioned(X @ C - A, Y @ C2 - T2[:L, :L]):
                discarded += 1
                continue
            e1 = opnorm(inverse_moebius(X, m) - Z) / max(1.0, opnorm(Z))
            lhs = inverse_moebius(W, MoebiusMap(T @ T2))
            e2 = opnorm(lhs - inverse_moebius(Y, m2)) / max(1.0, opnorm(lhs))
            e3 = opnorm(Y - moebius(m.inverse(), W)) / max(1.0, opnorm(Y))
        except MoebiusDomainError:
            discarded += 1
            continue
        worst["inverse"] = max(worst["inverse"], e1)
        worst["composition"] = max(worst["composition"], e2)
        worst["inverse_action"] = max(worst["inverse_action"], e3)
    green_trials = max(trials // 10, 1)
    for _ in range(green_trials):
        L = int(rng.integers(1, 4))
        N = int(rng.integers(1, 9))
        mdl = model if model is not None else random_model(rng, L, N + 1)
        z = complex(rng.uniform(-2, 2), rng.uniform(0.5, 2))
        Z = rng.standard_normal((mdl.L, mdl.L))
        Z = Z + Z.T
        G = green_boundary(mdl, N, z, Z)
        T = MoebiusMap(transfer_product(mdl, N, 0, z).matrix)
        e = max(opnorm(G + inverse_moebius(-Z, T)), opnorm(G + moebius(T.inverse(), -Z)))
        worst["green"] = max(worst["green"], e / max(1.0, opnorm(G)))
    status = OK
    if max(worst["inverse"], worst["composition"], worst["inverse_action"]) > tol or worst["green"] > 1e-9:
        status = MISMATCH
    rows = [{"law": k, "max_relative_error": v} for k, v in worst.items()]
    rows.append({"law": "discarded", "count": discarded, "trials": trials})
    return rows, status


COMMANDS = {
    "green": cmd_green,
    "disc": cmd_disc,
    "classify": cmd_classify,
    "extension": cmd_extension,
    "spectrum": cmd_spectrum,
    "moebius-check": cmd_moebius_check,
}

PRETTY_COLUMNS = {
    "green": ["z", "N", "im_eigs", "herglotz_margin", "oracle_delta", "ok"],
    "disc": ["z", "N", "radius_plus_eigs", "radius_minus_eigs", "norm_R", "bound", "nesting"],
    "classify": ["z", "label", "R_eigs", "R_conj_eigs", "converged", "N_used"],
    "extension": ["theta", "z", "W", "G", "residual", "tail", "anchor_error"],
    "spectrum": ["N", "energies", "total_error", "reconstruction_error", "min_weight_eig"],
    "moebius-check": ["law", "max_relative_error", "count", "trials"],
}


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}i"
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, np.ndarray):
        if v.ndim == 2 and v.shape == (1, 1):
            return _fmt(complex(v[0, 0]))
        flat = v.ravel()
        return "[" + " ".join(_fmt(complex(x) if np.iscomplexobj(v) else float(x)) for x in flat) + "]"
    return str(v)


def render(command, rows, fmt, meta):
    if fmt == "json":
        return serialize.dumps({"command": command, **meta, "rows": rows}) + "\n"
    if fmt == "csv":
        keys = []
        for r in rows:
            keys += [k for k in r if k not in keys and k != "report"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([
                json.dumps(serialize.to_jsonable(r[k]), sort_keys=True)
                if isinstance(r.get(k), (np.ndarray, list, complex)) else serialize.to_jsonable(r.get(k))
                for k in keys
            ])
        return buf.getvalue()
    cols = [c for c in PRETTY_COLUMNS[command] if any(c in r for r in rows)]
    table = [cols] + [[_fmt(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(cols))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    if command == "classify":
        for r in rows:
            lines.append("")
            lines.append(f"convergence at z = {_fmt(r['z'])}")
            for rep in r["report"]:
                lines.append("  " + "  ".join(f"{k}={_fmt(v)}" for k, v in rep.items()))
    return "\n".join(lines) + "\n"


def build_parser():
    p = argparse.ArgumentParser(prog="blockweyl", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--model", help="model JSON file, inline JSON, or family shorthand")
    p.add_argument("--z", help="energies RE,IM[;RE,IM...]")
    vol = p.add_mutually_exclusive_group()
    vol.add_argument("--N", type=int, help="finite volume")
    vol.add_argument("--schedule", help="volumes N1,N2,...")
    p.add_argument("--tol", type=float)
    p.add_argument("--out", choices=["json", "csv", "pretty"], default="pretty")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--xi", help="right boundary matrix (inline JSON, file, or number)")
    p.add_argument("--zeta", help="extension anchor RE,IM")
    p.add_argument("--V", help="extension partial isometry (inline JSON or file)")
    p.add_argument("--theta", help="phases THETA1,THETA2,...; uses V = exp(i theta) V")
    p.add_argument("--samples", type=int, default=20, help="nesting samples per volume")
    p.add_argument("--trials", type=int, default=500, help="moebius-check trials")
    return p


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INVALID if exc.code else OK
    args.stderr = stderr
    try:
        if args.command == "moebius-check":
            model = load_model_arg(args.model) if args.model else None
        else:
            model = load_model_arg(args.model)
        rows, status = COMMANDS[args.command](model, args)
    except ModelError as exc:
        where = f" (site n={exc.site})" if exc.site is not None else ""
        print(f"invalid model: {exc}{where}", file=stderr)
        return INVALID
    except (InputError, MoebiusDomainError) as exc:
        print(f"invalid input: {exc}", file=stderr)
        return INVALID
    except ConvergenceError as exc:
        print(f"unconverged: {exc}", file=stderr)
        return UNCONVERGED
    except ConditioningError as exc:
        print(f"conditioning failure: {exc}", file=stderr)
        return UNCONVERGED
    meta = {"model": args.model, "status": status}
    stdout.write(render(args.command, rows, args.out, meta))
    return status


if __name__ == "__main__":
    sys.exit(main())
