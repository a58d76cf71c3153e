"""Batch command line for the affine surface toolkit.

One computation per invocation: read surface, loop, tree, family,
complex, or character files in the JSON formats of the owning modules,
run the requested operation, and write a deterministic report to stdout
or to --out.  JSON output has a fixed field order and prints floats with
17 significant digits, so identical inputs give byte-identical bytes.

Exit codes: 0 on success, 1 on a domain error (machine-readable error
JSON on stderr), 2 on bad usage, unreadable files, or malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cohomology import coderivative_rows, trans_dims
from .deformation import family_from_json, hol_jacobian, hol_res_jacobian, leaf_step
from .errors import AffsurfError
from .holonomy import holonomy, loop_from_json, turning_number
from .jsonio import as_complex
from .localsys import (
    character_from_json,
    compact_support_cohomology,
    complex_from_json,
    twisted_cohomology,
    veech_pairing,
)
from .numerics import Quadrature
from .residues import res_gamma, tree_from_json
from .surface import (
    NodeGluing,
    check_node_gluing,
    spec_from_json,
    spec_to_json,
    validate,
)


class _UsageError(Exception):
    """Bad invocation or unparseable input; maps to exit code 2."""


class _DomainFailure(Exception):
    """A well-posed question with a failing answer; maps to exit code 1."""

    def __init__(self, code, message, problems=None):
        super().__init__(message)
        self.code = code
        self.problems = problems


# --- deterministic serialization ---------------------------------------------

def _float_repr(x):
    x = float(x)
    s = "%.17g" % x
    if "." not in s and "e" not in s and "inf" not in s and "nan" not in s:
        s += ".0"
    return s


def _render_json(value, out):
    if isinstance(value, dict):
        out.append("{")
        for i, (key, val) in enumerate(value.items()):
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _render_json(val, out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, val in enumerate(value):
            if i:
                out.append(",")
            _render_json(val, out)
        out.append("]")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(_float_repr(value))
    elif isinstance(value, complex):
        _render_json([value.real, value.imag], out)
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif value is None:
        out.append("null")
    elif hasattr(value, "item") and not hasattr(value, "shape"):
        _render_json(value.item(), out)
    elif hasattr(value, "tolist"):
        _render_json(value.tolist(), out)
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def render_json(payload):
    out = []
    _render_json(payload, out)
    return "".join(out) + "\n"


def _csv_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _float_repr(value)
    if hasattr(value, "item"):
        return _csv_cell(value.item())
    text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def render_csv(rows):
    return "".join(",".join(_csv_cell(c) for c in row) + "\n" for row in rows)


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


# --- input loading ------------------------------------------------------------

def _load_json(path, what):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {what} file {path}: {exc}") from exc
    try:
        return json.loads(raw)
    except ValueError as exc:
        raise _UsageError(f"{what} file {path} is not valid JSON: {exc}") from exc


def _parse(parser, obj, what):
    try:
        return parser(obj)
    except ValueError as exc:
        raise _UsageError(f"bad {what}: {exc}") from exc


def _load_spec(path):
    return _parse(spec_from_json, _load_json(path, "surface"), "surface")


def _load_loop(path):
    return _parse(loop_from_json, _load_json(path, "loop"), "loop")


def _load_tree(path):
    return _parse(tree_from_json, _load_json(path, "tree"), "tree")


def _load_complex(path):
    return _parse(complex_from_json, _load_json(path, "complex"), "complex")


def _load_character(path, complex_):
    obj = _load_json(path, "character")
    try:
        return character_from_json(complex_, obj)
    except ValueError as exc:
        raise _UsageError(f"bad character: {exc}") from exc


def _load_family(path):
    return _parse(family_from_json, _load_json(path, "family"), "family")


def _complex_flag(text, name):
    try:
        obj = json.loads(text)
    except ValueError as exc:
        raise _UsageError(f"{name}: not valid JSON: {exc}") from exc
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    try:
        return as_complex(obj, name)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _quadrature(args):
    tol = getattr(args, "tol", None)
    if tol is None:
        return None
    return Quadrature(abs_tol=tol)


# --- subcommand handlers -------------------------------------------------------

_SPEC_PROBLEM_CODES = (
    ("orders sum to", "GaussBonnetViolation"),
    ("coincide", "CoincidentConePoints"),
    ("genus must be", "GenusUnsupported"),
    ("first cone point", "NormalizationViolation"),
    ("finite", "NonFiniteData"),
    ("tau", "LatticeParameterInvalid"),
    ("lambda", "LatticeParameterInvalid"),
)


def _problem_code(message):
    for needle, code in _SPEC_PROBLEM_CODES:
        if needle in message:
            return code
    return "InvalidSpec"


def _cmd_validate(args):
    spec = _load_spec(args.surface)
    report = validate(spec)
    if not report.ok:
        first = report.problems[0]
        raise _DomainFailure(_problem_code(first), first,
                             problems=list(report.problems))
    payload = {"ok": True, "problems": []}
    rows = [["ok"], [True]]
    return payload, rows


def _cmd_holonomy(args):
    spec = _load_spec(args.surface)
    loop = _load_loop(args.loop)
    quad = _quadrature(args)
    chi = holonomy(spec, loop, quadrature=quad)
    tau = turning_number(spec, loop, quadrature=quad)
    payload = {"chi": _pair(chi), "tau": _pair(tau)}
    rows = [["chi_re", "chi_im", "tau_re", "tau_im"],
            [chi.real, chi.imag, tau.real, tau.imag]]
    return payload, rows


def _cmd_turning(args):
    spec = _load_spec(args.surface)
    loop = _load_loop(args.loop)
    tau = turning_number(spec, loop, quadrature=_quadrature(args))
    payload = {"tau": _pair(tau)}
    rows = [["tau_re", "tau_im"], [tau.real, tau.imag]]
    return payload, rows


def _cmd_residues(args):
    spec = _load_spec(args.surface)
    tree = _load_tree(args.tree)
    result = res_gamma(spec, tree, quadrature=_quadrature(args))
    values = [complex(v) for v in result.values]
    payload = {
        "pole_indices": [int(j) for j in result.pole_indices],
        "values": [_pair(v) for v in values],
        "projective": bool(result.projective),
    }
    rows = [["pole_index", "value_re", "value_im"]]
    rows += [[int(j), v.real, v.imag]
             for j, v in zip(result.pole_indices, values)]
    return payload, rows


def _cmd_dims(args):
    report = coderivative_rows(args.genus, args.n)
    payload = {
        "genus": args.genus,
        "n": args.n,
        "dim_H1_L": report.dim_H1_L,
        "dim_moduli": report.dim_moduli,
        "dim_hol_target": report.dim_hol_target,
        "h0_omega_C": report.h0_omega_C,
        "h1_T_minus_C": report.h1_T_minus_C,
        "top_row": list(report.top_row),
        "bottom_row": list(report.bottom_row),
    }
    rows = [["field", "value"]]
    for key in ("genus", "n", "dim_H1_L", "dim_moduli", "dim_hol_target",
                "h0_omega_C", "h1_T_minus_C"):
        rows.append([key, payload[key]])
    for tag, triple in (("top_row", report.top_row),
                        ("bottom_row", report.bottom_row)):
        for i, v in enumerate(triple):
            rows.append([f"{tag}_{i}", v])
    return payload, rows


def _cmd_trans_dims(args):
    spec = _load_spec(args.surface)
    h0, h1, h2 = trans_dims(spec, quadrature=_quadrature(args))
    payload = {"h0": h0, "h1": h1, "h2": h2}
    rows = [["h0", "h1", "h2"], [h0, h1, h2]]
    return payload, rows


def _cmd_twisted(args):
    complex_ = _load_complex(args.complex)
    chi = _load_character(args.character, complex_)
    plain = twisted_cohomology(complex_, chi).dims
    compact = compact_support_cohomology(complex_, chi).dims
    payload = {"dims": list(plain), "compact_dims": list(compact)}
    rows = [["h0", "h1", "h2", "h0_c", "h1_c", "h2_c"],
            list(plain) + list(compact)]
    return payload, rows


def _cmd_pairing(args):
    complex_ = _load_complex(args.complex)
    chi = _load_character(args.character, complex_)
    report = veech_pairing(complex_, chi)
    matrix = report.matrix
    payload = {
        "signature": [int(report.signature[0]), int(report.signature[1])],
        "margin": float(report.margin),
        "matrix": [[_pair(matrix[a, b]) for b in range(matrix.shape[1])]
                   for a in range(matrix.shape[0])],
    }
    rows = [["row", "col", "re", "im"]]
    for a in range(matrix.shape[0]):
        for b in range(matrix.shape[1]):
            entry = complex(matrix[a, b])
            rows.append([a, b, entry.real, entry.imag])
    return payload, rows


def _cmd_rank(args):
    family = _load_family(args.family)
    quad = _quadrature(args)
    if args.tree is None:
        report = hol_jacobian(family, quadrature=quad, jobs=args.jobs)
    else:
        tree = _load_tree(args.tree)
        report = hol_res_jacobian(family, tree, quadrature=quad,
                                  jobs=args.jobs)
    matrix = report.matrix
    payload = {
        "rank": int(report.rank),
        "verdict": report.verdict,
        "hol_rank": None if report.hol_rank is None else int(report.hol_rank),
        "res_rank": None if report.res_rank is None else int(report.res_rank),
        "threshold": float(report.threshold),
        "singular_values": [float(s) for s in report.singular_values],
        "matrix": [[_pair(matrix[a, b]) for b in range(matrix.shape[1])]
                   for a in range(matrix.shape[0])],
    }
    rows = [["index", "singular_value"]]
    rows += [[i, float(s)] for i, s in enumerate(report.singular_values)]
    return payload, rows


def _cmd_leaf_walk(args):
    spec = _load_spec(args.surface)
    tree = _load_tree(args.tree)
    if args.steps < 0:
        raise _UsageError("--steps must be >= 0")
    quad = _quadrature(args)
    trajectory = [spec]
    current = spec
    for _ in range(args.steps):
        current = leaf_step(current, tree, args.step, quadrature=quad)
        trajectory.append(current)
    payload = {
        "step": float(args.step),
        "count": args.steps,
        "surfaces": [spec_to_json(s) for s in trajectory],
    }
    rows = [["surface", "point", "z_re", "z_im", "order_re", "order_im"]]
    for si, surf in enumerate(trajectory):
        for pi, point in enumerate(surf.cone_points):
            z, m = complex(point.position), complex(point.order)
            rows.append([si, pi, z.real, z.imag, m.real, m.imag])
    return payload, rows


def _cmd_node_check(args):
    a = _complex_flag(args.order_a, "--order-a")
    b = _complex_flag(args.order_b, "--order-b")
    total = a + b
    if not check_node_gluing(NodeGluing(a, b)):
        raise _DomainFailure(
            "NodeGluingMismatch",
            f"branch orders sum to {total}, need exactly -2")
    payload = {"ok": True, "sum": _pair(total)}
    rows = [["ok", "sum_re", "sum_im"], [True, total.real, total.imag]]
    return payload, rows


# --- argument parsing and dispatch --------------------------------------------

_HANDLERS = {
    "validate": _cmd_validate,
    "holonomy": _cmd_holonomy,
    "turning": _cmd_turning,
    "residues": _cmd_residues,
    "dims": _cmd_dims,
    "trans-dims": _cmd_trans_dims,
    "twisted": _cmd_twisted,
    "pairing": _cmd_pairing,
    "rank": _cmd_rank,
    "leaf-walk": _cmd_leaf_walk,
    "node-check": _cmd_node_check,
}


def _add_output_flags(sub):
    sub.add_argument("--out", default=None, help="write the report here instead of stdout")
    sub.add_argument("--format", choices=("json", "csv"), default="json")


def _add_tol_flag(sub):
    sub.add_argument("--tol", type=float, default=None,
                     help="absolute quadrature tolerance override")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="affsurf",
        description="Holonomy, residues, cohomology dimensions, and "
                    "isoresidual walks for branched affine surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a surface file's invariants")
    p.add_argument("--surface", required=True)
    _add_output_flags(p)

    for name, blurb in (("holonomy", "holonomy character of one loop"),
                        ("turning", "complex turning number of one loop")):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--surface", required=True)
        p.add_argument("--loop", required=True)
        _add_tol_flag(p)
        _add_output_flags(p)

    p = sub.add_parser("residues",
                       help="projective residue tuple along an arc tree")
    p.add_argument("--surface", required=True)
    p.add_argument("--tree", required=True)
    _add_tol_flag(p)
    _add_output_flags(p)

    p = sub.add_parser("dims", help="dimension table for a genus and point count")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    _add_output_flags(p)

    p = sub.add_parser("trans-dims",
                       help="cohomology of the flat vector field sheaf")
    p.add_argument("--surface", required=True)
    _add_tol_flag(p)
    _add_output_flags(p)

    p = sub.add_parser("twisted",
                       help="twisted cohomology dimensions of a character")
    p.add_argument("--complex", required=True)
    p.add_argument("--character", required=True)
    _add_output_flags(p)

    p = sub.add_parser("pairing", help="Hermitian cup pairing of a character")
    p.add_argument("--complex", required=True)
    p.add_argument("--character", required=True)
    _add_output_flags(p)

    p = sub.add_parser("rank",
                       help="numerical rank of the holonomy (and residue) map")
    p.add_argument("--family", required=True)
    p.add_argument("--tree", default=None,
                   help="stack the residue chart under the holonomy rows")
    p.add_argument("--jobs", type=int, default=None,
                   help="evaluate Jacobian columns with this many workers")
    _add_tol_flag(p)
    _add_output_flags(p)

    p = sub.add_parser("leaf-walk",
                       help="compose isoresidual leaf steps from a surface")
    p.add_argument("--surface", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--step", type=float, default=1e-2)
    p.add_argument("--steps", type=int, default=1)
    _add_tol_flag(p)
    _add_output_flags(p)

    p = sub.add_parser("node-check",
                       help="test whether two branch orders glue at a node")
    p.add_argument("--order-a", required=True,
                   help="complex order as JSON, a number or [re, im]")
    p.add_argument("--order-b", required=True)
    _add_output_flags(p)

    return parser


def _write_error(code, message, problems=None):
    body = {"type": code, "message": message}
    if problems is not None:
        body["problems"] = problems
    sys.stderr.write(render_json({"error": body}))


def _check_config(args):
    tol = getattr(args, "tol", None)
    if tol is not None and not tol > 0:
        raise _UsageError(f"--tol must be positive, got {tol}")
    jobs = getattr(args, "jobs", None)
    if jobs is not None and jobs < 1:
        raise _UsageError(f"--jobs must be >= 1, got {jobs}")


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)

    try:
        _check_config(args)
        payload, rows = _HANDLERS[args.command](args)
    except _DomainFailure as exc:
        _write_error(exc.code, str(exc), problems=exc.problems)
        return 1
    except AffsurfError as exc:
        _write_error(type(exc).__name__, str(exc))
        return 1
    except _UsageError as exc:
        _write_error("UsageError", str(exc))
        return 2

    text = render_json(payload) if args.format == "json" else render_csv(rows)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            _write_error("UsageError", f"cannot write {args.out}: {exc}")
            return 2
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
