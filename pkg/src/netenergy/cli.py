"""Command-line front end for the network energy-space toolkit.

One verb per pipeline: solve a kernel element, chase a monopole through a
wired exhaustion, split a function into finite and harmonic parts, measure
resistances, probe transience, build operator extensions, compare inner
products, and run the bundled identity suite.

Artifacts are written into ``--out DIR`` as JSON or CSV (``--format``);
without ``--out`` the payload is printed to stdout as JSON.  Exit codes:
0 on success, 1 on any runtime failure (diagnostic on stderr), 2 on a
malformed command line (argparse).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import generators, measures, verify
from .energy import to_energy_vector
from .network import (
    NetworkError,
    label_key,
    load_function,
    load_network,
    network_to_json,
    save_network,
)
from .operators import (
    InnerSpace,
    LinOp,
    OperatorError,
    friedrichs,
    krein_lambda,
    krein_network_extension,
    network_kl,
    semibounded_friedrichs,
    spectral_measure,
    verify_pair,
)
from .solvers import (
    MONOPOLE_TOL,
    SolverError,
    effective_resistance,
    royden_project,
    solve_dipole,
    solve_monopole,
    transience_probe,
)

#: Unbounded generator rules reachable from the command line.
GENERATORS = {
    "binary_tree": generators.BinaryTreeGen,
    "integer_line": generators.IntegerLineGen,
    "geometric_line": generators.GeometricLineGen,
    "lattice": generators.IntegerLatticeGen,
}

#: Finite graph builders reachable from ``generate``.
BUILDERS = {
    "path": generators.path,
    "cycle": generators.cycle,
    "binary_tree": generators.binary_tree,
    "lattice": generators.lattice,
    "geometric_line": generators.geometric_line,
    "random": generators.random_network,
}


# -- small parsers ---------------------------------------------------------


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _param(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, _coerce(value)


def _label(text: str):
    """Vertex label: int when int-like, comma form for lattice tuples."""
    if "," in text:
        return tuple(_label(part) for part in text.split(","))
    try:
        return int(text)
    except ValueError:
        return text


def _float_list(text: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


def _make_generator(name: str, params: dict):
    try:
        return GENERATORS[name](**params)
    except TypeError as exc:
        raise NetworkError(f"bad parameters for generator {name!r}: {exc}") from None


def _load_matrix(path):
    """Matrix file: JSON ``[[...]]`` or ``{"labels": [...], "matrix": [[...]]}``."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise OperatorError(f"invalid matrix JSON in {path}: {exc}") from exc
    if isinstance(doc, dict) and "matrix" in doc:
        labels = doc.get("labels")
        matrix = np.asarray(doc["matrix"], dtype=float)
    elif isinstance(doc, list):
        labels = None
        matrix = np.asarray(doc, dtype=float)
    else:
        raise OperatorError(f"{path}: expected a JSON matrix or an object with 'matrix'")
    if matrix.ndim != 2:
        raise OperatorError(f"{path}: matrix must be two-dimensional, got shape {matrix.shape}")
    return labels, matrix


def _load_measure(path) -> measures.DiscreteMeasure:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid measure JSON in {path}: {exc}") from exc
    return measures.DiscreteMeasure.from_json(doc)


# -- artifact writers ------------------------------------------------------


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _emit(args, stem: str, doc, csv_writer=None) -> None:
    """Write one artifact (or print the JSON payload when --out is absent)."""
    out = _out_dir(args)
    if out is None:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return
    if args.format == "csv" and csv_writer is not None:
        path = out / f"{stem}.csv"
        csv_writer(path)
    else:
        path = out / f"{stem}.json"
        _write_json(path, doc)
    print(f"wrote {path}")


def _function_csv(path, net, values) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "value"])
        for lbl, val in zip(net.labels, values):
            writer.writerow([label_key(lbl), repr(float(val))])


def _function_doc(net, values) -> dict:
    return {label_key(lbl): float(v) for lbl, v in zip(net.labels, values)}


# -- verbs -----------------------------------------------------------------


def cmd_kernel(args) -> int:
    net = load_network(args.graph)
    v = solve_dipole(net, args.vertex)
    print(f"kernel element at {args.vertex!r}: energy {v.energy:.12g}")
    doc = {
        "vertex": label_key(args.vertex),
        "energy": v.energy,
        "values": _function_doc(net, v.values),
    }
    stem = f"kernel_{label_key(args.vertex)}"
    _emit(args, stem, doc, lambda p: _function_csv(p, net, v.values))
    return 0


def cmd_monopole(args) -> int:
    gen = _make_generator(args.generator, dict(args.param))
    vertex = gen.origin if args.vertex is None else args.vertex
    w, report = solve_monopole(gen, vertex, tol=args.tol, k_max=args.kmax)
    last_k, value, energy = report.levels[-1]
    print(
        f"monopole at {vertex!r}: converged={report.converged} "
        f"levels={last_k} value={value:.12g} energy={energy:.12g} "
        f"limit~{report.extrapolated_limit:.12g}"
    )
    doc = report.summary()
    doc["vertex"] = label_key(vertex)
    _emit(args, "monopole_report", doc, report.to_csv)
    return 0


def cmd_royden(args) -> int:
    net = load_network(args.graph)
    u = to_energy_vector(net, load_function(net, args.function))
    fin, harm = royden_project(net, u, boundary=args.boundary)
    cross = fin.inner(harm)
    print(
        f"split energies: total {u.energy:.12g}, finite {fin.energy:.12g}, "
        f"harmonic {harm.energy:.12g}, cross {cross:.3e}"
    )
    doc = {
        "total_energy": u.energy,
        "finite_energy": fin.energy,
        "harmonic_energy": harm.energy,
        "cross_inner": cross,
        "finite": _function_doc(net, fin.values),
        "harmonic": _function_doc(net, harm.values),
    }

    def write_csv(path):
        base = Path(path)
        fin_path = base.with_name(base.stem + "_finite.csv")
        harm_path = base.with_name(base.stem + "_harmonic.csv")
        _function_csv(fin_path, net, fin.values)
        _function_csv(harm_path, net, harm.values)

    _emit(args, "royden", doc, write_csv)
    return 0


def cmd_resistance(args) -> int:
    net = load_network(args.graph)
    r = effective_resistance(net, args.source, args.target)
    print(f"effective resistance {args.source!r} -- {args.target!r}: {r:.12g}")
    doc = {
        "source": label_key(args.source),
        "target": label_key(args.target),
        "resistance": r,
    }

    def write_csv(path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["source", "target", "resistance"])
            writer.writerow([doc["source"], doc["target"], repr(r)])

    _emit(args, "resistance", doc, write_csv)
    return 0


def cmd_transience(args) -> int:
    gen = _make_generator(args.generator, dict(args.param))
    verdict, report = transience_probe(
        gen, tol=args.tol, k_max=args.kmax, stride=args.stride
    )
    print(
        f"verdict: {verdict} after {len(report.levels)} levels, "
        f"last R={report.values[-1]:.12g}, limit~{report.extrapolated_limit:.12g}"
    )
    doc = report.summary()
    doc["verdict"] = verdict
    _emit(args, "transience_report", doc, report.to_csv)
    return 0


def cmd_friedrichs(args) -> int:
    labels, g = _load_matrix(args.gram)
    _, a_mat = _load_matrix(args.operator)
    space = InnerSpace.from_matrix(g, labels=labels)
    a = LinOp(domain=space, codomain=space, matrix=a_mat)
    if args.bound is None:
        ext = friedrichs(space, a)
    else:
        ext = semibounded_friedrichs(space, a, c=args.bound)
    defect = float(np.max(np.abs(ext.matrix - a.matrix)))
    print(f"extension of a {space.dim}x{space.dim} operator: max |ext - A| = {defect:.3e}")
    _emit(args, "friedrichs_extension", ext.to_json(), ext.to_csv)
    return 0


def cmd_krein(args) -> int:
    labels, g1 = _load_matrix(args.gram)
    _, g2 = _load_matrix(args.gram2)
    h1 = InnerSpace.from_matrix(g1, labels=labels)
    lam = krein_lambda(h1, g2)
    rng = np.random.default_rng(args.seed)
    phi = rng.standard_normal(h1.dim)
    lhs = float(phi @ g1 @ lam.apply(phi))
    rhs = float(phi @ g2 @ phi)
    print(
        f"canonical operator on dim {h1.dim}: "
        f"<phi, Lambda phi>_1 = {lhs:.12g}, |phi|_2^2 = {rhs:.12g}"
    )
    _emit(args, "krein_lambda", lam.to_json(), lam.to_csv)
    return 0


def cmd_spectral(args) -> int:
    labels, g1 = _load_matrix(args.gram)
    _, g2 = _load_matrix(args.gram2)
    h1 = InnerSpace.from_matrix(g1, labels=labels)
    lam = krein_lambda(h1, g2)
    if args.phi is None:
        phi = np.zeros(h1.dim)
        phi[0] = 1.0
    else:
        phi = args.phi
        if phi.shape != (h1.dim,):
            raise OperatorError(
                f"phi has {phi.shape[0]} entries, expected {h1.dim}"
            )
    mu = spectral_measure(lam, phi)
    print(
        f"spectral measure with {len(mu.atoms)} atoms: "
        f"mass {mu.mass():.12g} (|phi|_1^2 = {h1.inner(phi, phi):.12g}), "
        f"moment {mu.first_moment():.12g} (|phi|_2^2 = {float(phi @ g2 @ phi):.12g})"
    )

    def write_csv(path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["eigenvalue", "weight"])
            for eig, weight in mu.atoms:
                writer.writerow([repr(eig), repr(weight)])

    _emit(args, "spectral_measure", mu.to_json(), write_csv)
    return 0


def cmd_kl(args) -> int:
    net = load_network(args.graph)
    k_op, l_op = network_kl(net)
    report = verify_pair(k_op, l_op, tol=args.tol)
    kk, ll = krein_network_extension(k_op, l_op)
    print(
        f"symmetric pair on {net.n} vertices: pairing residual "
        f"{report.residual:.3e} (tol {args.tol:.1e}), "
        f"is_pair={report.is_pair}"
    )
    out = _out_dir(args)
    if out is None:
        doc = {"K": k_op.to_json(), "L": l_op.to_json(), "KK": kk.to_json(), "LL": ll.to_json()}
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0 if report.is_pair else 1
    for stem, op in (("kl_k", k_op), ("kl_l", l_op), ("kl_kk", kk), ("kl_ll", ll)):
        if args.format == "csv":
            path = out / f"{stem}.csv"
            op.to_csv(path)
        else:
            path = out / f"{stem}.json"
            _write_json(path, op.to_json())
        print(f"wrote {path}")
    return 0 if report.is_pair else 1


def cmd_cantor(args) -> int:
    constant, report = measures.cantor_witness(args.level)
    predicted = report.rows[-1][2]
    print(
        f"witness constant at level {args.level}: {constant:.12g} "
        f"(predicted {predicted:.12g})"
    )
    doc = {"rows": [list(row) for row in report.rows]}
    _emit(args, "cantor_report", doc, report.to_csv)
    return 0


def cmd_rn(args) -> int:
    mu1 = _load_measure(args.mu1)
    mu2 = _load_measure(args.mu2)
    lam = measures.rn_lambda(mu1, mu2)
    diag = np.diag(lam.matrix)
    print(
        f"density operator on {len(mu1.points)} points: "
        f"diagonal range [{diag.min():.12g}, {diag.max():.12g}]"
    )
    _emit(args, "rn_lambda", lam.to_json(), lam.to_csv)
    return 0


def cmd_verify(args) -> int:
    results = sorted(verify.run_suite(args.suite, seed=args.seed), key=lambda r: r.check_id)
    for result in results:
        print(result.line())
    failures = [r for r in results if not r.passed]
    print(f"{len(results) - len(failures)}/{len(results)} checks passed")
    doc = {
        "suite": args.suite,
        "seed": args.seed,
        "checks": [r.to_json() for r in results],
    }

    def write_csv(path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["check_id", "passed", "residual", "tolerance"])
            for r in results:
                writer.writerow([r.check_id, r.passed, repr(r.residual), repr(r.tolerance)])

    out = _out_dir(args)
    if out is not None:
        if args.format == "csv":
            path = out / "verify_report.csv"
            write_csv(path)
        else:
            path = out / "verify_report.json"
            _write_json(path, doc)
        print(f"wrote {path}")
    return 1 if failures else 0


def cmd_generate(args) -> int:
    params = dict(args.param)
    if args.truncate is not None:
        if args.generator not in GENERATORS:
            raise NetworkError(
                f"generator {args.generator!r} has no unbounded rule to truncate"
            )
        net = generators.truncate(_make_generator(args.generator, params), args.truncate)
    else:
        if args.generator not in BUILDERS:
            raise NetworkError(f"{args.generator!r} is not a finite builder")
        builder = BUILDERS[args.generator]
        try:
            if args.generator == "random":
                params.pop("seed", None)
                net = builder(seed=args.seed, **params)
            else:
                net = builder(**params)
        except TypeError as exc:
            raise NetworkError(
                f"bad parameters for builder {args.generator!r}: {exc}"
            ) from None
    print(f"generated {net!r}")
    out = _out_dir(args)
    if out is None:
        json.dump(network_to_json(net), sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        path = out / f"{args.generator}.json"
        save_network(net, path)
        print(f"wrote {path}")
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netenergy",
        description="resistance-network energy spaces, kernels, and operator extensions",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, tol_default=1e-8):
        p.add_argument("--kmax", type=int, default=30, help="maximum exhaustion level")
        p.add_argument("--tol", type=float, default=tol_default, help="numerical tolerance")
        p.add_argument("--seed", type=int, default=42, help="seed for randomized steps")
        p.add_argument("--out", default=None, help="directory for artifacts")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("kernel", help="solve one energy-kernel element v_x")
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.add_argument("--vertex", required=True, type=_label)
    common(p)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("monopole", help="monopole via wired exhaustion levels")
    p.add_argument("--generator", required=True, choices=sorted(GENERATORS))
    p.add_argument("--param", action="append", type=_param, default=[], metavar="K=V")
    p.add_argument("--vertex", type=_label, default=None, help="default: the origin")
    common(p, tol_default=MONOPOLE_TOL)
    p.set_defaults(func=cmd_monopole)

    p = sub.add_parser("royden", help="split a function into finite + harmonic parts")
    p.add_argument("--graph", required=True)
    p.add_argument("--function", required=True, help="vertex-function JSON file")
    p.add_argument(
        "--boundary",
        action="append",
        type=_label,
        default=None,
        metavar="VERTEX",
        help="boundary vertex (repeatable); default: the ground vertex",
    )
    common(p)
    p.set_defaults(func=cmd_royden)

    p = sub.add_parser("resistance", help="effective resistance between two vertices")
    p.add_argument("--graph", required=True)
    p.add_argument("--source", required=True, type=_label)
    p.add_argument("--target", required=True, type=_label)
    common(p)
    p.set_defaults(func=cmd_resistance)

    p = sub.add_parser("transience", help="classify a generated network by wired resistance")
    p.add_argument("--generator", required=True, choices=sorted(GENERATORS))
    p.add_argument("--param", action="append", type=_param, default=[], metavar="K=V")
    p.add_argument("--stride", type=int, default=1, help="sample every stride-th level")
    common(p, tol_default=MONOPOLE_TOL)
    p.set_defaults(func=cmd_transience)

    p = sub.add_parser("friedrichs", help="extension of a coercive or semibounded operator")
    p.add_argument("--gram", required=True, help="Gram matrix JSON file")
    p.add_argument("--operator", required=True, help="operator matrix JSON file")
    p.add_argument("--bound", type=float, default=None, help="semibounded lower bound c")
    common(p)
    p.set_defaults(func=cmd_friedrichs)

    p = sub.add_parser("krein", help="canonical operator of a second inner product")
    p.add_argument("--gram", required=True, help="first (positive definite) Gram JSON")
    p.add_argument("--gram2", required=True, help="second (positive semidefinite) Gram JSON")
    common(p)
    p.set_defaults(func=cmd_krein)

    p = sub.add_parser("spectral", help="atomic spectral measure of a vector")
    p.add_argument("--gram", required=True)
    p.add_argument("--gram2", required=True)
    p.add_argument(
        "--phi",
        type=_float_list,
        default=None,
        help="comma-separated coordinates; default: first basis vector",
    )
    common(p)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("kl", help="the l2/energy symmetric pair of a network")
    p.add_argument("--graph", required=True)
    common(p, tol_default=1e-10)
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("cantor", help="witness constants for a singular pairing")
    p.add_argument("--level", required=True, type=int)
    common(p)
    p.set_defaults(func=cmd_cantor)

    p = sub.add_parser("rn", help="density operator of two discrete measures")
    p.add_argument("--mu1", required=True, help="reference measure JSON")
    p.add_argument("--mu2", required=True, help="absolutely continuous measure JSON")
    common(p)
    p.set_defaults(func=cmd_rn)

    p = sub.add_parser("verify", help="run the identity suite")
    p.add_argument("--suite", choices=verify.SUITES, default="all")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="write a graph JSON file")
    p.add_argument(
        "--generator",
        required=True,
        choices=sorted(set(BUILDERS) | set(GENERATORS)),
    )
    p.add_argument("--param", action="append", type=_param, default=[], metavar="K=V")
    p.add_argument(
        "--truncate",
        type=int,
        default=None,
        metavar="K",
        help="wired truncation level of an unbounded rule",
    )
    common(p)
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NetworkError, SolverError, OperatorError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
