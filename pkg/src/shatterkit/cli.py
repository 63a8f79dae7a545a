"""shatterkit command line: one subcommand per computation, JSON reports,
replayable manifests and the verification suites.

Exit codes: 0 success, 1 usage, 2 computation error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .core import load_class
from .dimension import dimension_profile, fat_dimension
from .errors import CalibrationError, InvalidParameter, ShatterkitError
from .lattice import cell_content_report
from .lorentz import GeneratingFunction, comparison_function, lorentz_norm
from .packing import BodySpec, covering_number, kp_entropy_lower, packing_number
from .processes import (SELECTION_KINDS, build_nosudakov_class, nosudakov_full, comb_integral, dudley_integral, process_supremum,
                        selection_experiment)
from .sections import VPolytope, search_section, section_l1_check
from .suites import SUITES, SWEEP, load_fixtures, run_suite
from .trees import STRATEGIES, build_separating_tree, leaves_vs_cell_content, verify_separating_tree

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_VERIFY = 0, 1, 2, 3
SUITE_ALIASES = {"many-cells": "lemma-many-cells", "cell": "lemma-cell", "to-rn": "lemma-to-rn"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- report helpers


def jsonable(x):
    """Plain JSON types; non-finite floats become the strings "inf", "-inf", "nan"."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def measured(value, provenance="exact", stderr=None):
    out = {"value": value, "provenance": provenance}
    if stderr is not None:
        out["stderr"] = stderr
        out["provenance"] = f"monte-carlo({stderr!r})"
    return out


def load_schema() -> dict:
    return json.loads(resources.files("shatterkit").joinpath("report_schema.json").read_text())


def validate_report(report: dict) -> None:
    import jsonschema

    jsonschema.validate(report, load_schema())


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _file_echo(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    return {"path": str(path), "sha256": hashlib.sha256(p.read_bytes()).hexdigest()}


def _floats(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise InvalidParameter(f"expected comma-separated numbers, got {text!r}") from None


# ---------------------------------------------------------------- commands
#
# Each command takes the parameter dict recorded in the manifest and returns
# (results, details). results map names to measured() entries.


def cmd_dim(p, seed):
    F = load_class(p["cls"])
    v, w = fat_dimension(F, p["t"], p["node_budget"])
    results = {"v": measured(v)}
    details = {"witness": w.to_json() if w is not None else None}
    if p.get("profile"):
        prof = dimension_profile(F, _floats(p["profile"]), p["node_budget"])
        results["profile"] = measured([[t, prof[t]] for t in sorted(prof)])
    return results, details


def _body(p, n):
    return BodySpec.parse(p["body"], n, p.get("radius", 1.0))


def cmd_entropy(p, seed):
    F = load_class(p["cls"])
    body = _body(p, F.n)
    if F.measure is not None and body.kind in ("lp", "lorentz"):
        body = BodySpec(body.kind, body.p, F.measure, body.generator, body.matrix, body.radius)
    mode = "greedy" if p["greedy"] else "exact"
    N, cert = packing_number(F, body, p["t"], mode, p["cap"])
    prov = "exact" if cert.exact else "greedy-bound"
    results = {"packing": measured(N, prov), "entropy": measured(math.log(N), prov)}
    details = {"certificate": cert.to_json(), "body": body.describe()}
    if p.get("kp_budget"):
        val, mu = kp_entropy_lower(F, p["t"], p["kp_budget"], seed, p["cap"])
        results["sup_mu_entropy_lower"] = measured(val, "greedy-bound")
        details["best_measure"] = mu.weights
    return results, details


def cmd_cover(p, seed):
    F = load_class(p["cls"])
    body = _body(p, F.n)
    lo, up = covering_number(F, body, p["mode"], p["cap"])
    lower_prov = "exact" if p["mode"] == "sandwich" and len({r.tobytes() for r in F.values}) <= p["cap"] \
        else "greedy-bound"
    return {"lower": measured(lo, lower_prov), "upper": measured(up, "greedy-bound")}, {"body": body.describe()}


def cmd_cellcontent(p, seed):
    F = load_class(p["cls"])
    bounds = tuple(_floats(p["bounds"])) if p.get("bounds") else None
    rep = cell_content_report(F, bounds, p["max_n"])
    return {"sigma_count": measured(rep["sigma_count"]), "total": measured(rep["total"]),
            "per_rank": measured(rep["per_rank"])}, {}


def cmd_tree(p, seed):
    F = load_class(p["cls"])
    T = build_separating_tree(F, p["gap"], p["alpha"], p["strategy"])
    ok = verify_separating_tree(T, F, p["gap"])
    results = {"leaves": measured(T.leaf_count), "verified": measured(ok)}
    if p["compare"]:
        rep = leaves_vs_cell_content(F, p["gap"], p["strategy"], p["alpha"])
        results["cell_content"] = measured(rep["sigma"])
        results["leaves_le_cell_content"] = measured(rep["holds"])
    return results, {"tree": T.to_json()}


def cmd_lorentz(p, seed):
    phi = GeneratingFunction.parse(p["phi"])
    if p["action"] == "compare":
        if not p.get("psi") or p.get("t") is None:
            raise InvalidParameter("lorentz compare needs --psi and --t")
        psi = GeneratingFunction.parse(p["psi"])
        val = comparison_function(phi, psi, p["t"])
        return {"comparison": measured(val)}, {"phi": phi.describe(), "psi": psi.describe()}
    if not p.get("cls"):
        raise InvalidParameter("lorentz norm needs a class file")
    F = load_class(p["cls"])
    mu = F.default_measure()
    norms = [lorentz_norm(f, mu, phi) for f in F.values]
    return {"norms": measured(norms)}, {"phi": phi.describe()}


def _supremum(noise):
    def run(p, seed):
        F = load_class(p["cls"])
        est = process_supremum(F, noise, p["samples"], seed)
        return {"E": measured(est.mean, stderr=est.stderr)}, {"noise": noise, "samples": est.samples}
    return run


def cmd_integral(p, seed):
    F = load_class(p["cls"])
    grid = _floats(p["grid"]) if p.get("grid") else None
    if p["kind"] == "comb":
        rep = comb_integral(F, grid, p.get("lower") or 0.0, p["node_budget"])
    else:
        rep = dudley_integral(F, F.measure, grid, seed, p["c"], p["samples"], p.get("lower"), p["cap"])
    prov = "exact" if rep.provenance == ["exact"] else "greedy-bound"
    results = {"integral": measured(rep.value, prov), "lower": measured(rep.lower)}
    if "E_estimate" in rep.extra:
        est = rep.extra["E_estimate"]
        results["E_estimate"] = measured(est["mean"], stderr=est["stderr"])
        # the lower limit inherits the Monte Carlo error of E(F)
        results["lower"] = measured(rep.lower, stderr=p["c"] * est["stderr"] / math.sqrt(F.n))
    return results, {"grid": rep.grid, "integrand": rep.integrand}


def cmd_nosudakov(p, seed):
    if p["route"] == "full":
        F = nosudakov_full(p["n"], p["alpha_cap"])
        est = F.expected_rademacher(p["samples"], seed)
        upper = F.sup_t_sqrt_v_upper()
        results = {"E_rad": measured(est.mean, stderr=est.stderr),
                   "E_rad_exact": measured(F.expected_rademacher_exact()),
                   "sup_t_sqrt_v_upper": measured(upper),
                   "ratio": measured(est.mean / upper, stderr=est.stderr / upper)}
        details = {"route": "full", "levels": F.k1, "log2_sizes": F.log2_sizes,
                   "scales": [2.0 ** -k for k in range(1, F.k1 + 1)],
                   "dimension_bounds": [list(b) for b in F.dimension_bounds()]}
        return results, details
    M = build_nosudakov_class(p["n"], p["alpha_cap"], seed, p["cap"],
                              "error" if p["no_subsample"] else "subsample")
    est = process_supremum(M, "rademacher", p["samples"], seed)
    upper = M.sup_t_sqrt_v_upper()
    results = {"E_rad": measured(est.mean, stderr=est.stderr),
               "sup_t_sqrt_v_upper": measured(upper),
               "ratio": measured(est.mean / upper, stderr=est.stderr / upper)}
    details = {"route": "materialized", "component_sizes": [len(A) for A in M.components], "scales": M.scales,
               "full_sizes": M.full_sizes, "subsampled": M.subsampled,
               "dimension_bounds": [list(s) for s in M.dimension_bounds()]}
    return results, details


SELECT_KEYS = ("n", "gamma", "k", "q", "c", "m", "delta", "eps", "t", "C", "phi", "psi")


def cmd_select(p, seed):
    params = {k: p[k] for k in SELECT_KEYS if p.get(k) is not None}
    if p.get("cls"):
        F = load_class(p["cls"])
        if p["kind"] == "one-function":
            params["f"] = F.values[p["row"]]
        else:
            params["F"] = F.values
    missing = {"one-function": "f", "reduction": "F"}.get(p["kind"])
    if missing and missing not in params:
        raise InvalidParameter(f"select {p['kind']} needs a class file")
    try:
        rep = selection_experiment(p["kind"], params, p["trials"], seed)
    except KeyError as exc:
        raise InvalidParameter(f"select {p['kind']} needs --{exc.args[0]}") from None
    rate = rep["success_rate"]
    se = math.sqrt(rate * (1 - rate) / rep["trials"])
    return {"success_rate": measured(rate, stderr=se)}, {"successes": rep["successes"], "trials": rep["trials"],
                                                          "params_echo": rep["params_echo"]}


def cmd_section(p, seed):
    path = Path(p["polytope"])
    doc = json.loads(path.read_text())
    K = VPolytope(doc["vertices"] if isinstance(doc, dict) else doc)
    if p.get("sigma"):
        cert = section_l1_check(K, [int(x) for x in _floats(p["sigma"])], p["M"])
    else:
        cert = search_section(K, p["M"], p["min_size"], p["mode"])
    if cert is None:
        return {"found": measured(False)}, {"reason": "min_size exceeds n"}
    return {"found": measured(True), "holds": measured(cert.holds), "max_l1": measured(cert.max_l1),
            "s": measured(cert.extra["s"]), "t": measured(cert.extra["t"])}, {"certificate": cert.to_json()}


def cmd_verify(p, seed):
    names = list(SUITES) if p["suite"] == "all" else [SUITE_ALIASES.get(p["suite"], p["suite"])]
    results, details = {}, {}
    for name in names:
        r = run_suite(name, seed)
        print(r.line(), file=sys.stderr, flush=True)
        results[name] = measured(r.passed)
        details[name] = r.summary
    return results, details


COMMANDS = {
    "dim": cmd_dim, "entropy": cmd_entropy, "cover": cmd_cover, "cellcontent": cmd_cellcontent,
    "tree": cmd_tree, "lorentz": cmd_lorentz, "gauss": _supremum("gaussian"), "rad": _supremum("rademacher"),
    "integral": cmd_integral, "nosudakov": cmd_nosudakov, "select": cmd_select, "section": cmd_section,
    "verify": cmd_verify,
}
FILE_PARAMS = {"cls", "polytope"}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0; verify uses the fixture seed)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--save-manifest", help="write a replayable manifest of this run")
    common.add_argument("--threads", type=int, default=None, help="worker cap (or SHATTERKIT_THREADS)")

    parser = _Parser(prog="shatterkit", description=__doc__.split("\n\n")[0].replace("\n", " "))
    parser.add_argument("--version", action="version", version=f"shatterkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    budget = 10**7

    s = add("dim", "fat-shattering dimension v(F, t)")
    s.add_argument("cls")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--profile", help="comma-separated t values")
    s.add_argument("--node-budget", type=int, default=budget)

    s = add("entropy", "packing number and metric entropy")
    s.add_argument("cls")
    s.add_argument("--body", default="lp:2")
    s.add_argument("--t", type=float, required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--greedy", action="store_true")
    s.add_argument("--cap", type=int, default=40)
    s.add_argument("--kp-budget", type=int, default=0, help="also search measures for a larger entropy")

    s = add("cover", "covering number bounds")
    s.add_argument("cls")
    s.add_argument("--body", default="cube")
    s.add_argument("--radius", type=float, default=1.0)
    s.add_argument("--mode", choices=("sandwich", "greedy"), default="sandwich")
    s.add_argument("--cap", type=int, default=40)

    s = add("cellcontent", "number of integer cells in the coordinate convex hulls")
    s.add_argument("cls")
    s.add_argument("--bounds", help="lo,hi")
    s.add_argument("--max-n", type=int, default=16)

    s = add("tree", "separating tree")
    s.add_argument("cls")
    s.add_argument("--gap", type=float, default=2.0)
    s.add_argument("--strategy", choices=STRATEGIES, default="greedy-potential")
    s.add_argument("--alpha", type=float, default=2.0)
    s.add_argument("--compare", action="store_true", help="also compare leaves with the cell content")

    s = add("lorentz", "Lorentz norms and comparison functions")
    s.add_argument("action", choices=("norm", "compare"))
    s.add_argument("cls", nargs="?")
    s.add_argument("--phi", default="tower:2")
    s.add_argument("--psi")
    s.add_argument("--t", type=float)

    for name, noise in (("gauss", "Gaussian"), ("rad", "Rademacher")):
        s = add(name, f"{noise} process supremum E sup")
        s.add_argument("cls")
        s.add_argument("--samples", type=int, default=10_000)

    s = add("integral", "entropy or combinatorial integral")
    s.add_argument("kind", choices=("comb", "dudley"))
    s.add_argument("cls")
    s.add_argument("--grid", help="comma-separated t values (default: exact step integration)")
    s.add_argument("--lower", type=float, default=None)
    s.add_argument("--c", type=float, default=1.0, help="constant in the lower limit c E(F)/sqrt(n)")
    s.add_argument("--samples", type=int, default=2000)
    s.add_argument("--cap", type=int, default=40)
    s.add_argument("--node-budget", type=int, default=budget)

    s = add("nosudakov", "sum of scaled random-vertex sets")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha-cap", type=float, default=0.5)
    s.add_argument("--route", choices=("full", "materialized"), default="full",
                   help="full: symbolic sum, averaged over the vertex draw; materialized: one seeded draw")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--cap", type=int, default=2**20)
    s.add_argument("--no-subsample", action="store_true")

    s = add("select", "random coordinate selection experiments")
    s.add_argument("kind", choices=SELECTION_KINDS)
    s.add_argument("cls", nargs="?")
    s.add_argument("--row", type=int, default=0)
    s.add_argument("--trials", type=int, default=1000)
    for k in ("n", "q", "m"):
        s.add_argument(f"--{k}", type=int)
    for k in ("gamma", "k", "c", "delta", "eps", "t", "C"):
        s.add_argument(f"--{k}", type=float)
    s.add_argument("--phi")
    s.add_argument("--psi")

    s = add("section", "coordinate sections inside a scaled cross-polytope")
    s.add_argument("polytope")
    s.add_argument("--M", type=float, required=True)
    s.add_argument("--min-size", type=int, default=1)
    s.add_argument("--mode", choices=("greedy-drop", "exhaustive"), default="greedy-drop")
    s.add_argument("--sigma", help="check this comma-separated coordinate set only")

    s = add("verify", "run acceptance and calibration suites")
    s.add_argument("--suite", default="all", choices=["all", *SUITES, *SUITE_ALIASES])

    s = sub.add_parser("replay", help="re-run a saved manifest")
    s.add_argument("manifest")
    s.add_argument("--out")

    return parser


META = {"command", "seed", "out", "save_manifest", "threads", "manifest", "exact"}


def resolve_threads(flag):
    value = flag
    if value is None and os.environ.get("SHATTERKIT_THREADS"):
        try:
            value = int(os.environ["SHATTERKIT_THREADS"])
        except ValueError:
            raise UsageError("SHATTERKIT_THREADS must be a positive integer") from None
    if value is not None and value < 1:
        raise UsageError("--threads must be a positive integer")
    # all work is single-threaded; the cap is accepted for interface parity
    return value or 1


def execute(command: str, params: dict, seed) -> dict:
    """Run one command and return its validated report."""
    fixtures = load_fixtures()
    if seed is None:
        seed = fixtures["seed"] if command == "verify" else 0
    inputs = dict(params)
    for key in FILE_PARAMS & set(params):
        if params[key]:
            inputs[key] = _file_echo(params[key])
    results, details = COMMANDS[command](params, seed)
    outputs = {"results": results}
    if details:
        outputs["details"] = details
    report = jsonable({
        "command": command,
        "inputs": inputs,
        "outputs": outputs,
        "provenance": {"seed": seed, "version": __version__, "fixture": fixtures["fixture"]},
    })
    validate_report(report)
    return report


def make_manifest(command, params, seed) -> dict:
    fixtures = load_fixtures()
    return {"command": command, "parameters": params, "seed": seed, "sweep": list(SWEEP),
            "fixture": fixtures["fixture"]}


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "replay":
            man = json.loads(Path(args.manifest).read_text())
            if man.get("fixture") != load_fixtures()["fixture"]:
                raise CalibrationError(f"manifest fixture {man.get('fixture')!r} differs from the installed one")
            if man.get("command") not in COMMANDS:
                raise UsageError(f"manifest names unknown command {man.get('command')!r}")
            command, params, seed, out = man["command"], man["parameters"], man["seed"], args.out
        else:
            resolve_threads(args.threads)
            params = {k: v for k, v in vars(args).items() if k not in META}
            command, seed, out = args.command, args.seed, args.out
            if args.save_manifest:
                Path(args.save_manifest).write_text(
                    json.dumps(make_manifest(command, params, seed), indent=2, sort_keys=True) + "\n")
        report = execute(command, params, seed)
        _emit(dumps_report(report), out)
        if command == "verify" and not all(r["value"] for r in report["outputs"]["results"].values()):
            return EXIT_VERIFY
        return EXIT_OK
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except CalibrationError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except InvalidParameter as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        msg = exc.args[0] if len(exc.args) == 1 else f"file not found: {exc.filename}"
        print(msg, file=sys.stderr)
        return EXIT_COMPUTE
    except (ShatterkitError, OSError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
