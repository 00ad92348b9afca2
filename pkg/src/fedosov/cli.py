"""Batch front end: one JSON scenario in, one report out.

Exit status is 0 when the run succeeds and every contract check passes, 2
when the run completes but reports a violated contract (non-central cocycle
residuals, a rejected membership test, a nonzero certificate), and 1 when
the scenario itself is unusable.  Input errors carry JSON-pointer paths into
the scenario file.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

import jsonschema
from gmpy2 import mpq

from .basefunc import BaseFunction, NotInvertibleError
from .cohomology import (
    CentralExtension,
    ComplexError,
    FiniteGroup,
    InfiniteCyclic,
    SimplicialComplex,
    connecting_map_H2,
    period_map,
    simplicial_cohomology,
    toy_z4_extension,
    z_h1_invariants,
)
from .engine import ConnectionError_, ConsistencyError, ThetaNotClosedError, build_fedosov, sigma, star, tau
from .equivariance import (
    ClassNotPreservedError,
    ExtensionAssignment,
    check_cocycle,
    gnabla_membership,
    harmonic_witness,
    solve_lift,
)
from .forms import ScalarForm
from .geometry import (
    AffineConnectionData,
    AffineSymplecto,
    ChartManifold,
    GeometryError,
    GroupAction,
    UnsupportedOperationError,
    check_symplectic_connection,
)
from .sampling import random_function, random_polynomial, rng_for, small_scalar
from .scalars import field_from_name
from .series import HbarSeries
from .weyl import WeylElement, weyl_mul

COMMANDS = (
    "star",
    "fedosov-build",
    "flat-section",
    "lift",
    "cocycle-check",
    "dmap",
    "witness",
    "classify",
    "cech",
    "h2-connect",
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VIOLATION = 2


class InputError(Exception):
    """Unusable scenario; ``errors`` is a list of ``(pointer, message)``."""

    def __init__(self, errors):
        super().__init__("; ".join(f"{p or '/'}: {m}" for p, m in errors))
        self.errors = errors


def _pointer(path):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def _schema():
    text = resources.files("fedosov").joinpath("schemas/scenario.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_scenario(path, command):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError([("", f"cannot read scenario: {exc.strerror}")]) from exc
    except json.JSONDecodeError as exc:
        raise InputError([("", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")]) from exc
    if isinstance(data, dict) and "command" not in data:
        data = dict(data, command=command)
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (_pointer(e.absolute_path), e.message))
    if errors:
        raise InputError([(_pointer(e.absolute_path), e.message) for e in errors])
    if data["command"] != command:
        raise InputError([("/command", f"scenario is for {data['command']!r}, invoked as {command!r}")])
    return data


# scenario decoding ------------------------------------------------------------

class Context:
    """Decoded common blocks of a scenario."""

    def __init__(self, data, seed, order):
        self.data = data
        self.seed = seed if seed is not None else data.get("seed", 0)
        self.field = field_from_name(data.get("scalar", "exact"))
        self.D = order if order is not None else data.get("D")
        if self.D is not None and (self.D < 2 or self.D % 2):
            raise InputError([("/D", f"truncation degree must be even and at least 2, got {self.D}")])
        self.manifold = None
        if "manifold" in data:
            m = data["manifold"]
            self.manifold = ChartManifold(m["kind"], m["n"])

    def scalar(self, value, pointer):
        try:
            return self.field.from_json(value) if isinstance(value, str) else self.field.coerce(value)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise InputError([(pointer, f"not a scalar: {value!r} ({exc})")]) from exc

    def rational(self, value, pointer):
        try:
            return mpq(str(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError([(pointer, f"not a rational number: {value!r}")]) from exc

    def function(self, desc, pointer):
        M = self.manifold
        terms = {}
        for t, entry in enumerate(desc["terms"]):
            key = tuple(entry["key"])
            if len(key) != M.dim:
                raise InputError([(f"{pointer}/terms/{t}/key", f"key needs {M.dim} entries")])
            if M.kind == "euclidean" and min(key) < 0:
                raise InputError([(f"{pointer}/terms/{t}/key", "polynomial exponents must be nonnegative")])
            c = self.scalar(entry["coef"], f"{pointer}/terms/{t}/coef")
            terms[key] = terms[key] + c if key in terms else c
        return BaseFunction(M.kind, M.dim, terms, self.field)

    def form(self, entries, pointer, degree=None):
        space = self.manifold.space(self.D, self.field)
        comps = {}
        for t, entry in enumerate(entries):
            I = tuple(entry["dx"])
            if any(I[s] >= I[s + 1] for s in range(len(I) - 1)) or any(i >= space.dim for i in I):
                raise InputError([(f"{pointer}/{t}/dx", "form indices must be increasing and in range")])
            if degree is not None and len(I) != degree:
                raise InputError([(f"{pointer}/{t}/dx", f"expected a {degree}-form component")])
            a = space.from_base(self.function(entry["f"], f"{pointer}/{t}/f"), k=entry.get("k", 0))
            comps[I] = comps[I] + a if I in comps else a
        return ScalarForm._make(space, comps)

    def connection(self):
        block = self.data.get("connection")
        M = self.manifold
        if not block or not block.get("lowered"):
            return AffineConnectionData.flat(M, self.field)
        lowered = {}
        for t, entry in enumerate(block["lowered"]):
            key = (entry["k"], entry["i"], entry["j"])
            if max(key) >= M.dim:
                raise InputError([(f"/connection/lowered/{t}", f"index out of range for dimension {M.dim}")])
            f = self.function(entry["f"], f"/connection/lowered/{t}/f")
            lowered[key] = lowered[key] + f if key in lowered else f
        c = AffineConnectionData.from_lowered(M, lowered, self.field)
        report = check_symplectic_connection(c)
        if not (report["torsion_free"] and report["symplectic"]):
            bad = report["torsion_violation"] or report["symplectic_violation"]
            raise InputError([("/connection/lowered", f"lowered symbols are not totally symmetric at {list(bad)}")])
        return c

    def theta(self, key="theta"):
        if key not in self.data:
            return None
        return self.form(self.data[key], f"/{key}", degree=2)

    def fedosov(self, theta_key="theta", D=None):
        try:
            return build_fedosov(self.manifold, self.connection(), self.theta(theta_key), D or self.D, self.field)
        except ThetaNotClosedError as exc:
            raise InputError([(f"/{theta_key}", str(exc))]) from exc
        except ConnectionError_ as exc:
            raise InputError([("/connection", str(exc))]) from exc

    def affine_map(self, desc, pointer):
        M = self.manifold
        A = desc["A"]
        if len(A) != M.dim or any(len(row) != M.dim for row in A):
            raise InputError([(f"{pointer}/A", f"linear part must be {M.dim}x{M.dim}")])
        A = [[self.rational(x, f"{pointer}/A/{i}/{j}") for j, x in enumerate(row)] for i, row in enumerate(A)]
        key = "b_phase" if M.kind == "torus" else "b"
        other = "b" if key == "b_phase" else "b_phase"
        if other in desc:
            raise InputError([(f"{pointer}/{other}", f"use {key!r} on a {M.kind} manifold")])
        b = None
        if key in desc:
            b = [self.scalar(x, f"{pointer}/{key}/{j}") for j, x in enumerate(desc[key])]
        try:
            return AffineSymplecto(M, A, b, self.field)
        except GeometryError as exc:
            raise InputError([(pointer, str(exc))]) from exc

    def action(self):
        desc = self.data["action"]
        gens = [self.affine_map(g, f"/action/generators/{t}") for t, g in enumerate(desc["generators"])]
        try:
            if desc["group"] == "finite":
                return GroupAction.finite(self.manifold, gens, self.field, max_order=256)
            return GroupAction.free_abelian(self.manifold, gens, self.field)
        except GeometryError as exc:
            raise InputError([("/action", str(exc))]) from exc

    def weyl(self, desc, pointer):
        space = self.manifold.space(self.D, self.field)
        terms = {}
        for t, entry in enumerate(desc["terms"]):
            alpha, x = tuple(entry["alpha"]), tuple(entry["x"])
            if len(alpha) != space.dim or len(x) != space.dim:
                raise InputError([(f"{pointer}/terms/{t}", f"alpha and x need {space.dim} entries")])
            if self.manifold.kind == "euclidean" and min(x) < 0:
                raise InputError([(f"{pointer}/terms/{t}/x", "polynomial exponents must be nonnegative")])
            c = self.scalar(entry["coef"], f"{pointer}/terms/{t}/coef")
            key = (entry["k"], alpha, x)
            terms[key] = terms[key] + c if key in terms else c
        return WeylElement(space, terms)

    def require(self, *keys):
        missing = [k for k in keys if k not in self.data]
        if missing:
            raise InputError([("", f"missing required block {k!r}") for k in missing])


def _series_json(s):
    return s.to_json()


def _count_terms(form):
    return sum(len(a.terms) for a in form.comps.values())


# commands -----------------------------------------------------------------

def cmd_star(ctx):
    F = ctx.fedosov()
    data = ctx.data
    rng = rng_for(ctx.seed)
    pairs = []
    if "f" in data or "g" in data:
        ctx.require("f", "g")
        pairs.append((ctx.function(data["f"], "/f"), ctx.function(data["g"], "/g")))
    else:
        deg = data.get("max_degree", 2)
        for _ in range(data.get("samples", 1)):
            if ctx.manifold.kind == "torus":
                pairs.append((random_function(rng, ctx.manifold, ctx.field), random_function(rng, ctx.manifold, ctx.field)))
            else:
                pairs.append(
                    (
                        random_polynomial(rng, ctx.manifold.dim, deg, field=ctx.field),
                        random_polynomial(rng, ctx.manifold.dim, deg, field=ctx.field),
                    )
                )
    results = []
    for f, g in pairs:
        results.append({"f": f.to_json()["terms"], "g": g.to_json()["terms"], "star": _series_json(star(F, f, g))})
    return {"reliable_order": F.N, "pairs": results}, False


def cmd_fedosov_build(ctx):
    F = ctx.fedosov()
    report = F.to_json()
    rebuilt = build_fedosov(F.manifold, F.connection, F.theta, F.D, F.field)
    report["rebuild_identical"] = rebuilt.r == F.r
    bad = any(report["certificates"].values()) or not report["rebuild_identical"]
    return report, bad


def cmd_flat_section(ctx):
    F = ctx.fedosov()
    f = ctx.function(ctx.data["f"], "/f")
    t = tau(F, f)
    back = sigma(t, F.N)
    roundtrip = back.equal_through(HbarSeries.of(f, F.N), F.N)
    residual = _count_terms(F.flatness_residual(t))
    return {
        "section": t.to_json(),
        "sigma": back.to_json(),
        "sigma_tau_identity": roundtrip,
        "flatness_residual_terms": residual,
    }, (not roundtrip) or residual != 0


def cmd_lift(ctx):
    F = ctx.fedosov()
    source = ctx.fedosov("source_theta") if "source_theta" in ctx.data else None
    gamma = ctx.affine_map(ctx.data["map"], "/map")
    primitive = ctx.form(ctx.data["primitive"], "/primitive", degree=1) if "primitive" in ctx.data else None
    try:
        L = solve_lift(F, gamma, primitive, source)
    except UnsupportedOperationError as exc:
        raise InputError([("/map", str(exc))]) from exc
    except ClassNotPreservedError as exc:
        return {"lift": None, "finding": str(exc)}, True
    rng = rng_for(ctx.seed)
    src = L.source
    checks = []
    for _ in range(ctx.data.get("samples", 2)):
        f = random_function(rng, ctx.manifold, ctx.field)
        g = random_function(rng, ctx.manifold, ctx.field)
        lhs = L.apply(star(src, f, g))
        rhs = star(F, L.apply(f), L.apply(g))
        checks.append(
            {
                "f": f.to_json()["terms"],
                "g": g.to_json()["terms"],
                "morphism_residual_zero": (lhs - rhs).is_zero_through(F.N),
            }
        )
    report = {
        "U": L.U.to_json(),
        "kappa": L.kappa.series_json(),
        "iterations": L.iterations,
        "intertwining_checks": checks,
    }
    return report, not all(c["morphism_residual_zero"] for c in checks)


def _perturbation(ctx, act):
    rng = rng_for(ctx.seed)
    space = ctx.manifold.space(ctx.D, ctx.field)
    f = random_function(rng, ctx.manifold, ctx.field, max_degree=1)
    if ctx.manifold.kind == "torus":
        f = f + BaseFunction.fourier_mode([1] * space.dim, small_scalar(rng, ctx.field) or 1, ctx.field)
    else:
        f = f + BaseFunction.coordinate(space.dim, 0, ctx.field)
    alpha = [0] * space.dim
    alpha[0] = 2
    bump = space.from_base(f, k=1, alpha=alpha)
    return space.one() + bump


def cmd_cocycle_check(ctx):
    act = ctx.action()
    F = ctx.fedosov()
    block = ctx.data.get("assignment", {})
    space = F.space
    if "generator_values" in block:
        vals = [ctx.weyl(v, f"/assignment/generator_values/{t}") for t, v in enumerate(block["generator_values"])]
        if len(vals) != len(act.generators):
            raise InputError([("/assignment/generator_values", f"expected {len(act.generators)} values, one per generator")])
    else:
        vals = [space.one() for _ in act.generators]
    if "perturb" in block:
        i = block["perturb"]["generator"]
        if i >= len(vals):
            raise InputError([("/assignment/perturb/generator", "generator index out of range")])
        vals[i] = weyl_mul(vals[i], _perturbation(ctx, act))
    try:
        E = ExtensionAssignment(F, act, generator_values=vals)
        rep = check_cocycle(E)
    except NotInvertibleError as exc:
        raise InputError([("/assignment/generator_values", str(exc))]) from exc
    return {"action": act.to_json(), "report": rep.to_json()}, not rep.ok


def cmd_dmap(ctx):
    F = ctx.fedosov()
    U = ctx.weyl(ctx.data["U"], "/U")
    try:
        g = gnabla_membership(F, U)
    except NotInvertibleError as exc:
        raise InputError([("/U", f"U is not invertible: {exc}")]) from exc
    if not g:
        return {"membership": g.to_json()}, True
    beta = g.beta
    report = {"membership": {"member": True}, "D": beta.series_json(), "closed": beta.d().is_zero()}
    if ctx.manifold.kind == "torus":
        report["periods"] = period_map(beta).to_json()
    return report, not report["closed"]


def cmd_witness(ctx):
    F = ctx.fedosov()
    c = [ctx.scalar(x, f"/covector/{j}") for j, x in enumerate(ctx.data["covector"])]
    if len(c) != F.space.dim:
        raise InputError([("/covector", f"covector needs {F.space.dim} entries")])
    try:
        g = harmonic_witness(F, c)
    except UnsupportedOperationError as exc:
        raise InputError([("/manifold", str(exc))]) from exc
    space = g.beta.space
    target = ScalarForm._make(space, {(i,): space.scalar(c[i]) for i in range(space.dim)})
    hit = (g.beta - target).is_zero()
    return {"U": g.U.to_json(), "D": g.beta.series_json(), "hits_target": hit, "periods": period_map(g.beta).to_json()}, not hit


def cmd_classify(ctx):
    act = ctx.action()
    if act.is_finite or act.rank != 1:
        raise InputError([("/action", "classification invariants need a single generator of Z")])
    F = ctx.fedosov()
    point = None
    if "fixed_point" in ctx.data:
        point = [ctx.scalar(x, f"/fixed_point/{j}") for j, x in enumerate(ctx.data["fixed_point"])]
        if not act.generators[0].fixes(point):
            raise InputError([("/fixed_point", "point is not fixed by the generator")])
    reports = []
    for t, cov in enumerate(ctx.data["witnesses"]):
        c = [ctx.scalar(x, f"/witnesses/{t}/{j}") for j, x in enumerate(cov)]
        if ctx.manifold.kind == "torus":
            if len(c) != F.space.dim:
                raise InputError([(f"/witnesses/{t}", f"covector needs {F.space.dim} entries")])
            g = harmonic_witness(F, c)
        else:
            if len(c) != 1 or ctx.field.is_zero(c[0]):
                raise InputError([(f"/witnesses/{t}", "euclidean witnesses are one nonzero constant")])
            g = F.space.scalar(c[0])
        try:
            reports.append(z_h1_invariants(F, act, g, point))
        except UnsupportedOperationError as exc:
            raise InputError([("/manifold", str(exc))]) from exc
    keys = [json.dumps(r, sort_keys=True) for r in reports]
    distinct = len(set(keys)) == len(keys)
    return {"invariants": reports, "pairwise_distinct": distinct}, False


def cmd_cech(ctx):
    desc = ctx.data["complex"]
    try:
        if desc == "tetrahedron_boundary":
            K = SimplicialComplex.tetrahedron_boundary()
        elif desc == "torus7":
            K = SimplicialComplex.torus7()
        else:
            K = SimplicialComplex(desc["n_vertices"], desc["simplices"])
    except ComplexError as exc:
        raise InputError([("/complex", str(exc))]) from exc
    coeff = ctx.data.get("coefficients", "Z")
    rep = simplicial_cohomology(K, coeff)
    return {"complex": K.to_json(), "euler_characteristic": K.euler_characteristic(), "cohomology": rep.to_json()}, False


def _extension(ctx):
    desc = ctx.data["extension"]
    if desc == "toy_z4":
        return toy_z4_extension()
    E = FiniteGroup.cyclic(desc["E"]["cyclic"])
    G = FiniteGroup.cyclic(desc["G"]["cyclic"])
    m, k = desc["E"]["cyclic"], desc["G"]["cyclic"]
    if m % k:
        raise InputError([("/extension/G/cyclic", f"Z/{k} is not a quotient of Z/{m}")])
    negate = desc.get("action", "trivial") == "negation"
    if desc["Gamma"] == "Z":
        Gamma = InfiniteCyclic()
        act_E = (lambda n, e: (-e) % m) if negate else None
        act_G = (lambda n, g: (-g) % k) if negate else None
    else:
        Gamma = FiniteGroup.cyclic(desc["Gamma"]["cyclic"])
        act_E = (lambda n, e: e if n % 2 == 0 else (-e) % m) if negate else None
        act_G = (lambda n, g: g if n % 2 == 0 else (-g) % k) if negate else None
        if negate and desc["Gamma"]["cyclic"] % 2:
            raise InputError([("/extension/action", "negation needs a Gamma of even order")])
    try:
        return CentralExtension(Gamma, E, G, lambda e: e % k, act_E, act_G, section=lambda g: g)
    except ValueError as exc:
        raise InputError([("/extension", str(exc))]) from exc


def _int_keyed(block, pointer):
    out = {}
    for key, v in block.items():
        try:
            out[int(key)] = v
        except ValueError as exc:
            raise InputError([(f"{pointer}/{key}", "keys must be group elements written as integers")]) from exc
    return out


def cmd_h2_connect(ctx):
    ext = _extension(ctx)
    eta = _int_keyed(ctx.data["eta"], "/eta")
    lift = _int_keyed(ctx.data["lift"], "/lift") if "lift" in ctx.data else None
    try:
        if isinstance(ext.Gamma, InfiniteCyclic):
            if 1 not in eta:
                raise InputError([("/eta", "for Gamma = Z give the value on the generator under key '1'")])
            res = connecting_map_H2(ext, eta[1], None if lift is None else lift.get(1))
        else:
            missing = [g for g in ext.Gamma.elements if g not in eta]
            if missing:
                raise InputError([("/eta", f"eta is missing elements {missing}")])
            res = connecting_map_H2(ext, eta, lift)
    except InputError:
        raise
    except ValueError as exc:
        raise InputError([("/eta", str(exc))]) from exc
    report = res.to_json()
    return report, not (res.identity_ok and res.relift_consistent)


HANDLERS = {
    "star": cmd_star,
    "fedosov-build": cmd_fedosov_build,
    "flat-section": cmd_flat_section,
    "lift": cmd_lift,
    "cocycle-check": cmd_cocycle_check,
    "dmap": cmd_dmap,
    "witness": cmd_witness,
    "classify": cmd_classify,
    "cech": cmd_cech,
    "h2-connect": cmd_h2_connect,
}


# output -------------------------------------------------------------------

def _text_lines(obj, prefix=""):
    if isinstance(obj, dict):
        if not obj:
            yield f"{prefix} = {{}}"
        for key in sorted(obj):
            yield from _text_lines(obj[key], f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(obj, list):
        if not obj:
            yield f"{prefix} = []"
        for i, v in enumerate(obj):
            yield from _text_lines(v, f"{prefix}[{i}]")
    else:
        yield f"{prefix} = {json.dumps(obj)}"


def render(report, fmt):
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    return "\n".join(_text_lines(report)) + "\n"


def run(command, scenario_path, seed=None, order=None):
    """Execute one scenario; returns ``(exit_code, report)``."""
    try:
        data = load_scenario(scenario_path, command)
        ctx = Context(data, seed, order)
        body, violation = HANDLERS[command](ctx)
    except InputError as exc:
        report = {
            "command": command,
            "status": "input_error",
            "errors": [{"pointer": p, "message": m} for p, m in exc.errors],
        }
        return EXIT_INPUT, report
    except (ConsistencyError, ValueError, UnsupportedOperationError) as exc:
        report = {
            "command": command,
            "status": "contract_violation",
            "finding": f"{type(exc).__name__}: {exc}",
        }
        return EXIT_VIOLATION, report
    report = {
        "command": command,
        "seed": ctx.seed,
        "status": "contract_violation" if violation else "ok",
        "result": body,
    }
    if ctx.D is not None:
        report["D"] = ctx.D
    return (EXIT_VIOLATION if violation else EXIT_OK), report


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="fedosov", description="Fedosov quantization experiments from scenario files.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a {name} scenario")
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--seed", type=_u64, help="override the scenario seed")
        p.add_argument("--order", type=int, help="override the truncation degree D")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    code, report = run(args.command, args.scenario, args.seed, args.order)
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_INPUT:
        for err in report["errors"]:
            print(f"input error at {err['pointer'] or '/'}: {err['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
