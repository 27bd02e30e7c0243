"""Command-line interface: ``cartannf {diagnose,check,normalize,verify,ito}``.

Exit codes: 0 success, 1 verification mismatch or failed residual check,
2 input error, 3 Cartan/regularity violation, 4 normal form outside the
module, 5 commutation failure, 6 inconsistent Newton solve, 7 budget exceeded.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, dataclass

from .cartan import certify_cartan, decompose_over_module, single_field_morphism
from .errors import CartanViolation, NormalFormError, NotInModule
from .fields import VectorField, pullback
from .hamiltonian import (
    build_ito_morphism,
    check_star_condition,
    Hamiltonian,
    hamiltonian_vector_field,
    verify_action_normal_form,
)
from .io import (
    ParseError,
    diagonalizing_map,
    dump_json,
    linear_pullback,
    load_json,
    matrix_to_json,
    parse_diffeo,
    parse_family,
    parse_field,
    parse_morphism,
    parse_series,
)
from .normalizer import Mode, normalize_family
from .scalars import DEFAULT_TOL, Arith
from .torus import DEFAULT_ENUM_BUDGET, nonzero_weight_part, omega_sequence

log = logging.getLogger("cartannf")

EMIT_CHOICES = ("nf", "diffeo", "report", "estimates")
MODE_CHOICES = ("auto", "newton", "stepwise")


@dataclass(frozen=True)
class SessionConfig:
    arith: str = "exact"
    tol: float = DEFAULT_TOL
    order: int = 8
    mode: str = "auto"
    seed: int = 0
    budget: int = DEFAULT_ENUM_BUDGET
    emit: tuple = ("nf", "diffeo", "report")
    out: str | None = None

    def __post_init__(self):
        if self.order < 2:
            raise ParseError("--order must be >= 2")
        if self.budget <= 0:
            raise ParseError("--budget must be positive")
        if self.mode not in MODE_CHOICES:
            raise ParseError(f"unknown --mode {self.mode!r}; choose from {MODE_CHOICES}")
        if self.tol <= 0:
            raise ParseError("--tol must be positive")
        bad = [e for e in self.emit if e not in EMIT_CHOICES]
        if bad:
            raise ParseError(f"unknown --emit entries {bad}; choose from {EMIT_CHOICES}")

    @property
    def arithmetic(self) -> Arith:
        return Arith(self.arith == "exact", self.tol)

    def to_json(self) -> dict:
        out = asdict(self)
        out["emit"] = list(self.emit)
        return out


def _config(args) -> SessionConfig:
    emit = tuple(e.strip() for e in args.emit.split(",") if e.strip())
    return SessionConfig(args.arith, args.tol, args.order, args.mode, args.seed, args.budget, emit, args.out)


def _prepare_family(path: str, cfg: SessionConfig):
    """Parse a family, diagonalize the first linear part if needed, and pick S."""
    arith = cfg.arithmetic
    fam = parse_family(load_json(path), cfg.order, arith)
    fields = fam.fields
    P = fam.linear_map
    if P is None:
        P = diagonalizing_map(fields[0].linear_part(), arith)
    if P is not None:
        fields = [linear_pullback(P, X) for X in fields]
    S = fam.S
    if S is None:
        if len(fields) != 1:
            raise ParseError("a family with several members needs a 'morphism'")
        S = single_field_morphism(fields[0].jet(1))
    return fields, S, P


# -- subcommands ------------------------------------------------------------------


def cmd_diagnose(args, cfg: SessionConfig) -> int:
    data = load_json(args.input)
    morph = data.get("morphism", data) if isinstance(data, dict) else None
    if morph is None:
        raise ParseError("expected an object with 'Lambda' or 'morphism'")
    S = parse_morphism(morph, cfg.arithmetic)
    report = omega_sequence(S, args.kmax, cfg.budget)
    out = {"config": cfg.to_json(), "report": report.to_json()}
    text = dump_json(out, cfg.out)
    if cfg.out is None:
        sys.stdout.write(text)
    if args.table:
        sys.stderr.write(report.table() + "\n")
    return 0


def cmd_check(args, cfg: SessionConfig) -> int:
    fields, S, P = _prepare_family(args.input, cfg)
    orders = [int(X.valuation) for X in fields]
    out = {"config": cfg.to_json(), "orders": orders, "regular": False, "commuting": None, "cartan": None}
    code = 0
    try:
        NF, _, report = normalize_family(fields, S, cfg.order, Mode.STEPWISE, verify=False, seed=cfg.seed)
        out.update(regular=True, commuting=True)
        cert = certify_cartan(decompose_over_module(NF, S))
        out.update(cert.to_json())
        out["g0"] = [cfg.arithmetic.to_json(v) for v in report.g0]
        if not cert.cartan:
            code = 3
    except NormalFormError as exc:
        out["error"] = {"type": type(exc).__name__, "message": str(exc)}
        if type(exc).__name__ == "CommutationFailure":
            out.update(regular=True, commuting=False)
        code = exc.exit_code
    _emit(out, cfg)
    return code


def _emit(out: dict, cfg: SessionConfig) -> None:
    text = dump_json(out, cfg.out)
    if cfg.out is None:
        sys.stdout.write(text)


def cmd_normalize(args, cfg: SessionConfig) -> int:
    arith = cfg.arithmetic
    fields, S, P = _prepare_family(args.input, cfg)
    est = "estimates" in cfg.emit
    fallback = None
    if cfg.mode == "auto":
        try:
            NF, psi, report = normalize_family(fields, S, cfg.order, Mode.NEWTON, estimates=est, seed=cfg.seed)
        except (CartanViolation, NotInModule) as exc:
            # the Newton step needs a Cartan-type family; stepwise does not
            fallback = f"{type(exc).__name__}: {exc}"
            log.info("newton mode not applicable (%s); running stepwise", fallback)
            NF, psi, report = normalize_family(fields, S, cfg.order, Mode.STEPWISE, seed=cfg.seed)
    else:
        NF, psi, report = normalize_family(fields, S, cfg.order, cfg.mode, estimates=est, seed=cfg.seed)
    steps_ok = all(s.normal_ok and s.residual_ok for s in report.steps)
    ok = report.master_invariant and report.normalized and steps_ok
    out = {"config": cfg.to_json(), "morphism": {"Lambda": matrix_to_json([list(r) for r in S.Lambda], arith)}}
    if "nf" in cfg.emit:
        out["nf"] = [X.to_json() for X in NF]
    if "diffeo" in cfg.emit:
        out["diffeo"] = {"linear_map": None if P is None else matrix_to_json(P, arith), "psi": psi.to_json()}
    if "report" in cfg.emit or est:
        out["report"] = report.to_json(arith)
    out["residual_checks"] = {
        "master_invariant": report.master_invariant,
        "normalized": report.normalized,
        "steps": steps_ok,
        "passed": ok,
    }
    if cfg.mode == "auto":
        out["mode_used"] = report.mode
        out["newton_fallback"] = fallback
    _emit(out, cfg)
    return 0 if ok else 1


def first_failure(A: VectorField, B: VectorField) -> int | None:
    diff = A - B
    return None if diff.is_zero() else int(diff.valuation)


def cmd_verify(args, cfg: SessionConfig) -> int:
    arith = cfg.arithmetic
    result = load_json(args.result)
    try:
        rcfg = result["config"]
        order = int(rcfg["order"])
        nf_data = result["nf"]
        diffeo = result["diffeo"]
        Lambda = result["morphism"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"result file lacks {exc}") from exc
    cfg2 = SessionConfig(rcfg.get("arith", cfg.arith), rcfg.get("tol", cfg.tol), order, rcfg.get("mode", "auto"))
    arith = cfg2.arithmetic
    fam = parse_family(load_json(args.family), order, arith)
    fields = fam.fields
    P = diffeo.get("linear_map")
    if P is not None:
        P = [[arith.coerce(v) for v in row] for row in P]
        fields = [linear_pullback(P, X) for X in fields]
    psi = parse_diffeo(diffeo["psi"], arith)
    S = parse_morphism(Lambda, arith)
    K = psi.order
    NF = [parse_field(d, S.n, K, arith) for d in nf_data]
    failures = []
    for i, (X, Y) in enumerate(zip(fields, NF)):
        d = int(X.valuation)
        top = order + d - 1
        Z = pullback(psi, X.with_order(K)).jet(top)
        deg = first_failure(Z, Y.jet(top))
        if deg is not None:
            failures.append({"member": i + 1, "check": "conjugation", "degree": deg})
        rest = nonzero_weight_part(Y, S)
        if not rest.is_zero():
            failures.append({"member": i + 1, "check": "normal", "degree": int(rest.valuation)})
    out = {"ok": not failures, "failures": failures}
    _emit(out, cfg)
    return 0 if not failures else 1


def cmd_ito(args, cfg: SessionConfig) -> int:
    arith = cfg.arithmetic
    data = load_json(args.input)
    try:
        n_pairs = int(data["n_pairs"])
        raw = data["hamiltonians"]
        bound = int(data.get("star_bound", 20))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"ito input needs n_pairs and hamiltonians: {exc!r}") from exc
    n = 2 * n_pairs
    hams = []
    for h in raw:
        series = parse_series(dict(h, order=cfg.order + 1), n, cfg.order + 1, arith)
        try:
            hams.append(Hamiltonian(series))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    if len(hams) != n_pairs:
        raise ParseError(f"expected {n_pairs} Hamiltonians, got {len(hams)}")
    star = check_star_condition(hams[0].lambdas, bound, arith)
    S = build_ito_morphism(n_pairs, arith)
    fields = [hamiltonian_vector_field(H).with_order(cfg.order) for H in hams]
    out = {"config": cfg.to_json(), "star": star.to_json()}
    mode = Mode.NEWTON if cfg.mode == "auto" else cfg.mode
    NF, psi, report = normalize_family(fields, S, cfg.order, mode, seed=cfg.seed)
    verdict = verify_action_normal_form(NF, S)
    out.update(
        {
            "normalized": report.normalized,
            "master_invariant": report.master_invariant,
            "action_normal_form": verdict,
            "symplectic": "not performed: the normalizing jet is not made symplectic",
        }
    )
    if "nf" in cfg.emit:
        out["nf"] = [X.to_json() for X in NF]
    _emit(out, cfg)
    return 0 if (star.holds and verdict and report.normalized and report.master_invariant) else 1


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=8, help="truncation order N (default 8)")
    common.add_argument(
        "--mode", choices=MODE_CHOICES, default="auto",
        help="newton, stepwise, or auto (newton, falling back to stepwise for non-Cartan input)",
    )
    common.add_argument("--arith", choices=["exact", "float"], default="exact")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="float zero tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=DEFAULT_ENUM_BUDGET, help="multi-index enumeration cap")
    common.add_argument("--emit", default="nf,diffeo,report", help=f"comma list from {','.join(EMIT_CHOICES)}")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cartannf", description="Normal forms of commuting families of vector fields.")
    sub = p.add_subparsers(dest="command", required=True)
    d = sub.add_parser("diagnose", parents=[common], help="small-divisor report omega_k(S)")
    d.add_argument("input")
    d.add_argument("--kmax", type=int, default=4)
    d.add_argument("--table", action="store_true", help="also print a table on stderr")
    c = sub.add_parser("check", parents=[common], help="regularity and Cartan-type certificate")
    c.add_argument("input")
    n = sub.add_parser("normalize", parents=[common], help="normalize a family to order N")
    n.add_argument("input")
    v = sub.add_parser("verify", parents=[common], help="replay a normalize result against its input")
    v.add_argument("family")
    v.add_argument("result")
    i = sub.add_parser("ito", parents=[common], help="Hamiltonian front-end")
    i.add_argument("input")
    return p


COMMANDS = {
    "diagnose": cmd_diagnose,
    "check": cmd_check,
    "normalize": cmd_normalize,
    "verify": cmd_verify,
    "ito": cmd_ito,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except NormalFormError as exc:
        sys.stderr.write(f"error ({type(exc).__name__}): {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
