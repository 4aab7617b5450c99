"""Command-line interface: ``treeharm <command> [options]``.

Every option can also be set through an environment variable named
TREEHARM_<OPTION> (upper case, dashes as underscores), e.g. TREEHARM_ALPHA=1.5.
Command-line flags win over the environment.

Exit codes:
  0  success
  1  a verification suite found violations
  2  usage or configuration error
  3  malformed or unreadable input file
  4  precondition failure (e.g. CZ level below the admissible threshold)
  5  input violates an invariant (e.g. a file that is not an atom)
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

from . import czmax, hardy_bmo, measure, operators, suites
from . import io as tio
from .measure import MeasureParams
from .tree import cumulative_count

MAX_DEPTH_CAP = 12

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_MALFORMED, EXIT_PRECONDITION, EXIT_INVALID = range(6)

SWEEP_COLUMNS = ["q", "alpha", "suite", "lambda_factor", "gamma", "p", "samples", "checks", "violations", "worst_quotient"]
VERIFY_COLUMNS = ["suite", "q", "alpha", "seed", "samples", "checks", "violations", "worst_quotient", "passed"]


class UsageError(Exception):
    pass


class InvalidInputError(Exception):
    pass


@dataclass
class RunConfig:
    q: int = 2
    alpha: float = 2.0
    max_depth: int = 6
    seed: int = 0
    samples: int = 200
    input: str | None = None
    output: str | None = None
    format: str = "json"
    suite: str | None = None
    lambdas: list[float] = field(default_factory=lambda: list(suites.DEFAULT_LAMBDA_FACTORS))
    gammas: list[float] = field(default_factory=lambda: list(suites.DEFAULT_GAMMAS))
    ps: list[float] = field(default_factory=lambda: list(suites.DEFAULT_PS))
    rs: list[float] = field(default_factory=lambda: list(suites.DEFAULT_RS))
    radii: list[float] | None = None
    timestamp: bool = True

    def validate(self) -> None:
        if self.q < 2:
            raise UsageError("q must be at least 2")
        if not self.alpha > 1:
            raise UsageError("alpha must exceed 1")
        if not 0 <= self.max_depth <= MAX_DEPTH_CAP:
            raise UsageError(f"max_depth must lie in [0, {MAX_DEPTH_CAP}]")
        if self.samples < 1:
            raise UsageError("samples must be positive")
        if self.format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        if any(not r > 0 for r in self.radii or []):
            raise UsageError("radii must be positive")

    def measure(self) -> MeasureParams:
        return MeasureParams.of(self.q, self.alpha)


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _env(name: str, default=None):
    return os.environ.get("TREEHARM_" + name.upper().replace("-", "_"), default)


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options (env TREEHARM_<NAME> sets the default)")
    g.add_argument("--q", type=int, default=_env("q", 2))
    g.add_argument("--alpha", type=float, default=_env("alpha", 2.0))
    g.add_argument("--max-depth", type=int, default=_env("max_depth", 6))
    g.add_argument("--seed", type=int, default=_env("seed", 0))
    g.add_argument("--samples", type=int, default=_env("samples", 200))
    g.add_argument("--input", "-i", default=_env("input"))
    g.add_argument("--output", "-o", default=_env("output"))
    g.add_argument("--format", choices=["json", "csv"], default=_env("format", "json"))
    g.add_argument(
        "--no-timestamp",
        action="store_true",
        default=_env("no_timestamp", "0").lower() in ("1", "true", "yes"),
        help="omit the timestamp field so reports are byte-identical across runs",
    )
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="treeharm",
        description="Harmonic analysis on homogeneous trees with the measure q^{-alpha|x|}.",
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, **kw):
        return sub.add_parser(name, parents=[common], help=help_, formatter_class=argparse.RawDescriptionHelpFormatter, **kw)

    add("info", "total mass, doubling constant and level index table")
    p = add("cz", "Calderon-Zygmund decomposition of the input function")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    add("maximal", "dyadic Hardy-Littlewood maximal function of the input")
    add("sharp", "sharp maximal function of the input")
    p = add("bmo", "BMO_r norm of the input")
    p.add_argument("--r", type=float, default=1.0)
    add("atoms", "martingale atomic decomposition of the input")
    p = add("pairing", "pairing of the input function with an atom")
    p.add_argument("--atom", required=True, help="atom JSON file")
    for name, help_ in [
        ("hormander", "Hormander constant of a kernel"),
        ("apply", "apply a kernel operator to the input function"),
        ("opnorm", "L^2 operator norm of a kernel (power iteration)"),
        ("probe", "probe: H1->L1 and L^p ratios of a kernel on random samples"),
    ]:
        p = add(name, help_)
        p.add_argument("--kernel", "-k", default=_env("kernel"), help="kernel JSON file")
        if name == "opnorm":
            p.add_argument("--tol", type=float, default=1e-10)
        if name == "probe":
            p.add_argument("--ps", type=float_list, default=_env("ps", "1.5,2,3"))
    p = add(
        "verify",
        "run an invariant suite",
        epilog="CSV columns: " + ", ".join(VERIFY_COLUMNS)
        + "\nlambda grids are factors of max|f| (weak11, goodlambda) or of the CZ threshold (czd).",
    )
    p.add_argument("--suite", choices=sorted(suites.SUITES), default=_env("suite"), required=_env("suite") is None)
    _add_grids(p)
    p = add("sweep", "grid sweep over (q, alpha, lambda, gamma, p), CSV output", epilog="CSV columns: " + ", ".join(SWEEP_COLUMNS))
    p.add_argument("--qs", type=float_list, default=_env("qs", "2,3"))
    p.add_argument("--alphas", type=float_list, default=_env("alphas", "1.2,1.5,2,3"))
    _add_grids(p)
    return parser


def _add_grids(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambdas", type=float_list, default=_env("lambdas"))
    p.add_argument("--gammas", type=float_list, default=_env("gammas"))
    p.add_argument("--ps", type=float_list, default=_env("ps"))
    p.add_argument("--rs", type=float_list, default=_env("rs"))
    p.add_argument("--radii", type=float_list, default=_env("radii"))


def resolve_config(args: argparse.Namespace) -> RunConfig:
    def as_list(v):
        return float_list(v) if isinstance(v, str) else v

    try:
        cfg = RunConfig(
            q=int(args.q),
            alpha=float(args.alpha),
            max_depth=int(args.max_depth),
            seed=int(args.seed),
            samples=int(args.samples),
            input=args.input,
            output=args.output,
            format=args.format,
            suite=getattr(args, "suite", None),
            timestamp=not args.no_timestamp,
        )
    except (TypeError, ValueError, argparse.ArgumentTypeError) as e:
        raise UsageError(f"bad configuration value: {e}") from None
    for name in ("lambdas", "gammas", "ps", "rs", "radii"):
        v = as_list(getattr(args, name, None))
        if v:
            setattr(cfg, name, list(v))
    cfg.validate()
    return cfg


# -- commands ----------------------------------------------------------------


def _need_input(cfg: RunConfig):
    """Load the input function; its file fixes q and alpha for the run."""
    if not cfg.input:
        raise UsageError("this command needs --input FILE")
    f, mp = tio.function_from_json(tio.load_json(cfg.input))
    cfg.q, cfg.alpha = mp.q, mp.alpha
    return f, mp


def _need_kernel(cfg: RunConfig, path: str | None):
    if not path:
        raise UsageError("this command needs --kernel FILE")
    return tio.kernel_from_json(tio.load_json(path), cfg.measure().tree)


def cmd_info(cfg, args):
    mp = cfg.measure()
    return {
        "total_mass": measure.total_mass(mp),
        "doubling_constant": measure.doubling_constant(mp),
        "sharp_doubling_constant": measure.sharp_doubling_constant(mp),
        "level_index": [{"m": m, "I_m": cumulative_count(mp.tree, m)} for m in range(cfg.max_depth + 1)],
    }


def cmd_cz(cfg, args):
    f, mp = _need_input(cfg)
    out = czmax.cz_decompose(mp, f, args.lam)
    return {"cz": tio.cz_to_json(out, mp), "checks": czmax.verify_cz(mp, f, out).checks}


def cmd_maximal(cfg, args):
    f, mp = _need_input(cfg)
    return {"function": tio.function_to_json(czmax.hl_maximal(mp, f), mp)}


def cmd_sharp(cfg, args):
    f, mp = _need_input(cfg)
    return {"function": tio.function_to_json(czmax.sharp_maximal(mp, f), mp)}


def cmd_bmo(cfg, args):
    f, mp = _need_input(cfg)
    osc, D = hardy_bmo.bmo_oscillation(mp, f, args.r)
    return {"r": args.r, "bmo_norm": osc + abs(hardy_bmo.integral(mp, f)), "oscillation": osc, "witness": tio.dyadic_to_json(D)}


def cmd_atoms(cfg, args):
    f, mp = _need_input(cfg)
    dec = hardy_bmo.atomic_decompose(mp, f)
    err = float(np.abs((dec.reconstruct(mp, f.boundary_depth) - f).values).max())
    return {
        "decomposition": tio.decomposition_to_json(dec, mp),
        "coefficient_sum": dec.coefficient_sum(),
        "reconstruction_error": err,
    }


def cmd_pairing(cfg, args):
    f, mp = _need_input(cfg)
    a = tio.atom_from_json(tio.load_json(args.atom))
    check = hardy_bmo.validate_atom(mp, a)
    if not check:
        raise InvalidInputError("not an atom: " + "; ".join(check.diagnostics))
    val = hardy_bmo.duality_pairing(mp, f, a)
    bound = hardy_bmo.bmo_norm(mp, f, hardy_bmo.conjugate_exponent(a.p))
    return {"pairing": [val.real, val.imag], "abs_pairing": abs(val), "bmo_bound": bound}


def cmd_hormander(cfg, args):
    K = _need_kernel(cfg, args.kernel)
    return {"hormander_constant": operators.hormander_constant(cfg.measure(), K), "depth_bound": K.depth_bound}


def cmd_apply(cfg, args):
    f, mp = _need_input(cfg)
    K = _need_kernel(cfg, args.kernel)
    return {"function": tio.function_to_json(operators.apply_operator(mp, K, f), mp)}


def cmd_opnorm(cfg, args):
    K = _need_kernel(cfg, args.kernel)
    return {"l2_operator_norm": operators.l2_operator_norm(cfg.measure(), K, tol=args.tol)}


def cmd_probe(cfg, args):
    mp = cfg.measure()
    K = _need_kernel(cfg, args.kernel)
    rngs = suites.sample_rngs(cfg.seed, 2 * cfg.samples)
    N = K.depth_bound + 1
    atoms = [hardy_bmo.random_atom(mp, N, r, complex_values=True) for r in rngs[: cfg.samples]]
    fs = [suites.sample_function(mp.tree, r, N) for r in rngs[cfg.samples :]]
    probe = operators.h1_l1_probe(mp, K, atoms)
    ps = float_list(args.ps) if isinstance(args.ps, str) else args.ps
    sweep = operators.lp_ratio_sweep(mp, K, ps, fs, atoms=atoms)
    return {
        "label": "probe (empirical, not a proof)",
        "h1_l1": {"sup": probe.sup, "witness_atom": probe.witness, "reference_bound": probe.reference_bound},
        "lp": [{"p": r.p, "sup_ratio": r.sup_ratio, "witness_sample": r.witness} for r in sweep.rows],
        "lp_reference": sweep.reference,
        "flagged_p": sweep.flagged,
    }


def _suite_kwargs(cfg: RunConfig) -> dict:
    return dict(
        max_depth=cfg.max_depth,
        seed=cfg.seed,
        samples=cfg.samples,
        lambdas=tuple(cfg.lambdas),
        gammas=tuple(cfg.gammas),
        ps=tuple(cfg.ps),
        rs=tuple(cfg.rs),
        radii=cfg.radii,
    )


def cmd_verify(cfg, args):
    return suites.run_suite(cfg.suite, cfg.measure(), **_suite_kwargs(cfg))


def sweep_rows(cfg: RunConfig, qs, alphas) -> list[dict]:
    rows = []
    for q in qs:
        for alpha in alphas:
            mp = MeasureParams.of(int(q), alpha)
            base = replace(cfg, q=int(q), alpha=alpha)
            for lam in cfg.lambdas:
                rep = suites.suite_weak11(mp, seed=cfg.seed, samples=cfg.samples, lambdas=(lam,))
                rows.append(_sweep_row(base, "weak11", rep, lam=lam))
                for gamma in cfg.gammas:
                    rep = suites.suite_goodlambda(mp, seed=cfg.seed, samples=cfg.samples, lambdas=(lam,), gammas=(gamma,))
                    rows.append(_sweep_row(base, "goodlambda", rep, lam=lam, gamma=gamma))
            for p in cfg.ps:
                rep = suites.suite_feffermanstein(mp, seed=cfg.seed, samples=cfg.samples, ps=(p,))
                rows.append(_sweep_row(base, "feffermanstein", rep, p=p))
    return rows


def _sweep_row(cfg, name, rep, lam="", gamma="", p=""):
    return {
        "q": cfg.q,
        "alpha": cfg.alpha,
        "suite": name,
        "lambda_factor": lam,
        "gamma": gamma,
        "p": p,
        "samples": cfg.samples,
        "checks": rep["checks"],
        "violations": rep["violation_count"],
        "worst_quotient": rep["worst"],
    }


def to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = _stdio.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return buf.getvalue()


COMMANDS = {
    "info": cmd_info,
    "cz": cmd_cz,
    "maximal": cmd_maximal,
    "sharp": cmd_sharp,
    "bmo": cmd_bmo,
    "atoms": cmd_atoms,
    "pairing": cmd_pairing,
    "hormander": cmd_hormander,
    "apply": cmd_apply,
    "opnorm": cmd_opnorm,
    "probe": cmd_probe,
    "verify": cmd_verify,
}


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("timestamp")
    return d


def run(argv: list[str] | None = None) -> tuple[int, str, str | None]:
    """Run one command; returns (exit code, text to emit, output path or None)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = resolve_config(args)
    if args.command == "sweep":
        qs = float_list(args.qs) if isinstance(args.qs, str) else args.qs
        alphas = float_list(args.alphas) if isinstance(args.alphas, str) else args.alphas
        for q, a in ((q, a) for q in qs for a in alphas):
            replace(cfg, q=int(q), alpha=a).validate()
        rows = suites.clean(sweep_rows(cfg, qs, alphas))
        code = EXIT_VIOLATION if any(r["violations"] for r in rows) else EXIT_OK
        return code, to_csv(rows, SWEEP_COLUMNS), cfg.output
    if cfg.format == "csv" and args.command != "verify":
        raise UsageError("csv output is available for verify and sweep only")
    result = COMMANDS[args.command](cfg, args)
    report = {"command": args.command, "config": _config_dict(cfg), "result": result}
    if cfg.timestamp:
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    code = EXIT_OK
    if args.command == "verify":
        code = EXIT_OK if result["passed"] else EXIT_VIOLATION
        if cfg.format == "csv":
            row = dict(result, seed=cfg.seed, samples=cfg.samples, violations=result["violation_count"], worst_quotient=result["worst"])
            return code, to_csv([row], VERIFY_COLUMNS), cfg.output
    return code, tio.dumps(suites.clean(report)) + "\n", cfg.output


def main(argv: list[str] | None = None) -> int:
    try:
        code, text, out = run(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors and 0 after --help
        return int(e.code or 0)
    except UsageError as e:
        print(f"treeharm: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except tio.MalformedInputError as e:
        print(f"treeharm: malformed input: {e}", file=sys.stderr)
        return EXIT_MALFORMED
    except OSError as e:
        print(f"treeharm: cannot read input: {e}", file=sys.stderr)
        return EXIT_MALFORMED
    except czmax.CZPreconditionError as e:
        print(f"treeharm: precondition failed: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except InvalidInputError as e:
        print(f"treeharm: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
