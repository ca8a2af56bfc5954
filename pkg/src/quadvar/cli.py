"""Command-line front end.

Exit codes: 0 all checks passed, 1 usage error, 2 a numeric gate failed
(residual, bound or convergence), 3 imported data was rejected, 4 a config
violates a parameter constraint.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__, config, eigenforms, kernels, kloosterman, output, suites, variance
from .windows import ConvergenceError, PlateauWindow

__all__ = ["EXIT_CONFIG", "EXIT_DATA", "EXIT_GATE", "EXIT_OK", "EXIT_USAGE", "RunManifest", "main"]

EXIT_OK, EXIT_USAGE, EXIT_GATE, EXIT_DATA, EXIT_CONFIG = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunManifest:
    """Everything needed to repeat a run, plus what happened."""

    subcommand: str
    argv: list[str]
    config: dict
    seed: int
    threads: int
    backend: str
    artifacts: list[str] = field(default_factory=list)
    seconds: float = 0.0
    checks: dict[str, bool] = field(default_factory=dict)
    exit_code: int = EXIT_OK
    version: str = __version__
    python: str = platform.python_version()


@dataclass
class Outcome:
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    single: str | None = None  # set for single evaluations printed in plain text
    report: dict | None = None  # JSON body when it is not rows + summary
    default_format: str = "text"
    resolved: dict = field(default_factory=dict)  # typed config after file and env overrides

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def _from_suite(result: suites.SuiteResult, default_format: str = "text") -> Outcome:
    return Outcome(result.rows, {"suite": result.name, **result.summary, "passed": result.passed},
                   {result.name: result.passed}, default_format=default_format)


# --- subcommands --------------------------------------------------------------


def cmd_kloosterman(args) -> Outcome:
    if args.grid:
        if args.values:
            raise UsageError("kloosterman: give either m n c or --grid, not both")
        if args.c_max < 1 or args.mn_max < 1:
            raise UsageError("kloosterman: --c-max and --mn-max must be >= 1")
        return _from_suite(suites.kloosterman_suite(args.c_max, args.mn_max), default_format="csv")
    if len(args.values) != 3:
        raise UsageError("kloosterman: expected m n c")
    m, n, c = args.values
    if c < 1:
        raise UsageError(f"kloosterman: modulus must be >= 1, got {c}")
    value = kloosterman.kloosterman_sum(m, n, c)
    envelope = kloosterman.weil_envelope(m, n, c)
    holds = abs(value) <= envelope * (1 + 1e-12)
    return Outcome(
        [{"m": m, "n": n, "c": c, "value": value, "weil_envelope": envelope, "ok": holds}],
        checks={"weil": holds},
        single=output.fmt_fixed(value),
    )


def _half_integer(text: str) -> Fraction:
    value = Fraction(text)
    if value.denominator not in (1, 2):
        raise argparse.ArgumentTypeError(f"{text!r} is not a half-integer")
    return value


def cmd_twisted(args) -> Outcome:
    if args.verify is None:
        if len(args.params) != 6:
            raise UsageError("twisted: expected gamma B C u v c")
        gamma, B, C, u, v, c = args.params
        if any(t.denominator != 1 for t in (C, u, v, c)):
            raise UsageError("twisted: C, u, v and c must be integers")
        if c < 1:
            raise UsageError(f"twisted: modulus must be >= 1, got {c}")
        p = kloosterman.TwistedSumParams(gamma, B, int(C), int(u), int(v), int(c))
        value = kloosterman.twisted_sum_direct(p, halve_even=args.halve_even)
        return Outcome(
            [{"gamma": str(gamma), "B": str(B), "C": int(C), "u": int(u), "v": int(v), "c": int(c),
              "re": value.real, "im": value.imag}],
            checks={"evaluated": True},
            single=output.fmt_complex(value),
        )
    if args.params:
        raise UsageError("twisted: give either parameters or --verify, not both")
    c_max = args.c_max
    if c_max is not None and c_max < 1:
        raise UsageError("twisted: --c-max must be >= 1")
    if args.verify == "mult":
        limit = c_max or 200
        result = suites.multiplicativity_suite(args.cases, args.seed, limit, min(60, limit))
    elif args.verify == "gauss":
        result = suites.gauss_route_suite(c_max or 99, args.draws, args.seed)
    elif args.verify == "vanish":
        result = suites.vanishing_suite(c_max or 60, args.draws, args.seed)
    elif args.verify == "symmetry":
        result = suites.symmetry_suite(c_max or 30, args.seed)
    else:
        result = suites.bounds_suite(c_max or 60, seed=args.seed)
    out = _from_suite(result)
    if args.verify == "bounds" and args.baseline:
        recorded = json.loads(Path(args.baseline).read_text())["sup_ratio"]
        out.summary["baseline_sup_ratio"] = recorded
        out.checks["no_regression"] = result.summary["sup_ratio"] <= recorded * (1 + 1e-9)
    return out


def cmd_oscillatory(args) -> Outcome:
    window = PlateauWindow(*args.window, flat=args.flat) if args.window else None
    xs = tuple(args.x) if args.x else None
    which = args.identity
    if which == "bessel-sum":
        result = suites.bessel_sum_suite(*((xs,) if xs else ()), window=window)
    elif which == "fresnel":
        result = suites.fresnel_suite(*((xs,) if xs else ()), window=window)
    elif which == "stationary":
        result = suites.stationary_suite(*((xs,) if xs else ()), y=args.y)
    else:
        ks = tuple(args.K) if args.K else (50, 100, 200, 400)
        rs = tuple(args.r) if args.r else (0, 1, 2, 4)
        result = suites.crg_suite(ks, args.theta, rs)
    return _from_suite(result)


def cmd_petersson(args) -> Outcome:
    if args.m_max < 1:
        raise UsageError("petersson: --m-max must be >= 1")
    data = None
    if args.import_path:
        try:
            text = Path(args.import_path).read_text()
        except OSError as exc:
            raise UsageError(f"petersson: cannot read {args.import_path}: {exc}") from None
        data = eigenforms.load_eigenvalues(text)
        if args.weight is not None and args.weight != data.weight:
            raise eigenforms.EigenDataError(f"file has weight {data.weight}, --weight says {args.weight}")
        if data.n_max < args.m_max:
            raise eigenforms.InsufficientTruncationError(
                f"file covers n <= {data.n_max}, grid needs {args.m_max}"
            )
        weight = data.weight
    else:
        weight = 12 if args.weight is None else args.weight
        if weight not in eigenforms.SUPPORTED_WEIGHTS:
            raise UsageError(
                f"petersson: weight {weight} unsupported; choose from {sorted(eigenforms.SUPPORTED_WEIGHTS)}"
            )
    return _from_suite(suites.petersson_suite(weight, args.m_max, data))


def cmd_variance(args) -> Outcome:
    if not args.config:
        raise UsageError("variance: --config FILE is required")
    try:
        cfg = config.load_config(args.config)
    except OSError as exc:
        raise UsageError(f"variance: cannot read {args.config}: {exc}") from None
    family = None
    if args.data:
        family = variance.level_one_family(cfg, max(2, variance.required_n_max(cfg.poly, cfg.psi, cfg.X)))
        for path in args.data:
            f = eigenforms.load_eigenvalues(Path(path).read_text())
            family[f.weight] = f.with_omega(eigenforms.calibrate_harmonic_weight(f).omega)
    report = variance.run_experiment(cfg, family).as_dict()
    report.pop("seconds")  # wall-clock lives in the manifest so reports stay byte-stable
    return Outcome(report=report, checks={"two_route": report["passed"]}, default_format="json",
                   resolved=report["config"])


# --- plumbing -----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads (default: all cores)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--format", choices=("text", "csv", "json"), default=None)
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--manifest", help="write a JSON run manifest here")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="quadvar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kloosterman", parents=[common], help="Kloosterman sums and the Weil bound")
    p.add_argument("values", nargs="*", type=int, metavar="m n c")
    p.add_argument("--grid", action="store_true", help="exhaustive grid with Weil-ratio column")
    p.add_argument("--c-max", type=int, default=100)
    p.add_argument("--mn-max", type=int, default=50)
    p.set_defaults(handler=cmd_kloosterman)

    p = sub.add_parser("twisted", parents=[common], help="quadratic-twisted sums and their verifiers")
    p.add_argument("params", nargs="*", type=_half_integer, metavar="gamma B C u v c")
    p.add_argument("--verify", choices=("mult", "gauss", "vanish", "bounds", "symmetry"))
    p.add_argument("--c-max", type=int, default=None)
    p.add_argument("--cases", type=int, default=1000, help="random cases for --verify mult")
    p.add_argument("--draws", type=int, default=20, help="random (gamma, B, C) per modulus")
    p.add_argument("--baseline", help="JSON with a recorded sup_ratio for --verify bounds")
    p.add_argument("--halve-even", action="store_true", help="allow half-integers with even c")
    p.set_defaults(handler=cmd_twisted)

    p = sub.add_parser("oscillatory", parents=[common], help="oscillatory-integral identity sweeps")
    p.add_argument("--identity", required=True, choices=("bessel-sum", "fresnel", "stationary", "crg"))
    p.add_argument("--x", type=float, nargs="+")
    p.add_argument("--y", type=float, default=1.0)
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--flat", type=float, default=1.0, help="plateau flat part for --window")
    p.add_argument("--K", type=int, nargs="+")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--r", type=int, nargs="+")
    p.set_defaults(handler=cmd_oscillatory)

    p = sub.add_parser("petersson", parents=[common], help="trace-formula residual grid")
    p.add_argument("--weight", type=int, default=None)
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--import", dest="import_path", help="eigenvalue CSV to validate and use")
    p.set_defaults(handler=cmd_petersson)

    p = sub.add_parser("variance", parents=[common], help="two-route variance experiment")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--data", action="append", help="eigenvalue CSV for a weight (repeatable)")
    p.set_defaults(handler=cmd_variance)
    return parser


def _render(outcome: Outcome, fmt: str) -> str:
    if outcome.report is not None:
        if fmt == "json":
            return output.to_json(outcome.report)
        rows = [{"weight": k, **v} for k, v in outcome.report["per_weight"].items()]
        if fmt == "csv":
            return output.to_csv(rows)
        flat = {}
        for key, value in outcome.report.items():
            if key == "per_weight":
                continue
            if isinstance(value, dict):
                flat.update({f"{key}.{k}": v for k, v in value.items()})
            else:
                flat[key] = value
        return output.to_text(rows, flat)
    if fmt == "json":
        return output.to_json({"rows": outcome.rows, "summary": outcome.summary})
    if fmt == "csv":
        return output.to_csv(outcome.rows)
    if outcome.single is not None:
        return outcome.single + "\n"
    return output.to_text(outcome.rows, outcome.summary)


def _manifest_config(args) -> dict:
    skip = {"handler", "manifest", "out", "format"}
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in vars(args).items() if k not in skip}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    start = time.perf_counter()
    args = None
    try:
        args = build_parser().parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        threads = kernels.set_threads(args.threads)
        outcome = args.handler(args)
        code = EXIT_OK if outcome.passed else EXIT_GATE
        text = _render(outcome, args.format or outcome.default_format)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (eigenforms.EigenDataError, eigenforms.InsufficientTruncationError) as exc:
        print(f"rejected data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except variance.ConfigError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (config.ConfigSyntaxError, variance.MissingWeightError) as exc:
        print(f"{args.command if args else 'quadvar'}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, eigenforms.TailBoundError, kloosterman.ImaginaryResidualError) as exc:
        print(f"numeric gate: {exc}", file=sys.stderr)
        return EXIT_GATE
    except (ValueError, OSError) as exc:
        print(f"{args.command if args else 'quadvar'}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.manifest:
        manifest = RunManifest(
            subcommand=args.command,
            argv=argv,
            config={**_manifest_config(args), **outcome.resolved},
            seed=args.seed,
            threads=threads,
            backend=kernels.BACKEND,
            artifacts=[os.path.abspath(args.out)] if args.out else [],
            seconds=time.perf_counter() - start,
            checks=outcome.checks,
            exit_code=code,
        )
        Path(args.manifest).write_text(json.dumps(output.normalise(asdict(manifest)), indent=2) + "\n")
    if code == EXIT_GATE:
        failed = ", ".join(k for k, ok in outcome.checks.items() if not ok)
        print(f"numeric gate failed: {failed}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
