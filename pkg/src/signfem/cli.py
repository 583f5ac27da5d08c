"""Command-line entry point: ``signfem <subcommand> [flags]``.

Subcommands
-----------
classify   stability verdicts for (kappa, r[, ry]) as a JSON document
critical   critical mesh widths h_minus(m) for m = 1..m_max
sweep      manufactured-solution error sweep to CSV (optional SVG plot)
spectrum   predicted vs. dense generalised eigenvalues of one mesh
verify     randomised closed-form identity suite

Exit status: 0 success, 1 consistency failure, 2 bad arguments, 3 invalid
configuration, 4 no critical value exists.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import (
    ConfigError,
    ConsistencyError,
    DomainError,
    NoAdmissibleRatio,
    NoCriticalMesh,
    NoRealRoot,
    SignFemError,
    SingularSystem,
    SizeLimitExceeded,
)
from .harness import (
    DEFAULT_M_LIST,
    CountRule,
    Scenario,
    generalized_spectrum_small,
    predicted_spectrum,
    run_sweep,
    write_records,
)
from .spectral import (
    REFERENCE_HCRIT,
    REFERENCE_L,
    REFERENCE_R,
    REFERENCE_RY,
    MeshConfig,
    PhysicalConfig,
)
from .stability import (
    DEFAULT_EPSILON,
    classify_bounded,
    classify_full,
    classify_semi,
    critical_meshes,
)
from .verification import identity_suite

EXIT_OK, EXIT_CONSISTENCY, EXIT_ARGS, EXIT_CONFIG, EXIT_NO_ROOT = 0, 1, 2, 3, 4
SPECTRUM_TOL = 1e-9


def _m_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad m-list {text!r}") from exc
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("m-list needs positive integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signfem", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sigma-minus", type=float, default=-1.0)
    common.add_argument("--sigma-plus", type=float, default=1.2)
    common.add_argument("--kappa", type=float, help="contrast sigma_plus/sigma_minus (overrides --sigma-plus)")
    common.add_argument("--L", type=float, default=REFERENCE_L, dest="half_width")
    common.add_argument("--r", type=float, default=REFERENCE_R)
    common.add_argument("--ry", type=float)
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--out")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="stability verdicts")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--m-max", type=int, default=3)

    p = sub.add_parser("critical", parents=[common], help="critical mesh widths")
    p.add_argument("--m-max", type=int, default=10)

    p = sub.add_parser("sweep", parents=[common], help="error sweep")
    p.add_argument("--scenario", choices=[s.value for s in Scenario], default="flipped")
    p.add_argument("--m", type=int)
    p.add_argument("--m-max", type=int)
    p.add_argument("--m-list", type=_m_list)
    p.add_argument("--h-minus", type=float, default=REFERENCE_HCRIT,
                   help="base width h (h_minus = h/m in the critical and custom families)")
    p.add_argument("--count-rule", choices=[c.value for c in CountRule], default="exact")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--svg")
    p.add_argument("--dense-check", action="store_true")

    p = sub.add_parser("spectrum", parents=[common], help="predicted vs. dense spectrum")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--h-minus", type=float)
    group.add_argument("--counts", type=_m_list, help="N_minus,N_plus,M (replaces --h-minus/--r/--ry)")

    p = sub.add_parser("verify", parents=[common], help="identity suite")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _physics(args) -> PhysicalConfig:
    if args.kappa is not None:
        return PhysicalConfig.from_kappa(args.kappa, args.sigma_minus, args.half_width)
    return PhysicalConfig(args.sigma_minus, args.sigma_plus, args.half_width)


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_text(args, header: list[str], rows: list[list]) -> str:
    if args.format == "json":
        return json.dumps([dict(zip(header, row)) for row in rows], indent=2) + "\n"
    lines = [",".join(header)] + [",".join(repr(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def cmd_classify(args) -> int:
    kappa = _physics(args).kappa
    primary = classify_semi(kappa, args.r) if args.ry is None else classify_full(kappa, args.r, args.ry)
    doc = {"kappa": kappa, "r": args.r, "ry": args.ry, **primary.to_dict(),
           "bounded": classify_bounded(kappa, args.r, args.ry, args.epsilon).to_dict()}
    doc["critical_meshes"] = []
    if primary.regime.value == "Unstable":
        doc["critical_meshes"] = [{"m": m, "h_minus": h}
                                  for m, h in critical_meshes(kappa, args.r, args.ry, args.m_max)]
    _emit(args, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_critical(args) -> int:
    pairs = critical_meshes(_physics(args).kappa, args.r, args.ry, args.m_max)
    _emit(args, _rows_text(args, ["m", "h_minus"], [list(p) for p in pairs]))
    return EXIT_OK


def plot_records(path: str, records, title: str = "") -> None:
    """Log-log plot of the relative errors against 1/h_minus."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = [1.0 / rec.h_minus for rec in records]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(x, [rec.rel_l2 for rec in records], "o-", ms=3, label="relative L2 error")
    ax.loglog(x, [rec.rel_h1 for rec in records], "s-", ms=3, label="relative H1 error")
    ax.set_xlabel("1 / h_minus")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_sweep(args) -> int:
    phys = _physics(args)
    if args.m_list:
        ms = args.m_list
    elif args.m is not None:
        ms = [args.m]
    elif args.m_max is not None:
        ms = [m for m in DEFAULT_M_LIST if m <= args.m_max] or [1]
    else:
        ms = list(DEFAULT_M_LIST)
    ry = REFERENCE_RY if args.ry is None else args.ry
    records = run_sweep(args.scenario, phys, ms, workers=args.workers, dense_check=args.dense_check,
                        h_base=args.h_minus, r=args.r, ry=ry, count_rule=args.count_rule)
    if args.out:
        write_records(args.out, records)
    else:
        header = list(records[0].__dataclass_fields__)
        sys.stdout.write(_rows_text(argparse.Namespace(format="csv"), header,
                                    [list(vars(rec).values()) for rec in records]))
    if args.svg:
        plot_records(args.svg, records, f"{args.scenario} sweep")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    phys = _physics(args)
    if args.counts is not None:
        if len(args.counts) != 3:
            raise ConfigError("--counts needs exactly three integers N_minus,N_plus,M")
        mesh = MeshConfig.from_counts(*args.counts, phys.half_width_L)
    else:
        ry = REFERENCE_RY if args.ry is None else args.ry
        mesh = MeshConfig.create(args.h_minus, args.r, ry, phys.half_width_L)
    predicted = predicted_spectrum(phys, mesh)
    computed = generalized_spectrum_small(phys, mesh)
    deviation = float(np.max(np.abs(predicted - computed)))
    rows = [[float(p), float(c)] for p, c in zip(predicted, computed)]
    if args.format == "json":
        text = json.dumps({"pairs": rows, "max_deviation": deviation}, indent=2) + "\n"
    else:
        text = _rows_text(args, ["predicted", "computed"], rows) + f"# max_deviation,{deviation!r}\n"
    _emit(args, text)
    return EXIT_OK if deviation < SPECTRUM_TOL else EXIT_CONSISTENCY


def cmd_verify(args) -> int:
    results = identity_suite(args.samples, args.seed)
    _emit(args, "".join(r.line() + "\n" for r in results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CONSISTENCY


COMMANDS = {"classify": cmd_classify, "critical": cmd_critical, "sweep": cmd_sweep,
            "spectrum": cmd_spectrum, "verify": cmd_verify}


def exit_code(exc: SignFemError) -> int:
    if isinstance(exc, (NoRealRoot, NoCriticalMesh, NoAdmissibleRatio)):
        return EXIT_NO_ROOT
    if isinstance(exc, (ConfigError, DomainError, SizeLimitExceeded)):
        return EXIT_CONFIG
    if isinstance(exc, (ConsistencyError, SingularSystem)):
        return EXIT_CONSISTENCY
    return EXIT_CONSISTENCY


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ARGS
    try:
        return COMMANDS[args.command](args)
    except SignFemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
