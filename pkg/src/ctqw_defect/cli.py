"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .exceptions import CTQWError
from .experiments import (
    BACKEND_CHOICES,
    FIGURE_PRESETS,
    ConfigError,
    build_config,
    cmd_bound_energy,
    cmd_defect_prob,
    cmd_evolve,
    cmd_sigma,
    read_config_file,
    run_figure,
    write_dataset,
)
from .validation import run_validation

log = logging.getLogger("ctqw_defect")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _model_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model")
    g.add_argument("--epsilon", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--jd", type=int, help="defect node")
    g.add_argument("--j0", type=int, help="initial node")
    g.add_argument("--t", type=float, action="append", help="evolution time (repeatable)")
    g.add_argument("--sweep", help="var:start:stop:step with var in alpha, beta, jd, t")
    g.add_argument("--config", type=Path, help="key = value file; flags override it")
    return p


def _run_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run")
    g.add_argument("--nodes", type=int, help="Gauss-Legendre nodes (default 2048)")
    g.add_argument("--buffer", type=int, help="nodes beyond the light cone (default 40)")
    g.add_argument("--backend", choices=BACKEND_CHOICES)
    g.add_argument("--jobs", type=int, help="concurrent sweep points")
    g.add_argument("--out", type=Path, default=Path("results"))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctqw-defect", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    model, run = _model_flags(), _run_flags()
    for name, help_ in (("bound-energy", "bound energies over an alpha/beta sweep"),
                        ("evolve", "probability distributions P_j(t)"),
                        ("defect-prob", "probability at the defect node over a sweep"),
                        ("sigma", "standard deviation versus time")):
        sub.add_parser(name, parents=[model, run], help=help_)
    val = sub.add_parser("validate", help="run the acceptance checks")
    val.add_argument("--out", type=Path, help="also write the JSON report here")
    val.add_argument("--tolerance-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    for fig in FIGURE_PRESETS:
        sub.add_parser(fig, parents=[run], help=f"datasets for {fig}")
    return parser


def _merged_values(args) -> dict:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in ("epsilon", "gamma", "alpha", "beta", "jd", "j0", "t", "sweep",
                "nodes", "buffer", "backend", "jobs"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


def _emit(datasets, out_dir: Path) -> None:
    for ds in datasets:
        csv_path, _ = write_dataset(ds, out_dir)
        print(csv_path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            report = run_validation(args.tolerance_scale)
            text = json.dumps(report, indent=2)
            if args.out:
                args.out.parent.mkdir(parents=True, exist_ok=True)
                args.out.write_text(text + "\n")
            print(text)
            return EXIT_OK if report["passed"] else EXIT_VALIDATION
        config = build_config(_merged_values(args))
        if args.command in FIGURE_PRESETS:
            datasets = run_figure(args.command, config)
            out_dir = args.out / args.command
        else:
            command = {"bound-energy": cmd_bound_energy, "evolve": cmd_evolve,
                       "defect-prob": cmd_defect_prob, "sigma": cmd_sigma}[args.command]
            result = command(config)
            datasets = result if isinstance(result, list) else [result]
            out_dir = args.out
        _emit(datasets, out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CTQWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
