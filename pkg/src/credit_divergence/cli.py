"""Command-line entry point.

Exit codes: 0 success, 2 bad input or configuration, 3 numerical failure.
Diagnostics go to stderr; stdout carries ``key=value`` results only.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import os
import platform
import sys

import numpy as np

from . import __version__, corrmat, harness, kernels
from .config import (
    CONFIG_KEYS,
    PROFILES,
    ConfigError,
    build_config,
    dump_config,
    load_config,
    parse_value,
)
from .divergence import jeffreys_bernoulli
from .errors import (
    BoundaryError,
    CreditDivergenceError,
    InvalidArgumentError,
    InvalidDimensionError,
)
from .plot import PlotInputError, plot_figure1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

OUTPUT_FILES = ("table1.csv", "table2.csv", "figure1.csv")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _add_run_parser(sub):
    p = sub.add_parser("run", help="run the Monte Carlo grid and write the CSV tables")
    p.add_argument("--config", help="flat key = value config file (a manifest also works)")
    p.add_argument("--profile", choices=sorted(PROFILES), help="preset grid (default: paper)")
    p.add_argument("--seed", help="master seed, unsigned 64-bit")
    p.add_argument("--out-dir", default="results", help="output directory (default: results)")
    p.add_argument("--workers", type=int, default=1, help="worker processes; output does not depend on it")
    p.add_argument("--svg", action="store_true", help="also write figure1.svg")
    for key in CONFIG_KEYS:
        if key == "profile":
            continue
        flag = "--" + key.replace("_", "-")
        kwargs = {"dest": "cfg_" + key, "metavar": key.upper(), "help": f"override config key {key}"}
        if key == "loading_mode":
            kwargs["choices"] = ["direct", "cholesky"]
            kwargs.pop("metavar")
        elif key == "divergence_level":
            kwargs["choices"] = ["bernoulli", "density"]
            kwargs.pop("metavar")
        elif key == "regimes":
            kwargs["choices"] = ["high", "low", "both"]
            kwargs.pop("metavar")
        p.add_argument(flag, **kwargs)
    p.set_defaults(func=cmd_run)


def _collect_config(args):
    values = load_config(args.config) if args.config else {}
    if args.profile:
        values["profile"] = args.profile
    for key in CONFIG_KEYS:
        raw = getattr(args, "cfg_" + key, None)
        if raw is not None:
            values[key] = parse_value(key, raw)
    if args.seed is not None:
        values["master_seed"] = parse_value("master_seed", args.seed)
    return build_config(values)


def write_manifest(path, config, started, finished, digests, result):
    lines = [f"# run manifest; usable as --config to reproduce the CSVs"]
    lines += dump_config(config)
    lines.append(f"manifest.master_seed = {config.master_seed}")
    lines.append(f"manifest.started_at = {started}")
    lines.append(f"manifest.finished_at = {finished}")
    lines.append(f"manifest.version.credit_divergence = {__version__}")
    lines.append(f"manifest.version.numpy = {np.__version__}")
    lines.append(f"manifest.version.python = {platform.python_version()}")
    lines.append(f"manifest.kernel_backend = {kernels.BACKEND}")
    clamped = sum(c.clamped for c in result.cells)
    lines.append(f"manifest.clamped_probabilities = {clamped}")
    for name, digest in digests.items():
        lines.append(f"manifest.digest.{name} = sha256:{digest}")
    for n, lev, regime, achieved, target, gap in harness.calibration_report(result):
        key = f"manifest.calibration.n{n}.lev{lev:g}.{regime.value}"
        lines.append(f"{key} = achieved={achieved:.6g};target={target:.6g};relative_gap={gap:+.4f}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_run(args) -> int:
    try:
        config = _collect_config(args)
    except ConfigError as exc:
        where = f" (key: {exc.key})" if exc.key else ""
        _err(f"config: {exc}{where}")
        return EXIT_USAGE
    except OSError as exc:
        _err(f"config: {exc}")
        return EXIT_USAGE
    if args.workers < 1:
        _err("--workers must be at least 1")
        return EXIT_USAGE
    os.makedirs(args.out_dir, exist_ok=True)
    started = _now()
    try:
        result = harness.run_grid(config, workers=args.workers)
    except harness.CellError as exc:
        _err(f"numerical failure in {exc}")
        return EXIT_NUMERIC
    except CreditDivergenceError as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    paths = {name: os.path.join(args.out_dir, name) for name in OUTPUT_FILES}
    harness.write_table1(paths["table1.csv"], result)
    harness.write_table2(paths["table2.csv"], result)
    harness.write_figure1(paths["figure1.csv"], result)
    if args.svg:
        plot_figure1(paths["figure1.csv"], os.path.join(args.out_dir, "figure1.svg"))
    digests = {name: _sha256(p) for name, p in paths.items()}
    manifest = os.path.join(args.out_dir, "manifest.txt")
    write_manifest(manifest, config, started, _now(), digests, result)
    for name, digest in digests.items():
        print(f"{name}=sha256:{digest}")
    print(f"manifest={manifest}")
    return EXIT_OK


def cmd_gen_matrix(args) -> int:
    try:
        if args.rho_min is not None or args.rho_max is not None:
            default = corrmat.NoiseBand.for_regime(args.regime)
            band = corrmat.NoiseBand(
                args.rho_min if args.rho_min is not None else default.rho_min,
                args.rho_max if args.rho_max is not None else default.rho_max,
                default.regime_label,
            )
        else:
            band = corrmat.NoiseBand.for_regime(args.regime)
        if args.dim < 2:
            raise InvalidDimensionError(f"dimension must be at least 2, got {args.dim}")
    except (InvalidArgumentError, InvalidDimensionError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    try:
        mat = corrmat.generate_correlation_matrix(
            args.dim, band, rng, noise_dim=args.noise_dim, verify=True
        )
    except CreditDivergenceError as exc:
        _err(f"matrix generation failed: {exc}")
        return EXIT_NUMERIC
    corrmat.write_matrix_csv(args.out, mat)
    print(f"min_eigenvalue={mat.min_eigenvalue()!r}")
    print(f"rho_min={band.rho_min!r}")
    print(f"rho_max={band.rho_max!r}")
    print(f"out={args.out}")
    return EXIT_OK


def cmd_divergence(args) -> int:
    try:
        value = jeffreys_bernoulli(args.p, args.q)
    except BoundaryError as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(f"J={value.j!r}")
    print(f"kl_forward={value.kl_forward!r}")
    print(f"kl_backward={value.kl_backward!r}")
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        plot_figure1(args.figure1_csv, args.out_svg)
    except PlotInputError as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(f"out={args.out_svg}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="credit-divergence", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_run_parser(sub)

    g = sub.add_parser("gen-matrix", help="write one random correlation matrix as CSV")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--regime", choices=["high", "low"], default="high")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--rho-min", type=float)
    g.add_argument("--rho-max", type=float)
    g.add_argument("--noise-dim", type=int, default=corrmat.DEFAULT_NOISE_DIM)
    g.set_defaults(func=cmd_gen_matrix)

    d = sub.add_parser("divergence", help="Jeffreys divergence between two default probabilities")
    d.add_argument("p", type=float)
    d.add_argument("q", type=float)
    d.set_defaults(func=cmd_divergence)

    pl = sub.add_parser("plot", help="render figure1.csv as SVG")
    pl.add_argument("figure1_csv")
    pl.add_argument("out_svg")
    pl.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
