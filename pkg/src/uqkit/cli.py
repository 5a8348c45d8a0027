"""Command line entry point: ``uqkit <command> [options]``.

Every command writes CSV tables and ``manifest.json`` into ``--out``.
Exit codes: 0 success, 2 configuration error (including other input-driven
failures), 3 numerical instability.
"""

import os
import sys

# cap BLAS/OpenMP pools before numpy is loaded
_THREADS = os.environ.get("UQKIT_THREADS")
if _THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[_var] = _THREADS

import argparse  # noqa: E402
import json  # noqa: E402
import platform  # noqa: E402
import time  # noqa: E402

import numpy as np  # noqa: E402
import scipy  # noqa: E402

from uqkit import __version__  # noqa: E402
from uqkit.errors import ConfigError, NumericalInstabilityError, UqkitError  # noqa: E402
from uqkit.experiments import COMMANDS, resolve_params, run  # noqa: E402
from uqkit.io import write_json  # noqa: E402

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
MANIFEST_SCHEMA = 1
DEFAULT_SEED = 7


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit code 2, as argparse already uses)."""


def _flag(key):
    return "--" + key.replace("_", "-")


def build_parser():
    parser = _Parser(prog="uqkit", description="Reproducible uncertainty-quantification experiments.")
    parser.add_argument("--version", action="version", version=f"uqkit {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, cmd in COMMANDS.items():
        sp = sub.add_parser(name, help=cmd.help, description=cmd.help)
        sp.add_argument("--seed", type=int, default=None, help=f"64-bit seed (default {DEFAULT_SEED})")
        sp.add_argument("--out", default=None, help="output directory (default ./out/<command>)")
        sp.add_argument("--config", default=None, help="JSON file with seed, out and parameter values")
        for key, default in cmd.defaults.items():
            shown = ",".join(map(str, default)) if isinstance(default, list) else default
            sp.add_argument(_flag(key), dest=f"p_{key}", default=None, metavar="VALUE",
                            help=f"default: {shown}")
    return parser


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def assemble(args):
    """Merge defaults, config file and flags into ``(params, seed, out)``."""
    cfg = load_config(args.config) if args.config else {}
    cmd = cfg.get("command")
    if cmd is not None and cmd != args.command:
        raise ConfigError(f"config is for command {cmd!r}, not {args.command!r}")
    file_params = dict(cfg.get("params", {}))
    for key, value in cfg.items():
        if key not in ("command", "params", "seed", "out"):
            file_params[key] = value
    flags = {k[2:]: v for k, v in vars(args).items() if k.startswith("p_") and v is not None}
    params = resolve_params(args.command, {**file_params, **flags})
    seed = args.seed if args.seed is not None else cfg.get("seed", DEFAULT_SEED)
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an integer, got {seed!r}") from None
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must lie in [0, 2^64)")
    out = args.out or cfg.get("out") or os.path.join("out", args.command)
    return params, seed, out


def execute(command, params, seed, out):
    """Run one experiment and write its manifest; returns the manifest dict."""
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    start = time.perf_counter()
    written, summary = run(command, params, seed, out)
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "seed": seed,
        "inputs": params,
        "outputs": {name: {"sha256": digest} for name, digest in sorted(written.items())},
        "summary": summary,
        "versions": {"uqkit": __version__, "python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "threads": os.environ.get("UQKIT_THREADS"),
        "wall_time_s": time.perf_counter() - start,
    }
    write_json(os.path.join(out, "manifest.json"), manifest)
    return manifest


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    try:
        params, seed, out = assemble(args)
        manifest = execute(args.command, params, seed, out)
    except ConfigError as exc:
        print(f"uqkit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstabilityError as exc:
        print(f"uqkit: numerical instability: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except UqkitError as exc:
        # remaining failures (non-stationary series, degenerate samples, ...) trace back to the chosen inputs
        print(f"uqkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n_csv = sum(name.endswith(".csv") for name in manifest["outputs"])
    print(f"{args.command}: wrote {n_csv} tables to {out} in {manifest['wall_time_s']:.1f} s")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
