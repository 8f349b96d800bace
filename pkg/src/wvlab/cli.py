"""``wvlab <experiment-kind> --config <path> [--out <dir>] [--seed <u64>] [--trials <n>]``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from .errors import ConfigError, InsufficientTruncation, TruncationMargin, WVLabError
from .experiments import KINDS, run

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _versions():
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"wvlab": own, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": sys.version.split()[0]}


def load_config(path):
    """Read a JSON config; a previous run's manifest is accepted through its echo."""
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None
    if isinstance(cfg, dict) and "config_echo" in cfg:
        cfg = cfg["config_echo"]
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(prog="wvlab", description="Seeded growth and dynamics experiments.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", help="output directory (overrides config 'out')")
    parser.add_argument("--seed", type=int, help="master seed (overrides config 'master_seed')")
    parser.add_argument("--trials", type=int, help="trial count (overrides config 'trials')")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = load_config(args.config)
        if not isinstance(cfg, dict):
            raise ConfigError("config", "expected a JSON object")
        if cfg.get("kind", args.kind) != args.kind:
            raise ConfigError("kind", f"config says {cfg['kind']!r}, command line says {args.kind!r}")
        cfg = dict(cfg, kind=args.kind)
        if args.seed is not None:
            cfg["master_seed"] = args.seed
        if args.trials is not None:
            cfg["trials"] = args.trials
        if args.out is not None:
            cfg["out"] = args.out
        out_dir = Path(cfg.get("out", "wvlab-out"))
        artifacts = run(cfg, Path(args.config).resolve().parent)
    except ConfigError as exc:
        print(f"wvlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InsufficientTruncation, TruncationMargin) as exc:
        print(f"wvlab: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WVLabError as exc:
        print(f"wvlab: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    manifest = {
        "config_echo": cfg,
        "versions": _versions(),
        "wall_time": time.perf_counter() - start,
        "artifacts": sorted(artifacts),
    }
    missing = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"wvlab: cannot create {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    for name in sorted(artifacts):
        try:
            (out_dir / name).write_text(artifacts[name], encoding="utf-8", newline="\n")
        except OSError as exc:
            missing.append(f"{name} ({exc})")
    try:
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                               encoding="utf-8", newline="\n")
    except OSError as exc:
        missing.append(f"manifest.json ({exc})")
    if missing:
        print("wvlab: missing artifacts: " + ", ".join(missing), file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
