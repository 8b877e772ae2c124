"""Command-line interface.

Subcommands ``kw``, ``classical``, ``mixed``, ``generalized`` and
``sweep`` each load a YAML config (whose ``kind`` must match the
subcommand) and execute one run; ``report`` summarizes a previous run
from its manifest. Exit codes: 0 success, 2 configuration/validation
error, 3 solver or I/O failure during the run.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import GridSection, parse_config, echo_config
from .errors import ParseError, ValidationError, VortexLabError
from .runner import MANIFEST_NAME, run

_RUN_COMMANDS = ("kw", "classical", "mixed", "generalized", "sweep")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vortexlab",
        description="Vortex adiabatic-limit experiments on flat tori.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUN_COMMANDS:
        p = sub.add_parser(name, help=f"run a '{name}' config")
        p.add_argument("--config", required=True, help="YAML config path")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--epsilon", type=float, default=None, help="override epsilon")
        p.add_argument(
            "--grid", type=int, default=None, help="override grid to N x N"
        )
        p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    rp = sub.add_parser("report", help="summarize a finished run directory")
    rp.add_argument("--out", required=True, help="run directory holding manifest.json")
    return parser


def _apply_overrides(config, args):
    changed = False
    if args.epsilon is not None:
        if config.kind == "sweep":
            raise ValidationError("--epsilon does not apply to sweep runs")
        config = dataclasses.replace(config, epsilon=args.epsilon)
        changed = True
    if args.grid is not None:
        if config.kind == "sweep":
            raise ValidationError("--grid does not apply to sweep runs")
        config = dataclasses.replace(config, grid=GridSection(args.grid, args.grid))
        changed = True
    if changed:
        # Re-validate through the canonical echo so overrides obey every
        # config invariant (grid parity, Bradlow, ...).
        config = parse_config(echo_config(config))
    return config


def _summarize(manifest: dict) -> str:
    lines = [
        f"kind:     {manifest.get('kind')}",
        f"status:   {manifest.get('status')}",
        f"version:  {manifest.get('artifact_version')}",
        f"threads:  {manifest.get('threads')}",
        f"wall:     {manifest.get('wall_seconds', 0.0):.2f} s",
    ]
    stages = manifest.get("stages", [])
    for stage in stages:
        eps = stage.get("epsilon")
        grid = stage.get("grid")
        iters = stage.get("iterations")
        dev = stage.get("sup_deviation")
        masses = stage.get("curvature_masses")
        parts = [f"epsilon={eps}"]
        if grid:
            parts.append(f"grid={grid[0]}x{grid[1]}")
        parts.append(f"iterations={iters}")
        if dev is not None:
            parts.append(f"sup_dev={dev:.3e}")
        if masses:
            parts.append(
                "masses=" + ",".join("-" if m is None else f"{m:.4f}" for m in masses)
            )
        lines.append("  stage " + " ".join(parts))
    fits = manifest.get("order_fits") or []
    if any(f is not None for f in fits):
        lines.append(
            "order_fits: "
            + ",".join("-" if f is None else f"{f:.4f}" for f in fits)
        )
    if manifest.get("error"):
        err = manifest["error"]
        lines.append(f"error: {err.get('type')}: {err.get('message')}")
    outputs = manifest.get("outputs", [])
    if outputs:
        lines.append("outputs: " + ", ".join(outputs))
    return "\n".join(lines)


def _report_command(out_dir: Path) -> int:
    path = out_dir / MANIFEST_NAME
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: corrupt manifest {path}: {exc}", file=sys.stderr)
        return 2
    print(_summarize(manifest))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "report":
        return _report_command(Path(args.out))

    try:
        text = Path(args.config).read_bytes().decode("utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    except UnicodeDecodeError as exc:
        print(f"error: config is not UTF-8: {exc}", file=sys.stderr)
        return 2

    try:
        config = parse_config(text)
        if config.kind != args.command:
            raise ValidationError(
                f"config kind '{config.kind}' does not match subcommand "
                f"'{args.command}'"
            )
        config = _apply_overrides(config, args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        manifest = run(config, out_dir=args.out, quiet=args.quiet)
    except VortexLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0 if manifest["status"] == "ok" else 3


if __name__ == "__main__":
    sys.exit(main())
