"""Command-line front end: ``cvwitness {witness,sweep,verify,sample}``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Sequence

from .fock import FockError
from .measurement import DEFAULT_SHOTS, estimate, sample_pipeline, PIPELINES
from .runner import (
    DEFAULT_BUDGET,
    PRESETS,
    WITNESSES,
    ConfigError,
    RunConfig,
    _expand,
    build_states,
    copy_losses,
    frange,
    fmt,
    report_rows,
    run_sweep,
    verify_grid,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def parse_value(text: str):
    text = text.strip()
    for cast in (int, float, complex):
        try:
            return cast(text)
        except ValueError:
            continue
    raise ConfigError(f"cannot parse parameter value {text!r}")


def parse_param(spec: str) -> tuple[str, list]:
    """``k=v[,v...]`` or ``k=start:stop:step``."""
    if "=" not in spec:
        raise ConfigError(f"parameter must look like k=v[,v...], got {spec!r}")
    key, vals = spec.split("=", 1)
    key = key.strip()
    if ":" in vals:
        parts = [float(x) for x in vals.split(":")]
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {vals!r}")
        return key, frange(*parts)
    return key, [parse_value(v) for v in vals.split(",") if v.strip()]


def parse_loss(spec: str) -> dict[str, float]:
    out = {}
    for item in spec.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ConfigError(f"loss entries look like mode=tau, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = float(v)
    return out


def _grid_from_json(grid: dict) -> dict:
    out = {}
    for k, v in grid.items():
        if isinstance(v, dict):
            out[k] = frange(float(v["start"]), float(v["stop"]), float(v["step"]))
        elif isinstance(v, list):
            out[k] = [parse_value(x) if isinstance(x, str) else x for x in v]
        else:
            out[k] = [parse_value(v) if isinstance(v, str) else v]
    return out


def build_config(args) -> RunConfig:
    base: dict = {}
    if getattr(args, "preset", None):
        base.update(PRESETS[args.preset])
    if getattr(args, "config", None):
        with open(args.config) as fh:
            doc = json.load(fh)
        if "preset" in doc:
            base.update(PRESETS[doc.pop("preset")])
        if "params" in doc:
            doc["grid"] = doc.pop("params")
        if "grid" in doc:
            doc["grid"] = _grid_from_json(doc["grid"])
        if "loss" in doc:
            doc["losses"] = doc.pop("loss")
        known = set(RunConfig.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        base.update(doc)
    # flags override file values
    if args.witness:
        base["witness"] = args.witness
    if args.state:
        base["state"] = args.state
    if args.param:
        grid = dict(base.get("grid", {}))
        for spec in args.param:
            k, v = parse_param(spec)
            grid[k] = v
        base["grid"] = grid
    if args.loss:
        losses = dict(base.get("losses", {}))
        for spec in args.loss:
            losses.update(parse_loss(spec))
        base["losses"] = losses
    for flag in ("cutoff", "out", "shots", "seed", "jobs"):
        v = getattr(args, flag, None)
        if v is not None:
            base[flag] = v
    if getattr(args, "pipeline", False):
        base["pipeline"] = True
    if getattr(args, "budget", None) is not None:
        base["budget"] = args.budget
    for req in ("witness", "state"):
        if req not in base:
            raise ConfigError(f"--{req} is required (or a preset/config providing it)")
    if base["witness"] not in WITNESSES:
        raise ConfigError(f"unknown witness {base['witness']!r}; known: {list(WITNESSES)}")
    return RunConfig(**base)


def _write(header, rows, out: str | None) -> None:
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if out:
            fh.close()


def cmd_witness(args) -> int:
    cfg = build_config(args)
    if len(cfg.points()) != 1:
        raise ConfigError("`witness` evaluates a single point; use `sweep` for grids")
    return cmd_sweep_cfg(cfg)


def cmd_sweep(args) -> int:
    return cmd_sweep_cfg(build_config(args))


def cmd_sweep_cfg(cfg: RunConfig) -> int:
    header, rows = report_rows(run_sweep(cfg))
    _write(header, rows, cfg.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify_grid(quick=args.quick)
    header = ["check", "oracle", "simulated", "expected", "abs_err", "tol", "status"]
    rows = [[c.name, c.oracle, fmt(c.simulated), fmt(c.expected), fmt(c.error), fmt(c.tol),
             "PASS" if c.passed else "FAIL"] for c in checks]
    _write(header, rows, args.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_sample(args) -> int:
    cfg = build_config(args)
    if cfg.witness not in PIPELINES:
        raise ConfigError(f"sampling needs a pipeline witness: {sorted(PIPELINES)}")
    pts = cfg.points()
    if len(pts) != 1:
        raise ConfigError("`sample` runs a single parameter point")
    shots = cfg.shots or DEFAULT_SHOTS
    if shots < 1:
        raise ConfigError("--shots must be at least 1")
    point = pts[0]
    states, _ = build_states(cfg.state, point, cfg.cutoff, cfg.budget)
    n = PIPELINES[cfg.witness].n_copies
    lmap = copy_losses(n, cfg.losses, point.get("tau"))
    counts = sample_pipeline(cfg.witness, _expand(states, n), lmap, shots=shots, seed=cfg.seed)
    first = next(iter(counts.values()))
    header = ["setting"] + [str(m) for m in first.modes] + ["count"]
    rows = []
    for name, tab in counts.items():
        for occ in sorted(tab.counts):
            rows.append([name] + [str(x) for x in occ] + [str(tab.counts[occ])])
    _write(header, rows, cfg.out)
    value, se = estimate(cfg.witness, counts)
    print(f"# {cfg.witness} estimate {fmt(value)} +- {fmt(se)} ({shots} shots per setting, seed {cfg.seed})",
          file=sys.stderr)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON run configuration; flags override its values")
    p.add_argument("--witness", choices=WITNESSES)
    p.add_argument("--state", metavar="FAMILY", help="tmsv, tmsv2, cat, cat3, noon, coherent, squeezed, squeezed2, fock")
    p.add_argument("--param", action="append", metavar="k=v[,v...]", help="parameter values or start:stop:step range")
    p.add_argument("--loss", action="append", metavar="mode=tau[,...]", help="per-mode transmittances, e.g. a1=0.8,b2=0.5")
    p.add_argument("--cutoff", type=int, metavar="N", help="Fock cutoff (default: chosen from the leakage budget)")
    p.add_argument("--budget", type=float, metavar="P", help=f"leakage budget for automatic cutoffs (default {DEFAULT_BUDGET:g})")
    p.add_argument("--shots", type=int, metavar="N", help="finite-shot sampling instead of exact statistics")
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--pipeline", action="store_true", help="reconstruct from photon counting after the measurement circuits")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--jobs", type=int, metavar="N", help="worker processes for sweeps")
    p.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cvwitness", description="Multicopy entanglement witnesses in truncated Fock space.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn, helptext in (
        ("witness", cmd_witness, "evaluate one witness at one parameter point"),
        ("sweep", cmd_sweep, "evaluate a witness over a parameter grid"),
        ("sample", cmd_sample, "finite-shot photon counts for a measurement pipeline"),
    ):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.set_defaults(func=fn)
    p = sub.add_parser("verify", help="compare simulations with every closed-form oracle")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--quick", action="store_true", help="smaller grid")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FockError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"cvwitness: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
