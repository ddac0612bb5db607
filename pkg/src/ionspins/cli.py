"""Command-line front end for the trapped-ion Ising pipeline.

Subcommands: modes, couplings, phase-table, scan2d, gap, check.
Flag precedence is command line > config file (--config, key=value lines) >
built-in defaults; the fully resolved configuration is echoed into every
output file so any artifact can be reproduced byte for byte.

Exit codes: 0 success, 2 usage/configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import fileio
from .chain import (
    ConvergenceError,
    DegenerateModes,
    TrapConfig,
    ZigzagInstability,
    equilibrium_positions,
    transverse_modes,
)
from .couplings import ResonanceError, bond_graph, coupling_from_trap
from .lanczos import DEFAULT_SEED, NoConvergence
from .phases import fit_alpha, linear_fit, phase_table, scan_2d


@dataclass
class RunConfig:
    """Resolved run parameters; every field has a documented default."""

    command: str = ""
    n: int = 7
    n_list: str = ""
    beta: float = 10.0
    mu_tilde: float | None = None
    mu_range: str = ""
    b: float = 0.0
    b_range: str = ""
    samples: str = ""
    tol: float | None = None
    out: str = "ionspins_out"
    format: str = "both"
    threads: int = 1
    seed: int = DEFAULT_SEED
    check: bool = False

    def header(self):
        return {k: v for k, v in asdict(self).items()}


_FIELD_TYPES = {
    "n": int,
    "n_list": str,
    "beta": float,
    "mu_tilde": float,
    "mu_range": str,
    "b": float,
    "b_range": str,
    "samples": str,
    "tol": float,
    "out": str,
    "format": str,
    "threads": int,
    "seed": int,
    "check": lambda s: s.strip().lower() in ("1", "true", "yes"),
}


def _read_config_file(path):
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config file line without '=': {line!r}")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _FIELD_TYPES:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = _FIELD_TYPES[key](val.strip())
    return values


def _resolve(args):
    cfg = RunConfig(command=args.command)
    if getattr(args, "config", None):
        for key, val in _read_config_file(args.config).items():
            setattr(cfg, key, val)
    for key in _FIELD_TYPES:
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    return cfg


def _parse_range(text, name):
    try:
        lo, _, hi = text.partition(":")
        lo, hi = float(lo), float(hi)
    except ValueError:
        raise ValueError(f"--{name} expects lo:hi, got {text!r}") from None
    if not hi > lo:
        raise ValueError(f"--{name} needs hi > lo, got {text!r}")
    return lo, hi


def _parse_resolution(text, default):
    if not text:
        return default
    parts = text.lower().split("x")
    if len(parts) == 1:
        return int(parts[0]), int(parts[0])
    if len(parts) == 2:
        return int(parts[0]), int(parts[1])
    raise ValueError(f"--samples expects N or NxM, got {text!r}")


def _ensure_out(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def cmd_modes(cfg):
    out = _ensure_out(cfg)
    tol = cfg.tol if cfg.tol is not None else 1e-12
    chain = equilibrium_positions(TrapConfig(n_ions=cfg.n, aspect_ratio=cfg.beta), tol=tol)
    spec = transverse_modes(chain)
    header = cfg.header()
    fileio.write_csv(
        os.path.join(out, "positions.csv"),
        ["n", "u"],
        [(i + 1, chain.positions[i]) for i in range(cfg.n)],
        header,
    )
    fileio.write_csv(
        os.path.join(out, "modes.csv"),
        ["k", "omega"] + [f"b_{i + 1}" for i in range(cfg.n)],
        [
            (k + 1, spec.frequencies[k], *spec.mode_matrix[:, k])
            for k in range(cfg.n)
        ],
        header,
    )
    return ["positions.csv", "modes.csv"]


def cmd_couplings(cfg):
    if cfg.mu_tilde is None:
        raise ValueError("couplings requires --mu-tilde")
    out = _ensure_out(cfg)
    tol = cfg.tol if cfg.tol is not None else 1e-12
    coupling = coupling_from_trap(cfg.n, cfg.beta, cfg.mu_tilde, tol=tol)
    edges = bond_graph(coupling)
    header = cfg.header()
    fileio.write_csv(
        os.path.join(out, "couplings.csv"),
        ["m", "n", "j"],
        [(e.m, e.n, e.coupling) for e in sorted(edges, key=lambda e: (e.m, e.n))],
        header,
    )
    fileio.write_json(
        os.path.join(out, "bond_graph.json"),
        {
            "n_ions": cfg.n,
            "beta": cfg.beta,
            "mu_tilde": coupling.detuning.rescaled,
            "mu": coupling.detuning.resolved,
            "jbar": coupling.jbar,
            "nodes": list(range(1, cfg.n + 1)),
            "edges": [
                {"m": e.m, "n": e.n, "weight": e.weight, "sign": e.sign, "j": e.coupling}
                for e in edges
            ],
        },
        header,
    )
    return ["couplings.csv", "bond_graph.json"]


def cmd_phase_table(cfg):
    out = _ensure_out(cfg)
    samples = int(cfg.samples) if cfg.samples else 64
    refine = cfg.tol if cfg.tol is not None else 1e-6
    table = phase_table(cfg.n, cfg.beta, samples_per_interval=samples, refine_tol=refine)
    fileio.write_json(
        os.path.join(out, "phase_table.json"),
        {"table": table.to_dict(), "transition_count": table.transition_count},
        cfg.header(),
    )
    return ["phase_table.json"]


def cmd_scan2d(cfg):
    if not cfg.mu_range or not cfg.b_range:
        raise ValueError("scan2d requires --mu-range and --b-range")
    out = _ensure_out(cfg)
    mu_range = _parse_range(cfg.mu_range, "mu-range")
    b_range = _parse_range(cfg.b_range, "b-range")
    resolution = _parse_resolution(cfg.samples, (128, 64))
    grid = scan_2d(
        cfg.n, cfg.beta, mu_range, b_range, resolution=resolution, threads=cfg.threads
    )
    header = cfg.header()
    fileio.write_csv(
        os.path.join(out, "scan2d.csv"),
        ["mu_tilde", "B_over_Jbar", "order_parameter", "polarization", "E0", "E1"],
        list(grid.rows()),
        header,
    )
    written = ["scan2d.csv"]
    if cfg.format in ("json", "both"):
        fileio.write_json(
            os.path.join(out, "scan2d.json"),
            {
                "n_ions": grid.n_ions,
                "beta": grid.beta,
                "mu_values": [float(x) for x in grid.mu_values],
                "b_over_jbar_values": [float(x) for x in grid.b_values],
                "order_parameter": [[fileio.fmt(v) for v in row] for row in grid.order_parameter],
                "polarization": [[fileio.fmt(v) for v in row] for row in grid.polarization],
                "failures": grid.failures,
            },
            header,
        )
        written.append("scan2d.json")
    n_points = grid.order_parameter.size
    if len(grid.failures) > 0.01 * n_points:
        raise NoConvergence(
            f"{len(grid.failures)} of {n_points} grid points failed"
        )
    return written


def cmd_gap(cfg):
    out = _ensure_out(cfg)
    if cfg.n_list:
        n_values = [int(x) for x in cfg.n_list.split(",") if x.strip()]
    else:
        n_values = [cfg.n]
    if cfg.b_range:
        lo, hi = _parse_range(cfg.b_range, "b-range")
    else:
        lo, hi = 0.01, 0.1
    count = int(cfg.samples) if cfg.samples else 8
    b_values = np.geomspace(lo, hi, count)
    fits = [fit_alpha(n, cfg.beta, b_values) for n in n_values]
    header = cfg.header()
    rows = []
    for fit in fits:
        for p in fit.points:
            rows.append((fit.n_ions, p.b_over_njbar, p.gap, p.mu_star))
    fileio.write_csv(
        os.path.join(out, "gap_scaling.csv"),
        ["N", "B_over_NJbar", "delta_E", "mu_star"],
        rows,
        header,
    )
    payload = {
        "alphas": [
            {"n_ions": f.n_ions, "alpha": f.alpha, "residual": f.residual} for f in fits
        ]
    }
    if len(fits) >= 2:
        slope, intercept, rms = linear_fit(
            [f.n_ions for f in fits], [f.alpha for f in fits]
        )
        payload["fit"] = {"slope": slope, "intercept": intercept, "residual": rms}
    fileio.write_json(os.path.join(out, "alpha_fit.json"), payload, header)
    return ["gap_scaling.csv", "alpha_fit.json"]


def cmd_check(cfg):
    for message in fileio.check_directory(cfg.out):
        print(message)
    return []


_COMMANDS = {
    "modes": cmd_modes,
    "couplings": cmd_couplings,
    "phase-table": cmd_phase_table,
    "scan2d": cmd_scan2d,
    "gap": cmd_gap,
    "check": cmd_check,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ionspins",
        description="Trapped-ion frustrated Ising pipeline: modes, couplings, phase diagrams",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value config file (flags take precedence)")
        p.add_argument("--n", type=int, help="ion count (default 7)")
        p.add_argument("--n-list", dest="n_list", help="comma-separated ion counts (gap)")
        p.add_argument("--beta", type=float, help="trap aspect ratio wx/wz (default 10)")
        p.add_argument("--mu-tilde", dest="mu_tilde", type=float, help="rescaled detuning")
        p.add_argument("--mu-range", dest="mu_range", help="detuning range lo:hi")
        p.add_argument("--b", type=float, help="transverse field in units of Jbar")
        p.add_argument("--b-range", dest="b_range", help="field range lo:hi")
        p.add_argument("--samples", help="grid samples (N or NxM)")
        p.add_argument("--tol", type=float, help="solver/refinement tolerance")
        p.add_argument("--out", help="output directory (default ionspins_out)")
        p.add_argument("--format", choices=["csv", "json", "both"], help="extra outputs")
        p.add_argument("--threads", type=int, help="worker threads for sweeps")
        p.add_argument("--seed", type=int, help="iterative eigensolver start seed")
        p.add_argument(
            "--check", action="store_const", const=True, help="re-verify outputs after writing"
        )
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        _COMMANDS[cfg.command](cfg)
        if cfg.check and cfg.command != "check":
            for message in fileio.check_directory(cfg.out):
                print(message)
    except (ZigzagInstability, DegenerateModes, ConvergenceError, NoConvergence) as exc:
        print(f"ionspins: numerical failure: {exc}", file=sys.stderr)
        return 3
    except fileio.CheckFailure as exc:
        print(f"ionspins: check failed: {exc}", file=sys.stderr)
        return 3
    except (ResonanceError, ValueError, FileNotFoundError, OSError) as exc:
        print(f"ionspins: configuration error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
