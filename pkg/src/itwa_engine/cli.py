"""Command-line entry point: graph generation, simulation runs, oracle
curves and parameter sweeps, all emitting machine-readable CSV plus a JSON
run manifest that reproduces the run bit-identically.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .errors import EngineError, NumericalError, ValidationError
from .graphs import generate_random_regular, parse_graph, serialize_graph
from .models import IsingGraphModel, LatticeSpec, TFIMModel
from .oracles import (enumerate_ground_state, enumerate_thermal_energy,
                      ed_thermal_tfim, sa_estimate_ground_state)
from .runner import OBSERVABLES, run_observables
from .estimators import window_average
from .sde import Schedule

CSV_HEADER = "tau,observable,value,stderr,ess,n_traj"
INVALID_TOLERANCE = 1e-3


def _fmt(x: float) -> str:
    return f"{x:.11e}"


def _parse_floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"could not parse float list {text!r}")


def _build_lattice(args) -> LatticeSpec:
    if args.chain is not None:
        return LatticeSpec(dimension=1, lengths=(args.chain,), boundary=args.boundary)
    if args.lattice is not None:
        try:
            lx, ly = (int(x) for x in args.lattice.lower().split("x"))
        except ValueError:
            raise ValidationError(f"--lattice expects LxW, got {args.lattice!r}")
        return LatticeSpec(dimension=2, lengths=(lx, ly), boundary=args.boundary)
    raise ValidationError("either --graph, --chain or --lattice is required")


def _model_from_config(cfg: dict):
    if cfg["model"] == "ising":
        with open(cfg["graph"]) as fh:
            g = parse_graph(fh.read())
        return IsingGraphModel(g, J=cfg["J"])
    lattice = LatticeSpec(dimension=cfg["dimension"],
                          lengths=tuple(cfg["lengths"]),
                          boundary=cfg["boundary"])
    return TFIMModel(lattice, J=cfg["J"], h=cfg["h"])


def _run_config_from_args(args) -> dict:
    if args.from_manifest:
        with open(args.from_manifest) as fh:
            cfg = json.load(fh)["config"]
    else:
        if args.graph:
            cfg = {"model": "ising", "graph": args.graph, "J": args.J}
        else:
            lattice = _build_lattice(args)
            cfg = {
                "model": "tfim",
                "dimension": lattice.dimension,
                "lengths": list(lattice.lengths),
                "boundary": lattice.boundary,
                "J": args.J,
                "h": args.h,
            }
        cfg.update({
            "d_tau": args.d_tau,
            "snapshots": _parse_floats(args.snapshots),
            "n_traj": args.n_traj,
            "seed": args.seed,
            "observables": [x.strip() for x in args.observables.split(",") if x.strip()],
            "e0": args.e0,
        })
    cfg.setdefault("e0", None)
    if cfg["e0"] is not None and cfg["e0"] == 0.0:
        raise ValidationError("--e0 must be nonzero (relative error is undefined)")
    return cfg


def _write_manifest(path: str, cfg: dict, diagnostics: dict, wall_time: float):
    manifest = {
        "config": cfg,
        "seed": cfg["seed"],
        "version": __version__,
        "wall_time_s": wall_time,
        "invalid_trajectories": diagnostics["n_invalid"],
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_graph(args) -> int:
    g = generate_random_regular(args.n, k=args.k, seed=args.seed)
    with open(args.out, "w") as fh:
        fh.write(serialize_graph(g))
    print(f"wrote {args.out}: {g.n} nodes, {g.n_edges} edges, degree {g.degree}")
    return 0


def cmd_run(args) -> int:
    cfg = _run_config_from_args(args)
    model = _model_from_config(cfg)
    schedule = Schedule(d_tau=cfg["d_tau"], snapshot_taus=tuple(cfg["snapshots"]),
                        n_traj=cfg["n_traj"], seed=cfg["seed"])
    t0 = time.monotonic()
    series, diagnostics = run_observables(model, schedule, cfg["observables"],
                                          workers=args.workers)
    wall = time.monotonic() - t0
    frac = diagnostics["n_invalid"] / diagnostics["n_traj"]
    lines = [CSV_HEADER]
    for name in cfg["observables"]:
        s = series[name]
        for i in range(len(s)):
            lines.append(",".join([
                _fmt(s.tau[i]), name, _fmt(s.value[i]), _fmt(s.stderr[i]),
                _fmt(s.ess[i]), str(int(s.n_traj[i])),
            ]))
    if cfg["e0"] is not None and "energy" in cfg["observables"]:
        # relative error against an externally supplied ground-state energy
        s = series["energy"]
        e0 = cfg["e0"]
        for i in range(len(s)):
            lines.append(",".join([
                _fmt(s.tau[i]), "delta_eps", _fmt((s.value[i] - e0) / abs(e0)),
                _fmt(s.stderr[i] / abs(e0)), _fmt(s.ess[i]),
                str(int(s.n_traj[i])),
            ]))
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    manifest_path = args.manifest or args.out + ".manifest.json"
    _write_manifest(manifest_path, cfg, diagnostics, wall)
    print(f"wrote {args.out} ({len(lines) - 1} rows) and {manifest_path}")
    if frac > INVALID_TOLERANCE:
        raise NumericalError(
            f"{diagnostics['n_invalid']} of {diagnostics['n_traj']} trajectories "
            f"invalid ({frac:.2%} > {INVALID_TOLERANCE:.2%})"
        )
    return 0


def cmd_oracle(args) -> int:
    lines = [CSV_HEADER + ",method"]
    if args.graph:
        with open(args.graph) as fh:
            g = parse_graph(fh.read())
        if args.ground_state:
            if args.method == "sa":
                rep = sa_estimate_ground_state(g, J=args.J, restarts=args.restarts,
                                               sweeps=args.sweeps, seed=args.seed)
            else:
                rep = enumerate_ground_state(g, J=args.J)
            lines.append(",".join([
                _fmt(float("inf")), "energy", _fmt(rep.energy), _fmt(0.0),
                "n/a", "0", rep.method,
            ]))
        else:
            for tau in _parse_floats(args.taus):
                e = enumerate_thermal_energy(g, args.J, tau)
                lines.append(",".join([
                    _fmt(tau), "energy", _fmt(e), _fmt(0.0), "n/a", "0",
                    "enumeration",
                ]))
    else:
        lattice = _build_lattice(args)
        model = TFIMModel(lattice, J=args.J, h=args.h)
        taus = np.array(_parse_floats(args.taus))
        energies, msqs = ed_thermal_tfim(model, taus)
        for tau, e, m in zip(taus, energies, msqs):
            lines.append(",".join([_fmt(tau), "energy", _fmt(e), _fmt(0.0),
                                   "n/a", "0", "ed"]))
            lines.append(",".join([_fmt(tau), "msq", _fmt(m), _fmt(0.0),
                                   "n/a", "0", "ed"]))
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.out} ({len(lines) - 1} rows)")
    return 0


def cmd_sweep(args) -> int:
    lattice = _build_lattice(args)
    try:
        lo, hi = (float(x) for x in args.window.split(":"))
    except ValueError:
        raise ValidationError(f"--window expects MIN:MAX, got {args.window!r}")
    if hi <= lo:
        raise ValidationError("--window must have MIN < MAX")
    step = args.snapshot_step
    taus = [round(k * step, 12) for k in range(1, int(round(hi / step)) + 1)]
    if not any(lo - 1e-12 <= t <= hi + 1e-12 for t in taus):
        raise ValidationError("window contains no snapshot times")
    lines = ["param,value,stderr"]
    for h in _parse_floats(args.h_values):
        model = TFIMModel(lattice, J=args.J, h=h)
        schedule = Schedule(d_tau=args.d_tau, snapshot_taus=tuple(taus),
                            n_traj=args.n_traj, seed=args.seed)
        series, diagnostics = run_observables(model, schedule, [args.observable],
                                              workers=args.workers)
        value, err = window_average(series[args.observable], lo, hi)
        lines.append(f"{_fmt(h)},{_fmt(value)},{_fmt(err)}")
        print(f"h={h}: {args.observable} = {value:.6f} +- {err:.6f}")
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.out}")
    return 0


def _add_lattice_args(p):
    p.add_argument("--chain", type=int, help="1D chain length")
    p.add_argument("--lattice", help="2D lattice as LxW, e.g. 4x4")
    p.add_argument("--boundary", choices=["periodic", "open"], default="periodic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itwa",
        description="Imaginary-time phase-space trajectory engine for spin-1/2 systems",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="generate a random k-regular graph file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("run", help="integrate an ensemble and write observables")
    p.add_argument("--graph", help="edge-list file (AF Ising graph model)")
    _add_lattice_args(p)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.0, help="transverse field (TFIM)")
    p.add_argument("--d-tau", type=float, default=1e-3)
    p.add_argument("--snapshots", default="", help="comma-separated output taus")
    p.add_argument("--n-traj", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--observables", default="energy")
    p.add_argument("--e0", type=float, default=None,
                   help="reference ground-state energy; adds delta_eps rows")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p.add_argument("--from-manifest", help="re-run the config of an existing manifest")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="exact/heuristic reference values")
    p.add_argument("--graph")
    _add_lattice_args(p)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.0)
    p.add_argument("--taus", default="", help="comma-separated taus")
    p.add_argument("--ground-state", action="store_true")
    p.add_argument("--method", choices=["enum", "sa"], default="enum")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="field sweep with stationary-window averaging")
    _add_lattice_args(p)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--h-values", required=True, help="comma-separated h values")
    p.add_argument("--window", required=True, help="tau window as MIN:MAX")
    p.add_argument("--snapshot-step", type=float, default=0.25)
    p.add_argument("--d-tau", type=float, default=1e-3)
    p.add_argument("--n-traj", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--observable", default="msq", choices=sorted(OBSERVABLES))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
