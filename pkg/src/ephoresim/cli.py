"""Batch command-line front end.

Subcommands ``design``, ``signal``, ``ber``, ``sweep`` and ``bbo`` each read a
JSON experiment config and write CSV/JSON artifacts into a fresh timestamped
directory under ``--out`` (default: the config's ``output.directory``),
together with ``manifest.json``. The manifest and every JSON artifact carry
the fully resolved config and seed; passing either back as ``--config``
reproduces the run.

Exit status: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .channel import BitSequence, expected_signal
from .config import DEFAULT_BITS, ExperimentConfig, build_profile, load_config, simulation_config
from .errors import ConfigError, InfeasibleDesign, InvalidConstraint, NumericalError
from .field import Exponential, Sinusoidal, average_power, first_velocity_minimum, position, velocity_at
from .fluiddyn import (
    BBOParams,
    bbo_analytic,
    bbo_numeric,
    stokes_einstein_radius,
    time_to_feasibility,
    write_trajectory_csv,
)
from .mcsim import CSV_COLUMNS, estimate_ber

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class Run:
    """Output directory of one invocation plus its manifest."""

    def __init__(self, root: Path, subcommand: str, cfg: ExperimentConfig, formats):
        stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S-%f")
        self.dir = Path(root) / f"{subcommand}-{stamp}"
        self.dir.mkdir(parents=True, exist_ok=False)
        self.subcommand = subcommand
        self.cfg = cfg
        self.formats = tuple(formats)
        self.files: list[str] = []

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats

    def write_json(self, name: str, obj) -> None:
        # every JSON artifact carries its own provenance
        doc = {"result": obj, "seed": self.cfg.simulation.seed, "config": self.cfg.to_dict()}
        path = self.dir / name
        path.write_text(json.dumps(doc, indent=2, default=_json_default) + "\n")
        self.files.append(name)

    def write_csv(self, name: str, header, rows) -> None:
        path = self.dir / name
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(x) for x in row])
        self.files.append(name)

    def finish(self) -> Path:
        manifest = {
            "subcommand": self.subcommand,
            "created": _dt.datetime.now().isoformat(timespec="seconds"),
            "version": __version__,
            "seed": self.cfg.simulation.seed,
            "files": self.files,
            "config": self.cfg.to_dict(),
        }
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        return self.dir


def _cell(x):
    # np.float64 subclasses float but its repr is "np.float64(...)" under numpy 2
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _profile_summary(p, T_int) -> dict:
    out = {"profile": p.to_dict(), "average_power": average_power(p, T_int)}
    if isinstance(p, Sinusoidal):
        out["t1"] = first_velocity_minimum(p)
    if isinstance(p, Exponential):
        out["x_T_int"] = position(p, T_int)
    return out


def run_design(cfg: ExperimentConfig, run: Run) -> dict:
    p = build_profile(cfg)
    T = cfg.frame.T_int
    summary = _profile_summary(p, T)
    summary["xi_v"] = cfg.field.xi_v
    n = cfg.output.trajectory_points
    t = np.arange(n + 1) * (T / n)
    if run.wants("json"):
        run.write_json("design.json", summary)
    if run.wants("csv"):
        run.write_csv("trajectory.csv", ["t", "x", "v_x"],
                      zip(t, np.asarray(position(p, t)), np.asarray(velocity_at(p, t))))
    return summary


def run_signal_trace(cfg: ExperimentConfig, run: Run, bits: BitSequence) -> np.ndarray:
    p = build_profile(cfg)
    T = cfg.frame.T_int
    ppi = cfg.output.points_per_interval
    t = np.arange(len(bits) * ppi + 1) * (T / ppi)
    mean = np.asarray(expected_signal(cfg.channel, p, T, bits, t, isi_window=cfg.simulation.isi_window))
    v = np.asarray(velocity_at(p, t))
    if run.wants("csv"):
        run.write_csv("signal.csv", ["t", "mean_count", "v_x"], zip(t, mean, v))
    if run.wants("json"):
        run.write_json("signal.json", {"bits": list(bits.bits), "t": t, "mean_count": mean, "v_x": v})
    return mean


def run_ber(cfg: ExperimentConfig, run: Run | None = None):
    report = estimate_ber(simulation_config(cfg))
    if run is not None:
        if run.wants("json"):
            run.write_json("ber.json", report.to_dict())
        if run.wants("csv"):
            row = report.csv_row()
            run.write_csv("ber.csv", CSV_COLUMNS, [[row[c] for c in CSV_COLUMNS]])
    return report


def run_sweep(cfg: ExperimentConfig, run: Run | None = None) -> list[dict]:
    """One BER report per sweep value; infeasible designs become NaN rows."""
    if cfg.sweep is None:
        raise ConfigError("sweep subcommand needs a 'sweep' block")
    rows = []
    for value in cfg.sweep.values:
        sub = cfg.with_value(cfg.sweep.parameter, value)
        entry = {"parameter": cfg.sweep.parameter, "value": value}
        try:
            rep = estimate_ber(simulation_config(sub))
        except InfeasibleDesign as exc:
            entry.update(status="infeasible", detail=str(exc), ber=math.nan, ci95=math.nan,
                         gamma=math.nan, report=None,
                         csv={"field_variant": sub.field.variant, "xi_v": sub.field.xi_v,
                              "T_int": sub.frame.T_int, "M": sub.frame.M,
                              "trials": sub.simulation.trials, "seed": sub.simulation.seed,
                              "gamma": math.nan, "ber": math.nan, "ci95": math.nan})
        else:
            entry.update(status="ok", ber=rep.ber, ci95=rep.ci_halfwidth_95,
                         gamma=rep.gamma_used, report=rep.to_dict(), csv=rep.csv_row())
        rows.append(entry)
    if run is not None:
        if run.wants("csv"):
            header = ("parameter", "value", "status") + CSV_COLUMNS
            run.write_csv("sweep.csv", header,
                          [[r["parameter"], r["value"], r["status"]] + [r["csv"][c] for c in CSV_COLUMNS]
                           for r in rows])
        if run.wants("json"):
            run.write_json("sweep.json", [{k: v for k, v in r.items() if k != "csv"} for r in rows])
    return rows


def run_bbo(cfg: ExperimentConfig, run: Run | None = None) -> dict:
    p = build_profile(cfg)
    T = cfg.frame.T_int
    b = cfg.bbo
    t = np.linspace(0.0, T, b.points)
    v = np.asarray(velocity_at(p, t))
    summary = {"profile": p.to_dict(), "radii": []}
    for r in b.radii:
        bp = BBOParams(float(r), b.rho_m, b.rho_f, b.mu_f, b.q_A)
        try:
            u = np.asarray(bbo_analytic(bp, p, t))
            method = "analytic"
        except NumericalError:
            u = bbo_numeric(bp, p, T, b.tol, t_eval=t)[1]
            method = "numeric"
        scale = float(np.max(np.abs(v))) or 1.0
        ttf = time_to_feasibility(bp, p, T, b.factor)
        summary["radii"].append({
            "r_m": float(r),
            "method": method,
            "relaxation_time": bp.relaxation_time,
            "max_rel_deviation": float(np.max(np.abs(u - v)) / scale),
            "max_rel_deviation_after_5pct": float(np.max(np.abs(u - v)[t >= 0.05 * T]) / scale),
            "time_to_feasibility": ttf,
            "time_to_feasibility_fraction": ttf / T,
        })
        if run is not None and run.wants("csv"):
            name = f"trajectory_r{float(r):.3e}.csv"
            write_trajectory_csv(run.dir / name, t, u, v)
            run.files.append(name)
    summary["stokes_einstein_radius"] = stokes_einstein_radius(cfg.channel.D_A, b.temperature, b.mu_f)
    if run is not None and run.wants("json"):
        run.write_json("bbo_summary.json", summary)
    return summary


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ephoresim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("design", "design the field and export its parameters and trajectory"),
        ("signal", "expected receiver count trace for a bit sequence"),
        ("ber", "Monte Carlo bit-error rate"),
        ("sweep", "BER for each value of one parameter"),
        ("bbo", "molecule velocity response and feasibility"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON experiment config (or a run manifest)")
        p.add_argument("--out", help="output root directory")
        p.add_argument("--seed", type=int, help="override simulation.seed")
        p.add_argument("--trials", type=int, help="override simulation.trials")
        p.add_argument("--format", choices=("csv", "json"), help="write only this format")
        if name == "signal":
            p.add_argument("--bits", help="bit string such as 0110010 (default: config sequence or 0110010)")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        sim = cfg.simulation
        if args.seed is not None:
            sim = replace(sim, seed=args.seed)
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError("--trials must be positive")
            sim = replace(sim, trials=args.trials)
        cfg = replace(cfg, simulation=sim)
        formats = (args.format,) if args.format else cfg.output.formats
        run = Run(Path(args.out or cfg.output.directory), args.command, cfg, formats)

        if args.command == "design":
            run_design(cfg, run)
        elif args.command == "signal":
            if args.bits:
                bits = BitSequence.from_string(args.bits)
                if len(bits) != len(args.bits):
                    raise ConfigError("--bits may contain only 0 and 1")
            elif sim.sequence is not None:
                bits = BitSequence(sim.sequence)
            else:
                bits = BitSequence(DEFAULT_BITS)
            run_signal_trace(cfg, run, bits)
        elif args.command == "ber":
            run_ber(cfg, run)
        elif args.command == "sweep":
            run_sweep(cfg, run)
        elif args.command == "bbo":
            run_bbo(cfg, run)
        out = run.finish()
    except (ConfigError, InvalidConstraint) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
