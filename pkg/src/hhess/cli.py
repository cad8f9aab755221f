"""Command line front end.

Five subcommands cover the workflow end to end::

    hhess design --tau 0.87 --xi 0.72 --k1 1 --k2 2 --alpha 6.67e-4
    hhess bode   --omega-min 1e-3 --omega-max 1e3 --points 400
    hhess sim    --band 2
    hhess mpt
    hhess sweep

``--config`` points at an INI file (see :mod:`hhess.config`); anything it
does not set falls back to the packaged defaults.  Output files land in
``--out-dir``, the ``HHESS_OUT_DIR`` environment variable, or the current
directory, in that order of precedence.  Numeric CSV cells are written as
9-significant-digit scientific notation so repeated runs are byte
identical.

Exit status: 0 on success, 1 on a domain error (infeasible targets,
diverged integration, singular threshold terms), 2 on a configuration or
usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from typing import Iterable, Sequence

from .config import ConfigError, RunConfig, default_config, load_config
from .design import DesignTargets, synthesize
from .droop import characteristic, sharing_indices
from .freq import bode, crossover_report
from .mpt import MU1_TERM_NAMES, MU2_TERM_NAMES, is_stable
from .mpt import sweep as sweep_plane
from .sim import (
    IntegrationDivergedError,
    final_soc,
    simulate,
    soc_violations,
    step_metrics,
)

BODE_HEADER = (
    "omega_rad_s", "freq_hz",
    "mag_a_db", "phase_a_deg",
    "mag_p_db", "phase_p_deg",
    "mag_s_db", "phase_s_deg",
)
TIMESERIES_HEADER = (
    "t_s", "f_hz", "p_t_w", "p_a_w", "p_p_w", "p_s_w",
    "v_dc_v", "delta_q_j", "soc",
)
SWEEP_HEADER = ("p_grid_w", "c_dc2_f", "mu1", "mu2", "mu_sum", "stable")
BOUNDARY_HEADER = ("p_grid_w", "c_dc2_boundary_f")

_SLUGGISH_XI = 2.0


def _fmt(x: float) -> str:
    """Scientific notation with 9 significant digits: the CSV cell format."""
    return f"{float(x):.8e}"


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def _write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write("\n")


def _xi_warnings(xi: float) -> list[str]:
    if xi > _SLUGGISH_XI:
        return [
            f"damping ratio xi = {xi:.6g} exceeds {_SLUGGISH_XI:g}:"
            " the handover will be sluggish and the supercapacitor"
            " oversized for the response it delivers"
        ]
    return []


def _characteristic_payload(bank) -> dict:
    char = characteristic(bank)
    ratios = sharing_indices(bank)
    return {
        "omega0_rad_s": char.omega0,
        "xi": char.xi,
        "omega_c_rad_s": char.omega_c,
        "tau_s": char.tau,
        "k1": ratios.k1,
        "k2": ratios.k2,
    }


def _print_warnings(warnings: Sequence[str]) -> None:
    for text in warnings:
        print(f"warning: {text}", file=sys.stderr)


def _cmd_design(args, cfg: RunConfig, out_dir: str) -> int:
    if args.alpha is None and (args.dv_max is None or args.p_a_max is None):
        print(
            "error: design needs either --alpha or both --dv-max and --p-a-max",
            file=sys.stderr,
        )
        return 2
    if args.alpha is not None:
        targets = DesignTargets(
            tau=args.tau, xi=args.xi, k1=args.k1, k2=args.k2,
            alpha=args.alpha, dv_max=args.dv_max, p_a_max=args.p_a_max,
        )
    else:
        targets = DesignTargets.from_rating(
            args.tau, args.xi, args.k1, args.k2, args.dv_max, args.p_a_max,
        )
    bank, char = synthesize(targets, v_ref=cfg.bank.v_ref)
    warnings = _xi_warnings(char.xi)
    payload = {
        "targets": {
            "tau_s": targets.tau,
            "xi": targets.xi,
            "k1": targets.k1,
            "k2": targets.k2,
            "alpha_v_per_w": targets.alpha,
            "dv_max_v": targets.dv_max,
            "p_a_max_w": targets.p_a_max,
        },
        "bank": dataclasses.asdict(bank),
        "characteristic": _characteristic_payload(bank),
        "warnings": warnings,
    }
    _write_json(os.path.join(out_dir, "design.json"), payload)
    print(
        f"alpha={_fmt(bank.alpha)} beta={_fmt(bank.beta)} gamma={_fmt(bank.gamma)}"
        f" zeta={_fmt(bank.zeta)} k={_fmt(bank.k)}"
    )
    print(f"omega0={_fmt(char.omega0)} rad/s xi={_fmt(char.xi)} -> design.json")
    _print_warnings(warnings)
    return 0


def _cmd_bode(args, cfg: RunConfig, out_dir: str) -> int:
    table = bode(
        cfg.bank,
        omega_min=args.omega_min,
        omega_max=args.omega_max,
        points=args.points,
    )
    rows = (
        tuple(_fmt(col[i]) for col in (
            table.omega, table.freq,
            table.mag_a, table.phase_a,
            table.mag_p, table.phase_p,
            table.mag_s, table.phase_s,
        ))
        for i in range(table.omega.size)
    )
    _write_csv(os.path.join(out_dir, "bode.csv"), BODE_HEADER, rows)
    crossings = crossover_report(cfg.bank)
    warnings = _xi_warnings(characteristic(cfg.bank).xi)
    payload = {
        "droop": dataclasses.asdict(cfg.bank),
        "characteristic": _characteristic_payload(cfg.bank),
        "grid": {
            "omega_min_rad_s": args.omega_min,
            "omega_max_rad_s": args.omega_max,
            "points": args.points,
        },
        "crossovers_rad_s": {
            "sc_pemel": crossings.omega_sc_pemel,
            "pemel_ael": crossings.omega_pemel_ael,
        },
        "warnings": warnings,
    }
    _write_json(os.path.join(out_dir, "bode.json"), payload)
    print(f"{table.omega.size} points over [{args.omega_min:g}, {args.omega_max:g}] rad/s -> bode.csv, bode.json")
    _print_warnings(warnings)
    return 0


def _cmd_sim(args, cfg: RunConfig, out_dir: str) -> int:
    series = simulate(cfg.scenario, cfg.bank, cfg.inertia, cfg.grid)
    rows = (
        tuple(_fmt(col[i]) for col in (
            series.t, series.f, series.p_t, series.p_a, series.p_p,
            series.p_s, series.v_dc, series.delta_q, series.soc,
        ))
        for i in range(series.t.size)
    )
    _write_csv(os.path.join(out_dir, "timeseries.csv"), TIMESERIES_HEADER, rows)

    events = [t for t, _ in cfg.scenario.load_profile[1:]]
    event_reports = []
    for t_event, t_next in zip(events, events[1:] + [None]):
        channels = {}
        last = None
        for name in ("p_t", "p_a", "p_p", "p_s"):
            m = step_metrics(
                series, name, t_event, band_pct=args.band, t_window_end=t_next,
            )
            channels[name] = {
                "initial_w": m.initial,
                "final_w": m.final,
                "settling_time_s": _finite_or_none(m.settling_time),
                "overshoot_pct": m.overshoot_pct,
                "undershoot_pct": m.undershoot_pct,
            }
            last = m
        event_reports.append({
            "t_event_s": t_event,
            "channels": channels,
            "peak_deviation_w": {
                "p_a": last.peak_dev_a, "p_p": last.peak_dev_p, "p_s": last.peak_dev_s,
            },
            "t_peak_s": {
                "p_a": last.t_peak_a, "p_p": last.t_peak_p, "p_s": last.t_peak_s,
            },
            "f_nadir_hz": last.f_nadir,
        })

    soc_end = final_soc(series, cfg.scenario)
    warnings = _xi_warnings(characteristic(cfg.bank).xi)
    warnings += [
        f"state of charge left [0, 1] at t = {t:.6g} s (reached {worst:.6g})"
        for t, worst in soc_violations(series)
    ]
    payload = {
        "droop": dataclasses.asdict(cfg.bank),
        "inertia": dataclasses.asdict(cfg.inertia),
        "grid": dataclasses.asdict(cfg.grid),
        "scenario": dataclasses.asdict(cfg.scenario),
        "band_pct": args.band,
        "final": {
            "soc": soc_end.soc,
            "delta_q_j": soc_end.delta_q,
            "f_hz": float(series.f[-1]),
            "v_dc_v": float(series.v_dc[-1]),
        },
        "events": event_reports,
        "warnings": warnings,
    }
    _write_json(os.path.join(out_dir, "sim.json"), payload)
    print(
        f"{cfg.scenario.t_end:g} s at dt={cfg.scenario.dt:g} s, {len(events)} load"
        f" step(s), final soc={soc_end.soc:.4f} -> timeseries.csv, sim.json"
    )
    _print_warnings(warnings)
    return 0


def _cmd_mpt(args, cfg: RunConfig, out_dir: str) -> int:
    result = is_stable(cfg.mpt_circuit, cfg.mpt_op)
    payload = {
        "circuit": dataclasses.asdict(cfg.mpt_circuit),
        "operating_point": dataclasses.asdict(cfg.mpt_op),
        "mu1": result.mu1,
        "mu2": result.mu2,
        "mu_sum": result.mu_sum,
        "stable": result.stable,
        "on_boundary": result.on_boundary,
        "binding_term_mu1": MU1_TERM_NAMES[result.binding_term_mu1],
        "binding_term_mu2": MU2_TERM_NAMES[result.binding_term_mu2],
        "mu1_terms": dict(zip(MU1_TERM_NAMES, result.mu1_terms)),
        "mu2_terms": dict(zip(MU2_TERM_NAMES, result.mu2_terms)),
        "branch_numerators": {"x1": result.x1, "x2": result.x2, "x3": result.x3},
        "warnings": [],
    }
    _write_json(os.path.join(out_dir, "mpt.json"), payload)
    verdict = "stable" if result.stable else "unstable"
    print(
        f"mu1={_fmt(result.mu1)} mu2={_fmt(result.mu2)}"
        f" mu_sum={_fmt(result.mu_sum)} -> {verdict} (mpt.json)"
    )
    return 0


def _cmd_sweep(args, cfg: RunConfig, out_dir: str) -> int:
    plane = sweep_plane(cfg.mpt_circuit, cfg.mpt_op, cfg.sweep, cfg.dq_power_factor)
    rows = (
        (
            _fmt(plane.p_grid[i]), _fmt(plane.c_dc2[j]),
            _fmt(plane.mu1[i, j]), _fmt(plane.mu2[i, j]),
            _fmt(plane.mu_sum[i, j]), str(int(plane.stable[i, j])),
        )
        for i in range(plane.p_grid.size)
        for j in range(plane.c_dc2.size)
    )
    _write_csv(os.path.join(out_dir, "sweep.csv"), SWEEP_HEADER, rows)
    _write_csv(
        os.path.join(out_dir, "boundary.csv"),
        BOUNDARY_HEADER,
        ((_fmt(p), _fmt(c)) for p, c in plane.boundary),
    )

    per_column: dict[float, int] = {}
    for p, _ in plane.boundary:
        per_column[p] = per_column.get(p, 0) + 1
    boundary_c = [c for _, c in plane.boundary]
    payload = {
        "circuit": dataclasses.asdict(cfg.mpt_circuit),
        "operating_point": dataclasses.asdict(cfg.mpt_op),
        "sweep": dataclasses.asdict(cfg.sweep),
        "dq_power_factor": cfg.dq_power_factor,
        "stable_count": int(plane.stable.sum()),
        "unstable_count": int((~plane.stable).sum()),
        "boundary_points": len(plane.boundary),
        "columns": int(plane.p_grid.size),
        "columns_with_single_crossing": sum(
            1 for count in per_column.values() if count == 1
        ),
        "boundary_c_dc2_span_f": (
            [min(boundary_c), max(boundary_c)] if boundary_c else None
        ),
        "warnings": [],
    }
    _write_json(os.path.join(out_dir, "sweep.json"), payload)
    print(
        f"{plane.p_grid.size}x{plane.c_dc2.size} plane,"
        f" {payload['stable_count']} stable / {payload['unstable_count']} unstable,"
        f" {len(plane.boundary)} boundary point(s) -> sweep.csv, boundary.csv, sweep.json"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhess",
        description=(
            "Design and verification tools for hybrid hydrogen"
            " electrolyzer / supercapacitor plants on a droop-controlled DC bus."
        ),
    )
    parser.add_argument("--config", metavar="PATH", help="INI configuration file")
    parser.add_argument(
        "--out-dir",
        metavar="DIR",
        help="output directory (default: $HHESS_OUT_DIR, else the current directory)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    design = sub.add_parser(
        "design", help="synthesize droop gains from time-domain targets",
    )
    design.add_argument("--tau", type=float, required=True,
                        help="SC/PEMEL handover time constant, s")
    design.add_argument("--xi", type=float, required=True, help="damping ratio target")
    design.add_argument("--k1", type=float, required=True,
                        help="AEL:PEMEL steady-state sharing ratio")
    design.add_argument("--k2", type=float, required=True,
                        help="SC:PEMEL transient sharing ratio")
    design.add_argument("--alpha", type=float,
                        help="AEL droop slope, V/W (or derive it from the rating)")
    design.add_argument("--dv-max", type=float, dest="dv_max",
                        help="allowed bus voltage excursion, V")
    design.add_argument("--p-a-max", type=float, dest="p_a_max",
                        help="AEL power rating, W")
    design.set_defaults(handler=_cmd_design)

    bode_cmd = sub.add_parser(
        "bode", help="tabulate the three branch frequency responses",
    )
    bode_cmd.add_argument("--omega-min", type=float, default=1e-3,
                          dest="omega_min", help="lowest frequency, rad/s")
    bode_cmd.add_argument("--omega-max", type=float, default=1e4,
                          dest="omega_max", help="highest frequency, rad/s")
    bode_cmd.add_argument("--points", type=int, default=400,
                          help="number of log-spaced samples")
    bode_cmd.set_defaults(handler=_cmd_bode)

    sim = sub.add_parser("sim", help="run the closed-loop scenario simulation")
    sim.add_argument("--band", type=float, default=2.0,
                     help="settling band, percent of the net step")
    sim.set_defaults(handler=_cmd_sim)

    mpt = sub.add_parser(
        "mpt", help="evaluate the mixed-potential stability criterion once",
    )
    mpt.set_defaults(handler=_cmd_mpt)

    sweep = sub.add_parser(
        "sweep", help="map stability over grid power and DC-link capacitance",
    )
    sweep.set_defaults(handler=_cmd_sweep)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else default_config()
    except ConfigError as err:
        print("configuration errors:", file=sys.stderr)
        for problem in err.problems:
            print(f"  {problem}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"cannot read configuration: {err}", file=sys.stderr)
        return 2

    out_dir = args.out_dir or os.environ.get("HHESS_OUT_DIR") or "."
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as err:
        print(f"cannot create output directory: {err}", file=sys.stderr)
        return 2

    try:
        return args.handler(args, cfg, out_dir)
    except (ValueError, IntegrationDivergedError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
