"""Command-line interface: ``poisson-outage COMMAND [options]``.

Commands
    analytic   closed-form outage over the INR grid
    simulate   Monte-Carlo outage curves with 99% Wilson intervals
    compare    Monte-Carlo against the closed forms, with a per-point coverage flag
    preset     print the configuration document of a figure preset
    tradeoff   admissible node density for each outage target
    capacity   outage capacity for each target and SNR

Exit codes: 0 success, 2 configuration or usage error, 3 numeric failure.
Tables go to ``--out`` (or stdout); run timing goes to ``<out>.meta.json`` so
that the table itself is a pure function of the configuration and seed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, analytic
from .config import PRESETS, ConfigError, RunConfig, apply_overrides, build, load_document, parse_grid, preset
from .filtering import q_factor
from .kernel import get_backend
from .propagation import db, from_db
from .simulator import DominanceReport, analytic_columns, estimate_outage_curve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

COMPARE_COLUMNS = ["scenario", "d_db", "p_mc_nearest", "p_mc_total", "ci_lo", "ci_hi", "p_exact", "p_approx", "within_ci"]


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    truncated: str | None = None

    def add(self, row):
        if len(row) != len(self.columns):
            raise ValueError("row length does not match the header")
        self.rows.append(list(row))

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


# -- serialization --------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def render(table: Table, fmt: str) -> str:
    if fmt == "records":
        meta = dict(table.metadata)
        if table.truncated is not None:
            meta["truncated"] = table.truncated
        doc = {
            "metadata": meta,
            "columns": table.columns,
            "records": [{c: _json_value(v) for c, v in zip(table.columns, r)} for r in table.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    lines = [f"# {k}: {v if isinstance(v, str) else json.dumps(v, sort_keys=True)}" for k, v in table.metadata.items()]
    lines.append(",".join(table.columns))
    lines.extend(",".join(_cell(v) for v in r) for r in table.rows)
    if table.truncated is not None:
        lines.append(f"# TRUNCATED: {table.truncated}")
    return "\n".join(lines) + "\n"


def _parse_cell(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_table(path: str) -> Table:
    """Parse a table written by this tool, in either format."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        cols = doc["columns"]
        meta = dict(doc["metadata"])
        truncated = meta.pop("truncated", None)
        rows = [[math.nan if r[c] is None else r[c] for c in cols] for r in doc["records"]]
        return Table(cols, rows, meta, truncated)
    meta, rows, cols, truncated = {}, [], None, None
    for line in text.splitlines():
        if line.startswith("# TRUNCATED: "):
            truncated = line[len("# TRUNCATED: "):]
        elif line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            try:
                meta[key] = json.loads(value)
            except json.JSONDecodeError:
                meta[key] = value
        elif cols is None:
            cols = line.split(",")
        elif line:
            rows.append([_parse_cell(c) for c in line.split(",")])
    return Table(cols or [], rows, meta, truncated)


# -- commands -------------------------------------------------------------------

def _metadata(command: str, cfg: RunConfig) -> dict:
    return {
        "tool": f"poisson-outage {__version__}",
        "command": command,
        "master_seed": cfg.seed,
        # worker count is left out: results do not depend on it
        "config": {k: v for k, v in cfg.document.items() if k != "workers"},
    }


def cmd_analytic(cfg: RunConfig, table: Table):
    for ns in cfg.scenarios:
        sc = ns.scenario
        d = from_db(ns.grid_db)
        q = q_factor(sc.filter, sc.m, sc.params.nu)
        shift = analytic.fading_shift(sc.fading, sc.policy, sc.m, sc.params.nu, sc.density).shift
        d0_db = float(db(analytic.critical_inr(sc.policy, sc.density, sc.m, sc.params, q)))
        p_exact, p_approx, valid = analytic_columns(sc, d)
        for i, x in enumerate(ns.grid_db):
            table.add([ns.name, x, p_exact[i], p_approx[i], bool(valid[i]), d0_db, shift, q])


def cmd_simulate(cfg: RunConfig, table: Table):
    for ns in cfg.scenarios:
        curve = estimate_outage_curve(ns.scenario, ns.grid_db, workers=cfg.workers)
        dom = DominanceReport.from_curve(curve)
        lo_n, hi_n = curve.ci_nearest
        lo, hi = curve.ci_total
        for i, x in enumerate(ns.grid_db):
            table.add([ns.name, x, curve.trials, curve.count_nearest[i], curve.count_total[i],
                       curve.p_nearest[i], curve.p_total[i], lo_n[i], hi_n[i], lo[i], hi[i],
                       dom.ratio[i], dom.half_width[i]])


def cmd_compare(cfg: RunConfig, table: Table):
    for ns in cfg.scenarios:
        curve = estimate_outage_curve(ns.scenario, ns.grid_db, workers=cfg.workers)
        lo, hi = curve.ci_total
        ok = curve.within_ci()
        ref = curve.reference
        for i, x in enumerate(ns.grid_db):
            table.add([ns.name, x, curve.p_nearest[i], curve.p_total[i], lo[i], hi[i],
                       curve.p_exact[i], curve.p_approx[i], bool(ok[i])])
        tail = np.isfinite(ref) & (ref <= 0.1)
        rate = float(ok[tail].mean()) if tail.any() else math.nan
        table.metadata[f"pass_rate.{ns.name}"] = f"{rate:.6f} over {int(tail.sum())} points with reference <= 0.1"


def cmd_tradeoff(cfg: RunConfig, table: Table):
    for ns in cfg.scenarios:
        sc = ns.scenario
        q = q_factor(sc.filter, sc.m, sc.params.nu)
        shift = analytic.fading_shift(sc.fading, sc.policy, sc.m, sc.params.nu, sc.density)
        for x in ns.grid_db:
            for eps in cfg.epsilon:
                b = analytic.density_bound(eps, float(from_db(x)), sc.policy, sc.m, sc.params, q, shift)
                table.add([ns.name, x, eps, b.k, b.q_factor, b.n_bar_exact, b.n_bar_small_eps,
                           b.rho_exact, b.rho_small_eps, b.n_max_exact, b.n_max_small_eps])


def cmd_capacity(cfg: RunConfig, table: Table):
    skipped = []
    for ns in cfg.scenarios:
        sc = ns.scenario
        if not sc.policy.has_exact_law:
            skipped.append(ns.name)
            continue
        q = q_factor(sc.filter, sc.m, sc.params.nu)
        for eps in cfg.epsilon:
            for g_db in cfg.gamma_db:
                c = analytic.outage_capacity(float(from_db(g_db)), eps, sc.policy, sc.density, sc.m, sc.params, q)
                table.add([ns.name, eps, g_db, float(db(c.d_eps)), float(db(c.d_eps_closed)), c.capacity,
                           c.capacity_high_sir, c.capacity_low_sir, c.capacity_high_sir_closed,
                           c.capacity_low_sir_closed])
    if skipped:
        table.metadata["skipped"] = "no exact outage law for " + " ".join(skipped)


COMMANDS = {
    "analytic": (cmd_analytic, ["scenario", "d_db", "p_exact", "p_approx", "regime_valid", "d0_db",
                                "fading_shift", "q_factor"]),
    "simulate": (cmd_simulate, ["scenario", "d_db", "trials", "count_nearest", "count_total", "p_mc_nearest",
                                "p_mc_total", "ci_lo_nearest", "ci_hi_nearest", "ci_lo", "ci_hi",
                                "dominance_ratio", "dominance_half_width"]),
    "compare": (cmd_compare, COMPARE_COLUMNS),
    "tradeoff": (cmd_tradeoff, ["scenario", "d_db", "epsilon", "k", "q_factor", "n_bar_exact", "n_bar_small_eps",
                                "rho_exact", "rho_small_eps", "n_max_exact", "n_max_small_eps"]),
    "capacity": (cmd_capacity, ["scenario", "epsilon", "gamma_db", "d_eps_db", "d_eps_closed_db", "capacity",
                                "capacity_high_sir", "capacity_low_sir", "capacity_high_sir_closed",
                                "capacity_low_sir_closed"]),
}


# -- entry point ----------------------------------------------------------------

def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poisson-outage", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=[*COMMANDS, "preset"])
    parser.add_argument("name", nargs="?", help="preset name for the preset command")
    parser.add_argument("--config", help="JSON configuration document")
    parser.add_argument("--preset", choices=PRESETS, help="use a figure preset as the configuration")
    parser.add_argument("--trials", type=_positive_int)
    parser.add_argument("--seed", type=_u64)
    parser.add_argument("--workers", type=_positive_int)
    parser.add_argument("--grid", help="INR grid START:STOP:STEP in dB")
    parser.add_argument("--out", help="output path (default stdout)")
    parser.add_argument("--format", choices=["csv", "records"], default="csv")
    return parser


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _load_config(args) -> tuple[dict, str]:
    if args.config and args.preset:
        raise ConfigError("give --config or --preset, not both")
    if args.config:
        return load_document(args.config), os.path.dirname(os.path.abspath(args.config))
    if args.preset:
        return preset(args.preset), os.getcwd()
    raise ConfigError("a configuration is required: --config PATH or --preset NAME")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            name = args.name or args.preset
            if name is None:
                raise ConfigError("preset needs a name: fig3, fig4 or fig5")
            doc = apply_overrides(preset(name), args.trials, args.seed, args.workers,
                                  parse_grid(args.grid) if args.grid else None)
            build(doc)
            _emit(json.dumps(doc, indent=2) + "\n", args.out)
            return EXIT_OK
        doc, base_dir = _load_config(args)
        grid = parse_grid(args.grid) if args.grid else None
        cfg = build(apply_overrides(doc, args.trials, args.seed, args.workers, grid), base_dir)
    except ConfigError as exc:
        print(f"poisson-outage: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    func, columns = COMMANDS[args.command]
    table = Table(columns, metadata=_metadata(args.command, cfg))
    started = time.perf_counter()
    status = EXIT_OK
    try:
        func(cfg, table)
    except (ArithmeticError, ValueError, FloatingPointError, MemoryError, KeyboardInterrupt) as exc:
        table.truncated = f"{type(exc).__name__}: {exc}"
        print(f"poisson-outage: numeric failure, partial table written: {exc}", file=sys.stderr)
        status = EXIT_NUMERIC
    _emit(render(table, args.format), args.out)
    if args.out is not None:
        sidecar = {
            "wall_clock_s": time.perf_counter() - started,
            "workers": cfg.workers,
            "backend": get_backend().BACKEND,
            "exit_status": status,
        }
        with open(args.out + ".meta.json", "w") as fh:
            json.dump(sidecar, fh, indent=1)
    return status


if __name__ == "__main__":
    sys.exit(main())
