"""Command-line front end: grid sweeps, single-point analyses, protocol
statistics, and canned figure-reproduction sweeps.

Output rows carry the columns
    theta,phi,m,fidelity,O_z,O_x,zeta_z,xi,xi_tilde,degenerate
with 17-significant-digit floats, ``inf`` for divergent length scales, and
m = -1 marking the renormalization limit.  Identical config and seed give
byte-identical output (the timestamp comment line is suppressed by
``--no-meta``).  Grid cells are evaluated concurrently up to ``--threads``
(default from SPTMQC_THREADS); rows are sorted by (theta, phi, m) so the
output does not depend on scheduling.
"""

import argparse
import concurrent.futures
import datetime
import io
import json
import math
import os
import sys
import warnings

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .exceptions import ConfigError, DegenerateSpectrumError, StalledFlowError
from .mps_core import canonicalize
from .mqc import (
    gate_fidelity,
    postselect_probability,
    protocol_statistics,
)
from .orderparam import string_order_renormalized
from .renorm import buffer, fixed_point, junk_spectrum
from .toymodel import ToyModelParams, aklt_factorized, critical_theta, toy_tensor

CSV_HEADER = "theta,phi,m,fidelity,O_z,O_x,zeta_z,xi,xi_tilde,degenerate"
_COLUMNS = CSV_HEADER.split(",")
_MODES = {"fidelity", "orderparam", "lengths", "protocol", "point"}


def _fmt(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return format(value, ".17g")
    return str(value)


def compute_point(theta, phi, m, theta_gate=math.pi / 2.0, fidelity_axis="z"):
    """All sweep columns for one (theta, phi, m) cell.

    m = -1 requests the renormalization limit.  Stalled flows (divergent
    zeta) are evaluated on the unbuffered tensor, where buffering acts as a
    junk-space basis change; degenerate fixed points report the closed-form
    order parameter and the gate fidelity at a large finite proxy depth.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params = ToyModelParams(theta, phi)
    fact = toy_tensor(params)
    can = canonicalize(fact.to_mps(), allow_degenerate=True)
    zeta_z = junk_spectrum(fact.junk("z"), fact.virtual_junk_symmetries["z"]).zeta

    if m == -1:
        per_axis = {}
        for axis in ("z", "x"):
            try:
                per_axis[axis] = fixed_point(fact, axis)
            except StalledFlowError:
                per_axis[axis] = buffer(fact, axis, 0)
        rz = per_axis["z"]
        if rz.degenerate and rz.m is None:
            # At a degenerate fixed point the rotation outcome has vanishing
            # probability; evaluate at a large finite depth instead (kept
            # small enough that the outcome probability stays resolvable).
            proxy = min(int(math.ceil(6.0 * zeta_z)) + 6, 60)
            fid = gate_fidelity(buffer(fact, "z", proxy), theta_gate).fidelity
        else:
            fid = gate_fidelity(rz, theta_gate).fidelity
        o_z = string_order_renormalized(per_axis["z"]).limit
        o_x = string_order_renormalized(per_axis["x"]).limit
        xi_t = rz.xi_tilde
        degenerate = rz.degenerate
    else:
        rz = buffer(fact, "z", m)
        rx = buffer(fact, "x", m)
        fid = gate_fidelity(rz, theta_gate).fidelity
        o_z = string_order_renormalized(rz).limit
        o_x = string_order_renormalized(rx).limit
        xi_t = rz.xi_tilde
        degenerate = rz.degenerate

    return {
        "theta": float(theta),
        "phi": float(phi),
        "m": int(m),
        "fidelity": float(fid),
        "O_z": float(o_z),
        "O_x": float(o_x),
        "zeta_z": float(zeta_z),
        "xi": float(can.xi),
        "xi_tilde": float(xi_t),
        "degenerate": int(degenerate),
    }


def _grid_values(section, prefix, field_path):
    values = section.get(f"{prefix}_values")
    if values is not None:
        if not isinstance(values, list) or not values:
            raise ConfigError(
                f"{prefix}_values must be a nonempty list", field=field_path
            )
        return [float(v) for v in values]
    try:
        start = float(section.get(f"{prefix}_start", 0.0))
        stop = float(section[f"{prefix}_stop"])
        count = int(section[f"{prefix}_count"])
    except KeyError as exc:
        raise ConfigError(
            f"grid is missing {prefix}_stop/{prefix}_count", field=field_path
        ) from exc
    if count < 1:
        raise ConfigError(f"{prefix}_count must be >= 1", field=field_path)
    if count == 1:
        return [start]
    return list(np.linspace(start, stop, count))


class SweepConfig:
    """Validated sweep configuration (TOML or JSON file, or keyword args)."""

    def __init__(self, data, source="<args>"):
        self.source = source
        self.mode = data.get("mode", "fidelity")
        if self.mode not in _MODES:
            raise ConfigError(f"unknown mode {self.mode!r}", field="mode")
        self.theta_gate = float(data.get("theta_gate", math.pi / 2.0))
        if not 0.0 <= self.theta_gate < 2.0 * math.pi:
            raise ConfigError("theta_gate must lie in [0, 2 pi)", field="theta_gate")
        self.axis = data.get("axis", "z")
        if self.axis not in ("x", "z"):
            raise ConfigError("axis must be 'x' or 'z'", field="axis")
        self.seed = int(data.get("seed", 0))
        self.format = data.get("format", "csv")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'", field="format")
        self.output = data.get("output")
        self.m_list = data.get("m_list", [0])
        if not isinstance(self.m_list, list) or not self.m_list:
            raise ConfigError("m_list must be a nonempty list", field="m_list")
        for m in self.m_list:
            if int(m) < -1:
                raise ConfigError("depths must be >= 0, or -1 for the limit", field="m_list")
        self.m_list = [int(m) for m in self.m_list]
        grid = data.get("grid", {})
        if not isinstance(grid, dict):
            raise ConfigError("grid must be a table/object", field="grid")
        self.thetas = _grid_values(grid, "theta", "grid.theta")
        self.phis = _grid_values(grid, "phi", "grid.phi")
        if grid.get("include_critical_theta"):
            self.thetas = sorted(set(self.thetas) | {critical_theta()})

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, "rb") as fh:
                if path.endswith(".json"):
                    data = json.load(fh)
                else:
                    data = tomllib.load(fh)
        except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}", field="<file>") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a table/object", field="<file>")
        return cls(data, source=path)


def run_sweep(config, threads=1):
    """Evaluate every (theta, phi, m) cell of ``config``; rows sorted."""
    cells = [
        (theta, phi, m)
        for theta in config.thetas
        for phi in config.phis
        for m in config.m_list
    ]

    def work(cell):
        theta, phi, m = cell
        return compute_point(theta, phi, m, theta_gate=config.theta_gate)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, cells))
    else:
        rows = [work(c) for c in cells]
    rows.sort(key=lambda r: (r["theta"], r["phi"], r["m"]))
    return rows


def rows_to_csv(rows, meta=None):
    out = io.StringIO()
    if meta:
        out.write(f"# {meta}\n")
    out.write(CSV_HEADER + "\n")
    for row in rows:
        out.write(",".join(_fmt(row[c]) for c in _COLUMNS) + "\n")
    return out.getvalue()


def rows_to_json(rows, meta=None):
    def encode(row):
        return {
            k: ("inf" if isinstance(v, float) and math.isinf(v) else v)
            for k, v in row.items()
        }

    doc = {"rows": [encode(r) for r in rows]}
    if meta:
        doc["meta"] = meta
    return json.dumps(doc, indent=2) + "\n"


def _write_output(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _meta_line(args, config_path=None):
    if args.no_meta:
        return None
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    src = f" config={config_path}" if config_path else ""
    return f"sptmqc {stamp}{src} seed={getattr(args, 'seed', 0)}"


def _cmd_sweep(args):
    config = SweepConfig.from_file(args.config)
    if config.mode in ("point", "protocol"):
        raise ConfigError(
            f"mode {config.mode!r} is served by the '{config.mode}' subcommand",
            field="mode",
        )
    if args.seed is not None:
        config.seed = args.seed
    if args.format:
        config.format = args.format
    rows = run_sweep(config, threads=args.threads)
    meta = _meta_line(args, args.config)
    text = (
        rows_to_csv(rows, meta)
        if config.format == "csv"
        else rows_to_json(rows, meta)
    )
    _write_output(text, args.out or config.output)
    return 0


def _cmd_point(args):
    row = compute_point(args.theta, args.phi, args.m, theta_gate=args.theta_gate)
    if args.m >= 0:
        row["p_succ"] = postselect_probability(
            toy_tensor(ToyModelParams(args.theta, args.phi)), "z", args.m
        )
    text = json.dumps(
        {k: ("inf" if isinstance(v, float) and math.isinf(v) else v)
         for k, v in row.items()},
        indent=2,
    ) + "\n"
    _write_output(text, args.out)
    return 0


def _cmd_protocol(args):
    if args.theta is None:
        state = aklt_factorized()
        label = "aklt"
    else:
        state = toy_tensor(ToyModelParams(args.theta, args.phi))
        label = f"toy(theta={args.theta}, phi={args.phi})"
    stats = protocol_statistics(
        state, args.axis, args.m, args.theta_gate, args.seed, args.runs
    )
    expected = postselect_probability(state, args.axis, args.m)
    doc = {
        "state": label,
        "axis": args.axis,
        "m": args.m,
        "runs": stats.runs,
        "seed": stats.rng_seed,
        "total_attempts": stats.total_attempts,
        "mean_attempts": stats.mean_attempts,
        "success_rate": stats.success_rate,
        "expected_success_probability": expected,
        "all_succeeded": stats.all_succeeded,
        "sites_consumed": stats.total_attempts * (2 * args.m + 1),
    }
    _write_output(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def figure_configs():
    """Sweep configs reproducing the published parameter scans."""
    phi_grid = list(np.linspace(0.0, 2.0 * math.pi, 101))
    theta_grid = sorted(set(np.linspace(0.0, math.pi, 101)) | {critical_theta()})
    fig2 = SweepConfig(
        {
            "mode": "fidelity",
            "m_list": [0, 2, -1],
            "grid": {"theta_values": [math.pi / 2.0], "phi_values": phi_grid},
        },
        source="<fig2_row>",
    )
    fig3 = SweepConfig(
        {
            "mode": "fidelity",
            "m_list": [0, 2, -1],
            "grid": {"theta_values": theta_grid, "phi_values": [0.0]},
        },
        source="<fig3_traverse>",
    )
    return {"fig2_row": fig2, "fig3_traverse": fig3}


def _cmd_figures(args):
    os.makedirs(args.outdir, exist_ok=True)
    for name, config in figure_configs().items():
        rows = run_sweep(config, threads=args.threads)
        meta = _meta_line(args)
        path = os.path.join(args.outdir, f"{name}.csv")
        _write_output(rows_to_csv(rows, meta), path)
        print(f"wrote {path}")
    return 0


def _default_threads():
    env = os.environ.get("SPTMQC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sptmqc",
        description="Sweeps and analyses of buffering renormalization on the "
        "two-parameter octahedrally symmetric MPS family.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output path ('-' = stdout)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=_default_threads())
        p.add_argument("--no-meta", action="store_true",
                       help="omit the timestamp comment line")

    p_sweep = sub.add_parser("sweep", help="run a grid sweep from a config file")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--format", choices=["csv", "json"], default=None)
    common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_point = sub.add_parser("point", help="single-point analysis (JSON)")
    p_point.add_argument("--theta", type=float, required=True)
    p_point.add_argument("--phi", type=float, required=True)
    p_point.add_argument("--m", type=int, default=0)
    p_point.add_argument("--theta-gate", type=float, default=math.pi / 2.0)
    common(p_point)
    p_point.set_defaults(func=_cmd_point)

    p_proto = sub.add_parser("protocol", help="Monte Carlo protocol statistics")
    p_proto.add_argument("--runs", type=int, default=100000)
    p_proto.add_argument("--m", type=int, default=1)
    p_proto.add_argument("--axis", choices=["x", "z"], default="z")
    p_proto.add_argument("--theta", type=float, default=None,
                         help="toy-model theta (omit for the Pauli-matrix state)")
    p_proto.add_argument("--phi", type=float, default=0.0)
    p_proto.add_argument("--theta-gate", type=float, default=math.pi / 2.0)
    common(p_proto)
    p_proto.set_defaults(func=_cmd_protocol)

    p_fig = sub.add_parser("figures", help="write the canned figure sweeps")
    p_fig.add_argument("--outdir", required=True)
    common(p_fig)
    p_fig.set_defaults(func=_cmd_figures)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None:
        args.seed = 0
    try:
        return args.func(args)
    except ConfigError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"config error: {exc}{field}", file=sys.stderr)
        return 2
    except DegenerateSpectrumError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
