"""Command-line front end: ``uscsim {simulate,wigner,ramsey,dirac,validate}``.

Tables are comma-delimited text with ``#`` metadata lines carrying the
package version, the fully resolved config and a convergence report, so a
table's header is enough to rerun the job.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, apply_overrides, emit_config, from_dict
from .errors import ConfigError, ConvergenceError, IntegrationError, InvalidMappingError, \
    InvalidParametersError, PostselectionError, USCSimError
from .evolution import TrajectoryResult, propagate
from .hamiltonians import build_interaction_picture, derive_effective_params
from .observables import (
    DensityMatrix,
    partial_trace_qubit,
    photon_number_series,
    population_series,
    postselect_qubit,
    quadrature_series,
    qubit_expectation_series,
    top_level_population,
    wigner,
    wigner_negativity,
)
from .operators import rotated_qubit_state
from .protocols import (
    dirac_initial_state,
    dirac_trajectory,
    effective_trajectory,
    exact_interaction_trajectory,
    exact_trajectory,
    ground_state,
    interaction_picture_readout,
    ramsey_sweep,
    to_interaction_frame,
)
from .validation import MUTATIONS, format_report, run_all

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC, EXIT_POSTSELECT = 0, 1, 2, 3, 4
FLOAT_FMT = "%.12g"


@dataclass
class Table:
    columns: list[str]
    data: np.ndarray                 # shape (rows, len(columns))
    info: dict = field(default_factory=dict)


def _report(traj: TrajectoryResult, **extra) -> dict:
    rep = {"dt_ps": None if traj.dt_used is None else traj.dt_used * 1e12,
           "norm_drift": traj.norm_drift,
           "top_fock_population": top_level_population(traj, 2)}
    rep.update(extra)
    return rep


def _field_columns(traj: TrajectoryResult) -> list[np.ndarray]:
    pg = population_series(traj).values
    return [pg, 1.0 - pg, photon_number_series(traj).values,
            quadrature_series(traj, "x").values, quadrature_series(traj, "p").values]


def simulate_table(cfg: RunConfig) -> Table:
    if cfg.model == "ramsey":
        return ramsey_table(cfg)
    if cfg.model == "dirac":
        return dirac_table(cfg)
    p, hc, s, ts = cfg.system_params(), cfg.hilbert(), cfg.settings(), cfg.time_grid()
    cols = ["t_us", "P_g", "P_e", "n_mean", "x_quad", "p_quad"]
    if cfg.model == "effective":
        traj = effective_trajectory(p, ts, hc)
        values = _field_columns(traj)
    elif cfg.model == "interaction_picture":
        traj = propagate(build_interaction_picture(p, hc), ground_state(hc), ts, s)
        values = _field_columns(traj)
    else:
        traj = exact_trajectory(p, ts, hc, s, cfg.frame)
        values = _field_columns(traj)
        values.append(population_series(to_interaction_frame(traj, p, hc)).values)
        cols.append("P_g_ip")
    data = np.column_stack([ts * 1e6, *values])
    return Table(cols, data, _report(traj))


def _wigner_time(cfg: RunConfig) -> float:
    if cfg.wigner.time_us is not None:
        return cfg.wigner.time_us * 1e-6
    return float(np.pi / derive_effective_params(cfg.system_params()).g_eff)


def wigner_table(cfg: RunConfig) -> Table:
    p, hc, s = cfg.system_params(), cfg.hilbert(), cfg.settings()
    t = _wigner_time(cfg)
    ts = np.array([0.0, t]) if t > 0 else np.zeros(1)
    if cfg.model == "effective":
        traj = effective_trajectory(p, ts, hc)
    elif cfg.model in ("exact", "interaction_picture"):
        traj = exact_interaction_trajectory(p, ts, hc, s, cfg.frame)
    elif cfg.model == "dirac":
        traj = dirac_trajectory(p, ts, hc)
    else:
        raise ConfigError(f"model: {cfg.model!r} has no Wigner readout")
    psi = traj.final
    w = cfg.wigner
    if w.postselect == "none":
        rho, prob = partial_trace_qubit(psi), 1.0
    else:
        field_state, prob = postselect_qubit(psi, w.postselect)
        rho = DensityMatrix.pure(field_state)
    grid = wigner(rho, (w.x_min, w.x_max), w.n_points, eval_dim=w.eval_dim)
    w_min, neg = wigner_negativity(grid)
    xx, yy = np.meshgrid(grid.x_axis, grid.y_axis)
    data = np.column_stack([xx.ravel(), yy.ravel(), grid.values.ravel()])
    info = _report(traj, time_us=t * 1e6, postselect_probability=prob, eval_dim=grid.eval_dim,
                   outside_safe_radius=grid.outside_safe_radius, W_min=w_min, negativity=neg)
    return Table(["x", "y", "W"], data, info)


def ramsey_table(cfg: RunConfig) -> Table:
    p, hc, s, ts = cfg.system_params(), cfg.hilbert(), cfg.settings(), cfg.time_grid()
    rs = ramsey_sweep(p, ts, cfg.ramsey_config(), hc, s)
    direct = interaction_picture_readout(p, ts, hc, s, cfg.frame)
    data = np.column_stack([ts * 1e6, rs.values, direct.values])
    info = {"max_abs_difference": float(np.max(np.abs(rs.values - direct.values)))}
    return Table(["t_us", "P_g_ramsey", "P_g_direct"], data, info)


def dirac_table(cfg: RunConfig) -> Table:
    p, hc, s, ts = cfg.system_params(), cfg.hilbert(), cfg.settings(), cfg.time_grid()
    if cfg.omega_GHz != cfg.omega_1_GHz or not np.isclose(cfg.phi, np.pi / 2, rtol=0, atol=1e-9):
        raise InvalidMappingError("dirac needs omega_GHz == omega_1_GHz and phi = pi/2 "
                                  f"(got omega_GHz={cfg.omega_GHz}, omega_1_GHz={cfg.omega_1_GHz}, phi={cfg.phi}); "
                                  "try --set omega_GHz=8.0 --set phi=1.5707963267948966")
    psi0 = dirac_initial_state(hc, p.phi)
    plus = rotated_qubit_state(1, p.phi).amplitudes
    proj = np.outer(plus, plus.conj())
    dirac = dirac_trajectory(p, ts, hc, psi0)
    exact = exact_interaction_trajectory(p, ts, hc, s, cfg.frame, psi0)
    cols, values = ["t_us"], [ts * 1e6]
    for suffix, traj in (("", dirac), ("_exact", exact)):
        cols += [f"x_quad{suffix}", f"p_quad{suffix}", f"P_plus{suffix}"]
        values += [quadrature_series(traj, "x").values, quadrature_series(traj, "p").values,
                   qubit_expectation_series(traj, proj, "P_plus").values]
    info = _report(exact, max_x_deviation=float(np.max(np.abs(values[1] - values[4]))),
                   top_fock_population_dirac=top_level_population(dirac, 2))
    return Table(cols, np.column_stack(values), info)


COMMANDS = {"simulate": simulate_table, "wigner": wigner_table, "ramsey": ramsey_table, "dirac": dirac_table}
PRIMARY_COLUMN = {"simulate": 1, "wigner": 2, "ramsey": 1, "dirac": 1}


def convergence_check(command: str, cfg: RunConfig, table: Table) -> dict:
    """Rerun with doubled ``fock_dim`` and halved ``dt``; report the change of the primary column."""
    col = PRIMARY_COLUMN[command]
    out = {}
    bigger = COMMANDS[command](cfg.replace(fock_dim=2 * cfg.fock_dim))
    out["fock_dim_doubled_max_change"] = float(np.max(np.abs(bigger.data[:, col] - table.data[:, col])))
    dt_ps = table.info.get("dt_ps")
    if dt_ps:
        finer = COMMANDS[command](cfg.replace(dt_ps=dt_ps / 2))
        out["dt_halved_max_change"] = float(np.max(np.abs(finer.data[:, col] - table.data[:, col])))
    return out


def format_table(command: str, cfg: RunConfig, table: Table) -> str:
    lines = [f"# uscsim {__version__}",
             f"# command: {command}",
             f"# config: {emit_config(cfg)}",
             f"# convergence: {json.dumps(table.info, sort_keys=True)}",
             ",".join(table.columns)]
    lines += [",".join(FLOAT_FMT % v for v in row) for row in table.data]
    return "\n".join(lines) + "\n"


def read_table(text: str) -> tuple[dict, list[str], np.ndarray]:
    """Inverse of :func:`format_table`: ``(metadata, columns, data)``."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
        elif line.strip():
            body.append(line)
    columns = body[0].split(",")
    data = np.array([[float(x) for x in row.split(",")] for row in body[1:]]).reshape(-1, len(columns))
    return meta, columns, data


# --- argument handling -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uscsim", description="Driven qubit-cavity USC/DSC simulator")
    ap.add_argument("--version", action="version", version=f"uscsim {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("simulate", "time series of the selected model"),
                       ("wigner", "Wigner function of the field state"),
                       ("ramsey", "Ramsey-echo readout against the interaction-picture P_g"),
                       ("dirac", "Dirac-model and exact quadrature dynamics")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", type=Path, help="JSON config file (defaults fill missing keys)")
        sp.add_argument("--out", type=Path, help="output file (default: output.path or stdout)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key; dotted paths reach sections (wigner.postselect=g)")
        sp.add_argument("--fock-dim", type=int, help="shortcut for --set fock_dim=N")
        sp.add_argument("--dt-ps", type=float, help="shortcut for --set dt_ps=X")
        sp.add_argument("--check-convergence", action="store_true",
                        help="rerun with doubled fock_dim and halved dt and report the change")
    vp = sub.add_parser("validate", help="run the built-in invariant and oracle checks")
    vp.add_argument("--fock-dim", type=int, default=12)
    vp.add_argument("--mutation", choices=MUTATIONS,
                    help="inject a known transcription error; the conjugation check must then fail")
    return ap


def load_config(args) -> RunConfig:
    data = {}
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"--config: cannot read {args.config} ({exc.strerror})") from exc
        try:
            data = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<root>: invalid JSON in {args.config} ({exc.msg} at line {exc.lineno})") from exc
    sets = list(args.set)
    if args.fock_dim is not None:
        sets.append(f"fock_dim={args.fock_dim}")
    if args.dt_ps is not None:
        sets.append(f"dt_ps={args.dt_ps!r}")
    return from_dict(apply_overrides(data, sets))


def _run_command(args) -> int:
    cfg = load_config(args)
    table = COMMANDS[args.command](cfg)
    if args.check_convergence:
        table.info.update(convergence_check(args.command, cfg, table))
    text = format_table(args.command, cfg, table)
    out = args.out or (Path(cfg.output.path) if cfg.output.path else None)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        results = run_all(args.fock_dim, args.mutation)
        print(format_report(results))
        return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL
    try:
        return _run_command(args)
    except (ConfigError, InvalidParametersError, InvalidMappingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PostselectionError as exc:
        print(f"error: postselection impossible: {exc}", file=sys.stderr)
        return EXIT_POSTSELECT
    except (IntegrationError, ConvergenceError, USCSimError, np.linalg.LinAlgError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
