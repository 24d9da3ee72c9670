"""Command-line front end: ``qgeom <command> --config <file>``.

Commands (one JSON config block each, matching the command name):

- ``grid``: tabulate metric, curvature and level gap over a parameter lattice
- ``chern``: total Berry flux / Chern number over a closed surface,
  plus a per-plaquette file
- ``distance``: quantum length and angle along a parametric path
- ``evolve``: propagate a state and report the rate diagnostics
- ``check``: cross-validate the three tensor methods at a point

The config is a single JSON document so a run is reproducible from one
artifact; the only flags are the config path and output path/format
overrides.  Exit codes: 0 success, 1 validation error, 2 numerical error
(degeneracy, step failure); error text names the offending point or time.

Outputs embed a header with the tool version, the config hash and the
convention notes.  CSV floats carry 17 significant digits so values
round-trip exactly; rows are emitted in row-major parameter order no matter
how the work was scheduled.
"""

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .expr import evaluate
from .dynamics import aa_consistency, adiabatic_diagnostic, evolve, schedule
from .errors import InputError, NumericalError
from .geometry import SurfaceGrid, berry_flux, fidelity_angle, path_quantum_length, path_spec
from .model import (
    ModelSpec,
    hamiltonian_at,
    load_model_spec,
    spin_half,
    two_band_lattice,
)
from .numerics import hermitian_eigensystem, state_vector
from .qgt import (
    derivative_matrices,
    qgt_from_eigensystem,
    qgt_overlap_fd,
    qgt_projector_fd,
    qgt_sum_over_states,
)

COMMANDS = ("grid", "chern", "distance", "evolve", "check")

CONVENTIONS = (
    "fidelity angle: |<psi|chi>| = cos(theta/2)",
    "tensor: Q = g - (i/2) F with g = Re Q; the Bloch-sphere angular metric "
    "of a two-level system equals 4*g",
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qgeom",
        description="quantum geometric tensor toolkit",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--output", help="output path (overrides the config)")
    parser.add_argument("--format", choices=("csv", "json"), dest="fmt",
                        help="output format (overrides the config)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    written: list[Path] = []
    try:
        run(args.command, args.config, args.output, args.fmt, written)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _cleanup(written)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        _cleanup(written)
        return 2
    return 0


def _cleanup(written: list[Path]) -> None:
    for path in written:
        try:
            path.unlink(missing_ok=True)
        except OSError:
            pass


def run(command: str, config_path, output, fmt, written: list[Path]) -> None:
    config_path = Path(config_path)
    try:
        raw_bytes = config_path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read config {config_path}: {exc}") from None
    try:
        cfg = json.loads(raw_bytes)
    except json.JSONDecodeError as exc:
        raise InputError(f"config {config_path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise InputError("config top level must be an object")

    present = [c for c in COMMANDS if c in cfg]
    if len(present) != 1:
        raise InputError(
            f"config must contain exactly one command block, found {present or 'none'}"
        )
    if present[0] != command:
        raise InputError(
            f"config block {present[0]!r} does not match command {command!r}"
        )
    block = cfg[command]
    if not isinstance(block, dict):
        raise InputError(f"config block {command!r} must be an object")

    model = _resolve_model(cfg.get("model"))
    fmt = fmt or cfg.get("format") or "csv"
    if fmt not in ("csv", "json"):
        raise InputError(f"unknown output format {fmt!r}")
    out_path = Path(output or cfg.get("output") or f"qgeom_{command}.{fmt}")
    workers = int(cfg.get("workers", 1))
    if workers < 1:
        raise InputError("workers must be >= 1")

    meta = {
        "tool": "qgeom",
        "version": __version__,
        "command": command,
        "model": model.name,
        "config_sha256": hashlib.sha256(raw_bytes).hexdigest(),
        "conventions": "; ".join(CONVENTIONS),
    }

    handler = {
        "grid": _run_grid,
        "chern": _run_chern,
        "distance": _run_distance,
        "evolve": _run_evolve,
        "check": _run_check,
    }[command]
    handler(model, block, meta, out_path, fmt, workers, written)


def _resolve_model(spec) -> ModelSpec:
    if isinstance(spec, str):
        return load_model_spec(spec)
    if isinstance(spec, dict) and "builtin" in spec:
        name = spec["builtin"]
        if name == "spin_half":
            return spin_half(float(spec.get("mu_times_b", 1.0)))
        if name == "two_band_lattice":
            return two_band_lattice(float(spec.get("mass", 1.0)))
        raise InputError(f"unknown builtin model {name!r}")
    raise InputError("config needs 'model': a file path or {'builtin': name, ...}")


def _require(block: dict, key: str, command: str):
    if key not in block:
        raise InputError(f"{command} block needs {key!r}")
    return block[key]


def _level(block: dict, command: str, model: ModelSpec) -> int:
    level = _require(block, "level", command)
    if not isinstance(level, int) or not 0 <= level < model.dim:
        raise InputError(f"{command}: level must be an integer in 0..{model.dim - 1}")
    return level


# --------------------------------------------------------------------------
# output plumbing


def _fmt_float(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path: Path, meta: dict, columns, rows, written: list[Path]) -> None:
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt_float(v) for v in row) for row in rows)
    written.append(path)
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, meta: dict, data, written: list[Path]) -> None:
    written.append(path)
    path.write_text(json.dumps({"meta": meta, "data": data}, indent=2) + "\n")


def _write_table(path, fmt, meta, columns, rows, written) -> None:
    if fmt == "csv":
        _write_csv(path, meta, columns, rows, written)
    else:
        data = [dict(zip(columns, (_json_value(v) for v in row))) for row in rows]
        _write_json(path, meta, data, written)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


# --------------------------------------------------------------------------
# command handlers


def _run_grid(model, block, meta, out_path, fmt, workers, written) -> None:
    level = _level(block, "grid", model)
    axes = _require(block, "axes", "grid")
    if not isinstance(axes, dict) or not axes:
        raise InputError("grid: 'axes' must map parameter names to [lo, hi, n]")
    unknown = set(axes) - set(model.parameters)
    if unknown:
        raise InputError(f"grid: unknown parameters {sorted(unknown)}")
    fixed = block.get("fixed", {})
    if set(fixed) & set(axes):
        raise InputError("grid: a parameter cannot be both fixed and gridded")

    swept = [p for p in model.parameters if p in axes]
    values = []
    for p in swept:
        spec = axes[p]
        if not (isinstance(spec, list) and len(spec) == 3 and spec[2] >= 1):
            raise InputError(f"grid: axis {p!r} must be [lo, hi, n] with n >= 1")
        values.append(np.linspace(float(spec[0]), float(spec[1]), int(spec[2])))

    base = np.zeros(model.n_parameters)
    for name, val in fixed.items():
        if name not in model.parameters:
            raise InputError(f"grid: unknown fixed parameter {name!r}")
        base[model.parameters.index(name)] = float(val)

    points = []
    # row-major over the swept axes, in model parameter order
    def build(prefix, depth):
        if depth == len(swept):
            lam = base.copy()
            for p, v in zip(swept, prefix):
                lam[model.parameters.index(p)] = v
            points.append(lam)
            return
        for v in values[depth]:
            build(prefix + [v], depth + 1)

    build([], 0)
    k = model.n_parameters

    def compute_row(lam):
        es = hermitian_eigensystem(hamiltonian_at(model, lam))
        try:
            q = qgt_from_eigensystem(es, derivative_matrices(model, lam), level)
        except NumericalError as exc:
            raise NumericalError(f"at lambda = {lam.tolist()}: {exc}") from None
        g, f = q.metric, q.curvature
        row = list(lam)
        row += [g[i, j] for i in range(k) for j in range(i, k)]
        row += [f[i, j] for i in range(k) for j in range(i + 1, k)]
        row.append(es.gap(level))
        return tuple(row)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(compute_row, points))
    else:
        rows = [compute_row(lam) for lam in points]

    columns = list(model.parameters)
    columns += [f"g_{i}{j}" for i in range(k) for j in range(i, k)]
    columns += [f"f_{i}{j}" for i in range(k) for j in range(i + 1, k)]
    columns.append("min_gap")
    _write_table(out_path, fmt, meta, columns, rows, written)


def _build_surface(model, surface) -> SurfaceGrid:
    if not isinstance(surface, dict):
        raise InputError("chern: 'surface' must be an object")
    closure = surface.get("closure", "sphere")
    shape = surface.get("shape", [24, 24])
    base = None
    if "fixed" in surface:
        base = np.zeros(model.n_parameters)
        for name, val in surface["fixed"].items():
            if name not in model.parameters:
                raise InputError(f"chern: unknown fixed parameter {name!r}")
            base[model.parameters.index(name)] = float(val)
    if closure == "sphere":
        return SurfaceGrid.sphere(
            model, surface.get("polar", model.parameters[0]),
            surface.get("azimuth", model.parameters[1]), shape, base,
        )
    if closure == "torus":
        return SurfaceGrid.torus(
            model, surface.get("mu", model.parameters[0]),
            surface.get("nu", model.parameters[1]), shape,
            tuple(surface.get("mu_range", (0.0, 2 * np.pi))),
            tuple(surface.get("nu_range", (0.0, 2 * np.pi))), base,
        )
    if closure == "open":
        if "mu_range" not in surface or "nu_range" not in surface:
            raise InputError("chern: open surfaces need mu_range and nu_range")
        return SurfaceGrid.open_grid(
            model, surface.get("mu", model.parameters[0]),
            surface.get("nu", model.parameters[1]),
            tuple(surface["mu_range"]), tuple(surface["nu_range"]), shape, base,
        )
    raise InputError(f"chern: unknown closure {closure!r}")


def _run_chern(model, block, meta, out_path, fmt, workers, written) -> None:
    level = _level(block, "chern", model)
    grid = _build_surface(model, _require(block, "surface", "chern"))
    result = berry_flux(model, level, grid)

    summary_cols = (
        "chern", "total_flux", "residue", "monopole_charge",
        "max_abs_plaquette", "ambiguous",
    )
    summary = (
        result.chern, result.total_flux, result.residue,
        result.monopole_charge, float(np.abs(result.plaquette_fluxes).max()),
        result.ambiguous,
    )
    plaq_path = out_path.with_name(out_path.name + ".plaquettes.csv")
    plaq_rows = [
        (j, i, result.plaquette_fluxes[j, i])
        for j in range(result.plaquette_fluxes.shape[0])
        for i in range(result.plaquette_fluxes.shape[1])
    ]
    _write_csv(plaq_path, meta, ("row", "col", "flux"), plaq_rows, written)
    if fmt == "csv":
        _write_csv(out_path, meta, summary_cols, [summary], written)
    else:
        _write_json(out_path, meta,
                    dict(zip(summary_cols, (_json_value(v) for v in summary))), written)


def _run_distance(model, block, meta, out_path, fmt, workers, written) -> None:
    level = _level(block, "distance", model)
    exprs = _require(block, "path", "distance")
    samples = int(block.get("samples", 201))
    path = path_spec(model, level, exprs, samples)
    length, angle = path_quantum_length(path)

    endpoints = []
    for s in (0.0, 1.0):
        lam = np.array([evaluate(ast, {"s": s}) for ast in path.coords])
        es = hermitian_eigensystem(hamiltonian_at(model, lam))
        endpoints.append(es.vectors[:, level])
    end_angle = fidelity_angle(endpoints[0], endpoints[1])

    columns = ("length", "angle", "endpoint_fidelity_angle")
    _write_table(out_path, fmt, meta, columns, [(length, angle, end_angle)], written)


def _run_evolve(model, block, meta, out_path, fmt, workers, written) -> None:
    sched = schedule(model, _require(block, "schedule", "evolve"))
    t0 = float(_require(block, "t0", "evolve"))
    t1 = float(_require(block, "t1", "evolve"))
    dt = float(_require(block, "dt", "evolve"))
    initial = _require(block, "initial", "evolve")
    if isinstance(initial, dict) and "level" in initial:
        init_level = int(initial["level"])
        es = hermitian_eigensystem(hamiltonian_at(model, sched.values(t0)))
        psi0 = es.vectors[:, init_level]
        default_level = init_level
    elif isinstance(initial, dict) and "amplitudes" in initial:
        amps = initial["amplitudes"]
        try:
            psi0 = state_vector([complex(a[0], a[1]) for a in amps])
        except (TypeError, IndexError):
            raise InputError("evolve: 'amplitudes' must be a list of [re, im] pairs") from None
        default_level = None
    else:
        raise InputError("evolve: 'initial' needs 'level' or 'amplitudes'")
    level = block.get("level", default_level)
    if level is None:
        raise InputError("evolve: 'level' is required when starting from amplitudes")
    level = int(level)

    traj = evolve(model, sched, psi0, t0, t1, dt)
    aa = aa_consistency(traj)
    adi = adiabatic_diagnostic(model, sched, level, traj)

    columns = ("t", "energy_mean", "delta_e", "theta_rate_measured",
               "theta_rate_aa", "ratio", "ratio_exact_zero", "leakage")
    rows = [
        (
            traj.times[k], traj.energy_mean[k], traj.energy_uncertainty[k],
            aa.rate_measured[k], aa.rate_aa[k], adi.ratio[k],
            bool(adi.exact_zero[k]), adi.leakage[k],
        )
        for k in range(traj.n_steps)
    ]
    _write_table(out_path, fmt, meta, columns, rows, written)


def _run_check(model, block, meta, out_path, fmt, workers, written) -> None:
    level = _level(block, "check", model)
    point = _require(block, "point", "check")
    if not isinstance(point, dict):
        raise InputError("check: 'point' must map parameter names to values")
    lam = np.zeros(model.n_parameters)
    for name, val in point.items():
        if name not in model.parameters:
            raise InputError(f"check: unknown parameter {name!r}")
        lam[model.parameters.index(name)] = float(val)
    h = float(block.get("h", 1e-4))
    base_h = float(block.get("order_base_h", 4e-3))

    q_sum = qgt_sum_over_states(model, lam, level)
    q_proj = qgt_projector_fd(model, lam, level, h)
    q_fd = qgt_overlap_fd(model, lam, level, h)

    def order(make_error):
        hs = np.array([base_h, base_h / 2, base_h / 4])
        errs = np.array([make_error(hh) for hh in hs])
        return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])

    slope_proj = order(
        lambda hh: np.abs(qgt_projector_fd(model, lam, level, hh).matrix - q_sum.matrix).max()
    )
    slope_fd = order(
        lambda hh: np.abs(qgt_overlap_fd(model, lam, level, hh).metric - q_sum.metric).max()
    )
    meta = dict(meta)
    meta["h"] = _fmt_float(h)
    meta["order_base_h"] = _fmt_float(base_h)
    meta["slope_projector"] = _fmt_float(slope_proj)
    meta["slope_overlap_metric"] = _fmt_float(slope_fd)

    k = model.n_parameters
    columns = ("mu", "nu", "q_sum_re", "q_sum_im", "dev_projector", "dev_overlap")
    rows = [
        (
            m, n, q_sum.matrix[m, n].real, q_sum.matrix[m, n].imag,
            abs(q_proj.matrix[m, n] - q_sum.matrix[m, n]),
            abs(q_fd.matrix[m, n] - q_sum.matrix[m, n]),
        )
        for m in range(k)
        for n in range(k)
    ]
    if fmt == "json":
        data = {
            "slopes": {"projector": slope_proj, "overlap_metric": slope_fd},
            "entries": [dict(zip(columns, (_json_value(v) for v in row))) for row in rows],
        }
        _write_json(out_path, meta, data, written)
    else:
        _write_csv(out_path, meta, columns, rows, written)


if __name__ == "__main__":
    sys.exit(main())
