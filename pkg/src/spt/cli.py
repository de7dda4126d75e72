"""Batch front-end: JSON config in, CSV out.

Usage: ``spt <command> --config <path> [--output <path>] [--threads N] [--seed S]``

Commands: polariton-sweep, gauge-check, dicke-sweep, projection-check,
green-poles.  Configs are parsed strictly (unknown keys rejected).  Exit
codes: 0 ok, 2 config parse error, 3 physics range error, 4 computation
error.  Output is deterministic for a fixed (config, seed) pair: floats are
serialized with 17 significant digits and rows are written in input order
regardless of worker completion order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import dicke, fields, green, quadratic
from .errors import DomainError
from .model import LorentzModel, ModeParams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RANGE = 3
EXIT_COMPUTE = 4


class ConfigError(Exception):
    """Schema-level problem in the config document (exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: Dict[str, Any]
    output_path: Optional[str]
    seed: int


# ----------------------------------------------------------------------
# strict config parsing

def _type_name(value) -> str:
    return type(value).__name__


def _expect(params: Dict[str, Any], spec: Dict[str, tuple], where: str) -> Dict[str, Any]:
    """Validate a key/value table against (types, default) entries.

    ``spec`` maps key -> (accepted types, default); a default of REQUIRED
    marks a mandatory key.  Unknown keys are rejected.
    """
    unknown = set(params) - set(spec)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    out = {}
    for key, (types, default) in spec.items():
        if key in params:
            val = params[key]
            if isinstance(val, bool) and bool not in types:
                raise ConfigError(f"{where}.{key}: expected {types}, got bool")
            if not isinstance(val, types):
                raise ConfigError(
                    f"{where}.{key}: expected {', '.join(t.__name__ for t in types)}, "
                    f"got {_type_name(val)}")
            out[key] = val
        elif default is REQUIRED:
            raise ConfigError(f"{where}: missing required key '{key}'")
        else:
            out[key] = default
    return out


REQUIRED = object()
_NUM = (int, float)

_GRID_SPEC = {
    "omega_a": (_NUM, 1.0),
    "omega_c": (_NUM, 1.0),
    "lambda_min": (_NUM, 0.0),
    "lambda_max": (_NUM, REQUIRED),
    "steps": ((int,), REQUIRED),
}

_PARAM_SPECS: Dict[str, Dict[str, tuple]] = {
    "polariton-sweep": dict(_GRID_SPEC, **{
        "gauge": ((str,), "coulomb"),
        "include_quadratic_term": ((bool,), True),
    }),
    "gauge-check": dict(_GRID_SPEC, **{
        "include_quadratic_term": ((bool,), True),
    }),
    "dicke-sweep": {
        "n_atoms": ((int, list), REQUIRED),
        "omega_a": (_NUM, 1.0),
        "omega_c": (_NUM, 1.0),
        "g_min": (_NUM, 0.0),
        "g_max": (_NUM, REQUIRED),
        "steps": ((int,), REQUIRED),
        "coupling_form": ((str,), "y"),
        "quad_term": ((str,), "none"),
        "fock_cutoff": ((int, type(None)), None),
        "check_convergence": ((bool,), True),
    },
    "projection-check": {
        "grid_size": ((int,), 16),
        "spacing": (_NUM, 1.0),
        "n_fields": ((int,), 100),
    },
    "green-poles": {
        "stack": ((dict, type(None)), None),
        "bulk": ((dict, type(None)), None),
        "region": ((dict, type(None)), None),
        "scan": ((dict, type(None)), None),
    },
}

_LAYER_SPEC = {"thickness": (_NUM, REQUIRED), "material": ((dict,), REQUIRED)}
_REGION_SPEC = {"re_min": (_NUM, REQUIRED), "re_max": (_NUM, REQUIRED),
                "im_min": (_NUM, REQUIRED), "im_max": (_NUM, REQUIRED)}
_SCAN_SPEC = {"omega_min": (_NUM, REQUIRED), "omega_max": (_NUM, REQUIRED),
              "samples": ((int,), 4096)}
_BULK_SPEC = {"strength": (_NUM, REQUIRED), "omega0": (_NUM, REQUIRED),
              "gamma": (_NUM, 0.0), "wavenumber": (_NUM, REQUIRED)}


def parse_config(text: str) -> RunConfig:
    """Parse and strictly validate a JSON config document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be an object, got {_type_name(doc)}")
    top = _expect(doc, {
        "command": ((str,), REQUIRED),
        "parameters": ((dict,), REQUIRED),
        "output": ((str, type(None)), None),
        "seed": ((int,), 42),
    }, "config")
    command = top["command"]
    if command not in _PARAM_SPECS:
        raise ConfigError(f"config.command: unknown command '{command}' "
                          f"(choose from {sorted(_PARAM_SPECS)})")
    if top["seed"] < 0:
        raise ConfigError("config.seed: must be a nonnegative integer")
    params = _expect(top["parameters"], _PARAM_SPECS[command], "parameters")
    _validate_ranges(command, params)
    return RunConfig(command=command, parameters=params,
                     output_path=top["output"], seed=top["seed"])


def _positive(params, *keys, where="parameters"):
    for key in keys:
        if not (params[key] > 0):
            raise DomainError(f"{where}.{key} must be > 0, got {params[key]}")


def _validate_ranges(command: str, params: Dict[str, Any]) -> None:
    """Physics-range validation (exit code 3 territory)."""
    if command in ("polariton-sweep", "gauge-check"):
        _positive(params, "omega_a", "omega_c")
        if params["lambda_min"] < 0 or params["lambda_max"] <= params["lambda_min"]:
            raise DomainError("parameters: need 0 <= lambda_min < lambda_max")
        if params["steps"] < 1:
            raise DomainError("parameters.steps must be >= 1")
        if command == "polariton-sweep":
            try:
                quadratic.GaugeChoice(params["gauge"])
            except ValueError:
                raise ConfigError(
                    f"parameters.gauge: unknown gauge '{params['gauge']}'")
    elif command == "dicke-sweep":
        _positive(params, "omega_a", "omega_c")
        n_list = params["n_atoms"] if isinstance(params["n_atoms"], list) else [params["n_atoms"]]
        if not n_list or not all(isinstance(n, int) and n >= 1 for n in n_list):
            raise DomainError("parameters.n_atoms entries must be integers >= 1")
        if params["g_min"] < 0 or params["g_max"] < params["g_min"]:
            raise DomainError("parameters: need 0 <= g_min <= g_max")
        if params["steps"] < 1:
            raise DomainError("parameters.steps must be >= 1")
        if params["fock_cutoff"] is not None and params["fock_cutoff"] < 1:
            raise DomainError("parameters.fock_cutoff must be >= 1")
        try:
            dicke.CouplingForm(params["coupling_form"])
        except ValueError:
            raise ConfigError(f"parameters.coupling_form: unknown form "
                              f"'{params['coupling_form']}'")
        try:
            dicke.QuadTerm(params["quad_term"])
        except ValueError:
            raise ConfigError(f"parameters.quad_term: unknown term "
                              f"'{params['quad_term']}'")
    elif command == "projection-check":
        size = params["grid_size"]
        if size < 2 or size & (size - 1):
            raise DomainError("parameters.grid_size must be a power of two >= 2")
        _positive(params, "spacing")
        if params["n_fields"] < 1:
            raise DomainError("parameters.n_fields must be >= 1")
    elif command == "green-poles":
        if (params["stack"] is None) == (params["bulk"] is None):
            raise ConfigError("parameters: provide exactly one of 'stack' or 'bulk'")
        if params["stack"] is not None:
            _parse_stack(params["stack"])
        else:
            bulk = _expect(params["bulk"], _BULK_SPEC, "parameters.bulk")
            if not (bulk["omega0"] > 0):
                raise DomainError("parameters.bulk.omega0 must be > 0")
            if bulk["gamma"] < 0:
                raise DomainError("parameters.bulk.gamma must be >= 0")
            if not (bulk["wavenumber"] > 0):
                raise DomainError("parameters.bulk.wavenumber must be > 0")
        if params["scan"] is None:
            if params["region"] is None:
                raise ConfigError("parameters: pole counting needs a 'region'")
            region = _expect(params["region"], _REGION_SPEC, "parameters.region")
            if region["im_min"] < green.UHP_FLOOR:
                raise DomainError(
                    f"parameters.region.im_min must be >= {green.UHP_FLOOR}")
            if not (region["re_min"] < region["re_max"]
                    and region["im_min"] < region["im_max"]):
                raise DomainError("parameters.region is degenerate")
        else:
            scan = _expect(params["scan"], _SCAN_SPEC, "parameters.scan")
            if not (0 < scan["omega_min"] < scan["omega_max"]):
                raise DomainError("parameters.scan: need 0 < omega_min < omega_max")
            if scan["samples"] < 16:
                raise DomainError("parameters.scan.samples must be >= 16")


def _parse_material(doc: Dict[str, Any]) -> green.Material:
    kind = doc.get("kind")
    if kind == "vacuum":
        _expect(doc, {"kind": ((str,), REQUIRED)}, "material")
        return green.Vacuum()
    if kind == "constant":
        out = _expect(doc, {"kind": ((str,), REQUIRED),
                            "epsilon": (_NUM, REQUIRED)}, "material")
        return green.ConstantEps(epsilon=float(out["epsilon"]))
    if kind == "lorentz":
        out = _expect(doc, {"kind": ((str,), REQUIRED),
                            "strength": (_NUM, REQUIRED),
                            "omega0": (_NUM, REQUIRED),
                            "gamma": (_NUM, 0.0)}, "material")
        return green.LorentzMedium(model=LorentzModel(
            strength=float(out["strength"]), omega0=float(out["omega0"]),
            gamma=float(out["gamma"])))
    raise ConfigError(f"material.kind must be vacuum/constant/lorentz, got {kind!r}")


def _parse_stack(doc: Dict[str, Any]) -> green.LayerStack:
    out = _expect(doc, {"layers": ((list,), REQUIRED),
                        "boundary": ((str,), "mirrors")}, "parameters.stack")
    try:
        boundary = green.Boundary(out["boundary"])
    except ValueError:
        raise ConfigError(f"parameters.stack.boundary must be 'mirrors' or 'open', "
                          f"got {out['boundary']!r}")
    layers = []
    for i, layer_doc in enumerate(out["layers"]):
        if not isinstance(layer_doc, dict):
            raise ConfigError(f"parameters.stack.layers[{i}] must be an object")
        fields_ = _expect(layer_doc, _LAYER_SPEC, f"parameters.stack.layers[{i}]")
        layers.append(green.Layer(thickness=float(fields_["thickness"]),
                                  material=_parse_material(fields_["material"])))
    if not layers:
        raise ConfigError("parameters.stack.layers must not be empty")
    return green.LayerStack(layers=tuple(layers), boundary=boundary)


# ----------------------------------------------------------------------
# CSV serialization

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _parallel_map(func: Callable, items: Sequence, threads: int) -> List:
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


# ----------------------------------------------------------------------
# command implementations

def _freq_columns(prefix: str, count: int) -> List[str]:
    cols = []
    for i in range(count):
        cols += [f"{prefix}re_{i}", f"{prefix}im_{i}"]
    return cols


def _run_polariton_sweep(cfg: RunConfig, threads: int):
    p = cfg.parameters
    gauge = quadratic.GaugeChoice(p["gauge"])
    flags = quadratic.TermFlags(include_quadratic_term=p["include_quadratic_term"])
    grid = np.linspace(p["lambda_min"], p["lambda_max"], p["steps"])
    n_modes = 1 if gauge is quadratic.GaugeChoice.LONGITUDINAL else 2

    def point(lam: float):
        params = ModeParams(omega_a=p["omega_a"], omega_c=p["omega_c"], lam=float(lam))
        report = quadratic.classify_stability(quadratic.build_quadratic(params, gauge, flags))
        row = [float(lam)]
        for f in report.frequencies:
            row += [f.real, f.imag]
        row += [report.status.value, report.max_growth_rate]
        return row

    rows = _parallel_map(point, list(grid), threads)
    header = ["lam"] + _freq_columns("", n_modes) + ["status", "max_growth_rate"]
    n_unstable = sum(1 for r in rows if r[-2] == "unstable")
    summary = f"polariton-sweep: points={len(rows)} unstable={n_unstable}"
    return header, rows, summary


def _run_gauge_check(cfg: RunConfig, threads: int):
    p = cfg.parameters
    flags = quadratic.TermFlags(include_quadratic_term=p["include_quadratic_term"])
    grid = np.linspace(p["lambda_min"], p["lambda_max"], p["steps"])

    def point(lam: float):
        params = ModeParams(omega_a=p["omega_a"], omega_c=p["omega_c"], lam=float(lam))
        fc = quadratic.symplectic_spectrum(
            quadratic.build_quadratic(params, quadratic.GaugeChoice.COULOMB, flags))
        fd = quadratic.symplectic_spectrum(
            quadratic.build_quadratic(params, quadratic.GaugeChoice.DIPOLE, flags))
        disc = float(np.max(np.abs(fc - fd) / np.maximum(np.abs(fc), 1e-300)))
        return [float(lam), fc[0].real, fc[1].real, fd[0].real, fd[1].real, disc]

    rows = _parallel_map(point, list(grid), threads)
    header = ["lam", "coulomb_re_0", "coulomb_re_1", "dipole_re_0", "dipole_re_1",
              "rel_discrepancy"]
    max_disc = max(r[-1] for r in rows)
    summary = f"gauge-check: points={len(rows)} max_rel_discrepancy={max_disc:.3e}"
    return header, rows, summary


def _run_dicke_sweep(cfg: RunConfig, threads: int):
    p = cfg.parameters
    n_list = p["n_atoms"] if isinstance(p["n_atoms"], list) else [p["n_atoms"]]
    g_grid = np.linspace(p["g_min"], p["g_max"], p["steps"])
    tasks = [(n, g) for n in n_list for g in g_grid]

    def point(task):
        n, g = task
        base = dicke.DickeConfig(
            n_atoms=n, fock_cutoff=p["fock_cutoff"], omega_a=p["omega_a"],
            omega_c=p["omega_c"], g=float(g),
            coupling_form=dicke.CouplingForm(p["coupling_form"]),
            quad_term=dicke.QuadTerm(p["quad_term"]))
        row = dicke.sweep_order_parameter(base, [float(g)],
                                          check_convergence=p["check_convergence"])[0]
        return [n, row.g, row.fock_cutoff, row.photon_density,
                row.ground_energy_per_atom, row.gap, row.gap_above_doublet,
                row.field_quadrature, row.parity, row.converged]

    rows = _parallel_map(point, tasks, threads)
    header = ["n_atoms", "g", "fock_cutoff", "photon_density",
              "ground_energy_per_atom", "gap", "gap_above_doublet",
              "field_quadrature", "parity", "converged"]
    summary = (f"dicke-sweep: points={len(rows)} "
               f"max_photon_density={max(r[3] for r in rows):.6g}")
    return header, rows, summary


def _run_projection_check(cfg: RunConfig, threads: int):
    p = cfg.parameters
    size, spacing = p["grid_size"], float(p["spacing"])

    def point(index: int):
        rng = np.random.default_rng([cfg.seed, index])
        values = rng.standard_normal((size, size, size, 3))
        field = fields.VectorField3D(values=values, spacing=spacing)
        trans, long_ = fields.helmholtz_decompose(field)
        residual = float(np.abs(trans.values + long_.values - field.values).max())
        cell = spacing ** 3
        i_full = cell * float(np.sum(field.values ** 2))
        i_t = cell * float(np.sum(trans.values ** 2))
        i_l = cell * float(np.sum(long_.values ** 2))
        cross = cell * float(np.sum(trans.values * long_.values))
        return [index, residual, abs(cross) / i_full, abs(i_full - i_t - i_l) / i_full]

    rows = _parallel_map(point, list(range(p["n_fields"])), threads)
    header = ["field_index", "residual_decomposition", "orthogonality_rel",
              "parseval_rel"]
    worst = max(max(r[1], r[2], r[3]) for r in rows)
    summary = f"projection-check: fields={len(rows)} max_residual={worst:.3e}"
    return header, rows, summary


def _run_green_poles(cfg: RunConfig, threads: int):
    p = cfg.parameters
    if p["stack"] is not None:
        stack = _parse_stack(p["stack"])
        d_func = green.DispersionFunction.from_stack(stack)
    else:
        b = _expect(p["bulk"], _BULK_SPEC, "parameters.bulk")
        model = LorentzModel(strength=float(b["strength"]), omega0=float(b["omega0"]),
                             gamma=float(b["gamma"]))
        d_func = green.DispersionFunction.bulk_medium(model, float(b["wavenumber"]))
    header = ["re_omega", "im_omega", "abs_D", "phase_D"]
    if p["scan"] is not None:
        scan = _expect(p["scan"], _SCAN_SPEC, "parameters.scan")
        grid = np.linspace(scan["omega_min"], scan["omega_max"], scan["samples"])
        vals = np.asarray(d_func(grid.astype(complex)))
        rows = [[float(x), 0.0, float(abs(v)), float(np.angle(v))]
                for x, v in zip(grid, vals)]
        summary = f"green-poles: scan samples={len(rows)}"
        return header, rows, summary
    r = _expect(p["region"], _REGION_SPEC, "parameters.region")
    region = green.Rectangle(re_min=float(r["re_min"]), re_max=float(r["re_max"]),
                             im_min=float(r["im_min"]), im_max=float(r["im_max"]))
    census = green.locate_poles(d_func, region)
    rows = []
    for pole in census.poles:
        val = complex(d_func(complex(pole)))
        rows.append([pole.real, pole.imag, abs(val), float(np.angle(val))])
    summary = (f"green-poles: winding={census.winding} refined={len(rows)} "
               f"unrefined_cells={len(census.unrefined)}")
    return header, rows, summary


_RUNNERS = {
    "polariton-sweep": _run_polariton_sweep,
    "gauge-check": _run_gauge_check,
    "dicke-sweep": _run_dicke_sweep,
    "projection-check": _run_projection_check,
    "green-poles": _run_green_poles,
}


def execute(cfg: RunConfig, threads: int = 0, output_override: Optional[str] = None) -> str:
    """Run a validated config: write the CSV artifact, return the summary line."""
    threads = threads if threads > 0 else (os.cpu_count() or 1)
    header, rows, summary = _RUNNERS[cfg.command](cfg, threads)
    out_path = output_override or cfg.output_path or f"{cfg.command}.csv"
    write_csv(out_path, header, rows)
    return f"{summary} output={out_path}"


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="spt",
        description="stability checks for quadratic light-matter models")
    parser.add_argument("command", choices=sorted(_PARAM_SPECS))
    parser.add_argument("--config", required=True,
                        help="JSON config path, or '-' for standard input")
    parser.add_argument("--output", default=None, help="CSV output path")
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads (default: hardware parallelism)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    args = parser.parse_args(argv)

    try:
        if args.config == "-":
            text = sys.stdin.read()
        else:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        cfg = parse_config(text)
        if cfg.command != args.command:
            raise ConfigError(f"config.command '{cfg.command}' does not match "
                              f"CLI command '{args.command}'")
        if args.seed is not None:
            cfg = RunConfig(command=cfg.command, parameters=cfg.parameters,
                            output_path=cfg.output_path, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"physics range error: {exc}", file=sys.stderr)
        return EXIT_RANGE

    try:
        summary = execute(cfg, threads=args.threads, output_override=args.output)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"computation error [{_originating_module(exc)}]: {exc}",
              file=sys.stderr)
        return EXIT_COMPUTE
    print(summary)
    return EXIT_OK


def _originating_module(exc: BaseException) -> str:
    """Deepest package module on the traceback, for error attribution."""
    pkg_dir = os.path.dirname(os.path.abspath(__file__))
    module = "cli"
    for frame in traceback.extract_tb(exc.__traceback__):
        if os.path.dirname(os.path.abspath(frame.filename)) == pkg_dir:
            module = os.path.splitext(os.path.basename(frame.filename))[0]
    return module


if __name__ == "__main__":
    sys.exit(main())
