"""Orchestration: turn a validated RunConfig into artifacts on disk.

An ODE run writes trajectory.csv; a PDE run writes probe.csv plus one
snapshot CSV per (field, time). Both write config_echo.txt and a
manifest.json that records everything needed to reproduce the run bit
for bit (grid, seed, parameters with provenance, tensors, stepper
settings, output files).
"""

from __future__ import annotations

import os

import numpy as np

from . import io
from .config import RunConfig
from .fibers import SCAFFOLD_MOMENT_MATRIX, acg_moment, build_tensors, restrict_2d
from .grid import ScaffoldGrid
from .ode import integrate
from .params import DEFAULT_INITIAL_STATE, STATE_FIELDS
from .pde import (PdeStepper, StepperSettings, TaxisCoefficient, init_fields,
                  run_pde, uniform_fields)
from .rates import make_jacobian, make_rhs


def load_tensor_file(path: str) -> np.ndarray:
    try:
        arr = np.loadtxt(path)
    except OSError as e:
        raise FileNotFoundError(f"tensor file not found: {path}") from e
    except ValueError as e:
        raise ValueError(f"cannot parse tensor file {path}: {e}") from e
    return np.atleast_2d(np.asarray(arr, dtype=float))


def tensors_from_config(pde: dict, params) -> tuple[np.ndarray, np.ndarray, dict]:
    """Resolve the planar cell tensors from the configured source."""
    source = pde["tensor_source"]
    info = {"source": source}
    if source == "table":
        tn = build_tensors(SCAFFOLD_MOMENT_MATRIX, params)
        D1_2d, D2_2d = restrict_2d(tn.D1), restrict_2d(tn.D2)
        info.update(M=tn.M, D1=tn.D1, D2=tn.D2)
    else:
        kind = pde["tensor_kind"]
        mat = load_tensor_file(pde["tensor_path"])
        info["kind"] = kind
        info["path"] = pde["tensor_path"]
        if kind == "A":
            M = acg_moment(mat)
            tn = build_tensors(M, params)
            D1_2d, D2_2d = restrict_2d(tn.D1), restrict_2d(tn.D2)
            info.update(A=mat, M=M, D1=tn.D1, D2=tn.D2)
        elif kind == "D1":
            if mat.shape != (3, 3):
                raise ValueError("tensor_kind=D1 expects a 3x3 matrix")
            factor = (params.lambda10 * params.s2 ** 2) / (params.lambda2 * params.s1 ** 2)
            D1_2d, D2_2d = restrict_2d(mat), restrict_2d(factor * mat)
            info.update(D1=mat, D2=factor * mat)
        else:   # D1_2D
            if mat.shape != (2, 2):
                raise ValueError("tensor_kind=D1_2D expects a 2x2 matrix")
            factor = (params.lambda10 * params.s2 ** 2) / (params.lambda2 * params.s1 ** 2)
            D1_2d, D2_2d = mat, factor * mat
            info.update(D1_2d_input=mat)
    scale = pde["diffusion_scale"]
    if scale != 1.0:
        D1_2d, D2_2d = scale * D1_2d, scale * D2_2d
    info["diffusion_scale"] = scale
    info["D1_2d"] = D1_2d
    info["D2_2d"] = D2_2d
    return D1_2d, D2_2d, info


def _manifest_base(cfg: RunConfig) -> dict:
    return {
        "name": cfg.name,
        "model": cfg.model,
        "t_end": cfg.t_end,
        "seed": cfg.seed,
        "units": {"time": "h", "length": "um", "substance": "mol"},
        "parameters": {k: v for k, v in cfg.params.as_dict().items()},
        "provenance": cfg.provenance,
        "stimulus": {"offset": cfg.stimulus.offset, "amplitude": cfg.stimulus.amplitude,
                     "period": cfg.stimulus.period},
        "renewal": None if cfg.renewal is None else {
            "period": cfg.renewal.period, "mode": cfg.renewal.mode,
            "value": cfg.renewal.value},
    }


def run_ode_experiment(cfg: RunConfig, out_dir: str) -> dict:
    io.ensure_dir(out_dir)
    rhs = make_rhs(cfg.params, cfg.stimulus)
    jac = make_jacobian(cfg.params, cfg.stimulus)
    traj = integrate(rhs, DEFAULT_INITIAL_STATE.to_array(), 0.0, cfg.t_end,
                     schedule=cfg.renewal, rtol=cfg.ode["rtol"], atol=cfg.ode["atol"],
                     sample_dt=cfg.ode["sample_dt"], jac=jac)
    csv_path = os.path.join(out_dir, "trajectory.csv")
    io.write_state_series(csv_path, traj.t, traj.y)

    manifest = _manifest_base(cfg)
    manifest["ode"] = dict(cfg.ode)
    manifest["outputs"] = {"trajectory": "trajectory.csv"}
    manifest["stats"] = {
        "steps": traj.stats.steps, "rejected": traj.stats.rejected,
        "rhs_evals": traj.stats.rhs_evals, "jacobians": traj.stats.jacobians,
        "renewal_events": traj.events.tolist(),
    }
    io.write_manifest(os.path.join(out_dir, "manifest.json"), manifest)
    from .config import write_echo
    write_echo(cfg, os.path.join(out_dir, "config_echo.txt"))
    return {"trajectory": csv_path, "final": traj.y[-1], "stats": traj.stats,
            "t": traj.t, "y": traj.y}


def run_pde_experiment(cfg: RunConfig, out_dir: str) -> dict:
    io.ensure_dir(out_dir)
    pde = cfg.pde
    center = (pde["domain_center_x"], pde["domain_center_y"])
    grid = ScaffoldGrid.disk(center=center, radius=pde["domain_radius"], dx=pde["dx"])
    D1_2d, D2_2d, tensor_info = tensors_from_config(pde, cfg.params)
    stepper = PdeStepper(grid, cfg.params, D1_2d, D2_2d, cfg.stimulus,
                         TaxisCoefficient(pde["taxis"]),
                         StepperSettings(dt=pde["dt"], scheme=pde["scheme"],
                                         reactions_on=pde["reactions"]))
    if pde["initial"] == "gaussian":
        state = init_fields(grid, cfg.seed, cfg.params, center=center)
    else:
        state = uniform_fields(grid)
    result = run_pde(stepper, state, cfg.t_end,
                     probe_xy=(pde["probe_x"], pde["probe_y"]),
                     probe_dt=pde["probe_dt"],
                     snapshot_times=pde["snapshot_times"],
                     snapshot_fields=pde["snapshot_fields"],
                     renewal=cfg.renewal)

    probe_path = os.path.join(out_dir, "probe.csv")
    io.write_state_series(probe_path, result.probe_t, result.probe_y)
    snapshot_files = {}
    for (name, tt), vec in sorted(result.snapshots.items()):
        fname = io.snapshot_filename(name, tt)
        io.write_snapshot(os.path.join(out_dir, fname), grid, vec)
        snapshot_files[f"{name}@t={tt:g}"] = fname

    manifest = _manifest_base(cfg)
    manifest["pde"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in pde.items()}
    manifest["grid"] = {
        "dx": grid.dx, "nx": grid.nx, "ny": grid.ny, "n_cells": grid.n_cells,
        "x0": grid.x0, "y0": grid.y0,
        "center": list(center), "radius": pde["domain_radius"],
    }
    manifest["tensors"] = tensor_info
    manifest["probe"] = {"x": pde["probe_x"], "y": pde["probe_y"],
                         "cell": result.probe_cell}
    manifest["outputs"] = {"probe": "probe.csv", "snapshots": snapshot_files}
    manifest["stats"] = {"steps": result.n_steps, "min_seen": result.min_seen}
    io.write_manifest(os.path.join(out_dir, "manifest.json"), manifest)
    from .config import write_echo
    write_echo(cfg, os.path.join(out_dir, "config_echo.txt"))
    return {"probe": probe_path, "snapshots": snapshot_files, "result": result,
            "grid": grid}


def run_experiment(cfg: RunConfig, out_dir: str) -> dict:
    if cfg.model == "ode":
        out = run_ode_experiment(cfg, out_dir)
        final = out["final"]
        summary = ["model: ode",
                   f"t_end: {cfg.t_end} h",
                   "final state: " + ", ".join(
                       f"{n}={final[i]:.6g}" for i, n in enumerate(STATE_FIELDS)),
                   f"steps: {out['stats'].steps} (rejected {out['stats'].rejected})"]
    else:
        out = run_pde_experiment(cfg, out_dir)
        res = out["result"]
        final = res.probe_y[-1]
        summary = ["model: pde",
                   f"t_end: {cfg.t_end} h",
                   "final probe state: " + ", ".join(
                       f"{n}={final[i]:.6g}" for i, n in enumerate(STATE_FIELDS)),
                   f"steps: {res.n_steps}, cells: {out['grid'].n_cells}"]
    out["summary"] = summary
    out["out_dir"] = out_dir
    return out
