"""CSV, PPM and JSON writers for run artifacts.

Every float is written with ``%.17g`` so values round-trip exactly.

Layout of a run directory::

    config.txt                 resolved configuration echo
    truth/snapshot_final.csv   truth at the last observation time
    truth/spacetime_rho.csv    1D only: t column then one column per node
    truth/spacetime_s.csv
    <kind>/errors.csv          step,t,assimilated,error
    <kind>/weights.csv         step,t,w0..w{n-1}
    <kind>/features.csv        1D only: step,t,p0..p{n-1} density feature counts
    <kind>/snapshot_pNN.csv    final analysis particles
    <kind>/spacetime_rho_pNN.csv, spacetime_s_pNN.csv   1D only
    <kind>/rho_pNN.ppm         2D only: grayscale density heatmaps
    summary.json

Snapshot columns are ``x,rho,u,E,p,s`` in 1D and ``x,y,rho,u,v,E,p,s`` in 2D.
"""

import json
import os

import numpy as np

from ..euler import FlowState, entropy, pressure

FLOAT_FMT = "%.17g"


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def write_table(path, header, columns):
    data = np.column_stack([np.asarray(c, dtype=float).ravel() for c in columns])
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")


def read_table(path):
    """Header list and float array of a CSV written by :func:`write_table`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def snapshot_columns(state, gas):
    grid = state.grid
    coords = grid.mesh() if grid.ndim == 2 else (grid.axes[0],)
    vel = state.velocity
    names = ["x", "y"][:grid.ndim] + ["rho"] + ["u", "v"][:grid.ndim] + ["E", "p", "s"]
    cols = list(coords) + [state.rho] + list(vel) + [state.energy, pressure(state, gas), entropy(state, gas)]
    return names, cols


def write_snapshot(path, state, gas):
    names, cols = snapshot_columns(state, gas)
    write_table(path, names, cols)


def write_spacetime(path, times, field):
    """Rows are times; the first column is t, the rest one per node."""
    field = np.asarray(field, dtype=float)
    header = ["t"] + [f"n{k}" for k in range(field.shape[1])]
    data = np.column_stack([np.asarray(times, dtype=float), field])
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")


def write_ppm(path, field, lo=None, hi=None):
    """Binary grayscale PPM (P6); the first array axis runs left to right."""
    a = np.asarray(field, dtype=float)
    lo = a.min() if lo is None else lo
    hi = a.max() if hi is None else hi
    scale = (a - lo) / (hi - lo) if hi > lo else np.zeros_like(a)
    gray = np.clip(np.round(255.0 * scale), 0, 255).astype(np.uint8)
    # image rows are y from top to bottom
    img = gray.T[::-1]
    rgb = np.repeat(img[..., None], 3, axis=2)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def write_series(out, result):
    steps = np.arange(1, len(result.times) + 1)
    write_table(os.path.join(out, "errors.csv"), ["step", "t", "assimilated", "error"],
                [steps, result.times, result.assimilated.astype(float), result.errors])
    n_e = result.weights.shape[1]
    write_table(os.path.join(out, "weights.csv"), ["step", "t"] + [f"w{e}" for e in range(n_e)],
                [steps, result.times] + list(result.weights.T))
    if result.feature_counts.size and result.final.grid.ndim == 1:
        write_table(os.path.join(out, "features.csv"), ["step", "t"] + [f"p{e}" for e in range(n_e)],
                    [steps, result.times] + list(result.feature_counts.T))


def write_filter_outputs(root, result, setup):
    out = _ensure_dir(os.path.join(root, result.kind))
    write_series(out, result)
    gas = setup.gas
    times = np.concatenate([[setup.truth0.t], result.times])
    lo, hi = _rho_range(setup)
    for e, p in enumerate(result.final.particles):
        write_snapshot(os.path.join(out, f"snapshot_p{e:02d}.csv"), p, gas)
        if p.grid.ndim == 2:
            write_ppm(os.path.join(out, f"rho_p{e:02d}.ppm"), p.rho, lo, hi)
    for var, arr in result.spacetime.items():
        for e in range(arr.shape[1]):
            write_spacetime(os.path.join(out, f"spacetime_{var}_p{e:02d}.csv"), times, arr[:, e])
    return out


def _rho_range(setup):
    rho = setup.record.states[-1].rho
    return float(rho.min()), float(rho.max())


def write_truth_outputs(root, setup):
    out = _ensure_dir(os.path.join(root, "truth"))
    gas = setup.gas
    final = setup.record.states[-1]
    write_snapshot(os.path.join(out, "snapshot_initial.csv"), setup.truth0, gas)
    write_snapshot(os.path.join(out, "snapshot_final.csv"), final, gas)
    if final.grid.ndim == 1:
        states = [setup.truth0] + list(setup.record.states)
        times = [s.t for s in states]
        write_spacetime(os.path.join(out, "spacetime_rho.csv"), times, np.stack([s.rho for s in states]))
        write_spacetime(os.path.join(out, "spacetime_s.csv"), times, np.stack([entropy(s, gas) for s in states]))
    else:
        write_ppm(os.path.join(out, "rho_final.ppm"), final.rho)
    n_o = setup.record.observations.shape[1]
    steps = np.arange(1, len(setup.record.times) + 1)
    write_table(os.path.join(out, "observations.csv"),
                ["step", "t"] + [f"y{k}" for k in range(n_o)] + [f"eps{k}" for k in range(n_o)],
                [steps, setup.record.times] + list(setup.record.observations.T) + list(setup.record.noise.T))
    return out


def write_summary(path, cfg, results):
    summary = {"problem": cfg.problem, "seed": cfg.seed, "shape": list(cfg.shape),
               "n_ensemble": cfg.n_ensemble, "filters": {}}
    for kind, r in results.items():
        entry = {"final_error": float(r.errors[-1]), "mean_error": float(np.mean(r.errors))}
        if r.final.grid.ndim == 1:
            entry["final_feature_counts"] = [int(c) for c in r.feature_counts[-1]]
        if r.dtw_runs:
            entry["dtw_runs"] = int(np.sum(r.dtw_runs))
        summary["filters"][kind] = entry
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def write_run(root, setup, results, config_text):
    _ensure_dir(root)
    with open(os.path.join(root, "config.txt"), "w") as fh:
        fh.write(config_text)
    write_truth_outputs(root, setup)
    for r in results.values():
        write_filter_outputs(root, r, setup)
    return write_summary(os.path.join(root, "summary.json"), setup.cfg, results)


def dump_failure(path, failure):
    """Save the ensemble that was active when the loop failed."""
    ens = failure.ensemble
    np.savez(path, q=np.stack([p.q for p in ens.particles]), weights=ens.weights,
             t=ens.t, step=failure.step, message=str(failure))
    return path


def load_snapshot(path, grid, gas):
    """Rebuild a FlowState from a snapshot CSV on ``grid`` (conserved columns rho, u, E)."""
    header, data = read_table(path)
    col = {h: data[:, k] for k, h in enumerate(header)}
    shape = grid.shape
    rho = col["rho"].reshape(shape)
    vel = np.stack([col[c].reshape(shape) for c in ("u", "v")[:grid.ndim]])
    q = np.concatenate([rho[None], rho * vel, col["E"].reshape(shape)[None]])
    state = FlowState(grid, q)
    pressure(state, gas)
    return state
