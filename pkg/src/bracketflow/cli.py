"""Command-line front end.

    bracketflow <command> [--param value]... [--config file.json] [--out dir] [--seed N]

Commands: flow, vectorfield, sde, fp, averages, verify.  Defaults follow
the documented parameter set 1/lambda = 0.1, v = 0, nu = 1, mu = 2 (so
G = sigma_z).  Exit codes: 0 success, 1 scientific-check failure,
2 usage/config error.  Given the same config and seed, outputs are
byte-identical; floats are printed with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bracket_flow as bf
from . import ensembles as ens
from . import fokker_planck as fp
from . import thermalization as th
from . import verification
from .hermitian_core import (
    ReferenceFrame,
    bloch_from_json,
    matrix_from_json,
    matrix_to_json,
    to_bloch,
)

USAGE_ERROR = 2
CHECK_FAILURE = 1


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _parse_matrix(text: str) -> np.ndarray:
    obj = json.loads(text)
    if isinstance(obj, dict):
        return bloch_from_json(obj)
    return matrix_from_json(obj)


def _write_csv(path: Path, header: list[str], rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


# Per-command parameter defaults (Figure-2 values where applicable).
DEFAULTS = {
    "flow": {
        "H0": '{"u": 0.0, "nu": 1.0, "n": [1.0, 0.0, 0.0]}',
        "G": '{"u": 0.0, "nu": 2.0, "n": [0.0, 0.0, 1.0]}',
        "lam": 10.0, "t_end": 1.0, "dt": None, "sample_every": None,
        "variant": "pure",
    },
    "vectorfield": {
        "lam": 10.0, "nu": 1.0, "mu": 2.0, "v": 0.0,
        "n_theta": 19, "n_phi": 36, "variant": "unitary",
    },
    "sde": {
        "lam": 10.0, "nu": 1.0, "mu": 2.0, "v": 0.0,
        "theta0": float(np.pi / 2), "phi0": 0.0,
        "t_end": None, "dt": None, "n_paths": 1000,
        "interpretation": "covariant", "save_paths": False,
    },
    "fp": {
        "lam": 1.0, "nu": 1.0, "mu": 2.0, "v": 0.0,
        "M": 201, "t_end": 5.0, "dt": None, "scheme": "explicit",
        "init": "bump",
    },
    "averages": {
        "lam": 10.0, "nu": 1.0, "mu": 2.0, "v": 0.0, "u0": 0.0,
        "T_min": 0.01, "T_max": 10.0, "n_points": 200,
    },
    "verify": {"mode": "full"},
}


def _resolve_params(args, command: str) -> dict:
    """Merge defaults, optional config file, and explicit flags (flags win)."""
    params = dict(DEFAULTS[command])
    if args.config is not None:
        with open(args.config) as f:
            file_params = json.load(f)
        unknown = set(file_params) - set(params)
        if unknown:
            raise ValueError(f"unknown config keys for '{command}': "
                             f"{sorted(unknown)}")
        params.update(file_params)
    for key in params:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    return params


def _variant(name: str) -> bf.FlowVariant:
    table = {"pure": bf.FlowVariant.PURE_DOUBLE_BRACKET,
             "unitary": bf.FlowVariant.UNITARY_MODIFIED}
    if name not in table:
        raise ValueError(f"unknown variant {name!r} (pure | unitary)")
    return table[name]


def _interpretation(name: str) -> th.Interpretation:
    table = {"covariant": th.Interpretation.COVARIANT_ITO,
             "literal": th.Interpretation.LITERAL_COORDINATE}
    if name not in table:
        raise ValueError(f"unknown interpretation {name!r} (covariant | literal)")
    return table[name]


def cmd_flow(params: dict, out: Path, seed: int) -> int:
    H0 = _parse_matrix(params["H0"]) if isinstance(params["H0"], str) \
        else matrix_from_json(params["H0"])
    G = _parse_matrix(params["G"]) if isinstance(params["G"], str) \
        else matrix_from_json(params["G"])
    lam = float(params["lam"])
    t_end = float(params["t_end"])
    if H0.shape == (2, 2):
        omega = lam * to_bloch(H0).nu * to_bloch(G).nu
    else:
        omega = lam * np.linalg.norm(H0) * np.linalg.norm(G)
    dt = float(params["dt"]) if params["dt"] is not None else 1e-3 / max(omega, 1e-12)
    n_steps = max(1, int(round(t_end / dt)))
    sample_every = (int(params["sample_every"]) if params["sample_every"]
                    is not None else max(1, n_steps // 2000))
    variant = _variant(params["variant"])
    traj = bf.integrate_flow(H0, G, lam, variant, t_end, dt, sample_every)
    report = bf.flow_diagnostics(traj, G)

    n = H0.shape[0]
    header = ["t"]
    for i in range(n):
        for j in range(n):
            header += [f"reH{i}{j}", f"imH{i}{j}"]
    header += [f"eig{k + 1}" for k in range(n)]
    header += ["trHG", "trDistSq", "commNormSq"]
    rows = []
    for k, t in enumerate(traj.times):
        row = [t]
        for i in range(n):
            for j in range(n):
                row += [traj.states[k][i, j].real, traj.states[k][i, j].imag]
        row += list(traj.eigenvalues[k])
        row += [traj.tr_hg[k], traj.trace_dist_sq[k], traj.comm_norm_sq[k]]
        rows.append(row)
    _write_csv(out / "flow_trajectory.csv", header, rows)

    checks = {
        "isospectral": report.eig_drift_max < 1e-6,
        "trace_conserved": report.trace_drift < 1e-9,
        "det_conserved": report.det_drift < 1e-9,
        "tr_hg_non_increasing": report.tr_hg_non_increasing,
        "trace_dist_sq_non_decreasing": report.trace_dist_sq_non_decreasing,
    }
    summary = {
        "variant": params["variant"],
        "lambda": lam,
        "t_end": t_end,
        "dt": dt,
        "eig_drift_max": report.eig_drift_max,
        "trace_drift": report.trace_drift,
        "det_drift": report.det_drift,
        "final_comm_norm_sq": report.final_comm_norm_sq,
        "final_state": matrix_to_json(traj.states[-1]),
        "checks": checks,
        "note": report.note,
    }
    if variant is bf.FlowVariant.UNITARY_MODIFIED and n == 2:
        phis = np.unwrap([to_bloch(s).phi for s in traj.states])
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = (phis[-1] - phis[0]) / traj.times[-1]
        summary["phi_drift_rate"] = float(rate)
    _write_json(out / "flow_diagnostics.json", summary)
    return 0 if all(checks.values()) else CHECK_FAILURE


def cmd_vectorfield(params: dict, out: Path, seed: int) -> int:
    n_theta, n_phi = int(params["n_theta"]), int(params["n_phi"])
    if n_theta < 2 or n_phi < 1:
        raise ValueError("invalid grid sizes")
    frame = ReferenceFrame(v=float(params["v"]), mu=float(params["mu"]),
                           lam=float(params["lam"]))
    nu = float(params["nu"])
    variant = _variant(params["variant"])
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    rows = []
    for t in thetas:
        for p in phis:
            dtheta, dphi = bf.bloch_vector_field(t, p, frame, nu, variant)
            rows.append([t, p, dtheta, dphi])
    _write_csv(out / "vectorfield.csv", ["theta", "phi", "dtheta", "dphi"], rows)
    return 0


def cmd_sde(params: dict, out: Path, seed: int) -> int:
    frame = ReferenceFrame(v=float(params["v"]), mu=float(params["mu"]),
                           lam=float(params["lam"]))
    sde = th.SdeParams(frame=frame, nu=float(params["nu"]),
                       interpretation=_interpretation(params["interpretation"]))
    rate = max(sde.omega, sde.nu)
    t_end = float(params["t_end"]) if params["t_end"] is not None else 20.0 / rate
    dt = float(params["dt"]) if params["dt"] is not None else 1e-3 / rate
    n_paths = int(params["n_paths"])
    stats = th.simulate_ensemble(float(params["theta0"]), float(params["phi0"]),
                                 sde, t_end, dt, n_paths, seed)
    target = ens.mean_cos_theta(frame.lam, frame.mu)
    z = ((stats.mean_cos_theta - target) / stats.std_error
         if stats.std_error > 0 else float("nan"))
    result = {
        "params": {"lambda": frame.lam, "v": frame.v, "mu": frame.mu,
                   "nu": sde.nu, "interpretation": params["interpretation"],
                   "theta0": float(params["theta0"]),
                   "phi0": float(params["phi0"]), "dt": dt},
        "n_paths": n_paths,
        "seed": seed,
        "t_end": t_end,
        "mean_cos_theta": stats.mean_cos_theta,
        "std_error": stats.std_error,
        "closed_form_mean_cos_theta": target,
        "z_score": z,
        "histogram": {"edges": [float(e) for e in stats.histogram_edges],
                      "counts": [int(c) for c in stats.histogram_counts]},
        "reflections": stats.reflections,
        "clamps": stats.clamps,
    }
    if sde.interpretation is th.Interpretation.LITERAL_COORDINATE:
        result["note"] = ("literal coordinate reading: the stationary "
                          "coordinate density is exp(-a cos theta) d theta, "
                          "which is NOT the dV convention behind the "
                          "closed-form mean; the z-score is reported for "
                          "comparison only")
    _write_json(out / "sde_ensemble.json", result)
    hist_rows = [[stats.histogram_edges[i], stats.histogram_edges[i + 1],
                  stats.histogram_counts[i]]
                 for i in range(len(stats.histogram_counts))]
    _write_csv(out / "sde_histogram.csv", ["x_left", "x_right", "count"],
               hist_rows)
    if n_paths == 1 or params["save_paths"]:
        record_every = max(1, int(round(t_end / dt)) // 5000)
        ts, thetas, phis, xs = th.simulate_path(
            float(params["theta0"]), float(params["phi0"]), sde, t_end, dt,
            seed, record_every=record_every)
        rows = [[0, t, a, b, c] for t, a, b, c in zip(ts, thetas, phis, xs)]
        _write_csv(out / "sde_path.csv", ["path_id", "t", "theta", "phi", "x"],
                   rows)
    return 0


def cmd_fp(params: dict, out: Path, seed: int) -> int:
    frame = ReferenceFrame(v=float(params["v"]), mu=float(params["mu"]),
                           lam=float(params["lam"]))
    sde = th.SdeParams(frame=frame, nu=float(params["nu"]))
    m = int(params["M"])
    x = fp.make_grid(fp.GridVariable.X, m)
    if params["init"] == "bump":
        vals = np.exp(-0.5 * ((x - 0.9) / 0.05) ** 2) + 1e-12
    elif params["init"] == "stationary":
        vals = fp.stationary_density_x(x, sde)
    else:
        raise ValueError(f"unknown init {params['init']!r} (bump | stationary)")
    rho0 = fp.DensityGrid(fp.GridVariable.X, x, vals,
                          fp.Measure.VOLUME).normalized()
    dt = float(params["dt"]) if params["dt"] is not None else None
    rho = fp.evolve_fp_x(rho0, sde, float(params["t_end"]), dt=dt,
                         scheme=params["scheme"])
    target = fp.stationary_density_x(x, sde)
    dist = float(np.abs(rho.values - target).max() / target.max())
    residual = fp.stationarity_residual(rho, sde)
    _write_csv(out / "fp_density.csv", ["node", "value"],
               [[n, v] for n, v in zip(rho.nodes, rho.values)])
    _write_json(out / "fp_density.json", {
        "variable": "x",
        "measure": "volume",
        "M": m,
        "params": {"lambda": frame.lam, "v": frame.v, "mu": frame.mu,
                   "nu": sde.nu, "t_end": float(params["t_end"]),
                   "scheme": params["scheme"], "init": params["init"]},
        "stationarity_residual": residual,
        "max_norm_distance_to_stationary": dist,
    })
    return 0


def cmd_averages(params: dict, out: Path, seed: int) -> int:
    frame = ReferenceFrame(v=float(params["v"]), mu=float(params["mu"]),
                           lam=float(params["lam"]))
    base = ens.ThermalParams(beta=1.0, frame=frame, nu=float(params["nu"]),
                             u0=float(params["u0"]))
    curve = ens.sweep_temperature(base, float(params["T_min"]),
                                  float(params["T_max"]),
                                  int(params["n_points"]))
    rows = zip(curve.temperatures, curve.quenched, curve.annealed)
    _write_csv(out / "averages.csv", ["T", "quenched", "annealed"], rows)
    plateau = ens.ThermalParams(beta=1e9, frame=frame, nu=float(params["nu"]),
                                u0=float(params["u0"]))
    _write_json(out / "averages.json", {
        "params": {"lambda": frame.lam, "v": frame.v, "mu": frame.mu,
                   "nu": float(params["nu"]), "u0": float(params["u0"]),
                   "T_min": float(params["T_min"]),
                   "T_max": float(params["T_max"]),
                   "n_points": int(params["n_points"])},
        "quenched_plateau": ens.quenched_average_G(plateau),
        "annealed_plateau": ens.annealed_average_G(plateau),
    })
    return 0


def cmd_verify(params: dict, out: Path, seed: int) -> int:
    mode = params["mode"]
    if mode not in ("quick", "full"):
        raise ValueError(f"unknown mode {mode!r} (quick | full)")
    results = verification.run_all(quick=(mode == "quick"))
    width = max(len(r.name) for r in results)
    all_ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  [{r.seconds:6.2f}s]  {r.detail}")
        all_ok = all_ok and r.passed
    print(f"\n{'all checks passed' if all_ok else 'SOME CHECKS FAILED'}")
    return 0 if all_ok else CHECK_FAILURE


COMMANDS = {
    "flow": cmd_flow,
    "vectorfield": cmd_vectorfield,
    "sde": cmd_sde,
    "fp": cmd_fp,
    "averages": cmd_averages,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bracketflow",
        description="Double-bracket flows and canonical ensembles of Hamiltonians")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file (flags override file values)")
        p.add_argument("--out", type=str, default="./out")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("flow", help="integrate the double-bracket flow")
    p.add_argument("--H0", type=str)
    p.add_argument("--G", type=str)
    p.add_argument("--lam", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--sample-every", dest="sample_every", type=int)
    p.add_argument("--variant", choices=["pure", "unitary"])
    add_common(p)

    p = sub.add_parser("vectorfield", help="export the sphere vector field")
    for name in ("lam", "nu", "mu", "v"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--n-theta", dest="n_theta", type=int)
    p.add_argument("--n-phi", dest="n_phi", type=int)
    p.add_argument("--variant", choices=["pure", "unitary"])
    add_common(p)

    p = sub.add_parser("sde", help="simulate the thermalizing SDE ensemble")
    for name in ("lam", "nu", "mu", "v", "theta0", "phi0", "t_end", "dt"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    p.add_argument("--n-paths", dest="n_paths", type=int)
    p.add_argument("--interpretation", choices=["covariant", "literal"])
    p.add_argument("--save-paths", dest="save_paths", action="store_const",
                   const=True, default=None)
    add_common(p)

    p = sub.add_parser("fp", help="evolve the Fokker-Planck density")
    for name in ("lam", "nu", "mu", "v", "t_end", "dt"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--scheme", choices=["explicit", "crank-nicolson"])
    p.add_argument("--init", choices=["bump", "stationary"])
    add_common(p)

    p = sub.add_parser("averages", help="quenched/annealed temperature sweep")
    for name in ("lam", "nu", "mu", "v", "u0", "T_min", "T_max"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    p.add_argument("--n-points", dest="n_points", type=int)
    add_common(p)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--mode", choices=["quick", "full"])
    add_common(p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = _resolve_params(args, args.command)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](params, out, args.seed)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (bf.StepInstabilityError, fp.FpStabilityError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return CHECK_FAILURE


if __name__ == "__main__":
    sys.exit(main())
