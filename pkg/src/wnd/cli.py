"""Scenario runner and closure-report command-line tool.

Usage:

    wnd run SCENARIO [key=value ...] [--config PATH] [--out PATH]
            [--cutoff N] [--rtol X] [--atol X] [--dt-out X]
    wnd closure GENERATOR [GENERATOR ...] [--max-dim N]
    wnd list

``run`` writes a CSV trajectory with oracle-fidelity columns and prints a
one-line summary with the minimum fidelity.  Parameter precedence: scenario
defaults < config file (flat ``key = value`` lines) < inline key=value
arguments < explicit flags.  The default output directory is taken from the
WND_OUT_DIR environment variable.  Exit codes: 0 success, 2 configuration
error, 3 solver failure (the failure time is printed when available).

CSV columns are drawn from ``t, ReF0, ReF+, ImF+, ReF-, ImF-, X, P,
fidelity, detXi`` as applicable per scenario; values are written with 17
significant digits and LF line endings, so identical configurations yield
byte-identical files.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import engine, fock, gaussian, ladder, liouville
from .errors import WndError
from .signals import Constant, Sinusoid

TWO_PI = 2.0 * np.pi


class ConfigError(Exception):
    pass


SCENARIO_DEFAULTS = {
    "linear-constant": {"g0": 0.5, "alpha": 1 + 0j, "T": 2 * TWO_PI,
                        "n_out": 201, "cutoff": 40},
    "linear-resonant": {"g0": 0.2, "phi": 0.0, "alpha": 1 + 0j, "T": 4 * TWO_PI,
                        "n_out": 401, "cutoff": 40},
    "quadratic-constant": {"lp": 0.2, "lm": 0.2, "alpha": 1 + 0j, "T": 2.0,
                           "n_out": 201, "cutoff": 80},
    "quadratic-parametric": {"l0": 0.1, "freq": 2.0, "alpha": 0j, "T": 6.0,
                             "n_out": 201, "cutoff": 60},
    "gaussian-combined": {"g0": 0.1, "lp": 0.1, "lm": 0.1, "alpha": 1 + 0j,
                          "T": 3.0, "n_out": 201, "cutoff": 60},
    "open-damped": {"kappa": 0.5, "alpha": 1 + 0j, "T": 5.0,
                    "n_out": 101, "cutoff": 30},
}

_COMPLEX_KEYS = {"alpha"}
_INT_KEYS = {"n_out", "cutoff"}


def _parse_value(key, text):
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _COMPLEX_KEYS:
            return complex(text)
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {key}={text!r}: {exc}") from exc


def load_config_file(path):
    """Flat ``key = value`` lines; blank lines and #-comments ignored."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, value = stripped.partition("=")
            entries[key.strip()] = value.strip()
    return entries


def resolve_params(scenario, config_path=None, assignments=(), overrides=None):
    if scenario not in SCENARIO_DEFAULTS:
        known = ", ".join(sorted(SCENARIO_DEFAULTS))
        raise ConfigError(f"unknown scenario {scenario!r}; known: {known}")
    params = dict(SCENARIO_DEFAULTS[scenario])
    params.setdefault("rtol", 1e-10)
    params.setdefault("atol", 1e-12)

    def apply(key, raw):
        if key not in params:
            raise ConfigError(
                f"unknown parameter {key!r} for scenario {scenario}; "
                f"known: {', '.join(sorted(params))}"
            )
        params[key] = _parse_value(key, raw) if isinstance(raw, str) else raw

    if config_path:
        for key, raw in load_config_file(config_path).items():
            apply(key, raw)
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        key, _, raw = item.partition("=")
        apply(key.strip(), raw.strip())
    for key, value in (overrides or {}).items():
        if value is not None:
            apply(key, value)

    for key, value in params.items():
        if isinstance(value, (int, float)) and not np.isfinite(value):
            raise ConfigError(f"parameter {key} is not finite")
        if isinstance(value, complex) and not np.isfinite(value.real + value.imag):
            raise ConfigError(f"parameter {key} is not finite")
    if params["T"] <= 0:
        raise ConfigError("span T must be positive")
    return params


# -- scenario implementations -------------------------------------------------


# Oracle stepping policy for the fidelity columns: endpoint drift 1e-6 is
# ample because fidelity responds quadratically to state error (reported
# fidelities resolve 1e-8 comfortably), and constant-Hamiltonian scenarios
# converge at the first refinement.
_ORACLE_STEPS = 600
_ORACLE_DRIFT = 1e-6


def _oracle_states(h_eval, psi0, times):
    return fock.propagate_state(
        h_eval, psi0, times, dt=times[-1] / _ORACLE_STEPS,
        drift_tol=_ORACLE_DRIFT,
    )


def _ansatz_states(raw_traj, cutoff, psi0):
    mats = fock.ansatz_matrices(raw_traj.basis, cutoff)
    states = np.empty((len(raw_traj.times), psi0.shape[0]), dtype=complex)
    for i in range(len(raw_traj.times)):
        states[i] = fock.apply_ansatz(raw_traj.values[:, i], mats) @ psi0
    return states


def _fidelity_column(oracle_states, ansatz_states):
    return np.array(
        [fock.fidelity(a, o) for a, o in zip(ansatz_states, oracle_states)]
    )


def _linear_scenario(params, signal):
    cutoff = params["cutoff"]
    alpha = params["alpha"]
    times = np.linspace(0.0, params["T"], params["n_out"])

    problem = gaussian.linear_problem(signal, signal, params["T"])
    traj = engine.integrate(problem, rtol=params["rtol"], atol=params["atol"],
                            times=times)
    coeffs = gaussian.LinearDriveCoefficients(
        times=times, f0=times, f_plus=traj.values[1], f_minus=traj.values[2]
    )
    x, p = gaussian.quadrature_expectation(alpha, coeffs)

    a_mat = fock.destroy(cutoff)
    h_free = fock.number_op(cutoff)
    h_drive = a_mat.conj().T + a_mat

    def h_eval(t):
        return h_free + complex(signal(t)).real * h_drive

    psi0 = fock.coherent_state(alpha, cutoff)
    oracle = _oracle_states(h_eval, psi0, times)
    ansatz = _ansatz_states(traj, cutoff, psi0)
    fid = _fidelity_column(oracle, ansatz)
    columns = {
        "t": times,
        "ReF0": traj.values[0].real,
        "ReF+": traj.values[1].real,
        "ImF+": traj.values[1].imag,
        "ReF-": traj.values[2].real,
        "ImF-": traj.values[2].imag,
        "X": x,
        "P": p,
        "fidelity": fid,
        "detXi": traj.det_ratio,
    }
    return columns, float(np.min(fid))


def run_linear_constant(params):
    return _linear_scenario(params, Constant(params["g0"]))


def run_linear_resonant(params):
    return _linear_scenario(params, Sinusoid(params["g0"], 1.0, params["phi"]))


def _quadratic_scenario(params, lam_signal):
    cutoff = params["cutoff"]
    alpha = params["alpha"]
    times = np.linspace(0.0, params["T"], params["n_out"])
    traj = gaussian.quadratic_coefficients(
        lam_signal, lam_signal, params["T"], rtol=params["rtol"],
        atol=params["atol"], times=times,
    )

    a_mat = fock.destroy(cutoff)
    h_free = fock.number_op(cutoff)
    h_up = a_mat.conj().T @ a_mat.conj().T
    h_dn = a_mat @ a_mat

    def h_eval(t):
        lam = complex(lam_signal(t))
        return h_free + lam * h_up + np.conj(lam) * h_dn

    psi0 = fock.coherent_state(alpha, cutoff)
    oracle = _oracle_states(h_eval, psi0, times)
    ansatz = _ansatz_states(traj.raw, cutoff, psi0)
    fid = _fidelity_column(oracle, ansatz)

    x_mat, p_mat = fock.x_op(cutoff), fock.p_op(cutoff)
    x = np.array([fock.expectation(x_mat, s).real for s in oracle])
    p = np.array([fock.expectation(p_mat, s).real for s in oracle])
    columns = {
        "t": times,
        "ReF0": traj.xi_zero.real,
        "ReF+": traj.xi_plus.real,
        "ImF+": traj.xi_plus.imag,
        "ReF-": traj.xi_minus.real,
        "ImF-": traj.xi_minus.imag,
        "X": x,
        "P": p,
        "fidelity": fid,
        "detXi": traj.det_ratio,
    }
    return columns, float(np.min(fid))


def run_quadratic_constant(params):
    return _quadratic_scenario(params, Constant(params["lp"]))


def run_quadratic_parametric(params):
    return _quadratic_scenario(params, Sinusoid(params["l0"], params["freq"]))


def run_gaussian_combined(params):
    cutoff = params["cutoff"]
    alpha = params["alpha"]
    times = np.linspace(0.0, params["T"], params["n_out"])
    g_sig = Constant(params["g0"])
    traj = gaussian.gaussian_combined(
        g_sig, g_sig, Constant(params["lp"]), Constant(params["lm"]),
        params["T"], rtol=params["rtol"], atol=params["atol"], times=times,
    )

    a_mat = fock.destroy(cutoff)
    h_mat = (fock.number_op(cutoff)
             + params["lp"] * a_mat.conj().T @ a_mat.conj().T
             + params["lm"] * a_mat @ a_mat
             + params["g0"] * (a_mat.conj().T + a_mat))
    psi0 = fock.coherent_state(alpha, cutoff)
    oracle = _oracle_states(h_mat, psi0, times)
    ansatz = _ansatz_states(traj.raw, cutoff, psi0)
    fid = _fidelity_column(oracle, ansatz)

    x_mat, p_mat = fock.x_op(cutoff), fock.p_op(cutoff)
    x = np.array([fock.expectation(x_mat, s).real for s in oracle])
    p = np.array([fock.expectation(p_mat, s).real for s in oracle])
    columns = {
        "t": times,
        "ReF0": traj.xi_zero.real,
        "ReF+": traj.f_plus.real,
        "ImF+": traj.f_plus.imag,
        "ReF-": traj.f_minus.real,
        "ImF-": traj.f_minus.imag,
        "X": x,
        "P": p,
        "fidelity": fid,
        "detXi": traj.det_ratio,
    }
    return columns, float(np.min(fid))


def run_open_damped(params):
    cutoff = params["cutoff"]
    alpha = params["alpha"]
    kappa = params["kappa"]
    times = np.linspace(0.0, params["T"], params["n_out"])

    h_mat = fock.number_op(cutoff)
    a_mat = fock.destroy(cutoff)
    gen = liouville.build_lindbladian(h_mat, [a_mat], [[kappa]])
    psi0 = fock.coherent_state(alpha, cutoff)
    rho0 = np.outer(psi0, psi0.conj())
    # The generator is constant, so the short-step product is exact in dt;
    # a moderate step keeps the dt/16 reference affordable.
    dt = params["T"] / 400.0
    traj = liouville.propagate_density(gen, rho0, params["T"], dt=dt, times=times)
    ref = liouville.propagate_density(gen, rho0, params["T"], dt=dt / 16.0,
                                      times=times, refine=False)

    # Normalised Hilbert-Schmidt overlap against the fine-step reference.
    fid = np.array(
        [
            abs(np.trace(r1 @ r2))
            / max(np.sqrt(abs(np.trace(r1 @ r1) * np.trace(r2 @ r2))), 1e-300)
            for r1, r2 in zip(traj.matrices, ref.matrices)
        ]
    )
    x_mat, p_mat = fock.x_op(cutoff), fock.p_op(cutoff)
    x = np.array([np.trace(x_mat @ r).real for r in traj.matrices])
    p = np.array([np.trace(p_mat @ r).real for r in traj.matrices])
    columns = {"t": times, "X": x, "P": p, "fidelity": fid}
    return columns, float(np.min(fid))


SCENARIO_RUNNERS = {
    "linear-constant": run_linear_constant,
    "linear-resonant": run_linear_resonant,
    "quadratic-constant": run_quadratic_constant,
    "quadratic-parametric": run_quadratic_parametric,
    "gaussian-combined": run_gaussian_combined,
    "open-damped": run_open_damped,
}


# -- output -------------------------------------------------------------------


def format_csv(columns):
    """17-significant-digit CSV with LF endings (byte-stable)."""
    keys = list(columns)
    lines = [",".join(keys)]
    length = len(next(iter(columns.values())))
    for i in range(length):
        lines.append(",".join(format(float(columns[k][i]), ".17g") for k in keys))
    return "\n".join(lines) + "\n"


def write_csv(columns, path):
    data = format_csv(columns)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(data)


def run_scenario(scenario, params, out_path=None):
    columns, min_fidelity = SCENARIO_RUNNERS[scenario](params)
    if out_path is None:
        out_dir = os.environ.get("WND_OUT_DIR", ".")
        os.makedirs(out_dir, exist_ok=True)
        out_path = os.path.join(out_dir, f"{scenario}.csv")
    write_csv(columns, out_path)
    return out_path, min_fidelity


# -- closure report -----------------------------------------------------------


def closure_report(generator_texts, max_dim=24):
    polys = [ladder.parse_polynomial(text) for text in generator_texts]
    n_modes = max(p.n_modes for p in polys)
    polys = [p.promote(n_modes) for p in polys]
    basis = ladder.close_algebra(polys, max_dim=max_dim)
    constants = ladder.structure_constants(basis)

    lines = [f"dimension = {len(basis)}"]
    for i, (elem, central) in enumerate(zip(basis.elements, basis.central)):
        flag = "yes" if central else "no"
        lines.append(f"element {i}: {elem.to_string()}  central={flag}")
    n = len(basis)
    for j in range(n):
        for k in range(n):
            for l in range(n):
                val = constants[j, k, l]
                if abs(val) > 1e-12:
                    lines.append(
                        f"c[{j}][{k}][{l}] = "
                        f"{format(val.real + 0.0, '.17g')},"
                        f"{format(val.imag + 0.0, '.17g')}"
                    )
    return "\n".join(lines) + "\n"


# -- argument parsing ---------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wnd",
        description="Driven-oscillator decoupling scenarios and algebra closures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write its CSV")
    run_p.add_argument("scenario")
    run_p.add_argument("assignments", nargs="*", metavar="key=value")
    run_p.add_argument("--config", default=None, metavar="PATH")
    run_p.add_argument("--out", default=None, metavar="PATH")
    run_p.add_argument("--cutoff", type=int, default=None)
    run_p.add_argument("--rtol", type=float, default=None)
    run_p.add_argument("--atol", type=float, default=None)
    run_p.add_argument("--dt-out", type=float, default=None, dest="dt_out")

    clo_p = sub.add_parser("closure", help="close a generator set and report")
    clo_p.add_argument("generators", nargs="+", metavar="POLYNOMIAL")
    clo_p.add_argument("--max-dim", type=int, default=24, dest="max_dim")

    sub.add_parser("list", help="list scenarios and their defaults")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)

    if args.command == "list":
        for name in sorted(SCENARIO_DEFAULTS):
            defaults = ", ".join(
                f"{k}={v}" for k, v in sorted(SCENARIO_DEFAULTS[name].items())
            )
            print(f"{name}: {defaults}")
        return 0

    if args.command == "closure":
        try:
            report = closure_report(args.generators, max_dim=args.max_dim)
        except WndError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(report, end="")
        return 0

    # run
    try:
        overrides = {"cutoff": args.cutoff, "rtol": args.rtol, "atol": args.atol}
        params = resolve_params(
            args.scenario, config_path=args.config,
            assignments=args.assignments, overrides=overrides,
        )
        if args.dt_out is not None:
            if args.dt_out <= 0:
                raise ConfigError("--dt-out must be positive")
            params["n_out"] = int(round(params["T"] / args.dt_out)) + 1
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        out_path, min_fidelity = run_scenario(args.scenario, params, args.out)
    except WndError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    print(f"{args.scenario}: wrote {out_path}  min_fidelity = "
          f"{format(min_fidelity, '.12g')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
