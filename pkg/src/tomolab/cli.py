"""Command-line interface: ``tomolab <command> [options]``.

Every option can also come from a YAML file given with ``--config``; keys
are the long option names with dashes replaced by underscores.  Flags on
the command line win over the file.  Unknown keys are rejected.

Exit codes: 0 success, 2 configuration or contract error, 3 numerical
failure.  Commands that write a manifest do so on exit 0 and 3.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from contextlib import nullcontext
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .dynamics import (GENERATOR_KINDS, EnergyQuery, GeneratorSpec, energy_residual_optical,
                       energy_residual_symplectic, evolve, stationarity_residual)
from .errors import ContractViolation, DomainError, GridMismatchError, InstabilityError
from .fields import (Field, compare, mu_axis, nu_axis, p_axis, q_axis, read_field,
                     theta_axis, write_csv, write_field, x_axis)
from .moyal import correspondence_check
from .potentials import harmonic, parse_potential
from .states import (PACS, ClassicalGaussian, classical_gaussian, pacs_optical_tomogram,
                     pacs_symplectic_field, pacs_wigner, parse_state)
from .transforms import (characteristic_fn, rotate_theta, inverse_radon,
                         moment_from_characteristic, normalization_residual,
                         quadrature_moment, radon_optical, radon_symplectic, symmetry_residual)

__all__ = ["main", "main_entry", "build_parser", "ConfigError", "NumericalFailure"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    """Invalid configuration (exit code 2)."""


class NumericalFailure(RuntimeError):
    """A computed quantity missed its tolerance (exit code 3)."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


# ---------------------------------------------------------------------------
# option tables
# ---------------------------------------------------------------------------

GRID_OPTIONS = {
    "x_count": (int, 256, "samples on the X axis"),
    "x_half_width": (float, 8.0, "X runs over [-w, w)"),
    "theta_count": (int, 64, "samples on the theta axis"),
    "q_count": (int, 256, "samples per phase-space axis"),
    "q_half_width": (float, 8.0, "q and p run over [-w, w)"),
    "mu_count": (int, 97, "samples on the mu and nu axes"),
    "mu_start": (float, 0.35, "first mu and nu sample"),
    "mu_step": (float, 0.00625, "mu and nu spacing"),
}

STATE_OPTIONS = {
    "state": (str, "vacuum", "vacuum, fock:M, coherent:ALPHA, pacs:ALPHA:M or gaussian:Q,P[,VAR]"),
    "profile": (str, "constant:1", "frequency profile: constant:W, jump:W0,W1@T or sin:W0,DEPTH,DRIVE"),
    "t": (float, 0.0, "time at which the state is prepared"),
}

COMMANDS = {
    "tomogram": {
        **STATE_OPTIONS, **GRID_OPTIONS,
        "analytic": (bool, False, "closed-form tomogram"),
        "radon": (bool, False, "tomogram by Radon transform of the Wigner function"),
        "symplectic": (bool, False, "also write the symplectic tomogram"),
        "compare": (bool, False, "compare the analytic and Radon paths"),
        "tol": (float, 1e-5, "tolerance for --compare"),
        "csv": (bool, False, "also write CSV files"),
        "out": (str, "out", "output directory"),
    },
    "evolve": {
        **STATE_OPTIONS, **GRID_OPTIONS,
        "potential": (str, "q^2/2", "polynomial potential, e.g. 'q^2/2 + q^4/4'"),
        "generator": (str, "optical-quantum", "one of " + ", ".join(GENERATOR_KINDS)),
        "dt": (float, 1e-3, "time step"),
        "steps": (int, None, "number of steps"),
        "t_final": (float, None, "evolve until this time (overrides --steps)"),
        "snapshot_every": (int, None, "write every N-th step"),
        "csv": (bool, False, "also write CSV files"),
        "out": (str, "out", "output directory"),
    },
    "check": {
        **STATE_OPTIONS, **GRID_OPTIONS,
        "suite": (str, None, "energy, stationarity or correspondence"),
        "E": (float, None, "trial energy (energy suite)"),
        "potential": (str, None, "potential; defaults to q^2/2 for energy and stationarity"),
        "representation": (str, "both", "optical, symplectic or both"),
        "tol": (float, None, "override every row's tolerance"),
        "out": (str, None, "directory for the JSON report"),
    },
    "reconstruct": {
        **STATE_OPTIONS, **GRID_OPTIONS,
        "input": (str, None, "optical tomogram file; generated from --state if absent"),
        "taper_start": (float, 0.8, "start of the ramp-filter taper (fraction of Nyquist)"),
        "csv": (bool, False, "also write a CSV file"),
        "out": (str, "out", "output directory"),
    },
    "moments": {
        **STATE_OPTIONS, **GRID_OPTIONS,
        "input": (str, None, "optical tomogram file; generated from --state if absent"),
        "orders": (str, "1,2,3,4", "comma-separated moment orders"),
        "out": (str, "out", "output directory"),
    },
    "compare": {
        "a": (str, None, "first field file"),
        "b": (str, None, "second field file"),
        "out": (str, None, "directory for compare.json"),
    },
}

CHECK_SUITES = ("energy", "stationarity", "correspondence")
POSITIONAL = {"check": ("suite",), "compare": ("a", "b")}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomolab", description="Tomographic probability representation toolkit.")
    parser.add_argument("--version", action="version", version=f"tomolab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, table in COMMANDS.items():
        p = sub.add_parser(name, help=f"{name} command")
        p.add_argument("--config", help="YAML file with option values")
        for key in POSITIONAL.get(name, ()):
            kw = {"choices": CHECK_SUITES} if key == "suite" else {}
            p.add_argument(key, nargs="?", default=None, help=table[key][2], **kw)
        for key, (typ, default, text) in table.items():
            if key in POSITIONAL.get(name, ()):
                continue
            flag = "--" + key.replace("_", "-")
            shown = "" if default is None else f" (default {default})"
            if typ is bool:
                p.add_argument(flag, dest=key, action="store_true", default=None,
                               help=text)
            else:
                p.add_argument(flag, dest=key, type=typ, default=None, help=text + shown)
    return parser


def resolve_options(command, args: argparse.Namespace) -> dict:
    """Merge defaults, the YAML config and explicit flags (in that order)."""
    table = COMMANDS[command]
    opts = {k: v[1] for k, v in table.items()}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"config: malformed YAML: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config: top level must be a mapping")
        cfg = {str(k).replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - set(table))
        if unknown:
            raise ConfigError(f"config: unknown key(s) {', '.join(unknown)} for {command}")
        for key, val in cfg.items():
            typ = table[key][0]
            if val is None:
                opts[key] = None
                continue
            if typ is bool and not isinstance(val, bool):
                raise ConfigError(f"config: {key} must be true or false")
            try:
                opts[key] = typ(val)
            except (TypeError, ValueError):
                raise ConfigError(f"config: {key} must be of type {typ.__name__}") from None
    for key in table:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _grids(o):
    hw, qhw = o["x_half_width"], o["q_half_width"]
    grids = {
        "X": x_axis(o["x_count"], hw),
        "theta": theta_axis(o["theta_count"]),
        "q": q_axis(o["q_count"], qhw),
        "p": p_axis(o["q_count"], qhw),
        "mu": mu_axis(o["mu_count"], o["mu_start"], o["mu_step"]),
        "nu": nu_axis(o["mu_count"], o["mu_start"], o["mu_step"]),
    }
    return grids


def _state(o):
    try:
        return parse_state(o["state"], o.get("profile"))
    except DomainError as exc:
        raise ConfigError(f"state: {exc}") from None


def _wigner(state, t, g):
    if isinstance(state, ClassicalGaussian):
        return classical_gaussian(state, g["q"], g["p"])
    return pacs_wigner(state, t, g["q"], g["p"])


def _optical(state, t, g):
    """Closed form for PACS states, Radon transform for classical Gaussians."""
    if isinstance(state, PACS):
        return pacs_optical_tomogram(state, t, g["X"], g["theta"])
    return radon_optical(_wigner(state, t, g), g["X"], g["theta"])


def _out_dir(path):
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _save(field: Field, directory: Path, name: str, csv=False):
    write_field(directory / f"{name}.tomf", field)
    files = [f"{name}.tomf"]
    if csv:
        write_csv(directory / f"{name}.csv", field)
        files.append(f"{name}.csv")
    return files


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _field_report(f: Field):
    rep = {"normalization_residual": normalization_residual(f)}
    if f.has_axis("theta"):
        rep["symmetry_residual"] = symmetry_residual(f)
    return rep


def _read(path):
    try:
        return read_field(path)
    except OSError as exc:
        raise ConfigError(f"input: cannot read {path}: {exc}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_tomogram(o, manifest):
    state = _state(o)
    g = _grids(o)
    out = _out_dir(o["out"])
    analytic, radon = o["analytic"], o["radon"]
    if o["compare"]:
        analytic = radon = True
    if not (analytic or radon):
        analytic = isinstance(state, PACS)
        radon = not analytic
    if analytic and not isinstance(state, PACS):
        raise ConfigError("analytic: closed forms exist only for PACS states")
    manifest.update(state=state.label, t=o["t"], fields={})
    t = o["t"]
    made = {}
    if analytic:
        made["optical_analytic"] = pacs_optical_tomogram(state, t, g["X"], g["theta"])
        if o["symplectic"]:
            made["symplectic_analytic"] = pacs_symplectic_field(
                state, t, g["X"], g["mu"], g["nu"])
    if radon:
        W = _wigner(state, t, g)
        made["optical_radon"] = radon_optical(W, g["X"], g["theta"])
        if o["symplectic"]:
            made["symplectic_radon"] = radon_symplectic(W, g["X"], g["mu"], g["nu"])
    for name, f in made.items():
        rep = _field_report(f)
        rep["files"] = _save(f, out, name, o["csv"])
        manifest["fields"][name] = rep
    if o["compare"]:
        cmp = {"optical": compare(made["optical_analytic"], made["optical_radon"])}
        if o["symplectic"]:
            cmp["symplectic"] = compare(made["symplectic_analytic"], made["symplectic_radon"])
        worst = max(c["sup"] for c in cmp.values())
        manifest["compare"] = dict(cmp, tolerance=o["tol"], sup=worst, **{"pass": worst <= o["tol"]})
        print(f"analytic vs radon: sup-diff {worst:.3e} (tolerance {o['tol']:g})")
        if not worst <= o["tol"]:
            raise NumericalFailure(f"analytic and Radon tomograms differ by {worst:.3e}")
    for name, rep in manifest["fields"].items():
        print(f"{name}: normalization residual {rep['normalization_residual']:.3e}")


def _initial_for(kind, state, g, t):
    family = kind.split("-")[0]
    if family == "symplectic" or kind == "characteristic-symplectic":
        if isinstance(state, PACS):
            f = pacs_symplectic_field(state, t, g["X"], g["mu"], g["nu"])
        else:
            f = radon_symplectic(_wigner(state, t, g), g["X"], g["mu"], g["nu"])
    else:
        f = _optical(state, t, g)
    return characteristic_fn(f) if family == "characteristic" else f


def cmd_evolve(o, manifest):
    state = _state(o)
    g = _grids(o)
    out = _out_dir(o["out"])
    try:
        U = parse_potential(o["potential"])
        spec = GeneratorSpec(o["generator"], U)
    except DomainError as exc:
        raise ConfigError(f"potential/generator: {exc}") from None
    if o["steps"] is None and o["t_final"] is None:
        raise ConfigError("steps: give --steps or --t-final")
    f0 = _initial_for(o["generator"], state, g, o["t"])
    manifest.update(state=state.label, potential=U.describe(), generator=spec.kind,
                    dt=o["dt"], snapshots=[])
    try:
        traj = evolve(f0, spec, o["dt"], steps=None if o["t_final"] is not None else o["steps"],
                      snapshot_every=o["snapshot_every"], t0=o["t"],
                      horizon=None if o["t_final"] is None else o["t_final"] - o["t"])
    except InstabilityError as exc:
        manifest["failed_step"] = exc.step
        raise
    drift = 0.0
    for n, (t, f) in enumerate(traj):
        name = f"snapshot_{n:04d}"
        files = _save(f, out, name, o["csv"] and spec.family != "characteristic")
        entry = {"index": n, "t": t, "files": files}
        entry.update({k: f.metadata[k] for k in sorted(f.metadata)
                      if k.endswith(("_residual", "_drift", "_warning"))})
        diff = float(np.max(np.abs(f.values - f0.values)))
        drift = max(drift, diff)
        entry["sup_change_from_initial"] = diff
        manifest["snapshots"].append(entry)
    manifest["dt"] = traj[-1][1].metadata["dt"]
    manifest["max_snapshot_drift"] = drift
    quadratic = (U.modes == 1 and set(U.terms) == {(2,)}
                 and np.isclose(U.terms[(2,)], harmonic(1, U.constants).terms[(2,)]))
    if quadratic and spec.family == "optical":
        t_end, f_end = traj[-1]
        ref = rotate_theta(f0, (t_end - o["t"]) * U.constants[0].frequency)
        manifest["final_vs_rotated_initial"] = float(np.max(np.abs(f_end.values - ref.values)))
        print(f"final vs rotated initial: sup-err {manifest['final_vs_rotated_initial']:.3e}")
    last = traj[-1][1].metadata
    print(f"{len(traj)} snapshots to t={traj[-1][0]:.6g}; "
          f"normalization drift {last['normalization_drift']:.3e}; "
          f"max change from initial {drift:.3e}")


def _energy_rows(state, o, g, U):
    if o["E"] is None:
        raise ConfigError("E: the energy suite needs --E")
    if not isinstance(state, PACS):
        raise ConfigError("state: the energy suite needs a PACS state")
    rows = []
    rep = o["representation"]
    if rep in ("optical", "both"):
        w = pacs_optical_tomogram(state, o["t"], g["X"], g["theta"])
        _, norm = energy_residual_optical(EnergyQuery(o["E"], w, U))
        rows.append({"rule": "energy-optical", "norm": norm, "tolerance": o["tol"] or 1e-6})
    if rep in ("symplectic", "both"):
        M = pacs_symplectic_field(state, o["t"], g["X"], g["mu"], g["nu"])
        _, norm = energy_residual_symplectic(EnergyQuery(o["E"], M, U))
        rows.append({"rule": "energy-symplectic", "norm": norm, "tolerance": o["tol"] or 1e-4})
    return rows


def _stationarity_rows(state, o, g, U):
    rows = []
    rep = o["representation"]
    if rep in ("optical", "both"):
        w = _initial_for("optical-quantum", state, g, o["t"])
        rows.append({"rule": "stationarity-optical",
                     "norm": stationarity_residual(w, GeneratorSpec("optical-quantum", U)),
                     "tolerance": o["tol"] or 1e-6})
    if rep in ("symplectic", "both"):
        M = _initial_for("symplectic-quantum", state, g, o["t"])
        rows.append({"rule": "stationarity-symplectic",
                     "norm": stationarity_residual(M, GeneratorSpec("symplectic-quantum", U)),
                     "tolerance": o["tol"] or 1e-4})
    return rows


def cmd_check(o, manifest):
    suite = o["suite"]
    if suite not in CHECK_SUITES:
        raise ConfigError(f"suite: expected one of {', '.join(CHECK_SUITES)}")
    if o["representation"] not in ("optical", "symplectic", "both"):
        raise ConfigError("representation: expected optical, symplectic or both")
    state = _state(o)
    g = _grids(o)
    try:
        U = parse_potential(o["potential"]) if o["potential"] else None
    except DomainError as exc:
        raise ConfigError(f"potential: {exc}") from None
    if suite == "correspondence":
        tol = o["tol"] or 1e-5
        rep = correspondence_check(state, U, g["q"], g["p"], g["X"], g["theta"],
                                   g["mu"], g["nu"], t=o["t"], tol=tol)
        rows = [dict(r, tolerance=tol) for r in rep["rows"]]
    else:
        U = U or harmonic(1)
        rows = (_energy_rows if suite == "energy" else _stationarity_rows)(state, o, g, U)
    for r in rows:
        r["pass"] = bool(r["norm"] <= r["tolerance"])
    manifest.update(suite=suite, state=state.label, E=o["E"],
                    potential=None if U is None else U.describe(), rows=rows,
                    all_pass=all(r["pass"] for r in rows))
    width = max(len(r["rule"]) for r in rows)
    for r in rows:
        print(f"{r['rule']:<{width}}  {r['norm']:.3e}  (tol {r['tolerance']:.0e})  "
              f"{'PASS' if r['pass'] else 'FAIL'}")


def _tomogram_input(o, g):
    if o["input"]:
        w = _read(o["input"])
        if not (w.has_axis("X") and w.has_axis("theta")):
            raise ConfigError("input: expected an optical tomogram over (X, theta)")
        return w, None
    state = _state(o)
    return _optical(state, o["t"], g), state


def cmd_reconstruct(o, manifest):
    g = _grids(o)
    out = _out_dir(o["out"])
    w, state = _tomogram_input(o, g)
    W = inverse_radon(w, g["q"], g["p"], taper_start=o["taper_start"])
    files = _save(W, out, "wigner", o["csv"])
    sidecar = {k: v for k, v in W.metadata.items() if not isinstance(v, np.ndarray)}
    if state is not None:
        ref = _wigner(state, o["t"], g)
        sidecar["sup_error_vs_reference"] = float(np.max(np.abs(W.values - ref.values)))
        print(f"reconstruction vs reference Wigner: sup-err {sidecar['sup_error_vs_reference']:.3e}")
    _write_json(out / "wigner.json", sidecar)
    manifest.update(files=files + ["wigner.json"], reconstruction=sidecar)
    iq, ip = np.argmin(np.abs(g["q"].values)), np.argmin(np.abs(g["p"].values))
    print(f"W(0,0) = {W.values.real[iq, ip]:.6f}")


def cmd_moments(o, manifest):
    g = _grids(o)
    out = _out_dir(o["out"])
    w, _ = _tomogram_input(o, g)
    try:
        orders = [int(n) for n in str(o["orders"]).split(",") if n.strip()]
    except ValueError:
        raise ConfigError("orders: expected comma-separated integers") from None
    theta = w.axis("theta").values
    table = {"theta": theta}
    consistency = {}
    for n in orders:
        direct = quadrature_moment(w, n).values
        via_chi = moment_from_characteristic(w, n)
        table[f"moment_{n}"] = direct.real
        consistency[str(n)] = float(np.max(np.abs(direct - via_chi)))
    header = ",".join(table)
    rows = np.column_stack(list(table.values()))
    np.savetxt(out / "moments.csv", rows, delimiter=",", header=header, comments="",
               fmt="%.17g")
    manifest.update(files=["moments.csv"], orders=orders, characteristic_consistency=consistency)
    for n in orders:
        vals = table[f"moment_{n}"]
        print(f"<X^{n}>: min {vals.min():.6g} max {vals.max():.6g}; "
              f"characteristic-function consistency {consistency[str(n)]:.2e}")


def cmd_compare(o, manifest):
    if not (o["a"] and o["b"]):
        raise ConfigError("a, b: two field files are required")
    a, b = _read(o["a"]), _read(o["b"])
    rep = compare(a, b)
    manifest.update(a=o["a"], b=o["b"], **rep)
    print(f"sup {rep['sup']:.6e}  l2 {rep['l2']:.6e}")


HANDLERS = {
    "tomogram": cmd_tomogram, "evolve": cmd_evolve, "check": cmd_check,
    "reconstruct": cmd_reconstruct, "moments": cmd_moments, "compare": cmd_compare,
}
MANIFEST_NAME = {"check": "check.json", "compare": "compare.json"}


def _thread_limit():
    n = os.environ.get("TOMOLAB_THREADS")
    if not n:
        return nullcontext()
    try:
        n = int(n)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigError("TOMOLAB_THREADS must be a positive integer") from None
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    manifest = {"command": command, "version": __version__}
    opts = None
    code = EXIT_OK
    started = time.perf_counter()
    try:
        opts = resolve_options(command, args)
        manifest["options"] = dict(opts)
        with _thread_limit():
            HANDLERS[command](opts, manifest)
        manifest["status"] = "ok"
    except (ConfigError, DomainError, GridMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InstabilityError, NumericalFailure, ContractViolation, FloatingPointError) as exc:
        step = getattr(exc, "step", None)
        where = f" (step {step})" if step is not None else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        manifest.update(status="failed", error=str(exc))
        if step is not None:
            manifest["failed_step"] = step
        code = EXIT_NUMERIC
    manifest["wall_time"] = time.perf_counter() - started
    out = opts.get("out") if opts else None
    if out:
        _write_json(_out_dir(out) / MANIFEST_NAME.get(command, "manifest.json"), manifest)
    return code


def main_entry():
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
