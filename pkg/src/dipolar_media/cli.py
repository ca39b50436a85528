"""Command-line front end.

Every command resolves its parameters from an optional JSON config file
(keys are the long flag names without dashes, e.g. ``"eps-re"``) overridden
by explicit flags, runs the owning module and writes either

* CSV: ``#``-prefixed metadata lines (tool, version, command, resolved
  config, seed, column units) followed by a header row and data rows, or
* JSON: ``{"meta": {...}, "rows": [...]}``.

Floats are written with 17 significant digits.  Exit codes: 0 success,
2 configuration error, 3 numerical failure, 4 sampling stall.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Callable

import click

from . import __version__
from .coupled_dipole_sim import ScattererMedium, ensemble_decay, RNG_NAME
from .emission import decay_breakdown_mg
from .errors import (
    ConfigError,
    ConvergenceError,
    DipolarMediaError,
    NoRootError,
    SamplingStallError,
    SeriesRadiusError,
    SingularSystemError,
)
from .gamma_virtual_cavity import gamma_totals
from .polarizability import LorentzOscillator
from .pressure_energy import pressure_report
from .real_cavity import CavityScenario, decay_rc
from .self_consistent import MediumSpec, potassium_preset, solve_epsilon

TOOL = "dipolar-media"
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_STALL = 4


# ---------------------------------------------------------------------------
# command registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    type: type
    default: object
    help: str


@dataclass(frozen=True)
class Command:
    name: str
    params: tuple
    columns: tuple  # (name, unit)
    run: Callable[[dict], tuple]  # -> (rows, extra meta)
    help: str

    def param(self, name):
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def column_names(self):
        return tuple(c for c, _ in self.columns)


_DECAY_COLUMNS = (
    ("coherent", "rate/ref"), ("long_dispersive", "rate/ref"), ("absorptive_z0", "rate/ref"),
    ("absorptive_zm1", "rate/ref"), ("absorptive_zm3", "rate/ref"), ("total", "rate/ref"),
)


def _eps(p) -> complex:
    if p.get("chi") is not None:
        if p.get("eps-re") is not None:
            raise ConfigError("give either chi or eps-re, not both")
        return complex(1 + p["chi"], p["eps-im"])
    if p.get("eps-re") is None:
        raise ConfigError("eps-re (or chi) is required")
    return complex(p["eps-re"], p["eps-im"])


def _require(p, *names):
    for n in names:
        if p.get(n) is None:
            raise ConfigError(f"{n} is required")


def _run_gamma(p):
    _require(p, "zeta")
    g = gamma_totals(_eps(p) - 1, p["zeta"], p["order"])
    parts = {
        "perp2_z0": g.perp2.z0, "perp2_zm1": g.perp2.zm1,
        "par_z0": g.par.z0, "par_zm1": g.par.zm1, "par_zm3": g.par.zm3, "total": g.total,
    }
    row = {}
    for k, v in parts.items():
        row[f"{k}_re"] = v.real
        row[f"{k}_im"] = v.imag
    return [row], {}


def _run_decay(p):
    _require(p, "zeta")
    b = decay_breakdown_mg(_eps(p), p["zeta"], n_max=p["order"])
    return [b.as_dict()], {"reference": b.reference}


def _run_real_cavity(p):
    _require(p, "k0r")
    b = decay_rc(CavityScenario(_eps(p), p["k0r"]))
    return [b.as_dict()], {"reference": b.reference}


def _oscillator(p):
    if p["preset"] == "potassium":
        _require(p, "xi")
        base = potassium_preset(p["xi"], rho_m3=p["rho-m3"] or 1e22)
        return base.oscillator
    if p["preset"] not in (None, "none"):
        raise ConfigError(f"unknown preset {p['preset']!r}")
    _require(p, "alpha0", "k0")
    return LorentzOscillator.from_alpha0(p["alpha0"], p["k0"])


def _density(p) -> float:
    if p.get("rho") is not None and p.get("rho-m3") is not None:
        raise ConfigError("give either rho (nm^-3) or rho-m3, not both")
    if p.get("rho") is not None:
        return p["rho"]
    if p.get("rho-m3") is not None:
        return p["rho-m3"] * 1e-27
    if p["preset"] == "potassium":
        return 1e22 * 1e-27
    raise ConfigError("rho (or rho-m3) is required")


def _run_epsilon(p):
    _require(p, "xi")
    osc = _oscillator(p)
    rho = _density(p)
    detunings = _float_list(p["detunings"])
    medium = MediumSpec(rho=rho, xi=p["xi"], oscillator=osc,
                        k_grid=tuple(osc.k0 * (1 + d) for d in detunings),
                        gamma_extras=not p["no-gamma-extras"], n_max=p["order"])
    res = solve_epsilon(medium, tol=p["tol"])
    rows = []
    for pt in res.points:
        rows.append({
            "k": pt.k, "detuning": pt.k / osc.k0 - 1, "eps_re": pt.eps.real,
            "eps_im": pt.eps.imag, "residual": pt.residual, "iterations": pt.iterations,
            "k_res": res.k_res, "alpha0_tilde": res.alpha0_tilde,
            "gamma_alpha": res.gamma_alpha, "lorentz_shift": res.lorentz_shift,
        })
    return rows, {"rho_nm3": rho, "alpha0": osc.alpha0, "k0": osc.k0, "gamma0": osc.gamma0}


def _run_simulate(p):
    medium = ScattererMedium.from_rho_alpha(complex(p["rho-alpha"], p["rho-alpha-im"]),
                                            p["zeta"], p["packing"], p["k0"])
    st = ensemble_decay(medium, p["n"], p["samples"], p["seed"],
                        tail_correction=not p["no-tail"], workers=p["workers"])
    row = st.as_dict()
    row.pop("rng")
    return [row], {"rng": RNG_NAME, "rho": medium.rho, "xi": medium.xi,
                   "alpha_re": medium.alpha_tilde.real, "alpha_im": medium.alpha_tilde.imag}


def _run_pressure(p):
    _require(p, "xi")
    osc = _oscillator(p)
    rho = _density(p)
    rep = pressure_report(rho, osc.alpha0, osc.k0, p["xi"], not p["no-self-energy"])
    return [rep.as_dict()], {"rho_nm3": rho, "alpha0": osc.alpha0, "k0": osc.k0}


_EPS_PARAMS = (
    Param("eps-re", float, None, "Re eps"),
    Param("eps-im", float, 0.0, "Im eps"),
    Param("chi", float, None, "Re(eps) - 1 (alternative to eps-re)"),
)
_OSC_PARAMS = (
    Param("preset", str, None, "material preset: potassium"),
    Param("alpha0", float, None, "static polarizability [nm^3]"),
    Param("k0", float, None, "resonance wavenumber [1/nm]"),
    Param("rho", float, None, "density [nm^-3]"),
    Param("rho-m3", float, None, "density [m^-3]"),
    Param("xi", float, None, "exclusion length [nm]"),
)

COMMANDS = {
    "gamma": Command(
        "gamma",
        _EPS_PARAMS + (Param("zeta", float, None, "k xi"), Param("order", int, 5, "series order")),
        tuple((f"{n}_{c}", "k/2pi") for n in ("perp2_z0", "perp2_zm1", "par_z0", "par_zm1",
                                               "par_zm3", "total") for c in ("re", "im")),
        _run_gamma, "Gamma factors 2 gamma_perp + gamma_par of an MG medium (units k/2pi).",
    ),
    "decay": Command(
        "decay",
        _EPS_PARAMS + (Param("zeta", float, None, "k xi"), Param("order", int, 5, "series order")),
        _DECAY_COLUMNS + (("absorbed_host", "rate/ref"),),
        _run_decay, "Decay channels of a virtual-cavity emitter in an MG medium.",
    ),
    "real-cavity": Command(
        "real-cavity",
        _EPS_PARAMS + (Param("k0r", float, None, "k0 R"),),
        _DECAY_COLUMNS + (("absorbed_host", "rate/ref"),),
        _run_real_cavity, "Decay channels of an impurity in an empty cavity.",
    ),
    "epsilon": Command(
        "epsilon",
        _OSC_PARAMS + (
            Param("detunings", str, "-1e-2,-1e-3,-3e-4,3e-4,1e-3,1e-2",
                  "comma-separated relative detunings k/k0 - 1"),
            Param("no-gamma-extras", bool, False, "drop the medium gamma factors"),
            Param("order", int, 5, "series order"),
            Param("tol", float, 1e-10, "fixed-point tolerance"),
        ),
        (("k", "1/nm"), ("detuning", "1"), ("eps_re", "1"), ("eps_im", "1"),
         ("residual", "1"), ("iterations", "1"), ("k_res", "1/nm"), ("alpha0_tilde", "nm^3"),
         ("gamma_alpha", "1/s"), ("lorentz_shift", "1/nm^2")),
        _run_epsilon, "Self-consistent MG dielectric constant.",
    ),
    "simulate": Command(
        "simulate",
        (
            Param("rho-alpha", float, 0.05, "Re rho alpha~"),
            Param("rho-alpha-im", float, 0.0, "Im rho alpha~"),
            Param("zeta", float, 0.1, "k0 xi"),
            Param("packing", float, 0.15, "rho (4pi/3) xi^3"),
            Param("k0", float, 1.0, "wavenumber [1/length]"),
            Param("n", int, 500, "scatterers per configuration"),
            Param("samples", int, 200, "number of configurations"),
            Param("seed", int, 0, "master seed"),
            Param("no-tail", bool, False, "omit the continuum-tail correction"),
            Param("workers", int, 1, "threads"),
        ),
        (("mean_re", "Gamma/Gamma0"), ("mean_im", "1"), ("stderr_re", "Gamma/Gamma0"),
         ("stderr_im", "1"), ("mean_raw_re", "Gamma/Gamma0"), ("mean_raw_im", "1"),
         ("tail_re", "Gamma/Gamma0"), ("tail_im", "1"), ("n_samples", "1"),
         ("n_failed", "1"), ("seed", "1"), ("cluster_radius", "1/k0")),
        _run_simulate, "Monte-Carlo coupled-dipole estimate of Gamma/Gamma0.",
    ),
    "pressure": Command(
        "pressure",
        _OSC_PARAMS + (Param("no-self-energy", bool, False, "drop the alpha0/(6pi xi^3) term"),),
        (("f_vdw", "J/m^3"), ("p_vdw", "Pa"), ("a_prime", "J m^3"), ("f_rad_diel", "J/m^3"),
         ("p_rad", "Pa"), ("ratio", "1")),
        _run_pressure, "Van-der-Waals and radiative energies and pressures.",
    ),
}


# ---------------------------------------------------------------------------
# config resolution and output
# ---------------------------------------------------------------------------

def _float_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text).strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse value list {text!r}") from exc


def _coerce(param: Param, value):
    if value is None:
        return None
    try:
        if param.type is bool:
            if isinstance(value, bool):
                return value
            raise ValueError
        if param.type is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if param.type is float:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{param.name}: expected {param.type.__name__}, got {value!r}") from exc


def load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def resolve(command: Command, file_values: dict, flag_values: dict, *,
            extra_keys: tuple = ()) -> dict:
    """Defaults < file values < explicit flags; unknown keys raise ``ConfigError``."""
    known = {p.name for p in command.params} | set(extra_keys)
    unknown = sorted(set(file_values) - known)
    if unknown:
        raise ConfigError(f"unknown config keys for {command.name}: {unknown}")
    out = {}
    for p in command.params:
        value = p.default
        if p.name in file_values:
            value = file_values[p.name]
        if flag_values.get(p.name) is not None:
            value = flag_values[p.name]
        out[p.name] = _coerce(p, value)
    return out


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v + 0.0, ".17g")
    if v is None:
        return ""
    return str(v)


def render(command_name: str, columns, rows: list, meta: dict, fmt: str) -> str:
    meta = {"tool": TOOL, "version": __version__, "command": command_name, **meta}
    if fmt == "json":
        return json.dumps({"meta": meta, "rows": rows}, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    for key in ("tool", "version", "command"):
        buf.write(f"# {key}: {meta[key]}\n")
    buf.write(f"# config: {json.dumps(meta.get('config', {}), sort_keys=True)}\n")
    buf.write(f"# seed: {meta.get('seed', '')}\n")
    for key in sorted(k for k in meta if k not in ("tool", "version", "command", "config",
                                                   "seed", "units")):
        buf.write(f"# {key}: {_fmt(meta[key]) if not isinstance(meta[key], dict) else json.dumps(meta[key])}\n")
    buf.write("# units: " + "; ".join(f"{c}={u}" for c, u in columns) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    names = [c for c, _ in columns]
    writer.writerow(names)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in names])
    return buf.getvalue()


def _emit(text: str, output):
    if output in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(output, "w") as fh:
            fh.write(text)


def _fail(code: int, exc: Exception):
    report = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if hasattr(exc, "condition"):
        report["condition"] = exc.condition
    click.echo(json.dumps(report, default=str), err=True)
    sys.exit(code)


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, SamplingStallError):
        return EXIT_STALL
    if isinstance(exc, (ConvergenceError, NoRootError, SingularSystemError, SeriesRadiusError,
                        DipolarMediaError)):
        return EXIT_NUMERIC
    if isinstance(exc, ValueError):
        return EXIT_CONFIG
    raise exc


def run_command(name: str, params: dict, fmt: str = "csv"):
    """Resolve-free entry point: run ``name`` with fully resolved ``params``; return text."""
    command = COMMANDS[name]
    rows, extra = command.run(params)
    meta = {"config": params, "seed": params.get("seed", ""), **extra}
    return render(name, command.columns, rows, meta, fmt)


# ---------------------------------------------------------------------------
# click wiring
# ---------------------------------------------------------------------------

def _common(f):
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     default=None, help="JSON config file (keys = flag names)")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                     show_default=True)(f)
    f = click.option("--output", "-o", default=None, help="output path (default stdout)")(f)
    return f


def _add_param_options(command: Command, f):
    for p in reversed(command.params):
        flag = f"--{p.name}"
        dest = p.name.replace("-", "_")
        if p.type is bool:
            f = click.option(flag, dest, is_flag=True, default=None, help=p.help)(f)
        else:
            f = click.option(flag, dest, type=p.type, default=None,
                             help=f"{p.help} [default: {p.default}]")(f)
    return f


def _flag_values(command: Command, kwargs: dict) -> dict:
    return {p.name: kwargs.get(p.name.replace("-", "_")) for p in command.params}


def _make_command(command: Command):
    def callback(config_path, fmt, output, **kwargs):
        try:
            params = resolve(command, load_config_file(config_path), _flag_values(command, kwargs))
            text = run_command(command.name, params, fmt)
        except Exception as exc:  # noqa: BLE001 - mapped to exit codes
            _fail(exit_code_for(exc), exc)
        _emit(text, output)

    callback.__name__ = command.name.replace("-", "_")
    callback = _add_param_options(command, callback)
    callback = _common(callback)
    return click.command(name=command.name, help=command.help)(callback)


@click.group()
@click.version_option(__version__, prog_name=TOOL)
def main():
    """Decay rates, dielectric constants and pressures of dipolar media."""


for _cmd in COMMANDS.values():
    main.add_command(_make_command(_cmd))


def sweep_rows(command: Command, base: dict, axis: str, values: list):
    """One row per axis value; failures go to the ``error`` column."""
    param = command.param(axis)
    if param.type not in (float, int):
        raise ConfigError(f"axis {axis!r} is not numeric")
    rows = []
    for v in values:
        params = dict(base)
        params[axis] = _coerce(param, v)
        row = {"axis_value": params[axis]}
        row.update({f"param:{k}": val for k, val in params.items()})
        try:
            out, _ = command.run(params)
            row.update(out[0] if out else {})
            row["error"] = ""
        except Exception as exc:  # noqa: BLE001 - recorded per row
            exit_code_for(exc)  # re-raises anything unexpected
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def sweep_columns(command: Command, axis: str):
    cols = [("axis_value", f"{axis}")]
    cols += [(f"param:{p.name}", "") for p in command.params]
    cols += list(command.columns)
    cols.append(("error", ""))
    return tuple(cols)


@main.command(name="sweep")
@click.option("--target", required=True, type=click.Choice(sorted(COMMANDS)),
              help="command to sweep")
@click.option("--axis", required=True, help="numeric parameter of the target command")
@click.option("--values", "values_text", default="", help="comma-separated values")
@click.option("--set", "settings", multiple=True, help="KEY=VALUE parameter of the target")
@_common
def sweep(target, axis, values_text, settings, config_path, fmt, output):
    """Run TARGET once per value of AXIS (other parameters held constant)."""
    command = COMMANDS[target]
    try:
        file_values = load_config_file(config_path)
        file_values = {k: v for k, v in file_values.items() if k not in ("axis", "values")}
        flags = {}
        for s in settings:
            if "=" not in s:
                raise ConfigError(f"--set expects KEY=VALUE, got {s!r}")
            key, val = s.split("=", 1)
            try:
                p = command.param(key)
            except KeyError:
                raise ConfigError(f"unknown parameter {key!r} for {target}") from None
            flags[key] = (val.lower() in ("1", "true", "yes")) if p.type is bool else val
        try:
            command.param(axis)
        except KeyError:
            raise ConfigError(f"unknown axis {axis!r} for {target}") from None
        base = resolve(command, file_values, flags)
        values = _float_list(values_text)
        rows = sweep_rows(command, base, axis, values)
        meta = {"config": {"target": target, "axis": axis, "values": values, **base},
                "seed": base.get("seed", "")}
        text = render(f"sweep:{target}", sweep_columns(command, axis), rows, meta, fmt)
    except Exception as exc:  # noqa: BLE001
        _fail(exit_code_for(exc), exc)
    _emit(text, output)


if __name__ == "__main__":  # pragma: no cover
    main()
