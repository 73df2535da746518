"""Command-line front end.

Every subcommand reads flags (optionally overridden by ``--config``), runs one
pipeline and prints a JSON report. With ``--out DIR`` the report and any CSV
artifacts are also written there. Exit status: 0 ok, 1 domain or solver error,
2 input, parse or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, fields, io as mio, lumped, txline
from .constants import AMU, EPS_EFF_TRAP
from .errors import ConfigError, ConvergenceError, DomainError, MwtrapError, OptimizationError, ParseError
from .fitting import (
    SCALING_MODELS,
    compare_scaling_models,
    fit_field_profile,
    fit_power_law,
    fit_s11,
    resistivity_from_q,
)

SCHEMA_VERSION = 1
SIG_DIGITS = 12

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2


# --- report serialisation ---------------------------------------------------------------

def _clean(obj):
    """JSON-ready copy with floats rounded to SIG_DIGITS significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.{SIG_DIGITS}g}") + 0.0  # + 0.0 folds -0.0 into 0.0
    return obj


def render_report(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def _digest(path: Path) -> dict:
    return {"file": path.name, "sha256": hashlib.sha256(path.read_bytes()).hexdigest()}


class Run:
    """Accumulates the pieces of one report plus its CSV artifacts."""

    def __init__(self, command: str, params: dict):
        self.command = command
        self.params = params
        self.inputs: dict[str, dict] = {}
        self.results: dict = {}
        self.warnings: list[str] = []
        self.artifacts: dict[str, str] = {}

    def read(self, key: str, path) -> Path:
        p = Path(path)
        self.inputs[key] = _digest(p)
        return p

    def report(self) -> dict:
        return {
            "command": self.command,
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "inputs": self.inputs,
            "params": self.params,
            "results": self.results,
            "warnings": self.warnings,
            "artifacts": sorted(self.artifacts),
        }


# --- argument helpers -------------------------------------------------------------------

def _q_value(text: str) -> float:
    if str(text).strip().lower() in ("inf", "lossless"):
        return txline.LOSSLESS
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("quality factor must be positive")
    return v


def _add_model_flags(p):
    g = p.add_argument_group("two-wire model")
    g.add_argument("--half-sep-um", type=float, default=15.0, help="half wire separation L")
    g.add_argument("--height-um", type=float, default=40.0, help="ion height d")
    g.add_argument("--u1", type=float, default=-0.019, help="wire 1 position in wavelengths")
    g.add_argument("--u2", type=float, default=-0.056, help="wire 2 position in wavelengths")
    g.add_argument("--q-tot", type=_q_value, default=txline.LOSSLESS, help="'inf' for lossless")
    g.add_argument("--freq-ghz", type=float, default=3.12)
    g.add_argument("--eps-eff", type=float, default=EPS_EFF_TRAP)


def _model(a) -> fields.TwoWireModel:
    return fields.TwoWireModel(
        half_separation=a.half_sep_um * 1e-6, ion_height=a.height_um * 1e-6,
        u1=a.u1, u2=a.u2, q_tot=a.q_tot,
        wavelength=txline.guided_wavelength(a.freq_ghz * 1e9, a.eps_eff))


def _add_circuit_flags(p):
    g = p.add_argument_group("lumped circuit (or a 'circuit' block in --config)")
    g.add_argument("--f0-ghz", type=float, default=3.7, help="unloaded tank resonance")
    g.add_argument("--z0-ohm", type=float, default=60.0, help="line impedance for L, C")
    g.add_argument("--l-nh", type=float, default=None, help="overrides f0/z0 with --c-pf")
    g.add_argument("--c-pf", type=float, default=None)
    g.add_argument("--r-kohm", type=float, default=1.4)
    g.add_argument("--cc-ff", type=float, default=400.0)
    g.add_argument("--z-feed-ohm", type=float, default=50.0)


CIRCUIT_KEYS = {"f0_ghz", "z0_ohm", "l_nh", "c_pf", "r_kohm", "cc_ff", "z_feed_ohm"}


def _circuit(a) -> lumped.LumpedResonator:
    if (a.l_nh is None) != (a.c_pf is None):
        raise DomainError("give both l_nh and c_pf, or neither")
    r, cc = a.r_kohm * 1e3, a.cc_ff * 1e-15
    if a.l_nh is not None:
        return lumped.LumpedResonator(a.l_nh * 1e-9, a.c_pf * 1e-12, r, cc, a.z_feed_ohm)
    return lumped.LumpedResonator.from_quarter_wave(a.f0_ghz * 1e9, a.z0_ohm, r, cc, a.z_feed_ohm)


def _circuit_echo(c: lumped.LumpedResonator) -> dict:
    return {"l_ind_h": c.l_ind, "c_cap_f": c.c_cap, "r_int_ohm": c.r_int,
            "c_couple_f": c.c_couple, "z_feed_ohm": c.z_feed, "f_unloaded_hz": c.f_unloaded}


def _parse_bound(text: str) -> tuple[str, tuple[float, float]]:
    try:
        name, rng = text.split("=", 1)
        lo, hi = (float(v) for v in rng.split(":", 1))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bound must look like NAME=LO:HI, got {text!r}") from None
    return name.strip(), (lo, hi)


#: optimisable model parameters and their CLI unit factor to SI
OPT_PARAMS = {"half_separation_um": ("half_separation", 1e-6), "ion_height_um": ("ion_height", 1e-6),
              "u1": ("u1", 1.0), "u2": ("u2", 1.0)}


# --- subcommands ------------------------------------------------------------------------

def cmd_wavelength(a, run: Run):
    lam = txline.guided_wavelength(a.freq_ghz * 1e9, a.eps_eff)
    run.results = {"wavelength_m": lam, "quarter_wave_m": lam / 4}


def cmd_stub(a, run: Run):
    lam = txline.guided_wavelength(a.freq_ghz * 1e9, a.eps_eff)
    z = txline.open_stub_impedance(a.length_mm * 1e-3, lam, a.z_c_ohm, a.convention)
    run.results = {"wavelength_m": lam, "open_circuit": txline.is_open(z),
                   "impedance_ohm": None if txline.is_open(z) else z,
                   "reflection_vs_ref": txline.mismatch_reflection(a.z_c_ohm, z)}


def cmd_mismatch(a, run: Run):
    z_load = txline.shunt_load(a.z_rf_ohm, a.c_pad_pf * 1e-12, a.freq_ghz * 1e9)
    g2 = txline.mismatch_reflection(a.z_ref_ohm, z_load)
    run.results = {"z_load_ohm": z_load, "reflected_power_fraction": g2,
                   "transmitted_power_fraction": 1 - g2}


def cmd_field_map(a, run: Run):
    if a.layout:
        layout = mio.load_layout(run.read("layout", a.layout))
    else:
        layout = _model(a).to_layout()
    h = a.height_um * 1e-6
    xr = (a.x_min_um * 1e-6, a.x_max_um * 1e-6)
    if a.grid == "transect":
        pts = fields.transect_grid(h, xr, a.nx)
    else:
        pts = fields.plane_grid(h, xr, (a.z_min_um * 1e-6, a.z_max_um * 1e-6), a.nx, a.nz)
    fmap = fields.bfield_at(layout, pts, normalize_to=a.power_w)
    bp = np.abs(fmap.b_par)
    i = int(np.argmin(bp))
    run.results = {"points": len(fmap), "segments": len(layout), "layout_name": layout.name,
                   "normalized_power_w": a.power_w,
                   "max_abs_bpar_t": float(bp.max()), "min_abs_bpar_t": float(bp[i]),
                   "min_abs_bpar_at_m": fmap.positions[i].tolist(),
                   "max_bperp_t": float(fmap.b_perp.max())}
    run.artifacts["field_map.csv"] = mio.format_field_map_csv(fmap)


def cmd_find_min(a, run: Run):
    model = _model(a)
    interval = (a.x_min_um * 1e-6, a.x_max_um * 1e-6)

    def bpar(x):
        return fields.two_wire_field(model, x)

    res = fields.find_field_minimum(bpar, interval)
    grad = fields.field_gradient(bpar, res.x0)
    i1, i2 = model.currents()
    run.results = {"x0_m": res.x0, "b_min_t": res.b_min, "gradient_t_per_m": abs(grad),
                   "gradient_phasor_t_per_m": grad, "b_at_rf_null_t": abs(bpar(0.0)),
                   "currents_a": [i1, i2], "evaluations": res.evaluations,
                   "non_unimodal": res.non_unimodal}
    if res.non_unimodal:
        run.warnings.append("field is not unimodal on the search interval")
    xs = np.linspace(interval[0], interval[1], a.scan_points)
    run.artifacts["transect.csv"] = mio.format_transect_csv(xs, bpar(xs))


def cmd_eta(a, run: Run):
    mass = a.mass_amu * AMU
    eta = fields.lamb_dicke(a.grad, a.amp_ut * 1e-6, mass, a.freq_mhz * 1e6)
    q0 = eta * a.amp_ut * 1e-6 / a.grad
    run.results = {"eta": eta, "q0_m": q0, "ion_mass_kg": mass}


def cmd_optimize(a, run: Run):
    bounds = {}
    for name, (lo, hi) in a.bound:
        if name not in OPT_PARAMS:
            raise DomainError(f"unknown optimisation parameter {name!r}; choose from {sorted(OPT_PARAMS)}")
        field_name, scale = OPT_PARAMS[name]
        bounds[field_name] = (lo * scale, hi * scale)
    if not bounds:
        raise DomainError("at least one --bound is required")
    res = fields.optimize_geometry(_model(a), a.objective, bounds, eval_x=a.eval_x_um * 1e-6,
                                   maxiter=a.maxiter)
    units = {v[0]: (k, v[1]) for k, v in OPT_PARAMS.items()}
    best = {units[k][0]: v / units[k][1] for k, v in res.params.items()}
    run.results = {"best": best, "objective": res.objective, "value": res.value,
                   "status": res.status, "bound_limited": res.bound_limited,
                   "seed_values": res.seed_values, "evaluations": len(res.trace)}
    if res.unbounded:
        run.warnings.append("objective diverges (vanishing amplitude); reported point is where "
                            "the divergence was first hit")
    elif res.bound_limited:
        run.warnings.append(f"optimum lies on the bounds of {res.bound_limited}")


def cmd_lumped(a, run: Run):
    c = _circuit(a)
    dec = lumped.quality_factor_decomposition(c)
    res = lumped.loaded_resonance(c)
    run.params["circuit_si"] = _circuit_echo(c)
    run.results = {"f_r_hz": res.f_r, "kappa_rad_s": res.kappa, "q_tot": dec.q_tot,
                   "q_int": dec.q_int, "q_ext": dec.q_ext, "pole_rad_s": res.pole,
                   "newton_iterations": res.iterations, "harmonic_residual": dec.residual}
    if abs(dec.residual) > 0.05:
        run.warnings.append(f"limiting-procedure Q split misses the harmonic identity by "
                            f"{abs(dec.residual):.3g} (relative)")


def cmd_shift_report(a, run: Run):
    c = _circuit(a)
    rep = lumped.frequency_shift_report(c, a.eps_fraction, a.r_factor, a.contraction,
                                        a.f_room_ghz * 1e9, dielectric_model=a.dielectric_model)
    run.params["circuit_si"] = _circuit_echo(c)
    run.results = rep.as_dict()


def _window(trace, a):
    lo = -math.inf if a.f_min_ghz is None else a.f_min_ghz * 1e9
    hi = math.inf if a.f_max_ghz is None else a.f_max_ghz * 1e9
    keep = (trace.frequencies >= lo) & (trace.frequencies <= hi)
    if keep.all():
        return trace
    return type(trace)(trace.frequencies[keep], trace.values[keep], trace.kind, trace.temperature)


def cmd_fit_s11(a, run: Run):
    trace = _window(mio.read_trace(run.read("trace", a.trace), a.temperature_k), a)
    res = fit_s11(trace, coupling=a.coupling)
    run.results = res.as_dict()
    run.results["points"] = len(trace)
    run.warnings.extend(res.warnings)
    model = type(trace)(trace.frequencies, res.model(trace.frequencies), "complex")
    run.artifacts["s11_model.csv"] = mio.format_s11_csv(model)


def cmd_fit_profile(a, run: Run):
    path = run.read("profile", a.profile)
    prof = mio.parse_profile_csv(path.read_text(), path)
    res = fit_field_profile(prof, normalize_to=a.normalize_w)
    run.results = res.as_dict()
    run.results["source_power_w"] = prof.power_watts
    xs = np.linspace(prof.x.min(), prof.x.max(), a.model_points)
    model = type(prof)(xs, res.model(xs), a.normalize_w)
    run.artifacts["profile_model.csv"] = mio.format_profile_csv(model)


def cmd_fit_heating(a, run: Run):
    path = run.read("data", a.data)
    fit = fit_power_law(mio.parse_heating_csv(path.read_text(), path))
    run.results = {"beta": fit.beta, "beta_stderr": fit.stderr, "prefactor": fit.prefactor}


def cmd_resistivity(a, run: Run):
    path = run.read("data", a.data)
    series = resistivity_from_q(mio.parse_q_series_csv(path.read_text(), path),
                                anchor_rho=a.anchor_rho_nohm_m * 1e-9,
                                anchor_temperature=a.anchor_temp_k)
    run.results = {"entries": [{"temp_k": e.temperature, "q_int": e.q_int, "rho_ohm_m": e.rho}
                               for e in series.entries],
                   "rrr": series.rrr}


def cmd_gradient_scaling(a, run: Run):
    path = run.read("data", a.data)
    rows = mio.parse_params_csv(path.read_text(), path)
    table = compare_scaling_models(rows)
    models = list(SCALING_MODELS) if a.model == "all" else [a.model]
    run.results = {"reference_temp_k": max(t for t, _ in rows),
                   "ratios": {m: [{"temp_k": t, "ratio": r} for t, r in table[m]] for m in models}}
    run.warnings.append("the field-scaling model is a modelling choice; ratios are a "
                        "prediction, not a measurement")


# --- parser -----------------------------------------------------------------------------

COMMANDS = {}


def _sub(subparsers, name, func, help_text):
    p = subparsers.add_parser(name, help=help_text, description=help_text)
    p.add_argument("--config", type=Path, default=None, help="JSON file overriding flags")
    p.add_argument("--out", type=Path, default=None, help="directory for report and CSV artifacts")
    p.add_argument("--seed", type=int, default=0, help="seed for randomised steps (echoed)")
    p.set_defaults(func=func, command=name)
    COMMANDS[name] = p
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mwtrap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sp = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = _sub(sp, "wavelength", cmd_wavelength, "guided wavelength on the microwave line")
    p.add_argument("--freq-ghz", type=float, default=3.12)
    p.add_argument("--eps-eff", type=float, default=EPS_EFF_TRAP)

    p = _sub(sp, "stub", cmd_stub, "input impedance of an open-terminated stub")
    p.add_argument("--length-mm", type=float, required=False, default=None)
    p.add_argument("--freq-ghz", type=float, default=3.12)
    p.add_argument("--eps-eff", type=float, default=EPS_EFF_TRAP)
    p.add_argument("--z-c-ohm", type=float, default=50.0)
    p.add_argument("--convention", choices=("plus-cot", "minus-cot"), default="plus-cot")

    p = _sub(sp, "mismatch", cmd_mismatch, "power reflected by a resistive load with pad capacitance")
    p.add_argument("--z-ref-ohm", type=float, default=50.0)
    p.add_argument("--z-rf-ohm", type=float, default=200.0)
    p.add_argument("--c-pad-pf", type=float, default=1.5)
    p.add_argument("--freq-ghz", type=float, default=3.1)

    p = _sub(sp, "field-map", cmd_field_map, "Biot-Savart field on a transect or plane")
    _add_model_flags(p)
    p.add_argument("--layout", type=Path, default=None, help="layout JSON (default: two-wire model)")
    p.add_argument("--grid", choices=("transect", "plane"), default="transect")
    p.add_argument("--x-min-um", type=float, default=-50.0)
    p.add_argument("--x-max-um", type=float, default=50.0)
    p.add_argument("--z-min-um", type=float, default=-50.0)
    p.add_argument("--z-max-um", type=float, default=50.0)
    p.add_argument("--nx", type=int, default=201)
    p.add_argument("--nz", type=int, default=101)
    p.add_argument("--power-w", type=float, default=None, help="normalise to this input power")

    p = _sub(sp, "find-min", cmd_find_min, "locate the parallel-field minimum of the two-wire model")
    _add_model_flags(p)
    p.add_argument("--x-min-um", type=float, default=-5.0)
    p.add_argument("--x-max-um", type=float, default=10.0)
    p.add_argument("--scan-points", type=int, default=301)

    p = _sub(sp, "eta", cmd_eta, "Lamb-Dicke parameter from gradient and amplitude")
    p.add_argument("--grad", "--grad-t-per-m", dest="grad", type=float, default=None,
                   help="field gradient (T/m)")
    p.add_argument("--amp-ut", type=float, default=None, help="field amplitude (uT)")
    p.add_argument("--mass-amu", type=float, default=43.0)
    p.add_argument("--freq-mhz", type=float, default=5.5, help="motional mode frequency")

    p = _sub(sp, "optimize", cmd_optimize, "Nelder-Mead search over two-wire geometry")
    _add_model_flags(p)
    p.add_argument("--objective", choices=fields.OBJECTIVES, default="gradient")
    p.add_argument("--bound", type=_parse_bound, action="append", default=[],
                   help=f"NAME=LO:HI with NAME in {sorted(OPT_PARAMS)}")
    p.add_argument("--eval-x-um", type=float, default=0.0)
    p.add_argument("--maxiter", type=int, default=400)

    p = _sub(sp, "lumped", cmd_lumped, "loaded resonance and Q split of the lumped circuit")
    _add_circuit_flags(p)

    p = _sub(sp, "shift-report", cmd_shift_report, "cool-down resonance shift budget")
    _add_circuit_flags(p)
    p.add_argument("--eps-fraction", type=float, default=-0.015)
    p.add_argument("--r-factor", type=float, default=5.0)
    p.add_argument("--contraction", type=float, default=3e-3)
    p.add_argument("--f-room-ghz", type=float, default=3.1)
    p.add_argument("--dielectric-model", choices=("sapphire", "average"), default="sapphire")

    p = _sub(sp, "fit-s11", cmd_fit_s11, "fit the resonator reflection model to a trace")
    p.add_argument("--trace", type=Path, default=None, help=".s1p or freq_hz,s11_db CSV")
    p.add_argument("--coupling", choices=("under", "over"), default="under",
                   help="branch reported for magnitude-only data")
    p.add_argument("--temperature-k", type=float, default=None)
    p.add_argument("--f-min-ghz", type=float, default=None)
    p.add_argument("--f-max-ghz", type=float, default=None)

    p = _sub(sp, "fit-profile", cmd_fit_profile, "fit gradient and minimum to |B_par| samples")
    p.add_argument("--profile", type=Path, default=None, help="x_um,bpar_uT,power_w CSV")
    p.add_argument("--normalize-w", type=float, default=1.0)
    p.add_argument("--model-points", type=int, default=201)

    p = _sub(sp, "fit-heating", cmd_fit_heating, "power-law exponent of heating rate vs temperature")
    p.add_argument("--data", type=Path, default=None, help="temp_k,rate_q_per_s CSV")

    p = _sub(sp, "resistivity", cmd_resistivity, "resistivity series from internal Q")
    p.add_argument("--data", type=Path, default=None, help="temp_k,q_int CSV")
    p.add_argument("--anchor-rho-nohm-m", type=float, default=22.0)
    p.add_argument("--anchor-temp-k", type=float, default=300.0)

    p = _sub(sp, "gradient-scaling", cmd_gradient_scaling, "predicted field gain on cooling")
    p.add_argument("--data", type=Path, default=None, help="temp_k,f_r_hz,q_int,q_ext CSV")
    p.add_argument("--model", choices=("all", *SCALING_MODELS), default="all")
    return parser


#: flags every subcommand must end up with, by command
REQUIRED = {"stub": ["length_mm"], "eta": ["grad", "amp_ut"], "fit-s11": ["trace"],
            "fit-profile": ["profile"], "fit-heating": ["data"], "resistivity": ["data"],
            "gradient-scaling": ["data"]}
PATH_KEYS = {"layout", "trace", "profile", "data"}
META_KEYS = {"func", "command", "config", "out"}


def _apply_config(args, parser: argparse.ArgumentParser):
    """Merge ``--config`` into ``args``; config values win over flags."""
    path = args.config
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", key="config") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}", key="schema_version")
    sub = COMMANDS[args.command]
    dests = {a.dest: a for a in sub._actions if a.dest not in ("help",) and a.dest not in META_KEYS}
    for key, value in data.items():
        if key == "schema_version":
            continue
        if key == "command":
            if value != args.command:
                raise ConfigError(f"command: config is for {value!r}, not {args.command!r}", key="command")
            continue
        if key == "circuit" and "r_kohm" in dests:
            if not isinstance(value, dict):
                raise ConfigError("circuit must be an object", key="circuit")
            for ck, cv in value.items():
                if ck not in CIRCUIT_KEYS:
                    raise ConfigError(f"unknown circuit key {ck!r}", key=f"circuit.{ck}")
                setattr(args, ck, _coerce(dests[ck], cv, f"circuit.{ck}"))
            continue
        if key == "bounds" and "bound" in dests:
            if not isinstance(value, dict):
                raise ConfigError("bounds must map names to [lo, hi]", key="bounds")
            try:
                args.bound = [(k, (float(v[0]), float(v[1]))) for k, v in value.items()]
            except (TypeError, ValueError, IndexError):
                raise ConfigError("bounds must map names to [lo, hi]", key="bounds") from None
            continue
        if key not in dests or key == "bound":
            raise ConfigError(f"unknown key {key!r} for {args.command}", key=key)
        setattr(args, key, _coerce(dests[key], value, key))
    # relative paths in a config file resolve against the file's directory
    for key in PATH_KEYS & set(data):
        p = Path(getattr(args, key))
        if not p.is_absolute():
            setattr(args, key, Path(path).parent / p)
    return data


def _coerce(action, value, key):
    if value is None:
        return None
    try:
        if action.type is Path:
            return Path(value)
        if action.type is not None:
            v = action.type(str(value)) if action.type is _q_value else action.type(value)
        else:
            v = value
    except (TypeError, ValueError, argparse.ArgumentTypeError):
        raise ConfigError(f"bad value {value!r} for {key!r}", key=key) from None
    if action.choices is not None and v not in action.choices:
        raise ConfigError(f"{key}: {value!r} is not one of {list(action.choices)}", key=key)
    return v


def _params_echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in META_KEYS:
            continue
        if isinstance(v, Path):
            v = v.name
        out[k] = v
    return out


def _write_outputs(run: Run, out: Path, text: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{run.command}.json").write_text(text)
    for name, body in sorted(run.artifacts.items()):
        (out / name).write_text(body)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config is not None:
            _apply_config(args, parser)
        missing = [k for k in REQUIRED.get(args.command, []) if getattr(args, k) is None]
        if missing:
            raise ConfigError(f"missing required value(s): {', '.join(missing)}", key=missing[0])
        for key in sorted(PATH_KEYS):
            p = getattr(args, key, None)
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"input file not found: {p}", key=key)
        current = Run(args.command, _params_echo(args))
        args.func(args, current)
        text = render_report(current.report())
        if args.out is not None:
            _write_outputs(current, args.out, text)
        stdout.write(text)
        return EXIT_OK
    except (ParseError, ConfigError) as exc:
        stderr.write(f"mwtrap {args.command}: error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        stderr.write(f"mwtrap {args.command}: I/O error: {exc}\n")
        return EXIT_INPUT
    except (DomainError, ConvergenceError, OptimizationError, MwtrapError) as exc:
        stderr.write(f"mwtrap {args.command}: error: {exc}\n")
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())
