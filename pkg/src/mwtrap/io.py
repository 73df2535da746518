"""Readers and writers for the on-disk formats.

* Touchstone v1 one-port files (``.s1p``) in RI, MA or DB format
* CSV: ``freq_hz,s11_db``; ``x_um,bpar_uT,power_w``; ``temp_k,rate_q_per_s``;
  ``temp_k,q_int``; ``temp_k,f_r_hz,q_int,q_ext``; field maps
  ``x_m,y_m,z_m,Bpar_re_T,Bpar_im_T,Bperp_T``; parallel-field transects
  ``x_m,Bpar_re_T,Bpar_im_T``
* layout JSON ``{name, power_watts, segments: [{start, end, current: {re, im}}]}``

Floats are written with ``repr`` so every CSV we emit reads back bit-for-bit.
"""

from __future__ import annotations

import csv
import io
from decimal import Decimal
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .fields import FieldMap, WireLayout
from .fitting.profile import FieldProfile
from .fitting.s11 import FrequencyTrace

FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}

S11_CSV = ("freq_hz", "s11_db")
PROFILE_CSV = ("x_um", "bpar_uT", "power_w")
HEATING_CSV = ("temp_k", "rate_q_per_s")
Q_SERIES_CSV = ("temp_k", "q_int")
PARAMS_CSV = ("temp_k", "f_r_hz", "q_int", "q_ext")
FIELD_MAP_CSV = ("x_m", "y_m", "z_m", "Bpar_re_T", "Bpar_im_T", "Bperp_T")
TRANSECT_CSV = ("x_m", "Bpar_re_T", "Bpar_im_T")


# --- Touchstone -------------------------------------------------------------------------

def parse_touchstone(text: str, path=None) -> FrequencyTrace:
    """Parse a one-port Touchstone v1 document into a complex trace."""
    unit, fmt, param, seen_option = "ghz", "ma", "s", False
    freqs, values = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if seen_option:
                continue  # only the first option line counts
            seen_option = True
            tokens = line[1:].lower().split()
            i = 0
            while i < len(tokens):
                tok = tokens[i]
                if tok in FREQ_UNITS:
                    unit = tok
                elif tok in ("ri", "ma", "db"):
                    fmt = tok
                elif tok in ("s", "y", "z", "h", "g"):
                    param = tok
                elif tok == "r":
                    i += 1
                    if i >= len(tokens):
                        raise ParseError("reference resistance missing after 'R'", path, lineno)
                    try:
                        float(tokens[i])
                    except ValueError:
                        raise ParseError(f"bad reference resistance {tokens[i]!r}", path, lineno) from None
                else:
                    raise ParseError(f"unknown option {tok!r}", path, lineno)
                i += 1
            if param != "s":
                raise ParseError(f"only S-parameters are supported, got {param.upper()}", path, lineno)
            continue
        if line.startswith("["):
            raise ParseError("Touchstone v2 keywords are not supported", path, lineno)
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 3 numbers for a one-port line, got {len(parts)}", path, lineno)
        try:
            f, a, b = (float(p) for p in parts)
        except ValueError:
            raise ParseError(f"non-numeric data {line!r}", path, lineno) from None
        if fmt == "ri":
            v = complex(a, b)
        elif fmt == "ma":
            v = a * complex(math.cos(math.radians(b)), math.sin(math.radians(b)))
        else:
            v = 10 ** (a / 20) * complex(math.cos(math.radians(b)), math.sin(math.radians(b)))
        if freqs and f * FREQ_UNITS[unit] <= freqs[-1]:
            raise ParseError("frequencies must be strictly increasing", path, lineno)
        freqs.append(f * FREQ_UNITS[unit])
        values.append(v)
    if not freqs:
        raise ParseError("no data lines", path)
    return FrequencyTrace(np.array(freqs), np.array(values), "complex")


def read_touchstone(path) -> FrequencyTrace:
    path = Path(path)
    return parse_touchstone(path.read_text(), path)


def format_touchstone(trace: FrequencyTrace, fmt: str = "ri", z_ref: float = 50.0) -> str:
    """One-port Touchstone text at Hz resolution."""
    if trace.kind != "complex":
        raise ValueError("Touchstone output needs a complex trace")
    out = [f"# HZ S {fmt.upper()} R {z_ref!r}"]
    for f, v in zip(trace.frequencies, trace.values):
        if fmt == "ri":
            a, b = v.real, v.imag
        elif fmt == "db":
            a, b = 20 * math.log10(abs(v)), math.degrees(math.atan2(v.imag, v.real))
        else:
            a, b = abs(v), math.degrees(math.atan2(v.imag, v.real))
        out.append(f"{float(f)!r} {float(a)!r} {float(b)!r}")
    return "\n".join(out) + "\n"


# --- CSV --------------------------------------------------------------------------------

def _read_csv(text: str, columns: tuple[str, ...], path=None) -> np.ndarray:
    reader = csv.reader(io.StringIO(text))
    header = None
    rows = []
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if header is None:
            header = cells
            if tuple(header) != columns:
                raise ParseError(f"expected header {','.join(columns)}, got {','.join(header)}",
                                 path, lineno)
            continue
        if len(cells) != len(columns):
            raise ParseError(f"expected {len(columns)} columns, got {len(cells)}", path, lineno)
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise ParseError(f"non-numeric value in {row!r}", path, lineno) from None
    if header is None:
        raise ParseError("empty file", path)
    if not rows:
        raise ParseError("no data rows", path)
    return np.array(rows, dtype=float)


def _write_csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def _to_scaled(v: float, exp: int) -> str:
    """Shortest decimal for ``v * 10**exp`` that :func:`_from_scaled` maps back to ``v``."""
    v = float(v)
    if v == 0 or not math.isfinite(v):
        return repr(v * 10.0 ** exp)
    exact = Decimal(v).scaleb(exp)
    for digits in range(15, 40):
        text = format(exact, f".{digits}g")
        if _from_scaled(text, exp) == v:
            return text
    return format(exact, "f")


def _from_scaled(text: str, exp: int) -> float:
    return float(Decimal(text).scaleb(-exp))


def _scaled_column(text_rows, col, exp):
    return np.array([_from_scaled(r[col], exp) for r in text_rows])


def parse_s11_csv(text: str, path=None, temperature=None) -> FrequencyTrace:
    data = _read_csv(text, S11_CSV, path)
    if np.any(np.diff(data[:, 0]) <= 0):
        raise ParseError("frequencies must be strictly increasing", path)
    return FrequencyTrace(data[:, 0], data[:, 1], "db", temperature)


def format_s11_csv(trace: FrequencyTrace) -> str:
    db = trace.to_db()
    return _write_csv(S11_CSV, zip(db.frequencies, db.values))


def read_trace(path, temperature=None) -> FrequencyTrace:
    """Dispatch on suffix: ``.s1p`` is Touchstone, anything else the dB CSV."""
    path = Path(path)
    if path.suffix.lower() == ".s1p":
        trace = read_touchstone(path)
        trace.temperature = temperature
        return trace
    return parse_s11_csv(path.read_text(), path, temperature)


def parse_profile_csv(text: str, path=None) -> FieldProfile:
    """Profile in SI units; um columns are rescaled exactly in decimal."""
    data = _read_csv(text, PROFILE_CSV, path)
    rows = [r for r in csv.reader(io.StringIO(text))
            if r and any(c.strip() for c in r) and not r[0].lstrip().startswith("#")][1:]
    x = _scaled_column([[c.strip() for c in r] for r in rows], 0, 6)
    b = _scaled_column([[c.strip() for c in r] for r in rows], 1, 6)
    power = data[:, 2]
    if np.unique(power).size != 1:
        # bring every row to the first row's power before building the profile
        b = b * np.sqrt(power[0] / power)
    return FieldProfile(x, b, float(power[0]))


def format_profile_csv(profile: FieldProfile) -> str:
    buf = io.StringIO()
    buf.write(",".join(PROFILE_CSV) + "\n")
    for x, b in zip(profile.x, profile.b):
        buf.write(f"{_to_scaled(x, 6)},{_to_scaled(b, 6)},{float(profile.power_watts)!r}\n")
    return buf.getvalue()


def parse_heating_csv(text: str, path=None) -> list[tuple[float, float]]:
    return [tuple(r) for r in _read_csv(text, HEATING_CSV, path).tolist()]


def format_heating_csv(samples) -> str:
    return _write_csv(HEATING_CSV, samples)


def parse_q_series_csv(text: str, path=None) -> list[tuple[float, float]]:
    return [tuple(r) for r in _read_csv(text, Q_SERIES_CSV, path).tolist()]


def format_q_series_csv(series) -> str:
    return _write_csv(Q_SERIES_CSV, series)


def parse_params_csv(text: str, path=None):
    from .fitting.params import ResonatorParams
    out = []
    for lineno, (t, f, qi, qe) in enumerate(_read_csv(text, PARAMS_CSV, path).tolist(), start=2):
        try:
            out.append((t, ResonatorParams(f, qi, qe)))
        except ValueError as exc:
            raise ParseError(str(exc), path, lineno) from None
    return out


def format_params_csv(params_by_temperature) -> str:
    return _write_csv(PARAMS_CSV, ((t, p.f_r, p.q_int, p.q_ext) for t, p in params_by_temperature))


def format_field_map_csv(fmap: FieldMap) -> str:
    bp = fmap.b_par
    rows = np.column_stack([fmap.positions, bp.real, bp.imag, fmap.b_perp])
    return _write_csv(FIELD_MAP_CSV, rows)


def parse_field_map_csv(text: str, path=None) -> np.ndarray:
    """Rows of ``x, y, z, Re B_par, Im B_par, B_perp`` as an (N, 6) array."""
    return _read_csv(text, FIELD_MAP_CSV, path)


def format_transect_csv(x, b_par) -> str:
    b_par = np.asarray(b_par, dtype=complex)
    return _write_csv(TRANSECT_CSV, zip(np.asarray(x, dtype=float), b_par.real, b_par.imag))


def parse_transect_csv(text: str, path=None) -> tuple[np.ndarray, np.ndarray]:
    data = _read_csv(text, TRANSECT_CSV, path)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


# --- layout JSON ------------------------------------------------------------------------

def load_layout(path) -> WireLayout:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    for key in ("segments",):
        if key not in data:
            raise ParseError(f"layout is missing {key!r}", path)
    unknown = set(data) - {"name", "power_watts", "segments"}
    if unknown:
        raise ParseError(f"unknown layout keys {sorted(unknown)}", path)
    return WireLayout.from_dict(data)


def dump_layout(layout: WireLayout) -> str:
    return json.dumps(layout.to_dict(), indent=2, sort_keys=True) + "\n"
