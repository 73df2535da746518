"""Acceptance gates for the whole package.

Each criterion is a ``check_*`` function returning a list of
``(label, ok, detail)`` rows. Under pytest every criterion prints one
``[PASS]``/``[FAIL]`` line and asserts; run as a script it prints the same
lines and exits non-zero on any failure::

    python tests/test_acceptance.py
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from scipy import constants as sc

sys.path.insert(0, str(Path(__file__).parent))

from mwtrap import fields, txline  # noqa: E402
from mwtrap.fields import TwoWireModel, WireLayout, WireSegment, bfield_at, two_wire_field  # noqa: E402
from mwtrap.fitting import (  # noqa: E402
    FieldProfile,
    FrequencyTrace,
    ResonatorParams,
    compare_scaling_models,
    fit_field_profile,
    fit_power_law,
    fit_s11,
    gradient_scaling_prediction,
    profile_model,
    resistivity_from_q,
    s11_model,
)
from mwtrap.lumped import LumpedResonator, frequency_shift_report, loaded_resonance  # noqa: E402
from oracles import CA43_MASS, lamb_dicke_direct, scan_minimum, scan_pole, two_wire_bpar  # noqa: E402


def timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


def row(label, ok, detail=""):
    return (label, bool(ok), detail)


# --- criteria ---------------------------------------------------------------------------

def check_wavelength():
    lam, dt = timed(txline.guided_wavelength, 3.12e9, 5.5)
    return [
        row("lambda = 4.10 cm", round(lam * 100, 2) == 4.10, f"lambda={lam * 100:.4f} cm"),
        row("within 3 % of 4 cm", abs(lam / 0.04 - 1) <= 0.03, f"dev={abs(lam / 0.04 - 1):.3%}"),
        row("instant", dt < 0.01, f"{dt * 1e3:.2f} ms"),
    ]


def check_mismatch():
    def go():
        return txline.mismatch_reflection(50.0, txline.shunt_load(200.0, 1.5e-12, 3.1e9))
    g2, dt = timed(go)
    return [row("|Gamma|^2 in [0.68, 0.76]", 0.68 <= g2 <= 0.76, f"|Gamma|^2={g2:.4f}"),
            row("instant", dt < 0.01, f"{dt * 1e3:.2f} ms")]


def check_lamb_dicke():
    out = []
    t = time.perf_counter()
    measured = fields.lamb_dicke(39.4, 223.4e-6, CA43_MASS, 5.5e6)
    simulated = fields.lamb_dicke(72.0, 108e-6, CA43_MASS, 5.5e6)
    dt = time.perf_counter() - t
    out.append(row("measured eta in [7.5, 8.7]e-4", 7.5e-4 <= measured <= 8.7e-4, f"eta={measured:.4e}"))
    out.append(row("simulated eta in [2.8, 3.4]e-3", 2.8e-3 <= simulated <= 3.4e-3,
                   f"eta={simulated:.4e}"))
    ref = (lamb_dicke_direct(39.4, 223.4e-6, CA43_MASS, 5.5e6),
           lamb_dicke_direct(72.0, 108e-6, CA43_MASS, 5.5e6))
    out.append(row("matches direct formula", math.isclose(measured, ref[0], rel_tol=1e-12)
                   and math.isclose(simulated, ref[1], rel_tol=1e-12)))
    out.append(row("instant", dt < 0.01, f"{dt * 1e3:.2f} ms"))
    return out


def check_heating():
    fit, dt = timed(fit_power_law, [(300, 350), (77, 230), (21, 200)])
    return [row("beta = 0.21 +- 0.05", abs(fit.beta - 0.21) <= 0.05, f"beta={fit.beta:.4f}"),
            row("instant", dt < 0.01, f"{dt * 1e3:.2f} ms")]


def acceptance_circuits():
    ref = LumpedResonator.reference_circuit()
    return {
        "reference": ref,
        "cc_plus": replace(ref, c_couple=ref.c_couple * 1.015),
        "cc_minus": replace(ref, c_couple=ref.c_couple * 0.985),
        "r_times_5": replace(ref, r_int=ref.r_int * 5),
    }


def check_shift_budget():
    ref = LumpedResonator.reference_circuit()
    rep, dt = timed(frequency_shift_report, ref, eps_fraction=-0.015, r_factor=5.0,
                    contraction=3e-3, f_meas_room=3.1e9)
    mhz = {k: v / 1e6 for k, v in rep.as_dict().items()}
    out = [
        row("C_c +-1.5 % component 8 +- 3 MHz", abs(abs(rep.coupling) - 8e6) <= 3e6,
            f"{mhz['coupling_hz']:.2f} MHz"),
        row("R x5 component 11 +- 4 MHz", abs(rep.resistance - 11e6) <= 4e6,
            f"{mhz['resistance_hz']:.2f} MHz"),
        row("dielectric component 25 +- 3 MHz", abs(rep.dielectric - 25e6) <= 3e6,
            f"{mhz['dielectric_hz']:.2f} MHz"),
        row("contraction component <= 10 MHz", abs(rep.contraction) <= 10e6,
            f"{mhz['contraction_hz']:.2f} MHz"),
        row("total 54 +- 15 MHz", abs(rep.total - 54e6) <= 15e6, f"{rep.total / 1e6:.2f} MHz"),
        row("runtime < 1 s", dt < 1.0, f"{dt * 1e3:.1f} ms"),
    ]
    for name, c in acceptance_circuits().items():
        res = loaded_resonance(c)
        f_scan, _, step = scan_pole(c.l_ind, c.c_cap, c.r_int, c.c_couple, c.z_feed)
        out.append(row(f"pole vs scan oracle ({name})", abs(res.f_r - f_scan) <= step,
                       f"|df|={abs(res.f_r - f_scan) / 1e3:.2f} kHz, step={step / 1e3:.0f} kHz"))
    return out


def check_loaded_resonance():
    c = LumpedResonator.reference_circuit()
    res, dt = timed(loaded_resonance, c)
    f_scan, _, step = scan_pole(c.l_ind, c.c_cap, c.r_int, c.c_couple, c.z_feed)
    return [
        row("f_r in [2.75, 2.95] GHz", 2.75e9 <= res.f_r <= 2.95e9, f"f_r={res.f_r / 1e9:.4f} GHz"),
        row("scan oracle in band and within one step",
            2.75e9 <= f_scan <= 2.95e9 and abs(res.f_r - f_scan) <= step,
            f"f_scan={f_scan / 1e9:.4f} GHz"),
        row("runtime < 1 s", dt < 1.0, f"{dt * 1e3:.2f} ms"),
    ]


def check_null_shift():
    window = (-5e-6, 10e-6)
    t = time.perf_counter()
    lossless = fields.find_field_minimum(lambda x: two_wire_field(TwoWireModel(), x), window)
    lossy = fields.find_field_minimum(lambda x: two_wire_field(TwoWireModel(q_tot=10.0), x), window)
    dt = time.perf_counter() - t
    x_scan, _, _, mag = scan_minimum(two_wire_bpar)
    peak = mag.max()
    return [
        row("lossless true null < 1e-12 peak", lossless.b_min < 1e-12 * peak,
            f"|B|/peak={lossless.b_min / peak:.1e}"),
        row("null displaced to +x, matches ~1.7 um scan",
            lossless.x0 > 0 and abs(lossless.x0 - x_scan) <= 1e-9,
            f"x0={lossless.x0 * 1e6:.4f} um, scan={x_scan * 1e6:.3f} um"),
        row("Q_tot=10 minimum strictly positive", lossy.b_min > 0, f"b_min={lossy.b_min:.3e} T"),
        row("Q_tot=10 minimum moves < 0.3 um", abs(lossy.x0 - lossless.x0) < 0.3e-6,
            f"dx={(lossy.x0 - lossless.x0) * 1e9:.2f} nm"),
        row("runtime < 1 s", dt < 1.0, f"{dt * 1e3:.1f} ms"),
    ]


S11_TRUTH = ResonatorParams.from_total(2.9e9, 8.0, 17.0)
S11_AFFINE = (0.95, -0.05 / (2 * math.pi * 2.9e9))
PROFILE_TRUTH = {"gradient": 39.4, "x0": 3e-6, "b_min": 150e-6}


def _s11_trace(noise, rng, kind):
    f = np.linspace(S11_TRUTH.f_r - 1e9, S11_TRUTH.f_r + 1e9, 801)
    s = s11_model(f, S11_TRUTH, S11_AFFINE)
    if noise:
        s = s * (1 + noise * (rng.normal(size=f.size) + 1j * rng.normal(size=f.size)) / math.sqrt(2))
    tr = FrequencyTrace(f, s, "complex")
    return tr if kind == "complex" else tr.to_db()


def _profile(noise, rng):
    x = np.linspace(-12e-6, 18e-6, 41)
    b = profile_model(x, PROFILE_TRUTH["gradient"], PROFILE_TRUTH["x0"], PROFILE_TRUTH["b_min"])
    if noise:
        b = b * (1 + noise * rng.normal(size=x.size))
    return FieldProfile(x, np.abs(b))


def _rel(a, b):
    return abs(a / b - 1)


def check_fit_roundtrips(trials=200, seed=20240):
    rng = np.random.default_rng(seed)
    t = time.perf_counter()
    s11_in3, s11_in3pc, s11_worst = 0, 0, 0.0
    for k in range(trials):
        kind = "complex" if k % 2 == 0 else "db"
        res = fit_s11(_s11_trace(rng.uniform(0.005, 0.01), rng, kind))
        p, sd = res.params, res.stderr
        err = {"f_r_hz": p.f_r - S11_TRUTH.f_r, "q_tot": p.q_tot - S11_TRUTH.q_tot,
               "q_ext": p.q_ext - S11_TRUTH.q_ext}
        s11_in3 += all(abs(err[key]) <= 3 * sd[key] for key in err)
        worst = max(_rel(p.f_r, S11_TRUTH.f_r), _rel(p.q_tot, S11_TRUTH.q_tot),
                    _rel(p.q_ext, S11_TRUTH.q_ext))
        s11_in3pc += worst <= 0.03
        s11_worst = max(s11_worst, worst)
    pr_in3, pr_in3pc, pr_worst = 0, 0, 0.0
    for _ in range(trials):
        res = fit_field_profile(_profile(rng.uniform(0.005, 0.01), rng))
        got = {"gradient_t_per_m": res.gradient, "x0_m": res.x0, "b_min_t": res.b_min}
        truth = dict(zip(got, PROFILE_TRUTH.values()))
        pr_in3 += all(abs(got[key] - truth[key]) <= 3 * res.stderr[key] for key in got)
        worst = max(_rel(got[key], truth[key]) for key in got)
        pr_in3pc += worst <= 0.03
        pr_worst = max(pr_worst, worst)
    exact = []
    for kind in ("complex", "db"):
        p = fit_s11(_s11_trace(0.0, rng, kind)).params
        exact.append(max(_rel(p.f_r, S11_TRUTH.f_r), _rel(p.q_tot, S11_TRUTH.q_tot),
                         _rel(p.q_ext, S11_TRUTH.q_ext), _rel(p.q_int, S11_TRUTH.q_int)))
    pf = fit_field_profile(_profile(0.0, rng))
    exact.append(max(_rel(pf.gradient, 39.4), _rel(pf.x0, 3e-6), _rel(pf.b_min, 150e-6)))
    dt = time.perf_counter() - t
    return [
        row("S11: >= 95 % within 3 sigma", s11_in3 >= 0.95 * trials, f"{s11_in3}/{trials}"),
        row("S11: recovery within 3 %", s11_in3pc == trials,
            f"{s11_in3pc}/{trials}, worst {s11_worst:.2%}"),
        row("profile: >= 95 % within 3 sigma", pr_in3 >= 0.95 * trials, f"{pr_in3}/{trials}"),
        row("profile: recovery within 3 %", pr_in3pc == trials,
            f"{pr_in3pc}/{trials}, worst {pr_worst:.2%}"),
        row("noiseless recovery < 1e-6", max(exact) < 1e-6, f"worst rel={max(exact):.1e}"),
        row("runtime < 30 s", dt < 30, f"{dt:.2f} s"),
    ]


def check_resistivity():
    t = time.perf_counter()
    q = {300.0: 12.0, 80.0: 12.0 * 22 / 13, 20.0: 12.0 * 22 / 6.5}
    series = resistivity_from_q(q.items())
    params = [(temp, ResonatorParams(f, q_int, 17.0))
              for temp, f, q_int in ((300.0, 2.80e9, q[300.0]), (80.0, 2.86e9, q[80.0]),
                                     (20.0, 2.935e9, q[20.0]))]
    ratios = {m: dict(r) for m, r in compare_scaling_models(params).items()}
    dt = time.perf_counter() - t
    rho = [series.rho_at(temp) for temp in (300.0, 80.0, 20.0)]
    out = [row("rho = 22/13/6.5 nOhm m exactly", rho == [22e-9, 13e-9, 6.5e-9],
               "/".join(f"{r * 1e9:g}" for r in rho))]
    default = dict(gradient_scaling_prediction(params))
    out.append(row("ratios increase on cooling (all models)",
                   all(r[300.0] == 1.0 and 1 < r[80.0] < r[20.0] for r in ratios.values())
                   and default == ratios["coupled_energy"]))
    # reported only: the reference ratios depend on the scaling model chosen
    report = ", ".join(f"{m} {r[80.0]:.2f}/{r[20.0]:.2f}" for m, r in ratios.items())
    out.append(row("reported vs 1.45/1.95 (not gated)", True, report))
    out.append(row("instant", dt < 0.05, f"{dt * 1e3:.2f} ms"))
    return out


def check_biot_savart():
    mu0 = sc.mu_0
    r = 10e-6
    h = 1e4 * r
    wire = WireLayout([WireSegment((0, 0, -h), (0, 0, h), 2.5)])
    b = np.linalg.norm(bfield_at(wire, [[r, 0, 0]]).b[0])
    inf_err = abs(b / (mu0 * 2.5 / (2 * math.pi * r)) - 1)

    mirror = WireLayout([WireSegment((-15e-6, 0, 1e-3), (-15e-6, 0, -1e-3), 1.0),
                         WireSegment((15e-6, 0, -1e-3), (15e-6, 0, 1e-3), 1.0)])
    peak = np.abs(bfield_at(mirror, fields.transect_grid(40e-6, (-60e-6, 60e-6), 241)).b_par).max()
    null = abs(bfield_at(mirror, [[0.0, 40e-6, 0.0]]).b_par[0])

    rng = np.random.default_rng(7)
    segs = []
    for _ in range(6):
        a = rng.normal(size=3) * 1e-4
        segs.append(WireSegment(tuple(a), tuple(a + rng.normal(size=3) * 1e-4),
                                complex(rng.normal(), rng.normal())))
    lay = WireLayout(segs)
    pts = rng.normal(size=(64, 3)) * 1e-4
    base = bfield_at(lay, pts).b
    alpha = 0.7 - 2.3j
    lin = np.abs(bfield_at(lay.scaled(alpha), pts).b - alpha * base).max() / np.abs(alpha * base).max()
    sup = np.abs(sum(bfield_at(WireLayout([s]), pts).b for s in segs) - base).max() / np.abs(base).max()

    layout = TwoWireModel().to_layout()
    grid = fields.plane_grid(40e-6, nx=1000, nz=1000)
    bfield_at(layout, grid[:10])  # compile outside the timed region
    fmap, dt = timed(bfield_at, layout, grid)
    return [
        row("infinite-wire limit < 1e-7", inf_err < 1e-7, f"rel={inf_err:.1e}"),
        row("symmetry null < 1e-12 peak", null <= 1e-12 * peak, f"|B_par|/peak={null / peak:.1e}"),
        row("linearity to machine precision", lin < 1e-14, f"rel={lin:.1e}"),
        row("superposition to machine precision", sup < 1e-14, f"rel={sup:.1e}"),
        row("1e6-point map < 5 s", len(fmap) == 10**6 and dt < 5.0, f"{dt:.2f} s"),
    ]


CRITERIA = {
    "AC1 guided wavelength": check_wavelength,
    "AC2 mismatch reflection": check_mismatch,
    "AC3 Lamb-Dicke parameter": check_lamb_dicke,
    "AC4 heating-rate exponent": check_heating,
    "AC5 lumped shift budget": check_shift_budget,
    "AC6 loaded resonance band": check_loaded_resonance,
    "AC7 two-wire null shift": check_null_shift,
    "AC8 fit roundtrips": check_fit_roundtrips,
    "AC9 resistivity chain": check_resistivity,
    "AC10 Biot-Savart engine": check_biot_savart,
}


def summarize(name, rows) -> tuple[bool, str]:
    ok = all(r[1] for r in rows)
    parts = "; ".join(f"{label}{': ' + detail if detail else ''}{'' if good else ' [x]'}"
                      for label, good, detail in rows)
    return ok, f"[{'PASS' if ok else 'FAIL'}] {name} | {parts}"


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name, capsys):
    ok, line = summarize(name, CRITERIA[name]())
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for name, check in CRITERIA.items():
        ok, line = summarize(name, check())
        print(line)
        failed += not ok
    sys.exit(1 if failed else 0)
