"""Reflection (S11) model of a capacitively coupled resonator and its fit.

The device reflection is

    S11_dev(w) = 1 - (2 Q_tot / Q_ext) / (1 - 2j Q_tot (w / w_r - 1))

and the measured trace is ``(A + B w) S11_dev`` with the affine factor
absorbing cable and connector transmission. ``B`` is per rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, FitError, SeedError
from .lm import levenberg_marquardt
from .params import ResonatorParams

MIN_POINTS = 16


@dataclass
class FrequencyTrace:
    """Sampled reflection vs frequency.

    ``values`` are complex for ``kind="complex"`` and dB magnitudes for
    ``kind="db"``.
    """

    frequencies: np.ndarray
    values: np.ndarray
    kind: str = "complex"
    temperature: float | None = None

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        if self.kind == "complex":
            self.values = np.asarray(self.values, dtype=complex)
        elif self.kind == "db":
            self.values = np.asarray(self.values, dtype=float)
        else:
            raise DomainError(f"unknown trace kind {self.kind!r}")
        if self.frequencies.shape != self.values.shape or self.frequencies.ndim != 1:
            raise DomainError("frequencies and values must be 1-D and equally long")
        if np.any(np.diff(self.frequencies) <= 0):
            raise DomainError("frequencies must be strictly increasing")

    def __len__(self) -> int:
        return self.frequencies.size

    @property
    def magnitude(self) -> np.ndarray:
        if self.kind == "db":
            return 10 ** (self.values / 20)
        return np.abs(self.values)

    def to_db(self) -> "FrequencyTrace":
        if self.kind == "db":
            return self
        return FrequencyTrace(self.frequencies, 20 * np.log10(np.abs(self.values)), "db",
                              self.temperature)


def s11_device(f, params: ResonatorParams):
    w = 2 * np.pi * np.asarray(f, dtype=float)
    return _s11_dev(w, params.w_r, params.q_tot, params.q_ext)


def _s11_dev(w, w_r, q_tot, q_ext):
    return 1 - (2 * q_tot / q_ext) / (1 - 2j * q_tot * (w / w_r - 1))


def s11_model(f, params: ResonatorParams, affine: tuple[complex, complex] = (1.0, 0.0)):
    """Measured-plane reflection ``(A + B 2 pi f) S11_dev(f)``."""
    a, b = affine
    w = 2 * np.pi * np.asarray(f, dtype=float)
    out = (a + b * w) * _s11_dev(w, params.w_r, params.q_tot, params.q_ext)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def to_db(s):
    return 20 * np.log10(np.abs(s))


@dataclass
class S11FitResult:
    params: ResonatorParams
    affine: tuple[complex, complex]
    residual: float
    stderr: dict[str, float]
    covariance: np.ndarray
    iterations: int
    kind: str
    warnings: list[str] = field(default_factory=list)

    def model(self, f):
        return s11_model(f, self.params, self.affine)

    def as_dict(self) -> dict:
        a, b = self.affine
        out = self.params.as_dict()
        out.update({
            "A_re": complex(a).real, "A_im": complex(a).imag,
            "B_re_s": complex(b).real, "B_im_s": complex(b).imag,
            "residual_rms": self.residual,
            "stderr": dict(self.stderr),
            "iterations": self.iterations,
            "kind": self.kind,
        })
        return out


def _seed(f, mag, w_ref, coupling):
    """Seeds (x_r, q_tot, q_ext, |A|) from the magnitude trace alone."""
    n = mag.size
    i_min = int(np.argmin(mag))
    edge = max(2, n // 50)
    if i_min < edge or i_min >= n - edge:
        raise SeedError("no interior minimum in the trace; is the resonance in the span?")
    k_edge = max(1, n // 10)
    level = float(np.median(np.concatenate([mag[:k_edge], mag[-k_edge:]])))
    f_r = f[i_min]
    q_tot = None
    for _ in range(2):
        p = 1 - (mag / level) ** 2
        half = p[i_min] / 2
        left = np.flatnonzero(p[:i_min] < half)
        right = np.flatnonzero(p[i_min:] < half)
        widths = []
        if left.size:
            j = left[-1]
            fl = np.interp(half, [p[j + 1], p[j]], [f[j + 1], f[j]])
            widths.append(f_r - fl)
        if right.size:
            j = i_min + right[0]
            fh = np.interp(half, [p[j], p[j - 1]], [f[j], f[j - 1]])
            widths.append(fh - f_r)
        if not widths:
            break
        q_tot = f_r / (2 * float(np.mean(widths)))
        # correct the edge level for the Lorentzian tail at the span boundary
        depth = min(mag[i_min] / level, 0.999)
        k = 1 - depth if coupling == "under" else 1 + depth
        tail = np.abs(_s11_dev(2 * np.pi * f[[0, -1]], 2 * np.pi * f_r, q_tot, 2 * q_tot / k))
        level = float(np.median(np.concatenate([mag[:k_edge], mag[-k_edge:]]))) / float(np.mean(tail))
    if q_tot is None:
        raise SeedError("could not measure a half-power width around the minimum")
    depth = min(mag[i_min] / level, 0.999)
    k = 1 - depth if coupling == "under" else 1 + depth
    return f_r * 2 * np.pi / w_ref, q_tot, 2 * q_tot / k, level


def _affine_lstsq(w, s, w_r, q_tot, q_ext, w_ref):
    """Linear least squares for complex (A, B*w_ref) given the resonance."""
    dev = _s11_dev(w, w_r, q_tot, q_ext)
    M = np.column_stack([dev, dev * (w / w_ref)])
    coef = np.linalg.lstsq(M, s, rcond=None)[0]
    return coef[0], coef[1]


def fit_s11(trace: FrequencyTrace, init: dict | None = None, coupling: str = "under") -> S11FitResult:
    """Least-squares fit of the resonator model to a reflection trace.

    Parameters are ``(f_r, q_tot, q_ext, A, B)``; ``q_int`` follows from the
    harmonic identity. Complex traces fit complex ``A`` and ``B`` on real and
    imaginary residuals; dB traces fit real ``A`` and ``B`` on dB residuals.

    A magnitude-only trace cannot tell under- from over-coupling (the two
    solutions with ``2 q_tot / q_ext = 1 +- depth`` are indistinguishable),
    so ``coupling`` chooses the branch for dB data. For complex data both
    branches are tried from the seeds and the better fit kept.

    ``init`` may override any of ``f_r``, ``q_tot``, ``q_ext``, ``A``, ``B``.
    """
    if len(trace) < MIN_POINTS:
        raise DomainError(f"need at least {MIN_POINTS} points, got {len(trace)}")
    if coupling not in ("under", "over"):
        raise DomainError("coupling must be 'under' or 'over'")
    f = trace.frequencies
    w = 2 * np.pi * f
    w_ref = float(np.mean(w))
    mag = trace.magnitude
    init = dict(init or {})

    branches = [coupling] if trace.kind == "db" else ["under", "over"]
    best = None
    for branch in branches:
        x_r, q_tot, q_ext, level = _seed(f, mag, w_ref, branch)
        if "f_r" in init:
            x_r = 2 * np.pi * init["f_r"] / w_ref
        q_tot = init.get("q_tot", q_tot)
        q_ext = init.get("q_ext", q_ext)
        if trace.kind == "complex":
            a, bt = _affine_lstsq(w, trace.values, x_r * w_ref, q_tot, q_ext, w_ref)
        else:
            a, bt = level, 0.0
        if "A" in init:
            a = init["A"]
        if "B" in init:
            bt = init["B"] * w_ref
        try:
            res, x = _run(trace, w, w_ref, x_r, q_tot, q_ext, a, bt)
        except FitError:
            if best is None and branch == branches[-1]:
                raise
            continue
        if best is None or res.cost < best[0].cost:
            best = (res, x)
    res, x = best
    return _package(trace, w, w_ref, res, x, coupling)


def _unpack(x, kind):
    if kind == "complex":
        return x[0], x[1], x[2], complex(x[3], x[4]), complex(x[5], x[6])
    return x[0], x[1], x[2], x[3], x[4]


def _residual_fn(trace, w, w_ref):
    kind = trace.kind
    data = trace.values

    def fun(x):
        x_r, q_tot, q_ext, a, bt = _unpack(x, kind)
        model = (a + bt * (w / w_ref)) * _s11_dev(w, x_r * w_ref, q_tot, q_ext)
        if kind == "complex":
            d = model - data
            return np.concatenate([d.real, d.imag])
        with np.errstate(divide="ignore"):
            return 20 * np.log10(np.abs(model)) - data
    return fun


def _run(trace, w, w_ref, x_r, q_tot, q_ext, a, bt):
    if trace.kind == "complex":
        a, bt = complex(a), complex(bt)
        x0 = [x_r, q_tot, q_ext, a.real, a.imag, bt.real, bt.imag]
    else:
        x0 = [x_r, q_tot, q_ext, float(np.real(a)), float(np.real(bt))]
    fun = _residual_fn(trace, w, w_ref)
    res = levenberg_marquardt(fun, x0)
    return res, res.x


def _package(trace, w, w_ref, res, x, coupling):
    kind = trace.kind
    warnings = []
    iterations = res.iterations
    x = x.copy()
    x[1] = abs(x[1])
    x[2] = abs(x[2])
    if kind == "db":
        if x[3] < 0:
            x[3], x[4] = -x[3], -x[4]
        k = 2 * x[1] / x[2]
        if (coupling == "under" and k > 1) or (coupling == "over" and k < 1):
            # magnitude-degenerate twin: k -> 2 - k
            x[2] = 2 * x[1] / (2 - k)
        warnings.append("coupling regime not identifiable from magnitude data; "
                        f"reported on the {coupling}-coupled branch")
        fun = _residual_fn(trace, w, w_ref)
        res = levenberg_marquardt(fun, x, max_iter=50)
        iterations += res.iterations
        x = res.x
    x_r, q_tot, q_ext, a, bt = _unpack(x, kind)
    if not q_ext > q_tot:
        raise FitError(f"fit gave q_ext={q_ext:.4g} <= q_tot={q_tot:.4g}; no positive q_int",
                       last_iterate=x, history=res.history)
    params = ResonatorParams.from_total(x_r * w_ref / (2 * np.pi), q_tot, q_ext)

    cov = res.covariance()
    sd = np.sqrt(np.clip(np.diag(cov), 0, None))
    q_int = params.q_int
    grad_qint = np.zeros(x.size)
    grad_qint[1] = q_int ** 2 / q_tot ** 2
    grad_qint[2] = -q_int ** 2 / q_ext ** 2
    stderr = {
        "f_r_hz": sd[0] * w_ref / (2 * np.pi),
        "q_tot": sd[1],
        "q_ext": sd[2],
        "q_int": float(math.sqrt(max(grad_qint @ cov @ grad_qint, 0.0))),
    }
    if kind == "complex":
        stderr.update({"A_re": sd[3], "A_im": sd[4], "B_re_s": sd[5] / w_ref, "B_im_s": sd[6] / w_ref})
    else:
        stderr.update({"A_re": sd[3], "B_re_s": sd[4] / w_ref})
    stderr = {k: float(v) for k, v in stderr.items()}
    rms = float(math.sqrt(res.cost / res.residual.size))
    return S11FitResult(params, (a, bt / w_ref), rms, stderr, cov, iterations, kind, warnings)
