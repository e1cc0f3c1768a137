"""Resonance string asymptotics for the edge-transfer model.

When a surface has a unique longest closed geodesic (an edge and its
reversal), the large-Re zeros of det(I - M) organise into a string

    Im(lam) = -(n-1)/(2 L0) * log|lam| + C_im + o(1),
    Re(lam) = C_re + (pi / L0) * k + o(1),  k integer,

with constants set by the product of the two diffraction couplings
around the maximal cycle.  This module predicts individual string zeros
by Newton on the quantization condition, fits scans against the law,
and counts zeros in log-curve bands via the argument principle.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, NoConvergence
from . import tolerances as tol_mod
from .geometry import CheckResult, ConeSurfaceSpec, LengthScales, length_scales
from .monodromy import coupling_coefficient, char_function
from .resonances import ResonanceSet, winding_number

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LadderModel:
    """One-cycle reduction of the characteristic function.

    det(I - M) ~ 1 - c_prod * lam^{-(n-1)} * exp(2i*lam*L0) when a single
    edge pair dominates.  All string constants derive from (n, L0, c_prod).
    """
    n: int
    L0: float
    c_prod: complex

    @property
    def spacing(self) -> float:
        return math.pi / self.L0

    @property
    def slope(self) -> float:
        return -(self.n - 1) / (2.0 * self.L0)

    @property
    def c_im(self) -> float:
        return math.log(abs(self.c_prod)) / (2.0 * self.L0)

    @property
    def c_re(self) -> float:
        # real coset, reduced into [0, spacing)
        raw = -cmath.phase(self.c_prod) / (2.0 * self.L0)
        return raw % self.spacing


def ladder_model_from_spec(spec: ConeSurfaceSpec,
                           scales: LengthScales | None = None) -> LadderModel:
    """Build the one-cycle model from the unique maximal edge pair.

    Raises ValueError when the maximal geodesic is not unique (more than
    one unoriented edge attains L0), since no single cycle dominates.
    """
    if scales is None:
        scales = length_scales(spec)
    maximal = set(scales.maximal_edges)
    if len(maximal) != 2:
        raise ValueError(
            f"maximal geodesic is not unique: {sorted(maximal)} all attain L0"
        )
    e_id = sorted(maximal)[0]
    e = spec.edge(e_id)
    r_id = e.reversal
    if r_id not in maximal:
        raise ValueError("maximal edges are not a reversal pair")
    c1 = coupling_coefficient(spec, r_id, e_id)   # arrive along e, leave as rbar
    c2 = coupling_coefficient(spec, e_id, r_id)
    if c1 * c2 == 0:
        raise ValueError("no diffractive coupling around the maximal cycle")
    return LadderModel(n=spec.dimension, L0=scales.L0, c_prod=c1 * c2)


def predicted_ladder(model: LadderModel, ks,
                     tol: tol_mod.Tolerances = tol_mod.DEFAULT) -> np.ndarray:
    """Exact one-cycle zeros near Re = c_re + spacing*k, by Newton.

    Solves 2i*lam*L0 - (n-1)*Log(lam) + c_log = 2*pi*i*k on the principal
    branch, where c_log is anchored so index k lands in coset k.  Requires
    every requested index to predict Re(lam) > 1.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    x0 = model.c_re + model.spacing * ks
    if np.any(x0 <= 1.0):
        raise ValueError("ladder indices must predict Re(lam) > 1")
    n1 = model.n - 1
    c_log = complex(math.log(abs(model.c_prod)), -2.0 * model.L0 * model.c_re)
    lam = x0 - 1j * (n1 / (2.0 * model.L0)) * np.log(x0)
    target = TWO_PI * 1j * ks
    for _ in range(60):
        g = 2j * lam * model.L0 - n1 * np.log(lam) + c_log - target
        step = g / (2j * model.L0 - n1 / lam)
        lam = lam - step
        # relative step test: g itself carries rounding noise ~ ulp(lam*L0),
        # so an absolute residual floor is unreachable for large lam
        if np.all(np.abs(step) < tol.ladder_newton_tol * (1.0 + np.abs(lam))):
            return lam
    raise NoConvergence("quantization Newton stalled")


def ladder_in_window(model: LadderModel, re_lo: float, re_hi: float,
                     tol: tol_mod.Tolerances = tol_mod.DEFAULT) -> np.ndarray:
    """All predicted string zeros with Re(lam) inside [re_lo, re_hi]."""
    k_lo = math.ceil((re_lo - model.c_re) / model.spacing) - 1
    k_hi = math.floor((re_hi - model.c_re) / model.spacing) + 1
    ks = [k for k in range(k_lo, k_hi + 1)
          if model.c_re + model.spacing * k > 1.0]
    if not ks:
        return np.array([], dtype=complex)
    lams = predicted_ladder(model, np.asarray(ks), tol)
    keep = (lams.real >= re_lo) & (lams.real <= re_hi)
    return lams[keep]


def coset_deviations(lambdas, model: LadderModel) -> np.ndarray:
    """Signed distance of Re(lam) from the nearest predicted coset point."""
    re = np.asarray([z.real for z in np.atleast_1d(lambdas)], dtype=float)
    s = model.spacing
    return (re - model.c_re + 0.5 * s) % s - 0.5 * s


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class FitReport:
    slope: float
    slope_expected: float
    intercept: float            # fitted C_im
    spacing_mean: float
    spacing_expected: float
    c_re_empirical: float       # circular mean of the Re cosets, in [0, spacing)
    residual_rms: float
    count: int
    re_range: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "slope_expected": self.slope_expected,
            "intercept": self.intercept,
            "spacing_mean": self.spacing_mean,
            "spacing_expected": self.spacing_expected,
            "c_re_empirical": self.c_re_empirical,
            "residual_rms": self.residual_rms,
            "count": self.count,
            "re_range": list(self.re_range),
        }

    def to_text(self) -> str:
        lines = [
            f"points fitted        {self.count} over Re in "
            f"[{self.re_range[0]:.3f}, {self.re_range[1]:.3f}]",
            f"log-curve slope      {self.slope: .8f}  "
            f"(expected {self.slope_expected: .8f})",
            f"intercept C_im       {self.intercept: .8f}",
            f"mean spacing         {self.spacing_mean: .8f}  "
            f"(expected {self.spacing_expected: .8f})",
            f"Re coset (circular)  {self.c_re_empirical: .8f}",
            f"residual rms         {self.residual_rms: .3e}",
        ]
        return "\n".join(lines)


def fit_log_curve(lambdas, n: int, L0: float,
                  min_re: float | None = None,
                  tol: tol_mod.Tolerances = tol_mod.DEFAULT) -> FitReport:
    """Least-squares fit of Im(lam) against log|lam|, plus spacing stats.

    Points with Re below min_re (default tol.fit_min_re) are dropped;
    fewer than tol.fit_min_points surviving points raises InsufficientData.
    """
    if min_re is None:
        min_re = tol.fit_min_re
    lam = np.asarray(np.atleast_1d(lambdas), dtype=complex)
    lam = lam[np.argsort(lam.real)]
    lam = lam[lam.real >= min_re]
    if lam.size < tol.fit_min_points:
        raise InsufficientData(
            f"{lam.size} points above Re={min_re}, "
            f"need {tol.fit_min_points}"
        )
    x = np.log(np.abs(lam))
    y = lam.imag
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    spacing_expected = math.pi / L0
    diffs = np.diff(lam.real)
    ok = np.abs(diffs - spacing_expected) < 0.5 * spacing_expected
    if not np.any(ok):
        raise InsufficientData("no consecutive pair at the expected spacing")
    spacing_mean = float(np.mean(diffs[ok]))
    # circular mean of the Re cosets
    ang = TWO_PI * (lam.real % spacing_expected) / spacing_expected
    mean_dir = complex(np.mean(np.cos(ang)), np.mean(np.sin(ang)))
    c_re_emp = (cmath.phase(mean_dir) / TWO_PI * spacing_expected) % spacing_expected
    return FitReport(
        slope=float(slope),
        slope_expected=-(n - 1) / (2.0 * L0),
        intercept=float(intercept),
        spacing_mean=spacing_mean,
        spacing_expected=spacing_expected,
        c_re_empirical=float(c_re_emp),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        count=int(lam.size),
        re_range=(float(lam.real.min()), float(lam.real.max())),
    )


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[CheckResult, ...]
    fit: FitReport
    model: LadderModel

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [c.detail for c in self.checks]
        lines.append("verification " + ("PASSED" if self.passed else "FAILED"))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
            "fit": self.fit.to_dict(),
        }


def _circ_dist(a: float, b: float, period: float) -> float:
    d = (a - b) % period
    return min(d, period - d)


def verify_scan(result: ResonanceSet, model: LadderModel,
                min_re: float | None = None,
                tol: tol_mod.Tolerances = tol_mod.DEFAULT) -> VerificationReport:
    """Check a scan against the string law at standard tolerances."""
    fit = fit_log_curve(result.lambdas(), model.n, model.L0, min_re, tol)
    checks = []

    rel = abs(fit.slope - model.slope) / abs(model.slope)
    checks.append(CheckResult(
        name="log_curve_slope",
        passed=rel <= tol.verify_slope_rel,
        witnesses=(),
        detail=f"slope {fit.slope:.6f} vs {model.slope:.6f} "
               f"(rel err {rel:.2e}, allow {tol.verify_slope_rel:.0e})",
    ))
    ds = abs(fit.spacing_mean - model.spacing)
    checks.append(CheckResult(
        name="mean_spacing",
        passed=ds <= tol.verify_spacing_abs,
        witnesses=(),
        detail=f"spacing {fit.spacing_mean:.6f} vs {model.spacing:.6f} "
               f"(abs err {ds:.2e}, allow {tol.verify_spacing_abs:.0e})",
    ))
    dci = abs(fit.intercept - model.c_im)
    checks.append(CheckResult(
        name="intercept_c_im",
        passed=dci <= tol.verify_const_abs,
        witnesses=(),
        detail=f"C_im {fit.intercept:.6f} vs {model.c_im:.6f} "
               f"(abs err {dci:.2e}, allow {tol.verify_const_abs:.0e})",
    ))
    dcr = _circ_dist(fit.c_re_empirical, model.c_re, model.spacing)
    checks.append(CheckResult(
        name="coset_c_re",
        passed=dcr <= tol.verify_const_abs,
        witnesses=(),
        detail=f"C_re {fit.c_re_empirical:.6f} vs {model.c_re:.6f} "
               f"(circular err {dcr:.2e}, allow {tol.verify_const_abs:.0e})",
    ))
    return VerificationReport(checks=tuple(checks), fit=fit, model=model)


# ---------------------------------------------------------------------------
# gap bands


def log_band_path(re_lo: float, re_hi: float, nu_lo: float, nu_hi: float,
                  im_offset: float = 0.0):
    """Closed contour bounding {nu_lo <= nu <= nu_hi} over a Re window.

    The band lies between the curves y = -nu*log(x) + im_offset; the path
    runs along the lower curve, up the right edge, back along the upper
    curve and down the left edge.  Returns (path_fn, nseg) for
    winding_number.
    """
    if not (0.0 <= nu_lo < nu_hi):
        raise ValueError("need 0 <= nu_lo < nu_hi")
    if not (1.0 < re_lo < re_hi):
        raise ValueError("need 1 < re_lo < re_hi")

    def lower(x):
        return -nu_hi * np.log(x) + im_offset

    def upper(x):
        return -nu_lo * np.log(x) + im_offset

    def path(t):
        t = np.asarray(t, dtype=float)
        seg = np.clip(np.floor(t).astype(int), 0, 3)
        s = t - seg
        z = np.empty(t.shape, dtype=complex)
        m = seg == 0
        x = re_lo * (1.0 - s[m]) + re_hi * s[m]
        z[m] = x + 1j * lower(x)
        m = seg == 1
        z[m] = re_hi + 1j * (lower(re_hi) * (1.0 - s[m]) + upper(re_hi) * s[m])
        m = seg == 2
        x = re_hi * (1.0 - s[m]) + re_lo * s[m]
        z[m] = x + 1j * upper(x)
        m = seg == 3
        z[m] = re_lo + 1j * (upper(re_lo) * (1.0 - s[m]) + lower(re_lo) * s[m])
        return z

    return path, 4


@dataclass(frozen=True)
class GapReport:
    re_window: tuple[float, float]
    delta: float
    im_offset: float
    gap_nu_lo: float
    gap_nu_hi: float
    gap_band_empty: bool
    gap_winding: int
    string_winding: int
    string_expected: float
    eps_prime: float | None
    scales: LengthScales

    def to_dict(self) -> dict:
        return {
            "re_window": list(self.re_window),
            "delta": self.delta,
            "im_offset": self.im_offset,
            "gap_nu_lo": self.gap_nu_lo,
            "gap_nu_hi": self.gap_nu_hi,
            "gap_band_empty": self.gap_band_empty,
            "gap_winding": self.gap_winding,
            "string_winding": self.string_winding,
            "string_expected": self.string_expected,
            "eps_prime": self.eps_prime,
            "L0": self.scales.L0,
            "Lprime": self.scales.Lprime,
            "Lambda": self.scales.Lambda,
        }


def gap_report(spec: ConeSurfaceSpec, re_window: tuple[float, float],
               delta: float = 0.02, im_offset: float = 0.0,
               tol: tol_mod.Tolerances = tol_mod.DEFAULT) -> GapReport:
    """Count zeros in the expected resonance-free band and around the string.

    The gap band is nu in [(n-1)/(2 L0) + delta, Lambda - delta]; when the
    surface's length gap makes that interval empty the band is reported as
    empty with winding zero.  The string band is nu in [nu0 - delta,
    nu0 + delta] around the string slope, with curves shifted vertically by
    im_offset (use the model's C_im to centre the band on the string).
    """
    scales = length_scales(spec)
    n = spec.dimension
    nu0 = (n - 1) / (2.0 * scales.L0)
    f = char_function(spec)
    re_lo, re_hi = float(re_window[0]), float(re_window[1])
    # initial density must resolve the dominant phase rate 2*L0 along the
    # curves, else full turns can alias away near the string
    per_seg = max(tol.winding_initial_per_segment,
                  int(math.ceil((re_hi - re_lo) * scales.L0 * 8.0 / math.pi)))

    gap_lo, gap_hi = nu0 + delta, scales.Lambda - delta
    if gap_lo >= gap_hi:
        empty, gap_w = True, 0
    else:
        empty = False
        path, nseg = log_band_path(re_lo, re_hi, gap_lo, gap_hi)
        gap_w = winding_number(f, path, nseg, tol, per_segment=per_seg)

    s_lo = max(nu0 - delta, 0.0)
    path, nseg = log_band_path(re_lo, re_hi, s_lo, nu0 + delta, im_offset)
    string_w = winding_number(f, path, nseg, tol, per_segment=per_seg)

    eps_prime: float | None
    t1 = (n - 1) + 0.5 - 2.0 * scales.L0 * (scales.Lambda - delta)
    if scales.Lprime is not None:
        t0 = (n - 1) - 2.0 * scales.Lprime * (scales.Lambda - delta)
        eps_prime = min(t0, t1)
    else:
        eps_prime = t1
    return GapReport(
        re_window=(re_lo, re_hi),
        delta=delta,
        im_offset=im_offset,
        gap_nu_lo=gap_lo,
        gap_nu_hi=gap_hi,
        gap_band_empty=empty,
        gap_winding=gap_w,
        string_winding=string_w,
        string_expected=(re_hi - re_lo) * scales.L0 / math.pi,
        eps_prime=eps_prime,
        scales=scales,
    )
