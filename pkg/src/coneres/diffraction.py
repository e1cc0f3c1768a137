"""Diffraction coefficient of a flat two-dimensional cone.

For a cone of total link angle A, write beta = 2*pi/A.  The strictly
diffractive directions carry the coefficient

    D_A(dtheta) = (i / (2A)) * ( cot(beta*(dtheta - pi)/2)
                               - cot(beta*(dtheta + pi)/2) ),

the Abel-regularised value of the mode sum

    (1/A) * sum_{k in Z} r^{|k|} e^{-i pi beta |k|} e^{i beta k dtheta}

as r -> 1.  The truncated mode sum is kept as an independent oracle: the
two routes to the same number share no code.  Directions with dtheta
congruent to +/-pi on the link circle are geometric rays, where the
kernel degenerates to propagation and the coefficient is singular.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometricRaySingularity
from . import tolerances as tol_mod
from .geometry import TWO_PI, link_distance

_MODES = ("closed_form_2d", "spectral_series")

_SERIES_CHUNK = 1_000_000


@dataclass(frozen=True)
class DiffractionEvaluator:
    cone_angle: float
    mode: str = "closed_form_2d"
    spectrum: tuple[float, ...] | None = None
    dimension: int = 2

    def __post_init__(self):
        if not (self.cone_angle > 0):
            raise ValueError("cone angle must be positive")
        if self.mode not in _MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "spectral_series" and self.spectrum is None:
            raise ValueError("spectral_series mode requires an explicit spectrum")
        if self.dimension > 2 and self.mode == "closed_form_2d":
            raise ValueError("closed form is two-dimensional only")

    @property
    def beta(self) -> float:
        return TWO_PI / self.cone_angle


def _cot(u: float) -> float:
    return 1.0 / math.tan(u)


def is_geometric(ev: DiffractionEvaluator, dtheta: float,
                 guard: float = tol_mod.DEFAULT.geometric_guard) -> bool:
    """True when dtheta is within ``guard`` of +/-pi modulo the link circle."""
    a = ev.cone_angle
    return (link_distance(dtheta - math.pi, a) <= guard
            or link_distance(dtheta + math.pi, a) <= guard)


def diffraction_coefficient(ev: DiffractionEvaluator, dtheta: float,
                            guard: float = tol_mod.DEFAULT.cot_singularity_guard
                            ) -> complex:
    """Closed-form coefficient D_A(dtheta); even in dtheta, A-periodic.

    Raises GeometricRaySingularity when either cotangent argument falls
    within ``guard`` of a multiple of pi.  A cone angle of exactly 2*pi is
    a smooth plane point: the two cotangents cancel identically and the
    value is exactly zero.
    """
    if ev.mode != "closed_form_2d":
        raise NotImplementedError(
            "closed-form coefficient is only defined in the 2d closed-form mode"
        )
    a = ev.cone_angle
    beta = ev.beta
    u_minus = beta * (dtheta - math.pi) / 2.0
    u_plus = beta * (dtheta + math.pi) / 2.0
    for u in (u_minus, u_plus):
        if link_distance(u, math.pi) <= guard:
            raise GeometricRaySingularity(
                f"dtheta={dtheta!r} lies on a geometric ray of the cone "
                f"(angle {a!r}); the coefficient is singular there"
            )
    if abs(a - TWO_PI) <= 4 * np.finfo(float).eps * TWO_PI:
        return 0.0 + 0.0j
    return (1j / (2.0 * a)) * (_cot(u_minus) - _cot(u_plus))


def diffraction_series_oracle(ev: DiffractionEvaluator, dtheta: float,
                              terms: int, abel_radius: float) -> complex:
    """Truncated Abel mode sum; independent cross-check of the closed form.

    In two dimensions this is
        (1/A) * sum_{|k| <= terms} r^{|k|} e^{-i pi beta |k|} e^{i beta k dtheta}.
    The partial sum converges to the closed form only when the damping has
    room to act, i.e. terms*(1-r) >> 1; callers choose the pairing.

    In the spectral mode (dimension n > 2 with a user-supplied cross-section
    spectrum mu_j) the eigenfunction products are not modelled; the scalar
    weighted sum (1/A) * sum_j r^j exp(-i pi sqrt(mu_j + (n-2)^2/4)) is
    returned and dtheta is ignored.
    """
    if terms < 0:
        raise ValueError("terms must be nonnegative")
    if not (0.0 < abel_radius < 1.0):
        raise ValueError("abel_radius must lie in (0, 1)")
    a = ev.cone_angle
    if ev.mode == "spectral_series":
        mu = np.asarray(ev.spectrum, dtype=float)
        j = np.arange(mu.size, dtype=float)
        shift = (ev.dimension - 2) ** 2 / 4.0
        weights = abel_radius ** j * np.exp(-1j * math.pi * np.sqrt(mu + shift))
        return complex(weights.sum() / a)
    beta = ev.beta
    total = 1.0 + 0.0j
    k0 = 1
    while k0 <= terms:
        k1 = min(terms, k0 + _SERIES_CHUNK - 1)
        k = np.arange(k0, k1 + 1, dtype=float)
        total += 2.0 * np.sum(
            abel_radius ** k * np.exp(-1j * math.pi * beta * k)
            * np.cos(beta * k * dtheta)
        )
        k0 = k1 + 1
    return complex(total / a)
