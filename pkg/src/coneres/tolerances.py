"""Central tolerance record.

Every numerical knob used by the library lives here so a run can be
reproduced from its configuration alone.  The CLI honours the environment
variable ``CONERES_TOL_OVERRIDES``: it names a YAML file whose keys are a
subset of the field names below.
"""
from __future__ import annotations

import dataclasses
import math
import os

import yaml


@dataclasses.dataclass(frozen=True)
class Tolerances:
    # --- winding walks -------------------------------------------------
    winding_max_phase_step: float = math.pi / 2   # refine until |dphi| below this
    winding_max_mag_step: float = 3.0             # ... and |f| ratios below this
    winding_reject_frac: float = 0.1              # reject winding if fractional part exceeds
    winding_initial_per_segment: int = 16
    winding_max_rounds: int = 60
    winding_max_points: int = 400_000
    value_floor: float = 1e-280                   # |f| below this on a contour = zero on path

    # --- strip scan ----------------------------------------------------
    grid_retry_shifts: int = 5        # whole-grid reseeds after a boundary hit
    multiplicity_diameter: float = 1e-6
    min_box_diameter: float = 1e-9
    boundary_guard: float = 1e-9      # reported zeros must clear box walls by this
    split_line_samples: int = 33      # probe points on a candidate split line
    split_dip_rel_floor: float = 0.03 # reject split lines whose |f| dips below
                                      # this fraction of the line median

    # --- Newton refinement ----------------------------------------------
    newton_residual: float = 1e-10    # stop at |f| < newton_residual * (1 + |f'|)
    newton_max_iter: int = 50

    # --- ladder solves ---------------------------------------------------
    ladder_newton_tol: float = 1e-12

    # --- geometry / diffraction ------------------------------------------
    pi_relation_tol: float = 1e-9
    cot_singularity_guard: float = 1e-8
    geometric_guard: float = 1e-8
    length_tie_rel: float = 1e-12

    # --- fits and verification thresholds ---------------------------------
    fit_min_points: int = 10
    fit_min_re: float = 50.0
    verify_slope_rel: float = 0.02
    verify_spacing_abs: float = 1e-3
    verify_const_abs: float = 5e-2

    # --- stationary-phase quadrature ---------------------------------------
    quad_points_per_panel: int = 12
    quad_budget_points: float = 6e7
    quad_abs_tol: float = 1e-10
    quad_min_h: float = 1e-4


DEFAULT = Tolerances()

ENV_VAR = "CONERES_TOL_OVERRIDES"

_FIELD_NAMES = {f.name for f in dataclasses.fields(Tolerances)}


def with_overrides(mapping: dict, base: Tolerances = DEFAULT) -> Tolerances:
    """Return ``base`` with the given fields replaced; unknown keys raise."""
    unknown = set(mapping) - _FIELD_NAMES
    if unknown:
        raise KeyError(f"unknown tolerance fields: {sorted(unknown)}")
    return dataclasses.replace(base, **mapping)


def load_overrides_file(path: str, base: Tolerances = DEFAULT) -> Tolerances:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping of tolerance fields")
    return with_overrides(data, base)


def from_environment(base: Tolerances = DEFAULT) -> Tolerances:
    """Apply CONERES_TOL_OVERRIDES if set, else return ``base`` unchanged."""
    path = os.environ.get(ENV_VAR)
    if not path:
        return base
    return load_overrides_file(path, base)
