"""Large-signal stability criterion for the multi-converter DC plant.

Mixed-potential (Brayton-Moser) analysis of the rectifier-fed bus with
three current-controlled branch converters reduces to two scalar margins:
``mu1`` collects the inductor-side damping (one composite term for the
grid-side rectifier loop, one R/L term per interconnect, one per branch
converter) and ``mu2`` the capacitor-side damping (one term for the
rectifier DC link, one X_k/C term per branch DC link). The plant is
declared stable when ``mu1 + mu2 > 0``; an exact zero is reported as the
unstable boundary.

Both margins are minima over their candidate terms, so results carry the
binding term index alongside the value. The sweep helper maps a grid
power axis onto the rectifier current reference and hunts the stability
boundary along the branch-2 DC-link capacitance axis.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MU1_TERM_NAMES",
    "MU2_TERM_NAMES",
    "DQ_POWER_FACTOR",
    "MptCircuit",
    "MptOperatingPoint",
    "StabilityResult",
    "SweepSpec",
    "SweepPlane",
    "SingularGridTermError",
    "SingularBranchTermError",
    "mu1",
    "mu2",
    "is_stable",
    "sweep",
    "extract_boundary",
]

MU1_TERM_NAMES = (
    "grid",
    "interconnect_1",
    "interconnect_2",
    "interconnect_3",
    "pemel",
    "ael",
    "sc",
)
MU2_TERM_NAMES = ("rectifier", "pemel", "ael", "sc")

# Amplitude-invariant dq frame: p = (3/2) * v_d * i_d, so the rectifier
# current reference for a grid power target is i = p / (1.5 * v_gdr).
DQ_POWER_FACTOR = 1.5


class SingularGridTermError(ValueError):
    """The grid composite term's denominator vanished at this operating point."""


class SingularBranchTermError(ValueError):
    """A branch X term's denominator vanished at this operating point."""


def _check_positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ValueError(f"{name} must be a finite number, got {value!r}")
    if value <= 0.0:
        raise ValueError(f"{name} must be > 0, got {value}")


def _check_finite(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ValueError(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class MptCircuit:
    """Passive elements of the rectifier, interconnects, and branches."""

    r_sr: float   # rectifier series resistance, ohm
    l_r: float    # rectifier series inductance, H
    r_d1: float   # interconnect resistances, ohm
    r_d2: float
    r_d3: float
    l_d1: float   # interconnect inductances, H
    l_d2: float
    l_d3: float
    r_fp: float   # branch filter resistances (PEMEL, AEL, SC), ohm
    r_fa: float
    r_fs: float
    l_fp: float   # branch filter inductances, H
    l_fa: float
    l_fs: float
    c_dcr: float  # rectifier DC-link capacitance, F
    c_dc1: float  # branch DC-link capacitances (PEMEL, AEL, SC), F
    c_dc2: float
    c_dc3: float

    def __post_init__(self) -> None:
        for field in dataclasses.fields(self):
            _check_positive(field.name, getattr(self, field.name))


@dataclass(frozen=True)
class MptOperatingPoint:
    """Control gains and large-signal operating values.

    Current-loop gains may be zero (gain-off degenerations are useful in
    analysis); voltages must be positive and duty cycles sit inside (0, 1).
    Currents and their references are signed.
    """

    k_ipr: float    # rectifier current-loop proportional gain, V/A
    k_ip1: float    # PEMEL branch gain, V/A
    k_ip2: float    # AEL branch gain, V/A
    k_ip3: float    # SC branch gain, V/A
    d_vi: float     # virtual damping of the inertia layer, W/Hz
    d_grid: float   # damping of the feeding grid, W/Hz
    v_gdr: float    # grid-side d-axis voltage amplitude, V
    i_drref: float  # rectifier d-axis current reference, A
    v_dcr: float    # rectifier DC-link voltage, V
    v_dc: float     # common bus voltage, V
    v_p: float      # branch DC-link voltages, V
    v_a: float
    v_s: float
    i_p: float      # branch inductor currents, A
    i_a: float
    i_s: float
    i_pref: float   # branch current references, A
    i_aref: float
    i_sref: float
    duty_p: float   # branch converter duty ratios
    duty_a: float
    duty_s: float

    def __post_init__(self) -> None:
        for name in ("k_ipr", "k_ip1", "k_ip2", "k_ip3"):
            value = getattr(self, name)
            _check_finite(name, value)
            if value < 0.0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        for name in ("d_vi", "d_grid", "v_gdr", "v_dcr", "v_dc", "v_p", "v_a", "v_s"):
            _check_positive(name, getattr(self, name))
        for name in ("i_drref", "i_p", "i_a", "i_s", "i_pref", "i_aref", "i_sref"):
            _check_finite(name, getattr(self, name))
        for name in ("duty_p", "duty_a", "duty_s"):
            value = getattr(self, name)
            _check_finite(name, value)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class StabilityResult:
    """Both margins, their sum, and which candidate terms were binding."""

    mu1: float
    mu2: float
    mu_sum: float
    stable: bool
    on_boundary: bool           # mu_sum exactly zero (reported unstable)
    binding_term_mu1: int       # index into MU1_TERM_NAMES
    binding_term_mu2: int       # index into MU2_TERM_NAMES
    mu1_terms: tuple[float, ...]
    mu2_terms: tuple[float, ...]
    x1: float
    x2: float
    x3: float


def mu1(circuit: MptCircuit, op: MptOperatingPoint) -> tuple[float, int, tuple[float, ...]]:
    """Inductor-side margin: (value, binding index, all seven candidates).

    Raises
    ------
    SingularGridTermError
        If ``1 - k_ipr*d_vi*i_drref/(v_gdr*d_grid)`` is zero; the caller
        may perturb the operating point and retry.
    """
    den_grid = 1.0 - op.k_ipr * op.d_vi * op.i_drref / (op.v_gdr * op.d_grid)
    if den_grid == 0.0:
        raise SingularGridTermError(
            "grid composite term is singular: "
            "k_ipr*d_vi*i_drref == v_gdr*d_grid"
        )
    grid_term = (
        op.k_ipr
        * (op.d_vi * (op.v_gdr - op.i_drref * circuit.r_sr) / (op.v_gdr * op.d_grid) + 1.0)
        / (circuit.l_r * den_grid)
        + circuit.r_sr / circuit.l_r
    )
    terms = (
        grid_term,
        circuit.r_d1 / circuit.l_d1,
        circuit.r_d2 / circuit.l_d2,
        circuit.r_d3 / circuit.l_d3,
        (op.k_ip1 * op.v_p + circuit.r_fp) / circuit.l_fp,
        (op.k_ip2 * op.v_a + circuit.r_fa) / circuit.l_fa,
        (op.k_ip3 * op.v_s + circuit.r_fs) / circuit.l_fs,
    )
    binding = min(range(len(terms)), key=lambda i: terms[i])
    return terms[binding], binding, terms


def _x_term(
    label: str,
    duty: float,
    k_ip: float,
    i_now: float,
    i_ref: float,
    v_branch: float,
    v_dc: float,
    r_f: float,
) -> float:
    den = r_f + k_ip * v_branch
    if den == 0.0:
        raise SingularBranchTermError(
            f"{label} branch X term is singular: r_f + k_ip*v_branch == 0"
        )
    return ((duty - k_ip * i_now) / (den * den)) * (
        -r_f
        + k_ip * i_ref * r_f
        - k_ip * v_dc
        + k_ip * v_branch
        + k_ip * k_ip * v_branch * i_ref
    )


def mu2(
    circuit: MptCircuit, op: MptOperatingPoint
) -> tuple[float, int, tuple[float, ...], tuple[float, float, float]]:
    """Capacitor-side margin: (value, binding index, candidates, (x1, x2, x3))."""
    rect_term = (
        3.0
        * (op.v_gdr - op.i_drref * circuit.r_sr)
        * op.i_drref
        / (2.0 * circuit.c_dcr * op.v_dcr * op.v_dcr)
    )
    x1 = _x_term("pemel", op.duty_p, op.k_ip1, op.i_p, op.i_pref, op.v_p, op.v_dc, circuit.r_fp)
    x2 = _x_term("ael", op.duty_a, op.k_ip2, op.i_a, op.i_aref, op.v_a, op.v_dc, circuit.r_fa)
    x3 = _x_term("sc", op.duty_s, op.k_ip3, op.i_s, op.i_sref, op.v_s, op.v_dc, circuit.r_fs)
    terms = (
        rect_term,
        x1 / circuit.c_dc1,
        x2 / circuit.c_dc2,
        x3 / circuit.c_dc3,
    )
    binding = min(range(len(terms)), key=lambda i: terms[i])
    return terms[binding], binding, terms, (x1, x2, x3)


def is_stable(circuit: MptCircuit, op: MptOperatingPoint) -> StabilityResult:
    """Evaluate both margins; stable means strictly positive sum."""
    m1, b1, t1 = mu1(circuit, op)
    m2, b2, t2, (x1, x2, x3) = mu2(circuit, op)
    total = m1 + m2
    return StabilityResult(
        mu1=m1,
        mu2=m2,
        mu_sum=total,
        stable=total > 0.0,
        on_boundary=total == 0.0,
        binding_term_mu1=b1,
        binding_term_mu2=b2,
        mu1_terms=t1,
        mu2_terms=t2,
        x1=x1,
        x2=x2,
        x3=x3,
    )


@dataclass(frozen=True)
class SweepSpec:
    """Rectangular sweep plane: grid power (axis 1) by c_dc2 (axis 2)."""

    p_grid_min: float  # W
    p_grid_max: float
    p_grid_n: int
    c_dc2_min: float   # F
    c_dc2_max: float
    c_dc2_n: int

    def __post_init__(self) -> None:
        for lo_name, hi_name, n_name in (
            ("p_grid_min", "p_grid_max", "p_grid_n"),
            ("c_dc2_min", "c_dc2_max", "c_dc2_n"),
        ):
            lo, hi, n = getattr(self, lo_name), getattr(self, hi_name), getattr(self, n_name)
            _check_finite(lo_name, lo)
            _check_finite(hi_name, hi)
            if not isinstance(n, int) or n < 1:
                raise ValueError(f"{n_name} must be a positive integer, got {n!r}")
            if n == 1:
                if lo != hi:
                    raise ValueError(
                        f"{n_name} = 1 needs {lo_name} == {hi_name}, got {lo} and {hi}"
                    )
            elif not lo < hi:
                raise ValueError(f"need {lo_name} < {hi_name}, got {lo} and {hi}")
        if self.c_dc2_min <= 0.0:
            raise ValueError(f"c_dc2_min must be > 0, got {self.c_dc2_min}")


@dataclass(frozen=True, eq=False)
class SweepPlane:
    """Margins over the sweep plane (a StabilityResult grid in array form).

    Arrays are indexed [p_grid, c_dc2] in ascending axis order. ``boundary``
    holds one (p_grid, c_dc2) pair per sign change of mu_sum along the
    capacitance axis, found by linear interpolation between samples.
    """

    p_grid: np.ndarray   # (n1,), W
    c_dc2: np.ndarray    # (n2,), F
    mu1: np.ndarray      # (n1, n2)
    mu2: np.ndarray      # (n1, n2)
    mu_sum: np.ndarray   # (n1, n2)
    stable: np.ndarray   # (n1, n2) bool
    boundary: tuple[tuple[float, float], ...]


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    return np.array([lo]) if n == 1 else np.linspace(lo, hi, n)


def sweep(
    circuit: MptCircuit,
    op: MptOperatingPoint,
    spec: SweepSpec,
    dq_power_factor: float = DQ_POWER_FACTOR,
) -> SweepPlane:
    """Evaluate the criterion over a (p_grid, c_dc2) plane.

    Each grid power sample maps to a rectifier current reference through
    ``i_drref = p_grid / (dq_power_factor * v_gdr)``; every other value of
    the operating point is held at ``op``. Rows and boundary points are
    assembled in ascending axis order, so the output is deterministic for
    a given input regardless of how the evaluations are scheduled.
    """
    _check_positive("dq_power_factor", dq_power_factor)
    p_vals = _axis(spec.p_grid_min, spec.p_grid_max, spec.p_grid_n)
    c_vals = _axis(spec.c_dc2_min, spec.c_dc2_max, spec.c_dc2_n)
    shape = (spec.p_grid_n, spec.c_dc2_n)
    m1_arr = np.empty(shape)
    m2_arr = np.empty(shape)
    boundary: list[tuple[float, float]] = []
    for i, p in enumerate(p_vals):
        op_i = dataclasses.replace(
            op, i_drref=float(p) / (dq_power_factor * op.v_gdr)
        )
        for j, c in enumerate(c_vals):
            res = is_stable(dataclasses.replace(circuit, c_dc2=float(c)), op_i)
            m1_arr[i, j] = res.mu1
            m2_arr[i, j] = res.mu2
        for c_star in extract_boundary(c_vals, m1_arr[i] + m2_arr[i]):
            boundary.append((float(p), c_star))
    total = m1_arr + m2_arr
    return SweepPlane(
        p_grid=p_vals,
        c_dc2=c_vals,
        mu1=m1_arr,
        mu2=m2_arr,
        mu_sum=total,
        stable=total > 0.0,
        boundary=tuple(boundary),
    )


def extract_boundary(axis: np.ndarray, values: np.ndarray) -> tuple[float, ...]:
    """Zero crossings of ``values`` along ``axis`` by linear interpolation.

    Exact zeros count as crossings at the sample itself. For values affine
    in the axis the interpolated crossing is exact.
    """
    axis = np.asarray(axis, dtype=float)
    values = np.asarray(values, dtype=float)
    if axis.shape != values.shape or axis.ndim != 1:
        raise ValueError("axis and values must be 1-d arrays of equal length")
    crossings: list[float] = []
    for i in range(len(axis)):
        if values[i] == 0.0:
            crossings.append(float(axis[i]))
        if i + 1 < len(axis) and values[i] * values[i + 1] < 0.0:
            frac = -values[i] / (values[i + 1] - values[i])
            crossings.append(float(axis[i] + frac * (axis[i + 1] - axis[i])))
    return tuple(crossings)
