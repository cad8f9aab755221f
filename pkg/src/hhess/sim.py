"""Closed-loop time-domain simulation of the hybrid plant on a weak grid.

The plant absorbs a commanded power p_t from the grid bus. An inertia
emulation layer shapes that command from the grid frequency deviation
(p_t = p_ref + j*d(delta_f)/dt + d*delta_f), the swing equation of the
single-bus grid closes the loop, and the droop-allocation filter splits
p_t across the AEL / PEMEL / SC branches. States are

    [delta_f, x1, x2, delta_q]

where (x1, x2) realize the shared second-order allocation denominator in
controllable canonical form and delta_q integrates the SC branch power.
The derivative in the inertia law is evaluated algebraically from the
swing equation, so the loop stays an explicit LTI system per load segment
and is integrated with the classical fixed-step fourth-order Runge-Kutta
map. Load profiles are piecewise constant; a breakpoint that falls
between samples takes effect at the next sample instant.

SOC excursions outside [0, 1] are reported, never clamped: the washout
zero guarantees delta_q returns to zero on its own, and clipping would
falsify exactly the transient this module exists to measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .droop import DroopBank, denominator_coeffs, numerator_coeffs

__all__ = [
    "InertiaParams",
    "GridModel",
    "Scenario",
    "SocState",
    "TimeSeries",
    "StepMetrics",
    "AllocationFilter",
    "IntegrationDivergedError",
    "NoStepEventError",
    "realize_allocation_filter",
    "simulate",
    "step_metrics",
    "soc_violations",
    "final_soc",
]

DEFAULT_DT = 1e-3  # s

# A net step smaller than this fraction of the window's peak excursion is
# treated as "no step" by step_metrics: percentages of it would be noise.
_NET_STEP_FLOOR = 0.01

_CHANNELS = ("p_t", "p_a", "p_p", "p_s", "f")


class IntegrationDivergedError(RuntimeError):
    """State became non-finite during integration."""


class NoStepEventError(ValueError):
    """The requested step event does not exist in the series."""


def _check_finite(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ValueError(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class InertiaParams:
    """Inertia emulation layer of the hybrid plant."""

    j: float             # emulated inertia, W*s/Hz (j = 0 disables the term)
    d: float             # emulated damping, W/Hz
    f_ref: float = 50.0  # nominal grid frequency, Hz
    p_ref: float = 0.0   # scheduled plant power at nominal frequency, W

    def __post_init__(self) -> None:
        _check_finite("j", self.j)
        _check_finite("d", self.d)
        _check_finite("f_ref", self.f_ref)
        _check_finite("p_ref", self.p_ref)
        if self.j < 0.0:
            raise ValueError(f"j must be >= 0, got {self.j}")
        if self.d <= 0.0:
            raise ValueError(f"d must be > 0, got {self.d}")
        if self.f_ref <= 0.0:
            raise ValueError(f"f_ref must be > 0, got {self.f_ref}")


@dataclass(frozen=True)
class GridModel:
    """Single-bus swing model of the surrounding grid."""

    m_g: float    # grid inertia, W*s/Hz
    d_g: float    # grid damping, W/Hz
    p_gen: float  # constant scheduled generation, W

    def __post_init__(self) -> None:
        _check_finite("m_g", self.m_g)
        _check_finite("d_g", self.d_g)
        _check_finite("p_gen", self.p_gen)
        if self.m_g <= 0.0:
            raise ValueError(f"m_g must be > 0, got {self.m_g}")
        if self.d_g <= 0.0:
            raise ValueError(f"d_g must be > 0, got {self.d_g}")


@dataclass(frozen=True)
class Scenario:
    """Load profile and run settings for one simulation.

    ``load_profile`` lists (time, power) pairs; power holds constant until
    the next breakpoint. The first breakpoint must sit at t = 0.
    """

    load_profile: tuple[tuple[float, float], ...]
    t_end: float
    dt: float = DEFAULT_DT
    soc0: float = 0.5      # initial SC state of charge, fraction of e_rated
    e_rated: float = 1e5   # SC rated energy, J

    def __post_init__(self) -> None:
        if len(self.load_profile) == 0:
            raise ValueError("load_profile must contain at least one segment")
        for i, (t, p) in enumerate(self.load_profile):
            _check_finite(f"load_profile[{i}] time", t)
            _check_finite(f"load_profile[{i}] power", p)
        if self.load_profile[0][0] != 0.0:
            raise ValueError(
                f"load_profile must start at t = 0, got {self.load_profile[0][0]}"
            )
        times = [t for t, _ in self.load_profile]
        for a, b in zip(times, times[1:]):
            if not b > a:
                raise ValueError(
                    f"load breakpoints must be strictly increasing, got {a} then {b}"
                )
        _check_finite("t_end", self.t_end)
        _check_finite("dt", self.dt)
        if self.dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.t_end < self.dt:
            raise ValueError(f"t_end must be >= dt, got {self.t_end}")
        if not 0.0 <= self.soc0 <= 1.0:
            raise ValueError(f"soc0 must lie in [0, 1], got {self.soc0}")
        _check_finite("e_rated", self.e_rated)
        if self.e_rated <= 0.0:
            raise ValueError(f"e_rated must be > 0, got {self.e_rated}")


@dataclass(frozen=True)
class SocState:
    """SC charge bookkeeping at one instant."""

    soc: float      # fraction of rated energy
    soc0: float
    e_rated: float  # J
    delta_q: float  # J, integral of SC branch power

    def in_bounds(self) -> bool:
        return 0.0 <= self.soc <= 1.0


@dataclass(frozen=True)
class TimeSeries:
    """Sampled closed-loop trajectory; all arrays share one length."""

    t: np.ndarray        # s
    f: np.ndarray        # Hz
    p_t: np.ndarray      # W, total hybrid power command
    p_a: np.ndarray      # W, AEL branch
    p_p: np.ndarray      # W, PEMEL branch
    p_s: np.ndarray      # W, SC branch
    v_dc: np.ndarray     # V, bus voltage from the AEL droop law
    delta_q: np.ndarray  # J
    soc: np.ndarray      # fraction

    def channel(self, name: str) -> np.ndarray:
        if name not in _CHANNELS:
            raise ValueError(f"unknown channel {name!r}, expected one of {_CHANNELS}")
        return getattr(self, name)


@dataclass(frozen=True)
class StepMetrics:
    """Step-response numbers for one channel around one load event.

    Percentages are normalized by the net step magnitude |final - initial|.
    ``overshoot_pct`` / ``undershoot_pct`` name the past-final excursion
    after the step direction (an upward step that rings above its final
    value overshoots; a downward step that dips below its final value
    undershoots); the opposite field reports any excursion beyond the
    initial level against the step direction. For channels whose net step
    is negligible next to their peak excursion (the SC branch returns to
    zero after every step), the settling band falls back to a fraction of
    the peak excursion and both percentages are zero.
    """

    channel: str
    band_pct: float
    t_event: float          # s
    initial: float          # channel units, sample just before the event
    final: float            # channel units, last sample of the window
    settling_time: float    # s after the event; inf if never settled
    overshoot_pct: float
    undershoot_pct: float
    peak_dev_a: float       # W, max |p_a - pre-event p_a| in the window
    peak_dev_p: float       # W
    peak_dev_s: float       # W
    t_peak_a: float         # s, time of the AEL peak deviation
    t_peak_p: float         # s
    t_peak_s: float         # s
    f_nadir: float          # Hz, lowest frequency in the window


@dataclass(frozen=True, eq=False)
class AllocationFilter:
    """Two-state realization of all three branch transfer functions.

    Controllable canonical form of the shared denominator; rows of (c, d)
    are ordered (AEL, PEMEL, SC). The d vector carries the instantaneous
    split gamma/(zeta+gamma), zeta/(zeta+gamma) of a power step, the AEL
    row is strictly proper.
    """

    a: np.ndarray  # (2, 2)
    b: np.ndarray  # (2,)
    c: np.ndarray  # (3, 2)
    d: np.ndarray  # (3,)
    a1: float      # monic denominator s**2 + a1*s + a0
    a0: float

    def feedthrough(self) -> np.ndarray:
        """Branch split of a total-power step at t = 0+."""
        return self.d.copy()

    def dc_gains(self) -> np.ndarray:
        """Branch split of a constant total power."""
        return self.c[:, 0] / self.a0 + self.d


def realize_allocation_filter(bank: DroopBank) -> AllocationFilter:
    """Build the shared state-space form of the three branch filters."""
    a2, a1_raw, a0_raw = denominator_coeffs(bank)
    a1 = a1_raw / a2
    a0 = a0_raw / a2
    c = np.empty((3, 2))
    d = np.empty(3)
    for i, (b2, b1, b0) in enumerate(numerator_coeffs(bank)):
        d[i] = b2 / a2
        c[i, 0] = b0 / a2 - d[i] * a0
        c[i, 1] = b1 / a2 - d[i] * a1
    return AllocationFilter(
        a=np.array([[0.0, 1.0], [-a0, -a1]]),
        b=np.array([0.0, 1.0]),
        c=c,
        d=d,
        a1=a1,
        a0=a0,
    )


def _rk4_maps(a: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """One-step state map (phi, gamma) of classical RK4 for x' = a x + b.

    For a linear system with constant input the four-stage combination
    collapses to the degree-4 Taylor truncation of the matrix exponential.
    """
    eye = np.eye(a.shape[0])
    ah = a * h
    phi = eye.copy()
    term = eye.copy()
    for order in (1, 2, 3, 4):
        term = term @ ah / order
        phi = phi + term
    gam = eye.copy()
    term = eye.copy()
    for order in (2, 3, 4):
        term = term @ ah / order
        gam = gam + term
    return phi, gam * h


def _segment_starts(
    profile: tuple[tuple[float, float], ...], dt: float, n_steps: int
) -> list[tuple[int, float]]:
    """Quantize load breakpoints to sample indices (ties snap, else ceil)."""
    segs: list[tuple[int, float]] = []
    for t_b, p in profile:
        ratio = t_b / dt
        idx = int(round(ratio)) if abs(ratio - round(ratio)) <= 1e-9 * max(1.0, abs(ratio)) else int(math.ceil(ratio))
        if idx > n_steps:
            continue
        if segs and segs[-1][0] == idx:
            segs[-1] = (idx, p)  # later breakpoint wins the shared sample
        else:
            segs.append((idx, p))
    return segs


def simulate(
    scenario: Scenario,
    bank: DroopBank,
    inertia: InertiaParams,
    grid: GridModel,
) -> TimeSeries:
    """Integrate the closed loop over the scenario's load profile.

    Returns samples at t = 0, dt, ..., n*dt with n = round(t_end/dt). The
    run starts from the equilibrium of the first load segment, so a
    balanced profile (p_gen = p_load + p_ref) holds every output constant.

    Raises
    ------
    IntegrationDivergedError
        If any state leaves the finite range; the message carries the
        first offending sample time (explicit RK4 with too coarse a dt).
    """
    flt = realize_allocation_filter(bank)
    a0, a1 = flt.a0, flt.a1
    (ca0, ca1), (cp0, cp1), (cs0, cs1) = flt.c
    _, dp, ds = flt.d

    mg_j = grid.m_g + inertia.j
    dg_d = grid.d_g + inertia.d
    # p_t = p_ref + c_u*u_net + c_f*delta_f once the swing equation
    # substitutes for d(delta_f)/dt in the inertia law.
    c_u = inertia.j / mg_j
    c_f = inertia.d - inertia.j * dg_d / mg_j

    a_mat = np.array(
        [
            [-dg_d / mg_j, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [c_f, -a0, -a1, 0.0],
            [ds * c_f, cs0, cs1, 0.0],
        ]
    )
    n_steps = int(round(scenario.t_end / scenario.dt))
    phi, gam = _rk4_maps(a_mat, scenario.dt)
    (p00, p01, p02, p03), (p10, p11, p12, p13), (p20, p21, p22, p23), (
        p30, p31, p32, p33,
    ) = phi.tolist()

    segs = _segment_starts(scenario.load_profile, scenario.dt, n_steps)
    u0 = grid.p_gen - segs[0][1] - inertia.p_ref

    # Equilibrium of the first segment: zero frequency derivative, filter
    # states at their DC point, no accumulated SC charge.
    z0 = u0 / dg_d
    pt_init = inertia.p_ref + inertia.d * z0
    z1, z2, z3 = pt_init / a0, 0.0, 0.0

    out = np.empty((n_steps + 1, 4))
    out[0] = (z0, z1, z2, z3)
    u_net = np.empty(n_steps + 1)

    for seg_no, (i0, p_load) in enumerate(segs):
        i1 = segs[seg_no + 1][0] if seg_no + 1 < len(segs) else n_steps
        u = grid.p_gen - p_load - inertia.p_ref
        u_net[i0: i1 + 1] = u
        b_vec = np.array([u / mg_j, 0.0, inertia.p_ref + c_u * u, ds * (inertia.p_ref + c_u * u)])
        g0, g1, g2, g3 = (gam @ b_vec).tolist()
        for n in range(i0, i1):
            w0 = p00 * z0 + p01 * z1 + p02 * z2 + p03 * z3 + g0
            w1 = p10 * z0 + p11 * z1 + p12 * z2 + p13 * z3 + g1
            w2 = p20 * z0 + p21 * z1 + p22 * z2 + p23 * z3 + g2
            w3 = p30 * z0 + p31 * z1 + p32 * z2 + p33 * z3 + g3
            z0, z1, z2, z3 = w0, w1, w2, w3
            out[n + 1] = (z0, z1, z2, z3)

    bad = ~np.isfinite(out).all(axis=1)
    if bad.any():
        t_bad = int(np.argmax(bad)) * scenario.dt
        raise IntegrationDivergedError(
            f"state became non-finite at t = {t_bad:.6g} s; reduce dt"
        )

    t = np.arange(n_steps + 1) * scenario.dt
    delta_f = out[:, 0]
    x1 = out[:, 1]
    x2 = out[:, 2]
    delta_q = out[:, 3]
    p_t = inertia.p_ref + c_u * u_net + c_f * delta_f
    p_a = ca0 * x1 + ca1 * x2
    p_p = cp0 * x1 + cp1 * x2 + dp * p_t
    p_s = cs0 * x1 + cs1 * x2 + ds * p_t
    return TimeSeries(
        t=t,
        f=inertia.f_ref + delta_f,
        p_t=p_t,
        p_a=p_a,
        p_p=p_p,
        p_s=p_s,
        v_dc=bank.v_ref + bank.alpha * p_a,
        delta_q=delta_q,
        soc=scenario.soc0 + delta_q / scenario.e_rated,
    )


def soc_violations(series: TimeSeries) -> list[tuple[float, float]]:
    """Contiguous SOC excursions outside [0, 1].

    Returns one (entry time, extreme soc) pair per excursion. Empty when
    the whole trajectory stays in bounds.
    """
    outside = (series.soc < 0.0) | (series.soc > 1.0)
    episodes: list[tuple[float, float]] = []
    i = 0
    n = len(outside)
    while i < n:
        if not outside[i]:
            i += 1
            continue
        j = i
        while j < n and outside[j]:
            j += 1
        chunk = series.soc[i:j]
        worst = chunk.max() if chunk.max() > 1.0 else chunk.min()
        episodes.append((float(series.t[i]), float(worst)))
        i = j
    return episodes


def final_soc(series: TimeSeries, scenario: Scenario) -> SocState:
    return SocState(
        soc=float(series.soc[-1]),
        soc0=scenario.soc0,
        e_rated=scenario.e_rated,
        delta_q=float(series.delta_q[-1]),
    )


def step_metrics(
    series: TimeSeries,
    channel: str,
    t_event: float,
    band_pct: float = 2.0,
    t_window_end: float | None = None,
) -> StepMetrics:
    """Step-response metrics for one channel around one load event.

    The window runs from the event (inclusive) to ``t_window_end``
    (exclusive; default: end of the series).  With several load steps in
    one run, pass the next breakpoint: samples at that instant already
    carry the following step, so the window must stop just short of it.
    Settling time is the delay after the event past which the trace stays
    within ``band_pct`` percent of the net step around its final value.

    Raises
    ------
    NoStepEventError
        If no sample precedes the event or the window is empty.
    """
    if band_pct <= 0.0:
        raise ValueError(f"band_pct must be > 0, got {band_pct}")
    y = series.channel(channel)
    t = series.t
    if t_window_end is None:
        win = np.nonzero(t >= t_event)[0]
    else:
        win = np.nonzero((t >= t_event) & (t < t_window_end))[0]
    pre = np.nonzero(t < t_event)[0]
    if pre.size == 0 or win.size == 0:
        raise NoStepEventError(
            f"no step event inside the series at t = {t_event} s"
        )
    i_pre = int(pre[-1])
    initial = float(y[i_pre])
    final = float(y[win[-1]])
    yw = y[win]
    tw = t[win]

    dev_final = np.abs(yw - final)
    magnitude = abs(final - initial)
    peak_excursion = float(dev_final.max())
    if magnitude > _NET_STEP_FLOOR * peak_excursion:
        band = band_pct / 100.0 * magnitude
        direction = 1.0 if final > initial else -1.0
        beyond = max(0.0, float((direction * (yw - final)).max()))
        reversal = max(0.0, float((-direction * (yw - initial)).max()))
        if direction > 0.0:
            overshoot = 100.0 * beyond / magnitude
            undershoot = 100.0 * reversal / magnitude
        else:
            overshoot = 100.0 * reversal / magnitude
            undershoot = 100.0 * beyond / magnitude
    else:
        # No meaningful net step (e.g. the SC branch, whose washout returns
        # it to zero): percentages of the step are noise, so report none and
        # size the settling band from the peak excursion instead.
        band = band_pct / 100.0 * peak_excursion
        overshoot = 0.0
        undershoot = 0.0

    outside = np.nonzero(dev_final > band)[0]
    if outside.size == 0:
        settling = 0.0
    elif outside[-1] == win.size - 1:
        settling = math.inf
    else:
        settling = float(tw[outside[-1] + 1] - t_event)

    peaks: dict[str, tuple[float, float]] = {}
    for name in ("p_a", "p_p", "p_s"):
        trace = series.channel(name)
        dev = np.abs(trace[win] - float(trace[i_pre]))
        i_max = int(dev.argmax())
        peaks[name] = (float(dev[i_max]), float(tw[i_max]))

    return StepMetrics(
        channel=channel,
        band_pct=band_pct,
        t_event=t_event,
        initial=initial,
        final=final,
        settling_time=settling,
        overshoot_pct=overshoot,
        undershoot_pct=undershoot,
        peak_dev_a=peaks["p_a"][0],
        peak_dev_p=peaks["p_p"][0],
        peak_dev_s=peaks["p_s"][0],
        t_peak_a=peaks["p_a"][1],
        t_peak_p=peaks["p_p"][1],
        t_peak_s=peaks["p_s"][1],
        f_nadir=float(series.f[win].min()),
    )
