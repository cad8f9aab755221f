"""Frequency-domain views of the branch power allocation.

Produces the dB/phase table behind the classic three-band picture (AEL
owns DC, PEMEL the mid band, SC the high band) and locates the band
edges: the frequency where the SC magnitude overtakes the PEMEL one, and
the frequency where the PEMEL magnitude overtakes the AEL one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .droop import DroopBank, denominator_coeffs, numerator_coeffs

__all__ = [
    "DB_FLOOR",
    "BodeTable",
    "CrossoverReport",
    "bode",
    "crossover_report",
]

DB_FLOOR = -200.0  # clamp for magnitudes that underflow any sensible plot

# Bisection brackets are hunted on a log grid spanning this many decades
# on each side of omega0.
_SCAN_DECADES = 8
_SCAN_POINTS = 1601


@dataclass(frozen=True)
class BodeTable:
    """Sampled frequency response of the three branch transfer functions."""

    omega: np.ndarray    # rad/s
    freq: np.ndarray     # Hz
    mag_a: np.ndarray    # dB, clamped at DB_FLOOR
    phase_a: np.ndarray  # deg, principal value
    mag_p: np.ndarray
    phase_p: np.ndarray
    mag_s: np.ndarray
    phase_s: np.ndarray


@dataclass(frozen=True)
class CrossoverReport:
    """Band-edge frequencies in rad/s; None when the magnitudes never meet."""

    omega_sc_pemel: float | None
    omega_pemel_ael: float | None


def branch_response(
    bank: DroopBank, omega: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Complex (h_a, h_p, h_s) on an array of frequencies in rad/s.

    Vectorized counterpart of :func:`hhess.droop.branch_transfer` for the
    imaginary axis, which is pole free for every valid bank (the shared
    denominator is Hurwitz whenever all gains are positive).
    """
    s = 1j * np.asarray(omega, dtype=float)
    a2, a1, a0 = denominator_coeffs(bank)
    den = (a2 * s + a1) * s + a0
    h_a, h_p, h_s = (
        ((b2 * s + b1) * s + b0) / den for b2, b1, b0 in numerator_coeffs(bank)
    )
    return h_a, h_p, h_s


def _mag_db(h: np.ndarray) -> np.ndarray:
    mag = np.abs(h)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return np.maximum(db, DB_FLOOR)


def bode(
    bank: DroopBank,
    omega_min: float = 1e-3,
    omega_max: float = 1e4,
    points: int = 400,
) -> BodeTable:
    """Sample all three branch responses on a log-spaced frequency grid.

    Parameters
    ----------
    bank:
        Droop gain set.
    omega_min, omega_max:
        Grid endpoints in rad/s, both included; ``0 < omega_min < omega_max``.
    points:
        Number of samples, at least 2.
    """
    if not (0.0 < omega_min < omega_max):
        raise ValueError(
            f"need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
        )
    if points < 2:
        raise ValueError(f"points must be >= 2, got {points}")
    omega = np.logspace(math.log10(omega_min), math.log10(omega_max), points)
    h_a, h_p, h_s = branch_response(bank, omega)
    return BodeTable(
        omega=omega,
        freq=omega / (2.0 * math.pi),
        mag_a=_mag_db(h_a),
        phase_a=np.degrees(np.angle(h_a)),
        mag_p=_mag_db(h_p),
        phase_p=np.degrees(np.angle(h_p)),
        mag_s=_mag_db(h_s),
        phase_s=np.degrees(np.angle(h_s)),
    )


def _mag_gap(bank: DroopBank, pair: str, omega: float) -> float:
    """Signed magnitude gap between two branches at one frequency.

    Positive once the higher-band branch has overtaken the lower one.
    """
    s = 1j * omega
    a2, a1, a0 = denominator_coeffs(bank)
    den = (a2 * s + a1) * s + a0
    num_a, num_p, num_s = numerator_coeffs(bank)

    def mag(c):
        return abs(((c[0] * s + c[1]) * s + c[2]) / den)

    if pair == "sp":
        return mag(num_s) - mag(num_p)
    return mag(num_p) - mag(num_a)


def _bisect_gap(bank: DroopBank, pair: str, lo: float, hi: float) -> float:
    f_lo = _mag_gap(bank, pair, lo)
    for _ in range(200):
        if (hi - lo) <= 1e-12 * lo:
            break
        mid = math.sqrt(lo * hi)
        if (_mag_gap(bank, pair, mid) > 0.0) == (f_lo > 0.0):
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def crossover_report(bank: DroopBank) -> CrossoverReport:
    """Locate the SC/PEMEL and PEMEL/AEL magnitude crossovers.

    Each crossover is bracketed on a wide log grid around omega0 and then
    polished by bisection to better than 1e-9 relative in omega. A pair of
    branches whose magnitudes never meet is reported as None.

    The PEMEL/AEL magnitude ratio is monotone in omega and equals
    alpha/beta at DC, so for k1 = 1 the crossover sits exactly at
    omega = 0 and is reported as 0.0.
    """
    a2, a1, a0 = denominator_coeffs(bank)
    omega0 = math.sqrt(a0 / a2)
    grid = np.logspace(
        math.log10(omega0) - _SCAN_DECADES,
        math.log10(omega0) + _SCAN_DECADES,
        _SCAN_POINTS,
    )

    def hunt(pair: str) -> float | None:
        gaps = np.array([_mag_gap(bank, pair, w) for w in grid])
        idx = np.nonzero(np.diff(np.signbit(gaps)))[0]
        if idx.size == 0:
            return None
        i = int(idx[0])
        return _bisect_gap(bank, pair, float(grid[i]), float(grid[i + 1]))

    omega_sp = hunt("sp")

    # |H_p| / |H_a| = alpha * sqrt(omega**2 gamma**2 + 1/beta**2): monotone
    # nondecreasing, so the DC value alone decides existence.
    dc_gap = (1.0 / bank.beta - 1.0 / bank.alpha) / (1.0 / bank.alpha + 1.0 / bank.beta)
    if dc_gap == 0.0:
        omega_pa: float | None = 0.0
    elif dc_gap > 0.0:
        omega_pa = None  # PEMEL already above AEL at DC, never crossed
    else:
        omega_pa = hunt("pa")

    return CrossoverReport(omega_sc_pemel=omega_sp, omega_pemel_ael=omega_pa)
