"""Droop laws and power-allocation transfer functions for a hybrid DC bus.

Three converter families share one DC bus through voltage droop:

* alkaline electrolyzers (AEL) with a static resistive droop,
* PEM electrolyzers (PEMEL) with a dynamic integral droop (first-order lag
  in the power-to-voltage path),
* supercapacitors (SC) with a capacitive integral droop plus a washout.

Eliminating the bus voltage from the three laws yields one second-order
polynomial ``D(s)`` that is common to every branch power transfer function.
This module owns the coefficient arrays of those transfer functions, the
(omega0, xi) characteristic pair, and the steady-state sharing indices.
All functions are pure; parameter sets are frozen dataclasses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "DroopBank",
    "BranchPowers",
    "SecondOrderChar",
    "SharingIndices",
    "PoleEvaluationError",
    "ael_bus_voltage",
    "denominator_coeffs",
    "numerator_coeffs",
    "branch_transfer",
    "characteristic",
    "sharing_indices",
    "steady_state_powers",
]

# Relative tolerance used to refuse transfer-function evaluation at (or
# numerically on top of) a pole of D(s).
_POLE_RTOL = 1e-9


class PoleEvaluationError(ValueError):
    """Raised when a transfer function is evaluated at a root of D(s)."""


@dataclass(frozen=True)
class DroopBank:
    """One complete set of droop gains sharing a DC bus.

    All gains must be strictly positive; the constructor rejects anything
    else so that downstream algebra can assume a Hurwitz denominator.
    """

    alpha: float   # AEL static droop slope, V/W
    beta: float    # PEMEL steady-state droop slope, V/W
    gamma: float   # PEMEL dynamic droop gain, W*s/V
    zeta: float    # SC capacitive droop gain, W*s/V
    k: float       # SC washout corner, 1/s
    v_ref: float = 750.0  # no-load bus voltage set point, V

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "zeta", "k", "v_ref"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
            if value <= 0.0:
                raise ValueError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class BranchPowers:
    """One simultaneous split of total power across the three branches."""

    p_t: float   # total hybrid power, W
    p_a: float   # AEL branch power, W
    p_p: float   # PEMEL branch power, W
    p_s: float   # SC branch power, W
    v_dc: float  # DC bus voltage, V

    def balance_residual(self) -> float:
        """Signed mismatch ``(p_a + p_p + p_s) - p_t`` in W."""
        return (self.p_a + self.p_p + self.p_s) - self.p_t


@dataclass(frozen=True)
class SecondOrderChar:
    """Second-order characteristic of the allocation dynamics."""

    omega0: float   # natural frequency, rad/s
    xi: float       # damping ratio, dimensionless
    omega_c: float  # SC/PEMEL handover (cutoff) frequency, rad/s
    tau: float      # handover time constant 1/omega_c, s


@dataclass(frozen=True)
class SharingIndices:
    """Steady-state and transient sharing ratios of the bank."""

    k1: float  # AEL : PEMEL steady-state ratio, alpha/beta
    k2: float  # SC : PEMEL transient ratio, zeta/gamma


def ael_bus_voltage(bank: DroopBank, p_a: float) -> float:
    """Bus voltage implied by the static AEL droop at branch power p_a."""
    return bank.v_ref + bank.alpha * p_a


def denominator_coeffs(bank: DroopBank) -> tuple[float, float, float]:
    """Coefficients (a2, a1, a0) of the shared denominator D(s).

    ``D(s) = a2*s**2 + a1*s + a0`` with all three coefficients strictly
    positive for a valid bank, hence D is always Hurwitz.
    """
    s_inv = 1.0 / bank.alpha + 1.0 / bank.beta
    a2 = bank.zeta + bank.gamma
    a1 = bank.k * bank.gamma + s_inv
    a0 = bank.k * s_inv
    return a2, a1, a0


def numerator_coeffs(
    bank: DroopBank,
) -> tuple[tuple[float, float, float], ...]:
    """Numerator coefficient triples (b2, b1, b0) for (AEL, PEMEL, SC).

    The three numerators sum to ``denominator_coeffs`` term by term, which
    is what guarantees the allocation identity H_a + H_p + H_s = 1.
    """
    num_a = (0.0, 1.0 / bank.alpha, bank.k / bank.alpha)
    num_p = (
        bank.gamma,
        bank.k * bank.gamma + 1.0 / bank.beta,
        bank.k / bank.beta,
    )
    num_s = (bank.zeta, 0.0, 0.0)
    return num_a, num_p, num_s


def _polyval(coeffs: tuple[float, float, float], s: complex) -> complex:
    c2, c1, c0 = coeffs
    return (c2 * s + c1) * s + c0


def branch_transfer(bank: DroopBank, s: complex) -> tuple[complex, complex, complex]:
    """Evaluate the three branch power transfer functions at one point.

    Parameters
    ----------
    bank:
        Droop gain set sharing the bus.
    s:
        Complex frequency in rad/s. Purely imaginary values give the
        frequency response; ``s = 0`` gives the steady-state split.

    Returns
    -------
    (h_a, h_p, h_s):
        Complex gains from total power to AEL, PEMEL, and SC branch power.

    Raises
    ------
    PoleEvaluationError
        If ``s`` lies on (or numerically indistinguishable from) a root of
        the shared denominator.
    """
    s = complex(s)
    a2, a1, a0 = denominator_coeffs(bank)
    den = _polyval((a2, a1, a0), s)
    mag_s = abs(s)
    scale = a2 * mag_s * mag_s + a1 * mag_s + a0
    if abs(den) <= _POLE_RTOL * scale:
        raise PoleEvaluationError(
            f"transfer function evaluated at a pole of D(s): s = {s}"
        )
    num_a, num_p, num_s = numerator_coeffs(bank)
    return (
        _polyval(num_a, s) / den,
        _polyval(num_p, s) / den,
        _polyval(num_s, s) / den,
    )


def characteristic(bank: DroopBank) -> SecondOrderChar:
    """Natural frequency and damping of the shared allocation dynamics.

    Normalizing D(s) to monic form gives ``s**2 + 2*xi*omega0*s + omega0**2``
    with::

        omega0 = sqrt(k * (1/alpha + 1/beta) / (zeta + gamma))
        xi     = (k*gamma + 1/alpha + 1/beta)
                 / (2 * sqrt((zeta + gamma) * k * (1/alpha + 1/beta)))

    ``omega_c`` and ``tau`` report the -3 dB handover point of the SC
    high-pass path implied by (omega0, xi); see :func:`hhess.design.synthesize`
    for the inverse direction.
    """
    a2, a1, a0 = denominator_coeffs(bank)
    omega0 = math.sqrt(a0 / a2)
    xi = a1 / (2.0 * math.sqrt(a2 * a0))
    omega_c = omega0 * math.sqrt(2.0 + 2.0 * xi * xi + math.sqrt(1.0 + 2.0 * xi * xi))
    return SecondOrderChar(omega0=omega0, xi=xi, omega_c=omega_c, tau=1.0 / omega_c)


def sharing_indices(bank: DroopBank) -> SharingIndices:
    """Sharing ratios k1 = alpha/beta and k2 = zeta/gamma."""
    return SharingIndices(k1=bank.alpha / bank.beta, k2=bank.zeta / bank.gamma)


def steady_state_powers(bank: DroopBank, p_t: float) -> BranchPowers:
    """DC split of a constant total power across the three branches.

    The SC carries nothing in steady state; AEL and PEMEL divide p_t in
    proportion to their droop conductances 1/alpha and 1/beta.
    """
    g_a = 1.0 / bank.alpha
    g_p = 1.0 / bank.beta
    p_a = p_t * g_a / (g_a + g_p)
    p_p = p_t * g_p / (g_a + g_p)
    return BranchPowers(
        p_t=p_t,
        p_a=p_a,
        p_p=p_p,
        p_s=0.0,
        v_dc=ael_bus_voltage(bank, p_a),
    )
