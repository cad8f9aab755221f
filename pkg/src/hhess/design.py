"""Gain synthesis and fleet aggregation for the hybrid droop bank.

The forward problem (given gains, what are omega0 and xi) lives in
:mod:`hhess.droop`. This module solves the inverse problem: pick the
handover time constant tau, the damping xi, and the two sharing indices
k1 (AEL:PEMEL steady state) and k2 (SC:PEMEL transient), and compute a
complete gain set in closed form. It also folds a heterogeneous fleet of
units into one equivalent bank and recalibrates the PEMEL dynamic gain
when an extra alkaline unit is added, so the plant-level (omega0, xi)
survives the expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .droop import DroopBank, SecondOrderChar, characteristic

__all__ = [
    "DesignTargets",
    "FleetSpec",
    "EquivalentBank",
    "InfeasibleDampingError",
    "NonIdenticalWashoutError",
    "alpha_from_rating",
    "synthesize",
    "aggregate",
    "expansion_recalibrate",
    "expanded_equivalent",
]

DEFAULT_V_REF = 750.0  # no-load bus set point used when none is given, V


class InfeasibleDampingError(ValueError):
    """Requested damping cannot be realized with the given k2."""


class NonIdenticalWashoutError(ValueError):
    """SC units with different washout corners cannot be aggregated."""


def _require_positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ValueError(f"{name} must be a finite number, got {value!r}")
    if value <= 0.0:
        raise ValueError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class DesignTargets:
    """Time-domain targets the synthesized bank must meet.

    ``dv_max``/``p_a_max`` are optional provenance for alpha; when they are
    given, alpha must equal their ratio (see :func:`alpha_from_rating`).
    """

    tau: float            # SC/PEMEL handover time constant, s
    xi: float             # damping ratio target
    k1: float             # AEL : PEMEL steady-state sharing ratio
    k2: float             # SC : PEMEL transient sharing ratio
    alpha: float          # AEL droop slope, V/W
    dv_max: float | None = None   # allowed bus voltage excursion, V
    p_a_max: float | None = None  # AEL power rating, W

    def __post_init__(self) -> None:
        for name in ("tau", "xi", "k1", "k2", "alpha"):
            _require_positive(name, getattr(self, name))
        if self.dv_max is not None:
            _require_positive("dv_max", self.dv_max)
        if self.p_a_max is not None:
            _require_positive("p_a_max", self.p_a_max)

    @classmethod
    def from_rating(
        cls, tau: float, xi: float, k1: float, k2: float,
        dv_max: float, p_a_max: float,
    ) -> "DesignTargets":
        return cls(
            tau=tau, xi=xi, k1=k1, k2=k2,
            alpha=alpha_from_rating(dv_max, p_a_max),
            dv_max=dv_max, p_a_max=p_a_max,
        )


@dataclass(frozen=True)
class FleetSpec:
    """Per-unit gains of a mixed fleet sharing one bus.

    AEL units carry only a static slope. PEMEL units carry (beta, gamma)
    pairs, SC units carry (zeta, k) pairs; the paired tuples must line up
    index by index.
    """

    ael_alphas: tuple[float, ...]
    pemel_betas: tuple[float, ...]
    pemel_gammas: tuple[float, ...]
    sc_zetas: tuple[float, ...]
    sc_ks: tuple[float, ...]

    def __post_init__(self) -> None:
        groups = {
            "ael_alphas": self.ael_alphas,
            "pemel_betas": self.pemel_betas,
            "pemel_gammas": self.pemel_gammas,
            "sc_zetas": self.sc_zetas,
            "sc_ks": self.sc_ks,
        }
        for name, values in groups.items():
            if len(values) == 0:
                raise ValueError(f"{name} must contain at least one unit")
            for i, value in enumerate(values):
                _require_positive(f"{name}[{i}]", value)
        if len(self.pemel_betas) != len(self.pemel_gammas):
            raise ValueError(
                "pemel_betas and pemel_gammas must pair up "
                f"({len(self.pemel_betas)} vs {len(self.pemel_gammas)})"
            )
        if len(self.sc_zetas) != len(self.sc_ks):
            raise ValueError(
                "sc_zetas and sc_ks must pair up "
                f"({len(self.sc_zetas)} vs {len(self.sc_ks)})"
            )


@dataclass(frozen=True)
class EquivalentBank:
    """Single-bank equivalent of a fleet (harmonic slopes, summed gains)."""

    alpha_eq: float  # V/W
    beta_eq: float   # V/W
    gamma_eq: float  # W*s/V
    zeta_eq: float   # W*s/V
    k_eq: float      # 1/s

    def to_droop_bank(self, v_ref: float = DEFAULT_V_REF) -> DroopBank:
        return DroopBank(
            alpha=self.alpha_eq, beta=self.beta_eq, gamma=self.gamma_eq,
            zeta=self.zeta_eq, k=self.k_eq, v_ref=v_ref,
        )


def alpha_from_rating(dv_max: float, p_a_max: float) -> float:
    """Static droop slope that spends dv_max volts at the AEL rating."""
    _require_positive("dv_max", dv_max)
    _require_positive("p_a_max", p_a_max)
    return dv_max / p_a_max


def synthesize(
    targets: DesignTargets, v_ref: float = DEFAULT_V_REF
) -> tuple[DroopBank, SecondOrderChar]:
    """Closed-form gain synthesis from (tau, xi, k1, k2, alpha).

    The handover target fixes omega_c = 1/tau; omega0 follows from the
    second-order high-pass cutoff relation, then gamma and k drop out of
    the characteristic-polynomial match. beta and zeta are pinned by the
    sharing indices (beta = alpha/k1, zeta = k2*gamma).

    Raises
    ------
    InfeasibleDampingError
        If ``xi**2 < 1/(1 + k2)``: the gamma formula would go complex. The
        message names the minimum feasible xi for the requested k2.
    """
    t = targets
    min_xi = 1.0 / math.sqrt(1.0 + t.k2)
    if t.xi * t.xi < 1.0 / (1.0 + t.k2):
        raise InfeasibleDampingError(
            f"xi = {t.xi} is infeasible for k2 = {t.k2}; "
            f"minimum feasible xi = 1/sqrt(1 + k2) = {min_xi:.12g}"
        )
    if t.dv_max is not None and t.p_a_max is not None:
        implied = t.dv_max / t.p_a_max
        if not math.isclose(t.alpha, implied, rel_tol=1e-12):
            raise ValueError(
                f"alpha = {t.alpha} contradicts dv_max/p_a_max = {implied}"
            )

    omega_c = 1.0 / t.tau
    omega0 = omega_c / math.sqrt(
        2.0 + 2.0 * t.xi * t.xi + math.sqrt(1.0 + 2.0 * t.xi * t.xi)
    )
    gamma = ((1.0 + t.k1) / (t.alpha * omega0)) * (
        t.xi - math.sqrt(t.xi * t.xi - 1.0 / (1.0 + t.k2))
    )
    k = omega0 * omega0 * t.alpha * gamma * (1.0 + t.k2) / (1.0 + t.k1)
    bank = DroopBank(
        alpha=t.alpha,
        beta=t.alpha / t.k1,
        gamma=gamma,
        zeta=t.k2 * gamma,
        k=k,
        v_ref=v_ref,
    )
    return bank, characteristic(bank)


def aggregate(fleet: FleetSpec) -> EquivalentBank:
    """Collapse a fleet into one equivalent bank.

    Static slopes combine harmonically (parallel conductances); the
    dynamic gains gamma and zeta add. The SC washout corner must be
    identical across units, otherwise the branch transfer functions do not
    share a common factor and no single-bank equivalent exists.
    """
    k0 = fleet.sc_ks[0]
    if any(k != k0 for k in fleet.sc_ks):
        raise NonIdenticalWashoutError(
            "cannot aggregate SC units with non-identical washout gains: "
            f"{list(fleet.sc_ks)}"
        )
    return EquivalentBank(
        alpha_eq=1.0 / sum(1.0 / a for a in fleet.ael_alphas),
        beta_eq=1.0 / sum(1.0 / b for b in fleet.pemel_betas),
        gamma_eq=sum(fleet.pemel_gammas),
        zeta_eq=sum(fleet.sc_zetas),
        k_eq=k0,
    )


def expansion_recalibrate(eq: EquivalentBank, alpha_new: float) -> float:
    """PEMEL gain to install alongside a new AEL unit of slope alpha_new.

    Scaling the added dynamic gain by alpha_eq/alpha_new keeps the product
    gamma_eq * alpha_eq invariant after the expansion, which is exactly
    what pins (omega0, xi) at their pre-expansion values.
    """
    _require_positive("alpha_new", alpha_new)
    return (eq.alpha_eq / alpha_new) * eq.gamma_eq


def expanded_equivalent(eq: EquivalentBank, alpha_new: float) -> EquivalentBank:
    """Equivalent bank after adding one AEL unit plus matched support.

    The new AEL slope joins the harmonic sum, the recalibrated gamma joins
    the plain sum, and the PEMEL/SC partners needed to hold k1 and k2 are
    sized from the existing sharing indices.
    """
    gamma_new = expansion_recalibrate(eq, alpha_new)
    k1 = eq.alpha_eq / eq.beta_eq
    k2 = eq.zeta_eq / eq.gamma_eq
    return EquivalentBank(
        alpha_eq=1.0 / (1.0 / eq.alpha_eq + 1.0 / alpha_new),
        beta_eq=1.0 / (1.0 / eq.beta_eq + k1 / alpha_new),
        gamma_eq=eq.gamma_eq + gamma_new,
        zeta_eq=eq.zeta_eq + k2 * gamma_new,
        k_eq=eq.k_eq,
    )
