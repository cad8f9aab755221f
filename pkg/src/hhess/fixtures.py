"""Reference parameter sets used by the CLI defaults and the test bench.

Two droop banks are provided: the laboratory bank used throughout the
verification suite (``laboratory_bank``), and a small textbook bank in the
overdamped regime (``textbook_bank``) that is convenient for hand checks.

Two calibrated marginal-stability operating points are provided for the
participation-threshold model:

* ``boundary_map_calibration`` — tuned so that sweeping grid power over
  54--62 kW against supercapacitor DC-link capacitance over 200--1000 uF
  yields exactly one stable/unstable transition per power column, with a
  monotonically increasing capacitance boundary (from roughly 280 uF at
  54 kW to roughly 504 uF at 62 kW).
* ``capacity_upgrade_calibration`` — tuned so that the plant is stable at
  77.4 kW with the stock 470 uF link, loses stability when throughput
  rises to 90.4 kW, and is restored by upgrading the link to 4700 uF.
"""

from __future__ import annotations

from .droop import DroopBank
from .mpt import DQ_POWER_FACTOR, MptCircuit, MptOperatingPoint, SweepSpec
from .sim import GridModel, InertiaParams, Scenario

# d-axis voltage amplitude of a 220 V RMS grid phase (220 * sqrt(2)).
GRID_VOLTAGE_AMPLITUDE = 311.13  # V


def laboratory_bank(v_ref: float = 750.0) -> DroopBank:
    """Droop bank of the reference laboratory plant.

    Identical AEL/PEMEL static gains (k1 = 1), supercapacitor sized at
    twice the PEMEL inertia (k2 = 2); natural frequency ~1.154 rad/s at
    damping ratio ~0.72.
    """
    return DroopBank(
        alpha=6.67e-4,  # V/W
        beta=6.67e-4,   # V/W
        gamma=750.0,    # W*s/V
        zeta=1500.0,    # W*s/V
        k=1.0,          # 1/s
        v_ref=v_ref,    # V
    )


def textbook_bank(v_ref: float = 750.0) -> DroopBank:
    """Small overdamped bank convenient for hand calculation.

    alpha = beta = 1/200, gamma = 100, zeta = 1/50, k = 1 gives
    omega0 ~ 2.0 rad/s and xi ~ 1.25.
    """
    return DroopBank(
        alpha=0.005,  # V/W
        beta=0.005,   # V/W
        gamma=100.0,  # W*s/V
        zeta=0.02,    # W*s/V
        k=1.0,        # 1/s
        v_ref=v_ref,  # V
    )


def default_inertia() -> InertiaParams:
    """Plant-side inertia emulation: J = 100, D = 3000, 9.3 kW baseline."""
    return InertiaParams(j=100.0, d=3000.0, f_ref=50.0, p_ref=9300.0)


def default_grid() -> GridModel:
    """Surrounding AC grid: stiff relative to the plant, balanced at 20 kW load."""
    return GridModel(m_g=500.0, d_g=6000.0, p_gen=29300.0)


def default_scenario() -> Scenario:
    """Flat 20 kW load for 30 s; storage starts half full at 100 kJ rating."""
    return Scenario(
        load_profile=((0.0, 20000.0),),
        t_end=30.0,
        dt=1e-3,
        soc0=0.5,
        e_rated=1e5,
    )


def _common_circuit(r_sr: float, c_dc2: float) -> MptCircuit:
    return MptCircuit(
        r_sr=r_sr,      # ohm
        l_r=0.01,       # H
        r_d1=0.2,       # ohm
        r_d2=0.2,       # ohm
        r_d3=0.2,       # ohm
        l_d1=1e-4,      # H
        l_d2=1e-4,      # H
        l_d3=1e-4,      # H
        r_fp=0.1,       # ohm
        r_fa=0.1,       # ohm
        r_fs=0.1,       # ohm
        l_fp=1e-3,      # H
        l_fa=1e-3,      # H
        l_fs=1e-3,      # H
        c_dcr=470e-6,   # F
        c_dc1=470e-6,   # F
        c_dc2=c_dc2,    # F
        c_dc3=470e-6,   # F
    )


def _common_op(d_grid: float, p_grid: float, i_a: float, duty_a: float) -> MptOperatingPoint:
    return MptOperatingPoint(
        k_ipr=0.1,
        k_ip1=0.0445,
        k_ip2=0.0178,
        k_ip3=0.0445,
        d_vi=3000.0,    # W/V
        d_grid=d_grid,  # W/V
        v_gdr=GRID_VOLTAGE_AMPLITUDE,
        i_drref=p_grid / (DQ_POWER_FACTOR * GRID_VOLTAGE_AMPLITUDE),
        v_dcr=750.0,
        v_dc=750.0,
        v_p=750.0,
        v_a=750.0,
        v_s=750.0,
        i_p=8.0,
        i_a=i_a,
        i_s=2.0,
        i_pref=8.0,
        i_aref=i_a,
        i_sref=2.0,
        duty_p=0.5,
        duty_a=duty_a,
        duty_s=0.5,
    )


def boundary_map_calibration() -> tuple[MptCircuit, MptOperatingPoint]:
    """Circuit and operating point for the power/capacitance boundary map.

    At the default 58 kW draw the plant sits on the stable side of the
    threshold with the stock 470 uF supercapacitor DC link.  The grid-side
    interaction term dominates the state-dependent threshold, so raising
    grid power erodes the margin until the capacitance boundary crosses
    the operating link size.
    """
    return _common_circuit(r_sr=3.0, c_dc2=470e-6), _common_op(
        d_grid=173.0, p_grid=58e3, i_a=60.0, duty_a=0.105
    )


def capacity_upgrade_calibration() -> tuple[MptCircuit, MptOperatingPoint]:
    """Circuit and operating point for the DC-link capacity-upgrade study.

    Stable at 77.4 kW with 470 uF, unstable at 90.4 kW with 470 uF, and
    stable again at 90.4 kW once the supercapacitor DC link is upgraded
    to 4700 uF.
    """
    return _common_circuit(r_sr=1.55, c_dc2=470e-6), _common_op(
        d_grid=270.0, p_grid=77.4e3, i_a=68.0, duty_a=0.08
    )


def default_sweep_spec() -> SweepSpec:
    """Default grid-power / capacitance window for stability sweeps."""
    return SweepSpec(
        p_grid_min=54e3,   # W
        p_grid_max=62e3,   # W
        p_grid_n=41,
        c_dc2_min=200e-6,  # F
        c_dc2_max=1000e-6,  # F
        c_dc2_n=41,
    )
