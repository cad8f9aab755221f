"""Acceptance criteria for the whole laboratory, one test per criterion.

Each test prints a single ``criterion NN ... PASS/FAIL`` line with the
measured margin against the stated tolerance (run ``pytest -s`` to see
the lines as they appear). The criteria exercise the package end to end:
the branch-transfer algebra, the band-split limits, gain synthesis,
supercapacitor self-recovery, response ordering, the inertia coupling,
fleet aggregation, capacity expansion, the large-signal stability map,
and the integrator's convergence order.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from hhess.design import DesignTargets, FleetSpec, aggregate, expanded_equivalent, synthesize
from hhess.droop import (
    DroopBank,
    branch_transfer,
    characteristic,
    denominator_coeffs,
    numerator_coeffs,
)
from hhess.fixtures import (
    boundary_map_calibration,
    capacity_upgrade_calibration,
    default_grid,
    default_inertia,
    default_sweep_spec,
    laboratory_bank,
)
from hhess.freq import branch_response
from hhess.mpt import DQ_POWER_FACTOR, is_stable, sweep
from hhess.sim import (
    GridModel,
    InertiaParams,
    Scenario,
    realize_allocation_filter,
    simulate,
    step_metrics,
)


def _report(number: int, slug: str, ok: bool, detail: str) -> None:
    verdict = "PASS" if ok else "FAIL"
    line = f"criterion {number:02d} ({slug}): {verdict} — {detail}"
    print(line)
    assert ok, line


def _random_bank(rng: np.random.Generator) -> DroopBank:
    return DroopBank(
        alpha=10 ** rng.uniform(-5, -1),
        beta=10 ** rng.uniform(-5, -1),
        gamma=10 ** rng.uniform(0, 4),
        zeta=10 ** rng.uniform(0, 4),
        k=10 ** rng.uniform(-2, 2),
    )


def test_criterion_01_transfer_identity():
    # H_a + H_p + H_s == 1 on the imaginary axis: 1000 random banks by 500
    # log-spaced frequencies, |sum - 1| <= 1e-12, under 5 s.
    rng = np.random.default_rng(101)
    omega = np.logspace(-3, 4, 500)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        h_a, h_p, h_s = branch_response(_random_bank(rng), omega)
        worst = max(worst, float(np.max(np.abs(h_a + h_p + h_s - 1.0))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5.0
    _report(1, "transfer identity", ok,
            f"max |sum-1| = {worst:.3e} (tol 1e-12), {elapsed:.2f} s (cap 5 s)")


def test_criterion_02_band_split_limits():
    # DC: conductance halves for the laboratory bank, SC empty; infinity:
    # 1:2 PEMEL:SC split from the leading coefficients.
    bank = laboratory_bank()
    h_a0, h_p0, h_s0 = branch_transfer(bank, 0.0)
    a2 = denominator_coeffs(bank)[0]
    num_a, num_p, num_s = numerator_coeffs(bank)
    dc_err = max(abs(h_a0 - 0.5), abs(h_p0 - 0.5))
    hf_err = max(abs(num_p[0] / a2 - 1.0 / 3.0), abs(num_s[0] / a2 - 2.0 / 3.0))
    ok = dc_err <= 1e-12 and h_s0 == 0.0 and num_a[0] == 0.0 and hf_err <= 1e-9
    _report(2, "band split limits", ok,
            f"DC err = {dc_err:.3e} (tol 1e-12), H_s(0) = {h_s0},"
            f" HF err = {hf_err:.3e} (tol 1e-9)")


def test_criterion_03_synthesis_round_trip():
    # 10,000 random feasible targets; the synthesized gains must reproduce
    # (omega0, xi) to 1e-9 relative, under 10 s.
    rng = np.random.default_rng(303)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(10_000):
        k1 = rng.uniform(0.2, 5.0)
        k2 = rng.uniform(0.2, 5.0)
        xi = rng.uniform(1.0 / math.sqrt(1.0 + k2) + 1e-3, 2.0)
        tau = rng.uniform(0.1, 10.0)
        bank, _ = synthesize(DesignTargets(
            tau=tau, xi=xi, k1=k1, k2=k2, alpha=10 ** rng.uniform(-4, -2),
        ))
        omega0 = (1.0 / tau) / math.sqrt(
            2.0 + 2.0 * xi * xi + math.sqrt(1.0 + 2.0 * xi * xi)
        )
        got = characteristic(bank)
        worst = max(worst, abs(got.omega0 - omega0) / omega0, abs(got.xi - xi) / xi)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    _report(3, "synthesis round trip", ok,
            f"max rel err = {worst:.3e} (tol 1e-9), {elapsed:.2f} s (cap 10 s)")


def test_criterion_04_soc_self_recovery():
    # 100 random load steps: the SC charge excursion must die to 0.1% of
    # its own peak within 50/(xi*omega0) seconds of the step.
    rng = np.random.default_rng(777)
    worst = 0.0
    for _ in range(100):
        k2 = rng.uniform(1.0, 4.0)
        xi = rng.uniform(1.0 / math.sqrt(1.0 + k2) + 0.05, 1.2)
        bank, char = synthesize(DesignTargets(
            tau=rng.uniform(0.2, 1.2), xi=xi,
            k1=rng.uniform(0.5, 2.0), k2=k2,
            alpha=10 ** rng.uniform(-3.5, -2.5),
        ))
        horizon = 50.0 / (char.xi * char.omega0)
        dt = horizon / 4000.0
        step = rng.uniform(500.0, 5000.0) * rng.choice((-1.0, 1.0))
        scenario = Scenario(
            ((0.0, 20000.0), (5.0 * dt, 20000.0 + step)),
            t_end=5.0 * dt + horizon, dt=dt,
        )
        series = simulate(scenario, bank, default_inertia(), default_grid())
        peak = float(np.max(np.abs(series.delta_q)))
        worst = max(worst, abs(float(series.delta_q[-1])) / peak)
    ok = worst <= 1e-3
    _report(4, "SOC self-recovery", ok,
            f"max residual = {worst:.3e} of peak (tol 1e-3)")


def test_criterion_05_response_ordering():
    # For every upward total-power step: the SC peaks first, then the
    # PEMEL, then the AEL, and the PEMEL settles before the AEL.
    banks = [laboratory_bank()]
    for tau in (0.3, 0.6, 1.0, 2.0):
        for xi in (0.70, 0.72, 0.80, 0.90):
            banks.append(synthesize(DesignTargets(
                tau=tau, xi=xi, k1=1.0, k2=2.0, alpha=6.67e-4,
            ))[0])
    failures = []
    for i, bank in enumerate(banks):
        char = characteristic(bank)
        t_end = max(10.0, 25.0 / (char.xi * char.omega0))
        scenario = Scenario(
            ((0.0, 20000.0), (1.0, 18000.0)), t_end=1.0 + t_end, dt=1e-3,
        )
        series = simulate(scenario, bank, default_inertia(), default_grid())
        m_p = step_metrics(series, "p_p", t_event=1.0)
        m_a = step_metrics(series, "p_a", t_event=1.0)
        peaks_ordered = m_p.t_peak_s < m_p.t_peak_p < m_p.t_peak_a
        settling_ordered = m_p.settling_time < m_a.settling_time
        if not (peaks_ordered and settling_ordered
                and math.isfinite(m_p.settling_time)
                and math.isfinite(m_a.settling_time)):
            failures.append(i)
    ok = not failures
    _report(5, "response ordering", ok,
            f"{len(banks) - len(failures)}/{len(banks)} scenarios ordered"
            + (f", failing banks {failures}" if failures else ""))


def test_criterion_06_inertia_coupling():
    # Steady state after a load step: delta_f = -delta_P/(d_g + d) and the
    # plant picks up d * delta_f, both to 0.1%.
    inertia, grid = default_inertia(), default_grid()
    scenario = Scenario(((0.0, 20000.0), (2.0, 18000.0)), t_end=40.0, dt=1e-3)
    series = simulate(scenario, laboratory_bank(), inertia, grid)
    delta_p = 18000.0 - 20000.0
    df_expected = -delta_p / (grid.d_g + inertia.d)
    df = float(series.f[-1] - series.f[0])
    dpt = float(series.p_t[-1] - series.p_t[0])
    err_f = abs(df - df_expected) / abs(df_expected)
    err_p = abs(dpt - inertia.d * df) / abs(inertia.d * df)
    ok = err_f <= 1e-3 and err_p <= 1e-3
    _report(6, "inertia coupling", ok,
            f"delta_f err = {err_f:.3e}, delta_P_t err = {err_p:.3e} (tol 1e-3)")


def _unit_step_responses(num_rows, den, t):
    """Unit-step responses of (b2 s^2 + b1 s + b0)/(a2 s^2 + a1 s + a0)."""
    from scipy.linalg import expm

    a2, a1, a0 = den
    abar1, abar0 = a1 / a2, a0 / a2
    h = t[1] - t[0]
    aug = np.zeros((3, 3))
    aug[:2, :2] = np.array([[0.0, 1.0], [-abar0, -abar1]]) * h
    aug[1, 2] = h
    e = expm(aug)
    phi, gam = e[:2, :2], e[:2, 2]
    states = np.empty((len(t), 2))
    x = np.zeros(2)
    for i in range(len(t)):
        states[i] = x
        x = phi @ x + gam
    outs = []
    for b2, b1, b0 in num_rows:
        d = b2 / a2
        c = np.array([b0 / a2 - d * abar0, b1 / a2 - d * abar1])
        outs.append(states @ c + d)
    return outs


def test_criterion_07_fleet_aggregation_equivalence():
    # 2 AEL / 3 PEMEL / 2 SC units: branch step responses built from the
    # raw unit lists must match the aggregated single bank to 1e-6 of the
    # step magnitude.
    pytest.importorskip("scipy.linalg")
    ael = (1e-3, 2e-3)
    pem_beta = (1.5e-3, 2.5e-3, 2e-3)
    pem_gamma = (200.0, 300.0, 250.0)
    sc_zeta = (800.0, 700.0)
    k = 1.0
    # fleet-side coefficients straight from the unit lists
    g_a = sum(1.0 / a for a in ael)
    g_p = sum(1.0 / b for b in pem_beta)
    gam_sum = sum(pem_gamma)
    zet_sum = sum(sc_zeta)
    den_fleet = (zet_sum + gam_sum, k * gam_sum + g_a + g_p, k * (g_a + g_p))
    num_fleet = (
        (0.0, g_a, k * g_a),
        (gam_sum, k * gam_sum + g_p, k * g_p),
        (zet_sum, 0.0, 0.0),
    )
    eq_bank = aggregate(FleetSpec(
        ael_alphas=ael, pemel_betas=pem_beta, pemel_gammas=pem_gamma,
        sc_zetas=sc_zeta, sc_ks=(k, k),
    )).to_droop_bank()
    t = np.linspace(0.0, 30.0, 3001)
    fleet = _unit_step_responses(num_fleet, den_fleet, t)
    single = _unit_step_responses(numerator_coeffs(eq_bank), denominator_coeffs(eq_bank), t)
    worst = max(float(np.max(np.abs(f - s))) for f, s in zip(fleet, single))
    ok = worst <= 1e-6
    _report(7, "fleet aggregation", ok,
            f"max branch deviation = {worst:.3e} of the step (tol 1e-6)")


def test_criterion_08_expansion_preservation():
    # Adding an AEL with the matched PEMEL/SC recalibration must leave
    # omega0 and xi where they were, to 1e-9 relative.
    rng = np.random.default_rng(808)
    worst = 0.0
    for _ in range(100):
        fleet = FleetSpec(
            ael_alphas=tuple(10 ** rng.uniform(-4, -2)
                             for _ in range(rng.integers(1, 4))),
            pemel_betas=(10 ** rng.uniform(-4, -2),),
            pemel_gammas=(10 ** rng.uniform(1, 3),),
            sc_zetas=(10 ** rng.uniform(1, 3),),
            sc_ks=(10 ** rng.uniform(-1, 1),),
        )
        eq = aggregate(fleet)
        before = characteristic(eq.to_droop_bank())
        grown = expanded_equivalent(eq, eq.alpha_eq * 10 ** rng.uniform(-1, 1))
        after = characteristic(grown.to_droop_bank())
        worst = max(
            worst,
            abs(after.omega0 - before.omega0) / before.omega0,
            abs(after.xi - before.xi) / before.xi,
        )
    ok = worst <= 1e-9
    _report(8, "expansion preservation", ok,
            f"max rel drift = {worst:.3e} (tol 1e-9)")


def test_criterion_09_stability_threshold_map():
    # The capacity-upgrade story must order stable/unstable/stable, and the
    # 100x100 boundary map must have exactly one crossing per power level,
    # nondecreasing in power, inside 30 s.
    circuit, op = capacity_upgrade_calibration()

    def at_power(p):
        return dataclasses.replace(op, i_drref=p / (DQ_POWER_FACTOR * op.v_gdr))

    base = is_stable(circuit, at_power(77.4e3))
    overloaded = is_stable(circuit, at_power(90.4e3))
    upgraded = is_stable(dataclasses.replace(circuit, c_dc2=4700e-6), at_power(90.4e3))
    ordering_ok = base.stable and not overloaded.stable and upgraded.stable

    map_circuit, map_op = boundary_map_calibration()
    spec = dataclasses.replace(default_sweep_spec(), p_grid_n=100, c_dc2_n=100)
    start = time.perf_counter()
    plane = sweep(map_circuit, map_op, spec)
    elapsed = time.perf_counter() - start
    counts: dict[float, int] = {}
    for p, _ in plane.boundary:
        counts[p] = counts.get(p, 0) + 1
    single = len(counts) == 100 and all(c == 1 for c in counts.values())
    caps = [c for _, c in plane.boundary]
    monotone = all(b >= a for a, b in zip(caps, caps[1:]))
    ok = ordering_ok and single and monotone and elapsed < 30.0
    _report(9, "stability threshold map", ok,
            f"ordering {'ok' if ordering_ok else 'WRONG'},"
            f" {len(plane.boundary)} crossings on 100 columns"
            f" ({'all single' if single else 'NOT single'},"
            f" {'monotone' if monotone else 'NOT monotone'}),"
            f" {elapsed:.2f} s (cap 30 s)")


def test_criterion_10_integrator_convergence():
    # Empirical order of the fixed-step integrator against the exact
    # piecewise-constant-input flow, on dt = 4e-3, 2e-3, 1e-3, 5e-4:
    # every consecutive halving must show order >= 3.5.
    expm = pytest.importorskip("scipy.linalg").expm
    bank, _ = synthesize(DesignTargets(tau=0.01, xi=0.8, k1=1.0, k2=2.0, alpha=6.67e-4))
    inertia = InertiaParams(j=10.0, d=500.0, f_ref=50.0, p_ref=9300.0)
    grid = GridModel(m_g=30.0, d_g=1500.0, p_gen=29300.0)
    profile = ((0.0, 20000.0), (0.2, 18000.0))
    t_end = 1.2
    dts = (4e-3, 2e-3, 1e-3, 5e-4)

    # exact reference on the coarsest grid via the matrix exponential
    flt = realize_allocation_filter(bank)
    (_, _), (_, _), (cs0, cs1) = flt.c
    ds = flt.d[2]
    mg_j = grid.m_g + inertia.j
    dg_d = grid.d_g + inertia.d
    c_u = inertia.j / mg_j
    c_f = inertia.d - inertia.j * dg_d / mg_j
    a = np.array([
        [-dg_d / mg_j, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [c_f, -flt.a0, -flt.a1, 0.0],
        [ds * c_f, cs0, cs1, 0.0],
    ])
    h = dts[0]
    aug = np.zeros((8, 8))
    aug[:4, :4] = a * h
    aug[:4, 4:] = np.eye(4) * h
    e = expm(aug)
    phi, quad = e[:4, :4], e[:4, 4:]

    def drive(load):
        u = grid.p_gen - load - inertia.p_ref
        p_const = inertia.p_ref + c_u * u
        return u, np.array([u / mg_j, 0.0, p_const, ds * p_const])

    u0, w0 = drive(profile[0][1])
    _, w1 = drive(profile[1][1])
    z = np.array([u0 / dg_d, (inertia.p_ref + inertia.d * u0 / dg_d) / flt.a0, 0.0, 0.0])
    n_coarse = round(t_end / h)
    switch = round(profile[1][0] / h)
    f_exact = np.empty(n_coarse + 1)
    for i in range(n_coarse + 1):
        f_exact[i] = inertia.f_ref + z[0]
        z = phi @ z + quad @ (w0 if i < switch else w1)

    errors = []
    for dt in dts:
        series = simulate(Scenario(profile, t_end=t_end, dt=dt), bank, inertia, grid)
        stride = round(dts[0] / dt)
        errors.append(float(np.max(np.abs(series.f[::stride] - f_exact))))
    orders = [math.log2(e_c / e_f) for e_c, e_f in zip(errors, errors[1:])]
    ok = all(order >= 3.5 for order in orders)
    _report(10, "integrator convergence", ok,
            "orders " + ", ".join(f"{o:.2f}" for o in orders) + " (floor 3.5)")
