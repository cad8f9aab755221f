import math

import numpy as np
import pytest

from hhess.droop import (
    DroopBank,
    PoleEvaluationError,
    ael_bus_voltage,
    branch_transfer,
    characteristic,
    denominator_coeffs,
    numerator_coeffs,
    sharing_indices,
    steady_state_powers,
)
from hhess.fixtures import laboratory_bank, textbook_bank

# Closed-form characteristic values for the two fixture banks, computed
# directly from omega0 = sqrt(k*(1/a+1/b)/(z+g)) and
# xi = (k*g + 1/a + 1/b) / (2*sqrt((z+g)*k*(1/a+1/b))).
LABORATORY_OMEGA0 = 1.1544119714527465
LABORATORY_XI = 0.7215796329061824
LABORATORY_TAU = 0.40971312458351494
TEXTBOOK_OMEGA0 = 1.999800029995001
TEXTBOOK_XI = 1.2498750187468755

RNG_SEED = 20260819


def random_bank(rng):
    return DroopBank(
        alpha=10 ** rng.uniform(-5, -1),
        beta=10 ** rng.uniform(-5, -1),
        gamma=10 ** rng.uniform(0, 4),
        zeta=10 ** rng.uniform(0, 4),
        k=10 ** rng.uniform(-2, 2),
    )


def test_gains_must_be_positive():
    with pytest.raises(ValueError, match="alpha"):
        DroopBank(alpha=0.0, beta=1e-3, gamma=100.0, zeta=100.0, k=1.0)
    with pytest.raises(ValueError, match="zeta"):
        DroopBank(alpha=1e-3, beta=1e-3, gamma=100.0, zeta=-5.0, k=1.0)
    with pytest.raises(ValueError, match="finite"):
        DroopBank(alpha=1e-3, beta=1e-3, gamma=math.nan, zeta=100.0, k=1.0)


def test_ael_bus_voltage_is_the_static_droop_line():
    bank = laboratory_bank()
    assert ael_bus_voltage(bank, 0.0) == bank.v_ref
    assert ael_bus_voltage(bank, 4650.0) == pytest.approx(750.0 + 6.67e-4 * 4650.0)


def test_denominator_coefficients_laboratory_bank():
    a2, a1, a0 = denominator_coeffs(laboratory_bank())
    inv = 2.0 / 6.67e-4
    assert a2 == pytest.approx(2250.0, rel=1e-15)
    assert a1 == pytest.approx(750.0 + inv, rel=1e-15)
    assert a0 == pytest.approx(inv, rel=1e-15)


def test_numerators_sum_to_denominator_coefficientwise():
    rng = np.random.default_rng(RNG_SEED)
    for _ in range(50):
        bank = random_bank(rng)
        den = denominator_coeffs(bank)
        nums = numerator_coeffs(bank)
        for order in range(3):
            total = sum(num[order] for num in nums)
            assert total == pytest.approx(den[order], rel=1e-12, abs=1e-300)


def test_branch_transfer_identity_at_random_points():
    rng = np.random.default_rng(RNG_SEED + 1)
    for _ in range(200):
        bank = random_bank(rng)
        s = complex(rng.uniform(-2.0, 5.0), rng.uniform(-100.0, 100.0))
        h_a, h_p, h_s = branch_transfer(bank, s)
        assert abs(h_a + h_p + h_s - 1.0) < 1e-12


def test_branch_transfer_dc_split():
    h_a, h_p, h_s = branch_transfer(laboratory_bank(), 0.0)
    assert h_a == pytest.approx(0.5, abs=1e-15)
    assert h_p == pytest.approx(0.5, abs=1e-15)
    assert h_s == 0.0


def test_branch_transfer_rejects_pole():
    bank = laboratory_bank()
    a2, a1, a0 = denominator_coeffs(bank)
    pole = np.roots([a2, a1, a0])[0]
    with pytest.raises(PoleEvaluationError):
        branch_transfer(bank, complex(pole))


def test_characteristic_frozen_values():
    char = characteristic(laboratory_bank())
    assert char.omega0 == pytest.approx(LABORATORY_OMEGA0, rel=1e-12)
    assert char.xi == pytest.approx(LABORATORY_XI, rel=1e-12)
    assert char.tau == pytest.approx(LABORATORY_TAU, rel=1e-12)
    assert char.omega_c * char.tau == pytest.approx(1.0, rel=1e-15)

    char = characteristic(textbook_bank())
    assert char.omega0 == pytest.approx(TEXTBOOK_OMEGA0, rel=1e-12)
    assert char.xi == pytest.approx(TEXTBOOK_XI, rel=1e-12)


def test_sharing_indices_laboratory_bank():
    ratios = sharing_indices(laboratory_bank())
    assert ratios.k1 == pytest.approx(1.0, rel=1e-15)
    assert ratios.k2 == pytest.approx(2.0, rel=1e-15)


def test_steady_state_split_follows_conductances():
    bank = DroopBank(alpha=1e-3, beta=2e-3, gamma=100.0, zeta=200.0, k=1.0)
    powers = steady_state_powers(bank, 9000.0)
    assert powers.p_a == pytest.approx(6000.0, rel=1e-12)
    assert powers.p_p == pytest.approx(3000.0, rel=1e-12)
    assert powers.p_s == 0.0
    assert powers.balance_residual() == pytest.approx(0.0, abs=1e-9)
    assert powers.v_dc == pytest.approx(750.0 + 1e-3 * 6000.0, rel=1e-12)


def test_steady_state_split_matches_dc_transfer():
    rng = np.random.default_rng(RNG_SEED + 2)
    for _ in range(20):
        bank = random_bank(rng)
        h_a, h_p, _ = branch_transfer(bank, 0.0)
        powers = steady_state_powers(bank, 1.0)
        assert powers.p_a == pytest.approx(h_a.real, rel=1e-12)
        assert powers.p_p == pytest.approx(h_p.real, rel=1e-12)
