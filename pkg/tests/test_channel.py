import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdris_wpt._validation import ContractError
from bdris_wpt.channel import (
    CarrierPlan,
    Geometry,
    generate_channel_set,
    make_rng,
    nlos_frequency_response,
    path_gain,
    rician_combine,
    tap_profile,
    upa_grid,
    upa_los_vector,
)
from bdris_wpt.config import preset


def test_carrier_plan():
    plan = CarrierPlan(N=4)
    assert plan.delta_f == 2.5e6
    np.testing.assert_allclose(plan.frequencies, 2.4e9 + np.array([0, 2.5, 5, 7.5]) * 1e6)
    with pytest.raises(ContractError):
        CarrierPlan(N=0)


def test_geometry_validation():
    with pytest.raises(ContractError):
        Geometry(M=0)
    with pytest.raises(ContractError):
        Geometry(theta_I=2.0)


def test_path_gain():
    assert path_gain(2.0) == pytest.approx(1e-4 / 4)
    with pytest.raises(ContractError):
        path_gain(0.0)


def test_upa_grid_and_steering():
    m_x, m_y = upa_grid(16)
    assert set(m_x) == set(range(4)) and set(m_y) == set(range(4))
    a = upa_los_vector(16, np.pi / 6, np.pi / 6, 2.4e9, 0.0625)
    np.testing.assert_allclose(np.abs(a), 1.0)
    assert a[0] == 1


@given(st.integers(1, 40), st.floats(0.05, 20.0))
def test_tap_profile_normalized(L, alpha):
    taps = tap_profile(L, alpha, 10e6, make_rng(0, 0, 0))
    assert taps.powers.sum() == pytest.approx(1.0)
    assert taps.delays[-1] == pytest.approx(0.0 if L == 1 else 2 / (alpha * 10e6))


def test_large_alpha_is_frequency_flat():
    freqs = CarrierPlan(N=8).frequencies
    rng = make_rng(3, 0, 0)
    flat = tap_profile(18, 1000.0, 10e6, rng)
    gains = np.ones((18, 1))
    h = nlos_frequency_response(flat, gains, freqs)[:, 0]
    assert np.ptp(np.abs(h)) < 1e-2 * np.abs(h).mean()


def test_rician_limits():
    los, nlos = np.ones(3), 2 * np.ones(3)
    np.testing.assert_allclose(rician_combine(np.inf, los, nlos), los)
    np.testing.assert_allclose(rician_combine(0.0, los, nlos), nlos)
    with pytest.raises(ContractError):
        rician_combine(-1.0, los, nlos)


def test_generate_shapes_and_determinism():
    cfg = preset("desk").replace(M=8, N=4)
    a = generate_channel_set(cfg, 5, 2)
    b = generate_channel_set(cfg, 5, 2)
    c = generate_channel_set(cfg, 5, 3)
    assert a.h_I.shape == (4, 8) and a.h_R.shape == (4, 8) and a.h_D is None
    np.testing.assert_array_equal(a.h_I, b.h_I)
    assert not np.allclose(a.h_I, c.h_I)


def test_realizations_independent_of_order():
    cfg = preset("desk").replace(M=4, N=2)
    later = generate_channel_set(cfg, 1, 7)
    for r in range(7):
        generate_channel_set(cfg, 1, r)
    np.testing.assert_array_equal(generate_channel_set(cfg, 1, 7).h_R, later.h_R)


def test_los_channel_is_deterministic_with_path_loss():
    cfg = preset("desk").replace(M=4, N=2, kappa=np.inf)
    a = generate_channel_set(cfg, 0)
    b = generate_channel_set(cfg, 99)
    np.testing.assert_allclose(a.h_I, b.h_I)
    np.testing.assert_allclose(np.abs(a.h_I), np.sqrt(path_gain(2.0)))


def test_direct_link():
    import dataclasses

    cfg = preset("desk").replace(M=4, N=3)
    cfg = cfg.replace(geometry=dataclasses.replace(cfg.geometry, d_D=3.0))
    ch = generate_channel_set(cfg, 0)
    assert ch.h_D.shape == (3,)
