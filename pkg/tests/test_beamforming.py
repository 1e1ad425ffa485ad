import numpy as np
import pytest
from sklearn.base import clone

from bdris_wpt._validation import ContractError
from bdris_wpt.beamforming import (
    BDRISOptimizer,
    BeamformerConfig,
    alternating_optimize,
    build_diagonal_data,
    build_sdr_data,
    dris_baseline,
    dris_los,
    initial_impedance,
    it_bdris_inner,
    lag_values,
    linear_coefficient,
    sca_bdris_step,
    sdr_objective,
    taylor_coefficient,
    theta_to_matrix,
    with_direct_link,
)
from bdris_wpt.channel import generate_channel_set
from bdris_wpt.config import preset
from bdris_wpt.rectenna import idc
from bdris_wpt.waveform import smf_init
from bdris_wpt.ris import (
    Topology,
    cascade_channel,
    halfvec,
    is_feasible,
    scattering_from_impedance,
    symmetric_unitary_projection,
    total_channel,
    unvec,
)

from conftest import complex_normal, rayleigh_channels

SMALL = dict(K_rand=500, max_outer=4)


def feasible_theta(rng, M):
    X = rng.standard_normal((M, M)) * 50
    return scattering_from_impedance(1j * (X + X.T) / 2)


def test_lifted_objective_equals_dc_current():
    rng = np.random.default_rng(0)
    h_I, h_R = rayleigh_channels(0, 4, 3)
    s = complex_normal(rng, 4)
    theta = feasible_theta(rng, 3)
    data = build_sdr_data(h_I, h_R, s)
    v = halfvec(theta)
    X = np.outer(v, v.conj())
    ref = idc(s, cascade_channel(theta, h_R, h_I))
    assert sdr_objective(data, X) == pytest.approx(ref, rel=1e-10)
    np.testing.assert_allclose(lag_values(data, X), lag_values(data, v), atol=1e-12)
    np.testing.assert_allclose(theta_to_matrix(v, data), theta)


def test_lifted_objective_with_direct_link():
    rng = np.random.default_rng(1)
    h_I, h_R = rayleigh_channels(1, 3, 2)
    h_D, s = complex_normal(rng, 3), complex_normal(rng, 3)
    theta = feasible_theta(rng, 2)
    data = build_sdr_data(h_I, h_R, s, h_D)
    g = np.exp(0.3j)
    v = np.concatenate([halfvec(theta), [1.0]]) * g
    assert sdr_objective(data, v) == pytest.approx(idc(s, total_channel(theta, h_R, h_I, h_D)), rel=1e-10)
    np.testing.assert_allclose(theta_to_matrix(v, data), theta, atol=1e-12)


def test_diagonal_lifting():
    rng = np.random.default_rng(2)
    h_I, h_R = rayleigh_channels(2, 2, 4)
    s = complex_normal(rng, 2)
    v = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
    data = build_diagonal_data(h_I, h_R, s)
    assert sdr_objective(data, v) == pytest.approx(idc(s, cascade_channel(np.diag(v), h_R, h_I)), rel=1e-10)


def test_taylor_coefficient_matches_finite_difference():
    rng = np.random.default_rng(3)
    M = 3
    h_I, h_R = rayleigh_channels(3, 2, M)
    s = complex_normal(rng, 2)
    X = rng.standard_normal((M, M)) * 30
    Z = 1j * (X + X.T) / 2
    u, i0 = taylor_coefficient(Z, h_I, h_R, s)
    D = rng.standard_normal((M, M))
    D = 1j * (D + D.T) / 2
    eps = 1e-5

    def exact(Zp):
        return idc(s, cascade_channel(scattering_from_impedance(Zp), h_R, h_I))

    fd = (exact(Z + eps * D) - exact(Z - eps * D)) / (2 * eps)
    assert fd == pytest.approx(np.real(np.vdot(u, halfvec(D))), rel=1e-5)
    assert i0 == pytest.approx(exact(Z))


def test_sca_linear_coefficient_matches_finite_difference():
    rng = np.random.default_rng(4)
    M = 3
    h_I, h_R = rayleigh_channels(4, 3, M)
    s = complex_normal(rng, 3)
    theta = feasible_theta(rng, M)
    W, i0 = linear_coefficient(theta, h_I, h_R, s)
    D = complex_normal(rng, M, M)
    D = D + D.T
    eps = 1e-6
    f = lambda t: idc(s, cascade_channel(t, h_R, h_I))  # noqa: E731
    fd = (f(theta + eps * D) - f(theta - eps * D)) / (2 * eps)
    assert fd == pytest.approx(2 * np.real(np.trace(W @ D)), rel=1e-5)


def test_sca_step_stays_in_unit_ball():
    rng = np.random.default_rng(5)
    h_I, h_R = rayleigh_channels(5, 2, 3)
    s = complex_normal(rng, 2)
    theta0 = 1j * np.eye(3)
    theta, info = sca_bdris_step(theta0, h_I, h_R, s, sigma=1e-5, iota=1.0)
    assert not info["failed"]
    np.testing.assert_allclose(theta, theta.T, atol=1e-12)
    assert np.linalg.norm(theta, 2) <= 1 + 1e-9
    mapped = symmetric_unitary_projection(theta)
    assert is_feasible(mapped)


def test_it_inner_ascent_and_topology():
    rng = np.random.default_rng(6)
    M = 4
    h_I, h_R = rayleigh_channels(6, 3, M)
    s = complex_normal(rng, 3)
    Z, trace, info = it_bdris_inner(initial_impedance(M), h_I, h_R, s, max_inner=200)
    assert np.all(np.diff(trace) >= -1e-12 * np.abs(trace[1:]))
    assert np.allclose(Z.real, 0) and np.allclose(Z, Z.T)
    Zd, _, _ = it_bdris_inner(initial_impedance(M), h_I, h_R, s, topology=Topology.diagonal(M), max_inner=50)
    np.testing.assert_allclose(Zd - np.diag(np.diag(Zd)), 0.0)
    with pytest.raises(ContractError):
        it_bdris_inner(np.eye(M) * (1 + 1j), h_I, h_R, s)


def test_dris_los_aligns_reference_subcarrier():
    h_I, h_R = rayleigh_channels(7, 3, 5)
    theta = dris_los(h_I, h_R)
    h = cascade_channel(theta, h_R, h_I)
    assert abs(h[1]) == pytest.approx(np.sum(np.abs(h_R[1]) * np.abs(h_I[1])))
    assert is_feasible(theta)
    with pytest.raises(ContractError):
        dris_baseline(h_I, h_R, np.ones(3), mode="bogus")


def test_config_validation():
    with pytest.raises(ContractError):
        BeamformerConfig(kind="nope")
    with pytest.raises(ContractError):
        BeamformerConfig(gamma=1.5)


@pytest.mark.parametrize("kind", ["sdr", "sdp", "sca", "it", "dris-sdr", "dris-los"])
def test_every_kind_is_feasible_and_monotone(kind):
    h_I, h_R = rayleigh_channels(8, 2, 3)
    rep = alternating_optimize(h_I, h_R, 1.0, BeamformerConfig(kind=kind, **SMALL), seed=0)
    trace = np.array(rep.trace)
    assert np.all(np.diff(trace) >= -1e-9 * trace[1:])
    assert rep.unitarity_residual <= 1e-8 and rep.symmetry_residual <= 1e-9
    assert rep.idc == pytest.approx(rep.exact_idc(preset("desk").rectifier), rel=1e-9)
    h0 = cascade_channel(1j * np.eye(3), h_R, h_I)
    assert rep.trace[0] == pytest.approx(idc(smf_init(h0, 1.0), h0), rel=1e-12)


def test_single_element_reduces_to_phase():
    h_I, h_R = rayleigh_channels(9, 4, 1)
    vals = [alternating_optimize(h_I, h_R, 1.0, BeamformerConfig(kind=k, **SMALL)).idc for k in ("sdr", "dris-sdr")]
    assert vals[0] == pytest.approx(vals[1], rel=1e-6)


def test_zero_direct_link_matches_no_direct_link():
    h_I, h_R = rayleigh_channels(10, 2, 3)
    cfg = BeamformerConfig(kind="sdr", **SMALL)
    a = alternating_optimize(h_I, h_R, 1.0, cfg, seed=3)
    b = with_direct_link(h_I, h_R, np.zeros(2), 1.0, cfg, seed=3)
    assert a.trace == b.trace
    np.testing.assert_array_equal(a.theta, b.theta)
    with pytest.raises(ContractError):
        with_direct_link(h_I, h_R, None, 1.0)


def test_direct_link_run_is_feasible():
    rng = np.random.default_rng(11)
    h_I, h_R = rayleigh_channels(11, 2, 3)
    rep = with_direct_link(h_I, h_R, 0.3 * complex_normal(rng, 2), 1.0, BeamformerConfig(kind="sdr", **SMALL))
    assert is_feasible(rep.theta)
    assert np.all(np.diff(rep.trace) >= -1e-9 * np.array(rep.trace[1:]))


def test_estimator_api():
    cfg = preset("desk").replace(M=3, N=2)
    ch = generate_channel_set(cfg, 0)
    est = BDRISOptimizer(algorithm="dris", K_rand=200, max_outer=3)
    assert est.get_params()["algorithm"] == "dris"
    est.fit(ch)
    assert est.predict(ch).shape == (2,)
    assert est.score(ch) == pytest.approx(est.trace_[-1], rel=1e-9)
    est2 = clone(est).set_params(algorithm="it").fit((ch.h_I, ch.h_R))
    assert is_feasible(est2.scattering_matrix_)
    with pytest.raises(ContractError):
        est.fit("not a channel")


def test_outer_loop_is_seeded():
    h_I, h_R = rayleigh_channels(12, 3, 3)
    cfg = BeamformerConfig(kind="sdr", **SMALL)
    a = alternating_optimize(h_I, h_R, 1.0, cfg, seed=4)
    b = alternating_optimize(h_I, h_R, 1.0, cfg, seed=4)
    assert a.trace == b.trace


def test_unvec_roundtrip_of_result():
    h_I, h_R = rayleigh_channels(13, 1, 3)
    rep = alternating_optimize(h_I, h_R, 1.0, BeamformerConfig(kind="sdr", **SMALL))
    np.testing.assert_allclose(unvec(halfvec(rep.theta), 3), rep.theta)
