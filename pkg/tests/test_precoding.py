import numpy as np
import pytest

from dmafocus.dma import DmaState
from dmafocus.precoding import build_energy_matrix, max_eigvec, precoder_for
from dmafocus.propagation import WaveguideMatrix
from dmafocus.scenario import Receiver, Scenario, build_geometry
from dmafocus.solver import harvested_energies

from oracles import dense_weight_matrix, direct_weighted_energy, random_instance


def random_psd_instance(rng, n_d=4, n_e=3, m=2):
    phases, w, channels, h_diag, alphas, zeta = random_instance(rng, n_d, n_e, m)
    state = DmaState(phases=phases)
    wg = WaveguideMatrix(diagonal=h_diag)
    g = build_energy_matrix(state, channels, alphas, wg, zeta)
    return g, state, channels, h_diag, alphas, zeta


def test_energy_matrix_scalar_case():
    state = DmaState(phases=np.array([[0.3]]))
    wg = WaveguideMatrix(diagonal=np.array([0.9 * np.exp(0.2j)]))
    a = np.array([[1.0 + 2.0j]])
    g = build_energy_matrix(state, a, np.array([1.0]), wg, 0.5).matrix
    expected = 0.5 * np.abs(a[0, 0].conj() * wg.diagonal[0] * state.q_flat[0]) ** 2
    assert g.shape == (1, 1)
    assert g[0, 0].real == pytest.approx(expected, rel=1e-12)
    assert g[0, 0] >= 0


def test_energy_matrix_zero_weights():
    rng = np.random.default_rng(0)
    phases, w, channels, h_diag, alphas, zeta = random_instance(rng, 3, 2, 2)
    g = build_energy_matrix(
        DmaState(phases=phases), channels, np.zeros(2),
        WaveguideMatrix(diagonal=h_diag), zeta,
    ).matrix
    np.testing.assert_array_equal(g, 0.0)


def test_energy_matrix_quadratic_matches_direct():
    rng = np.random.default_rng(1)
    g, state, channels, h_diag, alphas, zeta = random_psd_instance(rng)
    for _ in range(100):
        w = rng.normal(size=4) + 1j * rng.normal(size=4)
        lhs = float(np.real(w.conj() @ g.matrix @ w))
        rhs = direct_weighted_energy(channels, h_diag, state.phases, w, alphas, zeta)
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_energy_matrix_hermitian_psd_low_rank():
    rng = np.random.default_rng(2)
    g, *_ = random_psd_instance(rng, n_d=5, m=2)
    m = g.matrix
    np.testing.assert_allclose(m, m.conj().T, atol=1e-12)
    eigs = np.linalg.eigvalsh(m)
    assert eigs.min() >= -1e-12
    assert np.sum(eigs > 1e-12 * eigs.max()) <= 2  # rank <= number of receivers


def test_max_eigvec_diagonal():
    res = max_eigvec(np.diag([2.0, 1.0]).astype(complex))
    assert res.converged
    assert res.eigenvalue == pytest.approx(2.0, rel=1e-10)
    assert np.abs(res.vector[0]) == pytest.approx(1.0, rel=1e-9)


def test_max_eigvec_rank_one():
    rng = np.random.default_rng(3)
    z = rng.normal(size=6) + 1j * rng.normal(size=6)
    g = 0.4 * np.outer(z, z.conj())
    res = max_eigvec(g)
    assert res.converged
    assert res.eigenvalue == pytest.approx(0.4 * np.linalg.norm(z) ** 2, rel=1e-10)
    overlap = np.abs(np.vdot(res.vector, z / np.linalg.norm(z)))
    assert overlap == pytest.approx(1.0, rel=1e-9)


def test_max_eigvec_against_dense_oracle():
    rng = np.random.default_rng(4)
    for _ in range(20):
        z = rng.normal(size=(3, 8)) + 1j * rng.normal(size=(3, 8))
        alphas = rng.uniform(0.1, 1.0, 3)
        g = sum(a * np.outer(row, row.conj()) for a, row in zip(alphas, z))
        g = 0.5 * (g + g.conj().T)
        res = max_eigvec(g)
        assert res.converged
        assert res.eigenvalue == pytest.approx(np.linalg.eigvalsh(g)[-1], rel=1e-8)


def test_max_eigvec_zero_matrix():
    res = max_eigvec(np.zeros((4, 4), dtype=complex))
    assert res.eigenvalue == 0.0
    np.testing.assert_allclose(res.vector, np.eye(4)[0])


def test_max_eigvec_ones_orthogonal_to_dominant():
    # dominant eigenvector orthogonal to the all-ones start
    v = np.array([1.0, -1.0]) / np.sqrt(2)
    g = 3.0 * np.outer(v, v) + 1.0 * np.eye(2)
    res = max_eigvec(g.astype(complex))
    assert res.converged
    assert res.eigenvalue == pytest.approx(4.0, rel=1e-8)


def small_scenario(weights=(1.0,)):
    g = build_geometry(1.2e9, 0.3)
    zs = (1.0, 1.4, 2.1)
    receivers = tuple(
        Receiver((0.05 * i, -0.02 * i, zs[i % 3]), w) for i, w in enumerate(weights)
    )
    return Scenario(geometry=g, receivers=receivers, p_max_w=2.0, conversion_efficiency=0.5)


def test_precoder_power_budget():
    sc = small_scenario()
    rng = np.random.default_rng(5)
    state = DmaState(phases=rng.uniform(0, 2 * np.pi, (2, 2)))
    design = precoder_for(state, sc)
    assert design.precoder.power == pytest.approx(sc.p_max_w, rel=1e-12)
    assert not design.unservable


def test_precoder_single_receiver_closed_form():
    sc = small_scenario()
    rng = np.random.default_rng(6)
    state = DmaState(phases=rng.uniform(0, 2 * np.pi, (2, 2)))
    design = precoder_for(state, sc)
    # weighted objective equals lambda_max * P, and equals zeta*alpha*P*||Q^H H^H a||^2
    from dmafocus.propagation import channel_matrix, waveguide_matrix

    a = channel_matrix(sc.geometry, sc.receiver_positions)[0]
    h = waveguide_matrix(sc.geometry)
    u = state.apply_adjoint(h.apply_adjoint(a))
    expected = sc.conversion_efficiency * np.linalg.norm(u) ** 2
    assert design.eigenvalue == pytest.approx(expected, rel=1e-10)
    achieved = harvested_energies(state, design.precoder, sc)[0]
    assert achieved == pytest.approx(design.eigenvalue * sc.p_max_w, rel=1e-10)


def test_precoder_weight_scale_invariance():
    sc2 = small_scenario(weights=(0.4, 0.6))
    sc_scaled = Scenario(
        geometry=sc2.geometry,
        receivers=tuple(Receiver(r.position_m, 5.0 * r.weight) for r in sc2.receivers),
        p_max_w=sc2.p_max_w,
        conversion_efficiency=sc2.conversion_efficiency,
    )
    rng = np.random.default_rng(7)
    state = DmaState(phases=rng.uniform(0, 2 * np.pi, (2, 2)))
    w1 = precoder_for(state, sc2).precoder.w
    w2 = precoder_for(state, sc_scaled).precoder.w
    # equal up to a global unit-modulus factor
    phase = np.vdot(w1, w2)
    phase /= np.abs(phase)
    np.testing.assert_allclose(w2, phase * w1, atol=1e-8)


def test_rayleigh_dominance_certificate():
    rng = np.random.default_rng(8)
    g, *_ = random_psd_instance(rng, n_d=6, m=3)
    res = max_eigvec(g.matrix)
    for _ in range(100):
        u = rng.normal(size=6) + 1j * rng.normal(size=6)
        u /= np.linalg.norm(u)
        assert np.real(u.conj() @ g.matrix @ u) <= res.eigenvalue * (1 + 1e-10) + 1e-15


def test_phase_gauge_invariance_of_energy():
    sc = small_scenario()
    rng = np.random.default_rng(9)
    state = DmaState(phases=rng.uniform(0, 2 * np.pi, (2, 2)))
    design = precoder_for(state, sc)
    base = harvested_energies(state, design.precoder, sc)
    for theta in rng.uniform(0, 2 * np.pi, 5):
        from dmafocus.precoding import Precoder

        rotated = Precoder(w=np.exp(1j * theta) * design.precoder.w)
        np.testing.assert_allclose(
            harvested_energies(state, rotated, sc), base, rtol=1e-10
        )


def test_weighted_sum_consistency():
    sc = small_scenario(weights=(0.3, 0.7))
    rng = np.random.default_rng(10)
    state = DmaState(phases=rng.uniform(0, 2 * np.pi, (2, 2)))
    design = precoder_for(state, sc)
    w = design.precoder.w
    from dmafocus.propagation import channel_matrix, waveguide_matrix

    g = build_energy_matrix(
        state, channel_matrix(sc.geometry, sc.receiver_positions),
        sc.receiver_weights, waveguide_matrix(sc.geometry), sc.conversion_efficiency,
    ).matrix
    lhs = float(np.real(w.conj() @ g @ w))
    energies = harvested_energies(state, design.precoder, sc)
    rhs = float(np.dot(sc.receiver_weights, energies))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_unservable_zero_matrix():
    # all-zero priorities make the energy matrix exactly zero
    sc = small_scenario(weights=(0.0, 0.0))
    rng = np.random.default_rng(11)
    state = DmaState(phases=rng.uniform(0, 2 * np.pi, (2, 2)))
    design = precoder_for(state, sc)
    assert design.unservable
    np.testing.assert_allclose(np.abs(design.precoder.w), [np.sqrt(2.0), 0.0], atol=1e-12)
