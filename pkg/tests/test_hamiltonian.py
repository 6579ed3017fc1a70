import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kron_hamiltonian, snapshot_schedule

from cavityswap.hamiltonian import HamiltonianModel, LossParams, assemble, cavity_operator, laser_operator
from cavityswap.hilbert import block_partition, build_basis
from cavityswap.pulses import build_schedule

complex_rabi = st.builds(lambda r, phi: r * np.exp(1j * phi), st.floats(0.0, 30.0), st.floats(-np.pi, np.pi))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from("0a"), st.sampled_from("0a"), complex_rabi, complex_rabi,
       st.floats(0.0, 60.0), st.floats(0.0, 60.0))
def test_matches_tensor_product_construction(l1, l2, w1, w2, g1, g2):
    b = build_basis(3)
    s = snapshot_schedule(l1, l2, w1, w2, g1, g2)
    h = assemble(b, s, 0.0).matrix
    assert np.allclose(h, kron_hamiltonian(b, s, 0.0), atol=1e-12)


@pytest.mark.parametrize("protocol", ["swap8", "swap7", "cnot11"])
def test_protocol_matrices_match_oracle_with_loss(protocol):
    s = build_schedule(protocol)
    b = build_basis(3, include_u=s.requires_u)
    loss = LossParams(0.3, 0.2, 0.1)
    model = HamiltonianModel(b, s, loss)
    for t in np.linspace(s.t_start, s.t_end, 17):
        assert np.allclose(model.matrix(t), kron_hamiltonian(b, s, t, 0.3, 0.2, 0.1), atol=1e-12)


def test_lossless_is_hermitian_and_lossy_is_not(swap8, basis):
    t = swap8.steps[1].center
    h = assemble(basis, swap8, t)
    assert h.hermitian and np.allclose(h.matrix, h.matrix.conj().T)
    h2 = assemble(basis, swap8, t, LossParams(0.1, 0.0, 0.0))
    assert not h2.hermitian
    assert np.allclose(h2.matrix - h.matrix, np.diag(np.diag(h2.matrix - h.matrix)))


def test_loss_diagonal_values(basis, swap8):
    h = assemble(basis, swap8, swap8.t_start, LossParams(0.2, 0.0, 0.06)).matrix
    i = basis.index_of("ee;2")
    assert h[i, i].imag == pytest.approx(-0.5 * (2 * 0.2 + 2 * 0.06))
    assert h[basis.index_of("01;0"), basis.index_of("01;0")] == 0


def test_cavity_elements_scale_with_sqrt_n(basis):
    c = cavity_operator(basis, 3.0, 5.0)
    assert c[basis.index_of("e1;1"), basis.index_of("11;2")] == pytest.approx(3.0 * np.sqrt(2))
    assert c[basis.index_of("1e;2"), basis.index_of("11;3")] == pytest.approx(5.0 * np.sqrt(3))
    assert c[basis.index_of("e0;0"), basis.index_of("10;1")] == pytest.approx(3.0)


@pytest.mark.parametrize("protocol", ["swap8", "swap7"])
def test_charge_conserved_without_u_couplings(protocol):
    s = build_schedule(protocol)
    b = build_basis(3)
    q = np.diag(b.charges().astype(float))
    model = HamiltonianModel(b, s)
    for t in np.linspace(s.t_start, s.t_end, 9):
        h = model.matrix(t)
        assert np.abs(h @ q - q @ h).max() == 0.0
    parts = block_partition(b)
    labels = model.connectivity()
    for idx in parts.values():
        # no component straddles two charge blocks
        others = np.setdiff1d(np.arange(b.dim), idx)
        assert not np.isin(labels[idx], labels[others]).any()


def test_u_couplings_break_charge_but_keep_components(cnot11, basis_u):
    model = HamiltonianModel(basis_u, cnot11)
    q = np.diag(basis_u.charges().astype(float))
    h = model.matrix(cnot11.steps[0].center)
    assert np.abs(h @ q - q @ h).max() > 0
    comp = model.active_indices([basis_u.index_of("01;0")])
    assert basis_u.index_of("0a;0") in comp
    assert len(comp) < basis_u.dim


def test_u_pulse_needs_u_basis(cnot11, basis):
    u_pulse = next(p for p in cnot11.pulses if p.transition.needs_u)
    with pytest.raises(ValueError):
        laser_operator(basis, u_pulse)


def test_time_outside_window_rejected(swap8, basis):
    with pytest.raises(ValueError, match="outside"):
        assemble(basis, swap8, swap8.t_end + 1.0)


def test_diagonal_shift(basis, swap8):
    shift = np.linspace(0, 1, basis.dim)
    h0 = HamiltonianModel(basis, swap8).matrix(0.0)
    h1 = HamiltonianModel(basis, swap8, diagonal_shift=shift).matrix(0.0)
    assert np.allclose(h1 - h0, np.diag(shift))
