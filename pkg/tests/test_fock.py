import math

import numpy as np
import pytest

from hybrident.fock import (DensityOperator, DimensionError, ModeSpace, PureState, apply_local,
                            embed, hermitian_eigenvalues, partial_trace, partial_transpose,
                            project, reduced_density, reorder, tensor, tensor_all)
from hybrident.states import fock_state

from oracles import partial_transpose_loops, random_density, random_ket


def bell(dim=2):
    space = ModeSpace((dim, dim), ("A", "B"))
    v = np.zeros(dim * dim)
    v[space.basis_index((0, 1))] = v[space.basis_index((1, 0))] = 1 / math.sqrt(2)
    return PureState(space, v)


def test_mode_space_basics():
    s = ModeSpace.uniform(3, 4, ("a", "b", "c"))
    assert s.total_dim == 64
    assert s.dim_per_mode == 4
    assert s.index("b") == 1
    assert s.basis_index((1, 2, 3)) == 1 * 16 + 2 * 4 + 3
    with pytest.raises(DimensionError):
        ModeSpace((1, 4))
    with pytest.raises(DimensionError):
        ModeSpace((3, 3), ("x", "x"))
    with pytest.raises(DimensionError):
        s.index("z")


def test_tensor_vacua():
    v = tensor(fock_state(0, 5, "A"), fock_state(0, 5, "B"))
    assert v.space.labels == ("A", "B")
    assert v.amplitude(0, 0) == 1
    assert np.isclose(v.norm, 1)


def test_tensor_basis_index():
    v = tensor(fock_state(1, 4, "A"), fock_state(0, 4, "B"))
    assert np.argmax(np.abs(v.amplitudes)) == v.space.basis_index((1, 0)) == 4


def test_tensor_norm_multiplicative():
    rng = np.random.default_rng(1)
    a = PureState(ModeSpace((5,), ("A",)), random_ket(rng, 5))
    b = PureState(ModeSpace((3,), ("B",)), random_ket(rng, 3))
    assert tensor(a, b).is_normalized()


def test_tensor_label_clash_and_kind_mismatch():
    with pytest.raises(DimensionError):
        tensor(fock_state(0, 3, "A"), fock_state(0, 3, "A"))
    with pytest.raises(TypeError):
        tensor(fock_state(0, 3, "A"), fock_state(0, 3, "B").to_density())


def test_partial_trace_bell():
    r = partial_trace(bell().to_density(), ["A"])
    assert np.allclose(r.matrix, np.diag([0.5, 0.5]), atol=1e-12)


def test_partial_trace_product():
    rng = np.random.default_rng(2)
    ra = DensityOperator(ModeSpace((3,), ("A",)), random_density(rng, 3))
    rb = DensityOperator(ModeSpace((4,), ("B",)), random_density(rng, 4))
    rab = tensor(ra, rb)
    assert np.max(np.abs(partial_trace(rab, ["A"]).matrix - ra.matrix)) < 1e-10
    assert np.max(np.abs(partial_trace(rab, ["B"]).matrix - rb.matrix)) < 1e-10
    assert abs(partial_trace(rab, ["B"]).trace - rab.trace) < 1e-10


def test_partial_trace_requires_kept_mode():
    with pytest.raises(DimensionError):
        partial_trace(bell().to_density(), [])


def test_reduced_density_matches_partial_trace():
    rng = np.random.default_rng(3)
    space = ModeSpace((3, 2, 4), ("a", "b", "c"))
    psi = PureState(space, random_ket(rng, space.total_dim))
    for keep in (["a"], ["c", "a"], ["b", "c"]):
        full = reorder(partial_trace(psi.to_density(), keep), keep)
        assert np.allclose(reduced_density(psi, keep).matrix, full.matrix, atol=1e-12)


def test_partial_transpose_matches_loops():
    rng = np.random.default_rng(4)
    rho = random_density(rng, 6)
    op = DensityOperator(ModeSpace((2, 3), ("A", "B")), rho)
    for mode in (0, 1):
        assert np.allclose(partial_transpose(op, [mode]).matrix,
                           partial_transpose_loops(rho, (2, 3), mode))


def test_partial_transpose_product_spectrum_unchanged():
    rng = np.random.default_rng(5)
    ra = DensityOperator(ModeSpace((2,), ("A",)), random_density(rng, 2))
    rb = DensityOperator(ModeSpace((3,), ("B",)), random_density(rng, 3))
    rab = tensor(ra, rb)
    before = hermitian_eigenvalues(rab.matrix)
    after = hermitian_eigenvalues(partial_transpose(rab, ["A"]).matrix)
    assert np.allclose(before, after, atol=1e-12)


def test_partial_transpose_bell():
    ev = hermitian_eigenvalues(partial_transpose(bell().to_density(), ["A"]).matrix)
    assert np.isclose(ev[0], -0.5)
    assert np.isclose(np.sum(ev), 1.0)


def test_partial_transpose_involution():
    rng = np.random.default_rng(6)
    op = DensityOperator(ModeSpace((3, 3), ("A", "B")), random_density(rng, 9))
    twice = partial_transpose(partial_transpose(op, ["B"]), ["B"])
    assert np.array_equal(twice.matrix, op.matrix)


def test_hermitian_eigenvalues_examples():
    assert np.allclose(hermitian_eigenvalues(np.diag([0.7, 0.3])), [0.3, 0.7])
    assert np.allclose(hermitian_eigenvalues(np.array([[0, 1], [1, 0]])), [-1, 1])


def test_hermitian_eigenvalues_reconstruction():
    rng = np.random.default_rng(7)
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    m = g + g.conj().T
    ev = hermitian_eigenvalues(m)
    assert np.all(np.diff(ev) >= 0)
    assert abs(np.sum(ev) - np.trace(m).real) < 1e-8
    w, v = np.linalg.eigh(m)
    assert np.allclose(ev, w)
    assert np.linalg.norm(v @ np.diag(ev) @ v.conj().T - m) < 1e-8


def test_hermitian_eigenvalues_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))


def test_density_invariants():
    with pytest.raises(ValueError):
        DensityOperator(ModeSpace((2,)), np.array([[0.5, 1], [0, 0.5]]))
    blk = DensityOperator(ModeSpace((2,)), np.array([[0, 1], [0, 0]]), hermitian=False)
    assert not blk.hermitian
    rho = bell().to_density()
    assert rho.is_state()
    assert rho.min_eigenvalue() > -1e-12


def test_apply_local_matches_kron():
    rng = np.random.default_rng(8)
    space = ModeSpace((2, 3, 2), ("a", "b", "c"))
    psi = PureState(space, random_ket(rng, 12))
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    # op on (c, a): reorder to (c, a, b), apply op (x) 1, reorder back
    moved = reorder(psi, ["c", "a", "b"])
    ref = PureState(moved.space, np.kron(op, np.eye(3)) @ moved.amplitudes)
    got = apply_local(psi, op, ["c", "a"])
    assert np.allclose(reorder(got, ["c", "a", "b"]).amplitudes, ref.amplitudes)
    rho = apply_local(psi.to_density(), op, ["c", "a"])
    assert np.allclose(rho.matrix, got.to_density().matrix)


def test_project_pure_and_mixed_agree():
    rng = np.random.default_rng(9)
    space = ModeSpace((3, 4), ("A", "B"))
    psi = PureState(space, random_ket(rng, 12))
    red, prob = project(psi, "B", 2)
    red_m, prob_m = project(psi.to_density(), "B", 2)
    assert np.isclose(prob, prob_m)
    assert np.isclose(prob, np.sum(np.abs(psi.tensor()[:, 2]) ** 2))
    assert np.allclose(red.to_density().matrix, red_m.matrix)


def test_embed_preserves_content():
    psi = tensor_all(fock_state(1, 3, "A"), fock_state(2, 3, "B"))
    big = embed(psi, (5, 6))
    assert big.amplitude(1, 2) == 1
    assert np.isclose(big.norm, 1)
    with pytest.raises(DimensionError):
        embed(psi, (2, 6))
