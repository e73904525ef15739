import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from hybrident.channels import LossSpec, apply_losses, loss_channel, phase_noise_channel
from hybrident.fock import DensityOperator, ModeSpace, partial_trace, partial_transpose
from hybrident.metrics import entanglement_negativity, wigner_origin_negativity
from hybrident.schemes import perturbative_scheme
from hybrident.states import squeeze_unitary, squeezed_vacuum_dim

from oracles import binomial_loss, random_density, squeezed_vacuum

seeds = st.integers(0, 2 ** 32 - 1)
etas = st.floats(0.0, 1.0)
small_dims = st.integers(2, 5)


def random_op(seed, dims, labels=None):
    rng = np.random.default_rng(seed)
    labels = labels or tuple("AB"[: len(dims)])
    return DensityOperator(ModeSpace(tuple(dims), labels), random_density(rng, int(np.prod(dims))))


@given(seeds, st.integers(2, 9), etas, etas)
def test_loss_composition_law(seed, dim, e1, e2):
    rho = random_op(seed, (dim,), ("B",))
    twice = loss_channel(loss_channel(rho, "B", e1), "B", e2)
    once = loss_channel(rho, "B", e1 * e2)
    assert np.max(np.abs(twice.matrix - once.matrix)) < 1e-9


@given(seeds, st.integers(2, 9), etas)
def test_loss_matches_binomial_formula(seed, dim, eta):
    rho = random_op(seed, (dim,), ("B",))
    assert np.allclose(loss_channel(rho, "B", eta).matrix, binomial_loss(rho.matrix, eta), atol=1e-10)


@given(seeds, small_dims, small_dims, st.sampled_from(["A", "B"]))
def test_partial_transpose_involution(seed, da, db, mode):
    rho = random_op(seed, (da, db))
    twice = partial_transpose(partial_transpose(rho, [mode]), [mode])
    assert np.array_equal(twice.matrix, rho.matrix)
    assert abs(np.trace(partial_transpose(rho, [mode]).matrix) - np.trace(rho.matrix)) < 1e-12


@given(seeds, small_dims, small_dims, etas, etas, st.floats(0.0, 1.0))
def test_channels_preserve_trace(seed, da, db, ea, eb, sigma):
    rho = random_op(seed, (da, db))
    out = phase_noise_channel(apply_losses(rho, LossSpec(ea, eb)), "A", sigma)
    assert abs(out.trace - 1) < 1e-8
    assert out.min_eigenvalue() > -1e-8
    assert abs(partial_trace(out, ["B"]).trace - 1) < 1e-8


@given(seeds, small_dims, small_dims, st.integers(1, 4))
def test_negativity_bounds(seed, da, db, rank):
    rng = np.random.default_rng(seed)
    m = random_density(rng, da * db, rank=min(rank, da * db))
    rho = DensityOperator(ModeSpace((da, db), ("A", "B")), m)
    n = entanglement_negativity(rho)
    assert -1e-12 <= n <= (min(da, db) - 1) / 2 + 1e-12
    assert abs(entanglement_negativity(rho, ["B"]) - n) < 1e-10


@given(seeds, st.integers(2, 12))
def test_wigner_origin_bounded(seed, dim):
    rho = random_op(seed, (dim,), ("B",))
    assert -1 - 1e-12 <= wigner_origin_negativity(rho) <= 1 + 1e-12


@given(st.floats(0.02, 1.0))
def test_squeezed_vacuum_converges_with_truncation(zeta):
    d = squeezed_vacuum_dim(zeta)
    col = squeeze_unitary(zeta, d)[:, 0]
    big = squeeze_unitary(zeta, d + 10)[:, 0]
    assert np.max(np.abs(big[:d] - col)) < 1e-8
    assert np.allclose(col, squeezed_vacuum(zeta, d), atol=1e-8)


@given(st.sampled_from(["qubit", "enhanced", "qutrit"]), st.floats(0.05, 0.8),
       st.floats(0.3, 2.0), etas)
def test_metrics_converge_with_truncation(scheme, zeta, mu, eta):
    d = squeezed_vacuum_dim(zeta, extra=6)
    loss = LossSpec(eta, eta)
    a = perturbative_scheme(scheme, mu, zeta, d, loss=loss).state
    b = perturbative_scheme(scheme, mu, zeta, d + 10, loss=loss).state
    assert abs(entanglement_negativity(a) - entanglement_negativity(b)) < 1e-6
    wa = wigner_origin_negativity(partial_trace(a, ["B"]))
    wb = wigner_origin_negativity(partial_trace(b, ["B"]))
    assert abs(wa - wb) < 1e-6
    assert math.isfinite(wa)
