"""Wigner functions, entanglement negativity, fidelity and hybrid block maps.

Phase-space coordinates are measured in units of the vacuum quadrature
standard deviation sigma_0, so x = 2 Re(beta) and p = 2 Im(beta) for a
coherent state |beta>.  Wigner values are reported as displaced parity,
``W(x, p) = Tr[D(beta)^dag op D(beta) Parity]``, i.e. the Wigner function
multiplied by 2 pi sigma_0^2: the vacuum gives +1 at the origin and |1>
gives -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .fock import (DensityOperator, ModeSpace, PureState, TruncationError, as_density,
                   hermitian_eigenvalues, partial_trace, partial_transpose, reorder)

MAX_DISPLACEMENT_DIM = 1200
DEFAULT_GRID = np.linspace(-4.0, 4.0, 81)


@lru_cache(maxsize=8)
def _displacement_eig(n: int):
    # i (a^dag - a) is Hermitian; exp(r (a^dag - a)) = V exp(-i r L) V^dag
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)
    h = 1j * (a.T - a)
    lam, v = np.linalg.eigh(h)
    return lam, v


def _padded_dim(dim: int, gamma_max: float) -> int:
    n = int(math.ceil((math.sqrt(dim) + gamma_max + 7.0) ** 2)) + 10
    n = max(n, dim + 20)
    # round up so nearby grids share a cached eigendecomposition
    n = int(math.ceil(n / 50.0) * 50)
    if n > MAX_DISPLACEMENT_DIM:
        raise TruncationError(f"displacement |gamma|={gamma_max:.2f} needs {n} Fock levels")
    return n


def displacement_matrices(gammas: np.ndarray, dim: int) -> np.ndarray:
    """Matrices of D(gamma) restricted to the first ``dim`` Fock levels.

    The generator is exponentiated in an enlarged truncation large enough
    that the kept matrix elements are unaffected by the cut.
    """
    gammas = np.atleast_1d(np.asarray(gammas, dtype=complex))
    n = _padded_dim(dim, float(np.max(np.abs(gammas))) if gammas.size else 0.0)
    lam, v = _displacement_eig(n)
    vd = v[:dim]
    r = np.abs(gammas)
    phi = np.angle(gammas)
    levels = np.arange(dim)
    out = np.empty((gammas.size, dim, dim), dtype=complex)
    chunk = max(1, int(2e7 // (dim * n)))
    for s in range(0, gammas.size, chunk):
        sl = slice(s, s + chunk)
        ph = np.exp(-1j * np.outer(r[sl], lam))                    # (P, N)
        m = np.matmul(vd[None, :, :] * ph[:, None, :], vd.conj().T)
        rot = np.exp(1j * np.outer(phi[sl], levels))              # (P, dim)
        out[sl] = rot[:, :, None] * m * rot.conj()[:, None, :]
    return out


def _single_mode_matrix(op) -> np.ndarray:
    if isinstance(op, PureState):
        op = op.to_density()
    if isinstance(op, DensityOperator):
        if op.space.mode_count != 1:
            raise ValueError("Wigner evaluation needs a single-mode operator")
        return np.asarray(op.matrix)
    m = np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square single-mode matrix")
    return m


def wigner_values(op, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Displaced-parity Wigner values at the points (x[i], p[i])."""
    m = _single_mode_matrix(op)
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    d2 = _parity_kernel(x, p, m.shape[0])
    return _contract(m, d2).reshape(x.shape)


def _parity_kernel(x: np.ndarray, p: np.ndarray, dim: int) -> np.ndarray:
    # D(beta) Parity D(beta)^dag = D(2 beta) Parity
    beta = 0.5 * (x + 1j * p)
    d2 = displacement_matrices(2.0 * beta.reshape(-1), dim)
    return d2 * ((-1.0) ** np.arange(dim))[None, None, :]


def _contract(m: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # Tr[op K] = sum_mn op_mn K_nm
    return np.einsum("mn,pnm->p", m, kernel)


def wigner_value(op, x: float, p: float) -> complex:
    return complex(wigner_values(op, np.array([x]), np.array([p]))[0])


@dataclass(frozen=True)
class WignerGrid:
    """Wigner values on a Cartesian grid; ``values[i, j]`` sits at (x_axis[i], p_axis[j])."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    def integral(self) -> complex:
        """Riemann sum of W dx dp; equals the operator trace for a wide enough grid."""
        dx = self.x_axis[1] - self.x_axis[0]
        dp = self.p_axis[1] - self.p_axis[0]
        return complex(np.sum(self.values) * dx * dp / (2 * math.pi))

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    def x_centroid(self) -> float:
        w = self.values.real
        return float(np.sum(w * self.x_axis[:, None]) / np.sum(w))


def wigner_grid(op, x_axis: Optional[Sequence[float]] = None,
                p_axis: Optional[Sequence[float]] = None) -> WignerGrid:
    x_axis = DEFAULT_GRID if x_axis is None else np.asarray(x_axis, dtype=float)
    p_axis = DEFAULT_GRID if p_axis is None else np.asarray(p_axis, dtype=float)
    xx, pp = np.meshgrid(x_axis, p_axis, indexing="ij")
    return WignerGrid(x_axis, p_axis, wigner_values(op, xx, pp))


def parity_expectation(op) -> float:
    m = _single_mode_matrix(op)
    return float(np.real(np.sum(np.diag(m) * (-1.0) ** np.arange(m.shape[0]))))


def wigner_origin_negativity(rho, mode=None) -> float:
    """Origin value of the Wigner function (displaced-parity scale) of one mode.

    Multi-mode inputs are first reduced to ``mode``.  The operator is
    normalized to unit trace, so for a state this is sum_n (-1)^n <n|rho|n>.
    """
    rho = as_density(rho)
    if rho.space.mode_count > 1:
        if mode is None:
            raise ValueError("mode is required for a multi-mode operator")
        rho = partial_trace(rho, [mode])
    tr = rho.trace.real
    if tr == 0:
        raise ValueError("operator has zero trace")
    return parity_expectation(rho) / tr


def entanglement_negativity(rho, bipartition: Sequence = ("A",)) -> float:
    """(1/2) sum(|l_i| - l_i) over the spectrum of the partial transpose on ``bipartition``."""
    rho = as_density(rho)
    if isinstance(bipartition, (str, int)):
        bipartition = [bipartition]
    ev = hermitian_eigenvalues(partial_transpose(rho, bipartition).matrix)
    return float(0.5 * np.sum(np.abs(ev) - ev))


def fidelity(a: PureState, b: Union[PureState, DensityOperator]) -> float:
    """|<a|b>|^2 for pure ``b`` or <a|rho|a> for mixed ``b``."""
    if a.space.dims != b.space.dims:
        raise ValueError(f"dimension mismatch {a.space.dims} vs {b.space.dims}")
    if isinstance(b, PureState):
        return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    v = a.amplitudes
    return float(np.vdot(v, b.matrix @ v).real)


def mixed_fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    w, v = np.linalg.eigh(rho.matrix)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    ev = np.linalg.eigvalsh(sq @ sigma.matrix @ sq)
    return float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2)


def dv_basis_vectors(basis: str, levels: int) -> tuple[list[str], np.ndarray]:
    """Labels and row vectors of the DV basis used for block maps."""
    if basis == "number":
        return [str(k) for k in range(levels)], np.eye(levels)
    if basis == "rotated":
        if levels != 2:
            raise ValueError("the rotated basis is defined for a qubit DV mode")
        s = 1 / math.sqrt(2)
        return ["+", "-"], np.array([[s, s], [s, -s]])
    raise ValueError(f"unknown DV basis {basis!r}")


def dv_block(rho, k: int, l: int, dv_mode="A", cv_mode="B", basis: str = "number",
             levels: Optional[int] = None) -> DensityOperator:
    """The CV-mode operator <k|rho|l> for DV basis vectors k, l."""
    rho = reorder(as_density(rho), [dv_mode, cv_mode])
    d_dv, d_cv = rho.space.dims
    levels = d_dv if levels is None else levels
    _, vecs = dv_basis_vectors(basis, levels)
    bra = np.zeros(d_dv, dtype=complex)
    ket = np.zeros(d_dv, dtype=complex)
    bra[:levels] = vecs[k]
    ket[:levels] = vecs[l]
    t = rho.tensor()
    blk = np.einsum("i,iajb,j->ab", bra.conj(), t, ket)
    space = ModeSpace((d_cv,), (rho.space.labels[1],))
    return DensityOperator(space, blk, hermitian=(k == l))


def block_origin_value(rho, k: int, dv_mode="A", cv_mode="B", basis: str = "number") -> float:
    """Origin Wigner value of the normalized diagonal block <k|rho|k>."""
    return wigner_origin_negativity(dv_block(rho, k, k, dv_mode, cv_mode, basis))


@dataclass(frozen=True)
class HybridBlockGrid:
    """Wigner maps of every block <k|rho|l> of a DV (x) CV state."""

    basis: str
    labels: tuple[str, ...]
    blocks: dict = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.labels)

    def __getitem__(self, kl) -> WignerGrid:
        return self.blocks[kl]

    def conjugate_asymmetry(self) -> float:
        """max |W_kl - conj(W_lk)| over all blocks and grid points."""
        worst = 0.0
        for (k, l), g in self.blocks.items():
            diff = np.abs(g.values - np.conj(self.blocks[(l, k)].values))
            worst = max(worst, float(np.max(diff)))
        return worst


def hybrid_blocks(rho, dv_basis: str = "number", x_axis=None, p_axis=None,
                  dv_mode="A", cv_mode="B", levels: Optional[int] = None) -> HybridBlockGrid:
    rho = as_density(rho)
    d_dv = rho.space.dims[rho.space.index(dv_mode)]
    levels = d_dv if levels is None else levels
    if levels not in (2, 3) or levels > d_dv:
        raise ValueError(f"hybrid blocks need a DV dimension of 2 or 3, got {levels}")
    labels, _ = dv_basis_vectors(dv_basis, levels)
    x_axis = DEFAULT_GRID if x_axis is None else np.asarray(x_axis, dtype=float)
    p_axis = DEFAULT_GRID if p_axis is None else np.asarray(p_axis, dtype=float)
    xx, pp = np.meshgrid(x_axis, p_axis, indexing="ij")
    d_cv = rho.space.dims[rho.space.index(cv_mode)]
    kernel = _parity_kernel(xx, pp, d_cv)
    blocks = {}
    for k in range(levels):
        for l in range(levels):
            blk = dv_block(rho, k, l, dv_mode, cv_mode, dv_basis, levels)
            vals = _contract(np.asarray(blk.matrix), kernel).reshape(xx.shape)
            blocks[(k, l)] = WignerGrid(x_axis, p_axis, vals)
    return HybridBlockGrid(dv_basis, tuple(labels), blocks)


@dataclass(frozen=True)
class NegativityReport:
    wigner_origin: float
    entanglement_negativity: float
    herald_probability: float
