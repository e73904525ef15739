"""Photon loss and Gaussian phase noise."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .fock import DensityOperator, PureState, apply_local, as_density
from .states import loss_kraus, phase_rotation

QUADRATURE_NODES = 21
QUADRATURE_TOL = 1e-8


class QuadratureError(RuntimeError):
    """Gauss-Hermite average did not converge under node doubling."""


@dataclass(frozen=True)
class LossSpec:
    """Lumped intensity transmissions of the DV mode (A) and CV mode (B)."""

    eta_A: float = 1.0
    eta_B: float = 1.0

    def __post_init__(self):
        for name, v in (("eta_A", self.eta_A), ("eta_B", self.eta_B)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    @classmethod
    def symmetric(cls, eta: float) -> "LossSpec":
        return cls(eta, eta)

    @property
    def lossless(self) -> bool:
        return self.eta_A == 1.0 and self.eta_B == 1.0


@dataclass(frozen=True)
class PhaseNoiseSpec:
    sigma: float = 0.0  # radians

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    @classmethod
    def from_degrees(cls, deg: float) -> "PhaseNoiseSpec":
        return cls(math.radians(deg))


def loss_channel(rho: Union[DensityOperator, PureState], mode, eta: float) -> DensityOperator:
    """Mix ``mode`` with a vacuum ancilla on a beam splitter of transmission
    ``eta`` and trace the ancilla out.

    Applied through the Kraus operators <k|U_BS|0> of that beam splitter.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission {eta} outside [0, 1]")
    rho = as_density(rho)
    if eta == 1.0:
        return rho
    space = rho.space
    i = space.index(mode)
    n = space.mode_count
    d = space.dims[i]
    kraus = loss_kraus(eta, d)
    t = np.moveaxis(rho.tensor(), [i, n + i], [0, 1])
    moved_shape = t.shape
    t2 = t.reshape(d, d, -1)
    tmp = np.tensordot(kraus, t2, axes=([2], [0]))          # (k, out_ket, in_bra, rest)
    out = np.tensordot(tmp, kraus.conj(), axes=([0, 2], [0, 2]))  # (out_ket, rest, out_bra)
    out = out.transpose(0, 2, 1).reshape(moved_shape)
    out = np.moveaxis(out, [0, 1], [i, n + i])
    dim = space.total_dim
    return DensityOperator(space, out.reshape(dim, dim), rho.hermitian)


def apply_losses(rho, loss: LossSpec, dv_mode="A", cv_mode="B") -> DensityOperator:
    rho = loss_channel(rho, dv_mode, loss.eta_A)
    return loss_channel(rho, cv_mode, loss.eta_B)


def _gauss_hermite_average(builder, sigma: float, nodes: int) -> np.ndarray:
    x, w = np.polynomial.hermite.hermgauss(nodes)
    acc = None
    space = None
    for xi, wi in zip(x, w):
        st = as_density(builder(math.sqrt(2.0) * sigma * xi))
        space = st.space
        term = wi * st.matrix
        acc = term if acc is None else acc + term
    return space, acc / math.sqrt(math.pi)


def phase_noise_average(state_builder: Callable[[float], Union[PureState, DensityOperator]],
                        spec: Union[PhaseNoiseSpec, float],
                        nodes: int = QUADRATURE_NODES,
                        tol: float = QUADRATURE_TOL) -> DensityOperator:
    """Average ``state_builder(phi)`` over phi ~ N(0, sigma^2).

    Uses Gauss-Hermite quadrature with ``nodes`` points and checks the
    result against ``2 * nodes`` points; raises :class:`QuadratureError` if
    they differ by more than ``tol`` in any matrix element.
    """
    sigma = spec.sigma if isinstance(spec, PhaseNoiseSpec) else float(spec)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return as_density(state_builder(0.0))
    space, rho = _gauss_hermite_average(state_builder, sigma, nodes)
    _, check = _gauss_hermite_average(state_builder, sigma, 2 * nodes)
    err = float(np.max(np.abs(rho - check)))
    if err > tol:
        raise QuadratureError(f"phase average changed by {err:.2e} when doubling nodes")
    return DensityOperator(space, check)


def rotate_mode(state, mode, phi: float):
    """Apply exp(i phi n) to one mode."""
    i = state.space.index(mode)
    return apply_local(state, phase_rotation(phi, state.space.dims[i]), [i])


def phase_noise_channel(rho, mode, sigma: float, **kw) -> DensityOperator:
    """Gaussian dephasing of ``mode`` with standard deviation ``sigma`` (radians)."""
    rho = as_density(rho)
    return phase_noise_average(lambda phi: rotate_mode(rho, mode, phi), sigma, **kw)
