"""Heralded generation of hybrid DV-CV entanglement.

Mode names follow the optical layout: ``a`` carries Bob's CV source, ``b``
is the tapped path that reaches the central station, ``c``/``d`` hold the
two-mode squeezed vacuum (``d`` stays with Alice) and ``e`` is the local
subtraction tap of the enhanced scheme.  Heralded outputs are relabelled
``A`` (Alice, DV, from ``d``) and ``B`` (Bob, CV, from ``a``).

Each scheme has an exact path (full unitaries on a truncated Fock space,
ideal photon-number projection) and a perturbative path (the leading-order
states written in terms of photon-subtracted squeezed vacua).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from .channels import LossSpec, apply_losses
from .fock import (DensityOperator, ModeSpace, PureState, TruncationWarning, apply_local,
                   embed, partial_trace, project, reduced_density, reorder, tensor,
                   tensor_all)
from .states import (CatParity, annihilation_operator, beam_splitter_unitary, cat_state,
                     fock_state, squeeze_unitary, subtracted_squeezed, tmss_state)

SchemeName = Literal["qubit", "enhanced", "qutrit"]
SCHEMES = ("qubit", "enhanced", "qutrit")
PERTURBATIVE_LIMIT = 0.15
MAX_AMPLITUDES = 1 << 24
EXACT_DIM = 16


class HeraldError(RuntimeError):
    """The heralding event has zero probability for the given parameters."""


@dataclass(frozen=True)
class SchemeParams:
    """Physical settings of a generation scheme.

    ``source`` is ``"squeezed"`` (uses ``zeta``) or ``"cat"`` (even cat of
    real amplitude ``alpha``).  ``central_r`` is the amplitude reflectivity
    of the central beam splitter, ``delta_phi`` the accumulated phase
    difference between the two heralding paths.
    """

    source: Literal["squeezed", "cat"] = "squeezed"
    zeta: float = 0.0
    alpha: float = 1.0
    tap_theta: float = 0.05
    tap_theta0: float = 0.05
    tmss_lambda: float = 0.05
    central_r: float = math.sqrt(0.5)
    delta_phi: float = math.pi
    loss: LossSpec = field(default_factory=LossSpec)

    def __post_init__(self):
        if self.source not in ("squeezed", "cat"):
            raise ValueError(f"unknown source {self.source!r}")
        if not 0.0 <= self.central_r <= 1.0:
            raise ValueError("central_r must lie in [0, 1]")
        if not 0.0 <= self.tmss_lambda < 1.0:
            raise ValueError("tmss_lambda must lie in [0, 1)")
        if self.zeta < 0:
            raise ValueError("zeta must be nonnegative")

    @property
    def central_t(self) -> float:
        return math.sqrt(1.0 - self.central_r ** 2)

    def check_perturbative(self) -> None:
        big = {k: v for k, v in (("tap_theta", self.tap_theta), ("tap_theta0", self.tap_theta0),
                                 ("tmss_lambda", self.tmss_lambda)) if abs(v) > PERTURBATIVE_LIMIT}
        if big:
            warnings.warn(f"parameters {big} are outside the perturbative regime", stacklevel=3)

    def source_state(self, dim: int, label: str = "a") -> PureState:
        if self.source == "cat":
            return cat_state(self.alpha, CatParity.EVEN, dim, label)
        return subtracted_squeezed(0, self.zeta, dim, label)


@dataclass(frozen=True)
class HeraldedState:
    """Normalized heralded two-mode state over (A: DV, B: CV)."""

    state: DensityOperator
    herald_probability: float
    mu: float
    pure: Optional[PureState] = None
    converged: Optional[bool] = None

    def __post_init__(self):
        if abs(self.state.trace.real - 1.0) > 1e-8:
            raise ValueError("heralded state must have unit trace")
        if not 0.0 <= self.herald_probability <= 1.0 + 1e-12:
            raise ValueError(f"herald probability {self.herald_probability} outside [0, 1]")

    def dv_populations(self) -> np.ndarray:
        return np.real(np.diag(partial_trace(self.state, ["A"]).matrix))


def _source_moments(p: SchemeParams, dim: int) -> tuple[float, float]:
    """(||a psi||^2, ||a^2 psi||^2) of the normalized source."""
    psi = p.source_state(dim).amplitudes
    a = annihilation_operator(dim)
    a1 = a @ psi
    a2 = a @ a1
    return float(np.vdot(a1, a1).real), float(np.vdot(a2, a2).real)


def nominal_mu(p: SchemeParams, dim: int = 40) -> float:
    """Weight parameter lambda r / (theta t sqrt(<n>)) of the source.

    For a squeezed vacuum sqrt(<n>) = sinh(zeta).
    """
    n1, _ = _source_moments(p, dim)
    den = p.tap_theta * p.central_t * math.sqrt(n1)
    if den == 0:
        return math.inf
    return p.tmss_lambda * p.central_r / den


def central_r_for_mu(mu: float, p: SchemeParams, dim: int = 40) -> float:
    """Central reflectivity that produces weight parameter ``mu``."""
    n1, _ = _source_moments(p, dim)
    if p.tmss_lambda == 0:
        raise ValueError("mu cannot be tuned without a TMSS")
    q = mu * p.tap_theta * math.sqrt(n1) / p.tmss_lambda
    return q / math.sqrt(1.0 + q * q)


def measured_mu(scheme: SchemeName, populations: np.ndarray, p: SchemeParams,
                dim: int = 40) -> float:
    """Weight parameter inferred from the DV photon-number populations."""
    n1, n2 = _source_moments(p, dim)
    if scheme == "qubit":
        return math.sqrt(populations[1] / populations[0])
    if scheme == "enhanced":
        return math.sqrt(populations[1] / populations[0] * n2 / n1 ** 2)
    if scheme == "qutrit":
        return (populations[2] / populations[0] * n2 / (2 * n1 ** 2)) ** 0.25
    raise ValueError(f"unknown scheme {scheme!r}")


def _check_budget(modes: int, dim: int) -> None:
    if dim ** modes > MAX_AMPLITUDES:
        raise MemoryError(f"{modes} modes at dim {dim} exceed the dense-state budget")


def _finish(rho_ad: DensityOperator, prob: float, mu: float, loss: LossSpec,
            pure: Optional[PureState] = None) -> HeraldedState:
    if prob <= 0:
        raise HeraldError("heralding event has zero probability")
    rho = rho_ad.normalized()
    if not loss.lossless:
        rho = apply_losses(rho, loss)
        pure = None
    return HeraldedState(rho, min(prob, 1.0), mu, pure)


def _exact(scheme: SchemeName, p: SchemeParams, dim: int) -> HeraldedState:
    local = scheme == "enhanced"
    nmodes = 5 if local else 4
    _check_budget(nmodes, dim)
    parts = [p.source_state(dim, "a"), fock_state(0, dim, "b"),
             tmss_state(p.tmss_lambda, "exact", dim, ("c", "d"))]
    if local:
        parts.append(fock_state(0, dim, "e"))
    psi = tensor_all(*parts)
    if local:
        psi = apply_local(psi, beam_splitter_unitary(p.tap_theta0, dims=(dim, dim)), ["a", "e"])
    psi = apply_local(psi, beam_splitter_unitary(p.tap_theta, dims=(dim, dim)), ["a", "b"])
    theta_c = math.asin(p.central_r)
    central = beam_splitter_unitary(theta_c, (p.delta_phi, 0.0), (dim, dim))
    psi = apply_local(psi, central, ["b", "c"])
    psi, prob = project(psi, "b", 2 if scheme == "qutrit" else 1)
    if local:
        psi, prob = project(psi, "e", 1)
    if prob <= 0:
        raise HeraldError("heralding event has zero probability")
    rho = reduced_density(psi, ["d", "a"]).relabel(["A", "B"])
    return _finish(rho, prob, nominal_mu(p), p.loss)


def _exact_checked(scheme, p, dim, check_convergence, tol=1e-6):
    out = _exact(scheme, p, dim)
    if not check_convergence:
        return out
    big = _exact(scheme, p, dim + 5)
    small = embed(out.state, big.state.space.dims)
    diff = float(np.max(np.abs(small.matrix - big.state.matrix)))
    ok = diff < tol and abs(out.herald_probability - big.herald_probability) < tol
    if not ok:
        warnings.warn(f"{scheme} exact state changed by {diff:.2e} at dim {dim + 5}",
                      TruncationWarning, stacklevel=3)
    return replace(out, converged=ok)


def scheme_qubit_exact(p: SchemeParams, dim: int = EXACT_DIM,
                       check_convergence: bool = False) -> HeraldedState:
    """Single-photon herald at the central station, exact evolution.

    Source (a) and vacuum (b) meet on the tap beam splitter, b and the TMSS
    mode c meet on the central beam splitter, b is projected on |1> and c
    is traced out.
    """
    return _exact_checked("qubit", p, dim, check_convergence)


def scheme_enhanced_exact(p: SchemeParams, dim: int = EXACT_DIM,
                          check_convergence: bool = False) -> HeraldedState:
    """As :func:`scheme_qubit_exact` with an extra local tap (a, e) heralded on |1>_e."""
    if dim < 10:
        raise ValueError("the five-mode enhanced scheme needs dim >= 10")
    return _exact_checked("enhanced", p, dim, check_convergence)


def scheme_qutrit_exact(p: SchemeParams, dim: int = EXACT_DIM,
                        check_convergence: bool = False) -> HeraldedState:
    """Two-photon herald at the central station, exact evolution."""
    return _exact_checked("qutrit", p, dim, check_convergence)


def exact_scheme(scheme: SchemeName, p: SchemeParams, dim: int = EXACT_DIM, **kw):
    return {"qubit": scheme_qubit_exact, "enhanced": scheme_enhanced_exact,
            "qutrit": scheme_qutrit_exact}[scheme](p, dim, **kw)


def leading_order(scheme: SchemeName, p: SchemeParams, dim: int) -> PureState:
    """Unnormalized leading-order heralded state built from the source vector.

    The norm squared is the leading-order herald probability.  DV levels are
    multiplied by omega^k with omega = exp(i (pi - delta_phi)).
    """
    psi = p.source_state(dim).amplitudes
    a = annihilation_operator(dim)
    th, lam, r, t = p.tap_theta, p.tmss_lambda, p.central_r, p.central_t
    w = np.exp(1j * (math.pi - p.delta_phi))
    if scheme == "qubit":
        rows = [th * t * (a @ psi), w * lam * r * psi]
    elif scheme == "enhanced":
        rows = [p.tap_theta0 * th * t * (a @ a @ psi), p.tap_theta0 * w * lam * r * (a @ psi)]
    elif scheme == "qutrit":
        rows = [th ** 2 * t ** 2 / math.sqrt(2) * (a @ a @ psi),
                math.sqrt(2) * w * th * lam * t * r * (a @ psi),
                w ** 2 * lam ** 2 * r ** 2 * psi]
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    levels = len(rows)
    space = ModeSpace((max(2, levels), dim), ("A", "B"))
    return PureState(space, np.array(rows).reshape(-1))


def _from_pure(vec: np.ndarray, dv_dim: int, dim: int, mu: float, prob: float,
               loss: Optional[LossSpec]) -> HeraldedState:
    psi = PureState(ModeSpace((dv_dim, dim), ("A", "B")), vec / np.linalg.norm(vec))
    return _finish(psi.to_density(), prob, mu, loss or LossSpec(), psi)


def _perturbative_probability(scheme: SchemeName, mu: float, zeta: float,
                              tap_theta: float, tmss_lambda: float, dim: int) -> float:
    p = SchemeParams(zeta=zeta, tap_theta=tap_theta, tmss_lambda=tmss_lambda)
    p = replace(p, central_r=central_r_for_mu(mu, p, dim))
    return leading_order(scheme, p, dim).norm ** 2


def _sq_columns(zeta: float, dim: int) -> np.ndarray:
    return squeeze_unitary(zeta, dim)


def scheme_qubit_perturbative(mu: float, zeta: float, dim: int = 20, *,
                              loss: Optional[LossSpec] = None, phase: float = 0.0,
                              dv_dim: int = 2, tap_theta: float = 0.05,
                              tmss_lambda: float = 0.05) -> HeraldedState:
    """S_B(zeta) (|0,1> + mu e^{i phase} |1,0>) / sqrt(1 + mu^2).

    ``zeta = 0`` gives the simplified model without local squeezing.  The
    reported herald probability is the leading-order estimate for the given
    tap angle and TMSS gain.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    s = _sq_columns(zeta, dim)
    vec = np.zeros((dv_dim, dim), dtype=complex)
    vec[0] = s[:, 1]
    vec[1] = mu * np.exp(1j * phase) * s[:, 0]
    prob = _perturbative_probability("qubit", mu, zeta, tap_theta, tmss_lambda, dim) \
        if zeta > 0 else tap_theta ** 2 * (1 + mu * mu)
    return _from_pure(vec.reshape(-1), dv_dim, dim, mu, prob, loss)


def scheme_enhanced_perturbative(mu: float, zeta: float, dim: int = 20, *,
                                 loss: Optional[LossSpec] = None, phase: float = 0.0,
                                 dv_dim: int = 2, tap_theta: float = 0.05,
                                 tmss_lambda: float = 0.05) -> HeraldedState:
    """sqrt(3 + 1/sinh^2 zeta) |0>|2PS> + mu |1>|1PS>, normalized."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if zeta <= 0:
        raise ValueError("the enhanced scheme needs zeta > 0")
    w0 = math.sqrt(3 + 1 / math.sinh(zeta) ** 2)
    vec = np.zeros((dv_dim, dim), dtype=complex)
    vec[0] = w0 * subtracted_squeezed(2, zeta, dim).amplitudes
    vec[1] = mu * np.exp(1j * phase) * subtracted_squeezed(1, zeta, dim).amplitudes
    prob = _perturbative_probability("enhanced", mu, zeta, tap_theta, tmss_lambda, dim)
    return _from_pure(vec.reshape(-1), dv_dim, dim, mu, prob, loss)


def scheme_qutrit_perturbative(mu: float, zeta: float, dim: int = 20, *,
                               loss: Optional[LossSpec] = None, phase: float = 0.0,
                               dv_dim: int = 3, tap_theta: float = 0.05,
                               tmss_lambda: float = 0.05) -> HeraldedState:
    """S_B(zeta) [mu^2 |2,0> + sqrt(2) mu |1,1> + |0>(c|0> + |2>)] / sqrt(c^2 + (1+mu^2)^2)."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if zeta <= 0:
        raise ValueError("the qutrit scheme needs zeta > 0")
    if dv_dim < 3:
        raise ValueError("the qutrit scheme needs dv_dim >= 3")
    c = 1 / (math.sqrt(2) * math.tanh(zeta))
    s = _sq_columns(zeta, dim)
    w = np.exp(1j * phase)
    vec = np.zeros((dv_dim, dim), dtype=complex)
    vec[0] = c * s[:, 0] + s[:, 2]
    vec[1] = math.sqrt(2) * mu * w * s[:, 1]
    vec[2] = mu ** 2 * w ** 2 * s[:, 0]
    prob = _perturbative_probability("qutrit", mu, zeta, tap_theta, tmss_lambda, dim)
    return _from_pure(vec.reshape(-1), dv_dim, dim, mu, prob, loss)


def perturbative_scheme(scheme: SchemeName, mu: float, zeta: float, dim: int = 20, **kw):
    return {"qubit": scheme_qubit_perturbative, "enhanced": scheme_enhanced_perturbative,
            "qutrit": scheme_qutrit_perturbative}[scheme](mu, zeta, dim, **kw)


def balancing_mu(scheme: SchemeName, zeta: float = 0.0, loss: Optional[LossSpec] = None) -> float:
    """Weight parameter that maximizes entanglement.

    qubit: mu^2 = eta_B / eta_A; enhanced: mu^2 = 2 (1 + c^2); qutrit:
    mu^4 = 1 + c^2 (the last two in their lossless form).
    """
    loss = loss or LossSpec()
    if loss.eta_A == 0:
        raise ValueError("balancing is undefined for eta_A = 0")
    if scheme == "qubit":
        return math.sqrt(loss.eta_B / loss.eta_A)
    if zeta <= 0:
        raise ValueError(f"{scheme} balancing needs zeta > 0")
    c2 = 1 / (2 * math.tanh(zeta) ** 2)
    if scheme == "enhanced":
        return math.sqrt(2 * (1 + c2))
    if scheme == "qutrit":
        return (1 + c2) ** 0.25
    raise ValueError(f"unknown scheme {scheme!r}")


THERMAL_G2 = 2.0
POISSON_G2 = 1.0


def squeezed_g2(zeta: float) -> float:
    """Second-order autocorrelation 3 + 1/sinh^2 zeta of a squeezed vacuum."""
    return 3 + 1 / math.sinh(zeta) ** 2


def coincidence_counts(n0: float, nA: float, nB: float, gA: float, gB: float,
                       tau: float, T: float, kind: Literal["local", "pair"] = "local"):
    """Expected coincidence counts over an acquisition time ``T``.

    ``kind="local"`` returns (C_0A, C_0B): coincidences between the local
    subtraction count ``n0`` and each heralding path.  ``kind="pair"``
    returns (C_AA, C_BB): two-photon coincidences within one path (``n0``
    unused).
    """
    if min(n0, nA, nB, gA, gB, tau, T) < 0:
        raise ValueError("counts, correlations and times must be nonnegative")
    if tau > T:
        raise ValueError("coincidence window exceeds acquisition time")
    if kind == "local":
        return gA * n0 * nA * tau / T, gB * n0 * nB * tau / T
    if kind == "pair":
        return gA * nA ** 2 * tau / T, gB * nB ** 2 * tau / T
    raise ValueError(f"unknown coincidence kind {kind!r}")


def mu_from_counts(nA: float, nB: float) -> float:
    return math.sqrt(nA / nB)


def ideal_hybrid_state(alpha: float, dim: int, flipped: bool = False) -> PureState:
    """(|0>|cat_->  + |1>|cat_+>)/sqrt(2), or with cats swapped if ``flipped``."""
    plus = cat_state(alpha, CatParity.EVEN, dim).amplitudes
    minus = cat_state(alpha, CatParity.ODD, dim).amplitudes
    first, second = (plus, minus) if flipped else (minus, plus)
    vec = np.stack([first, second]) / math.sqrt(2)
    return PureState(ModeSpace((2, dim), ("A", "B")), vec.reshape(-1))


def convert_dv_to_cv(c0: complex, c1: complex, hybrid, dim: Optional[int] = None):
    """Teleport the DV qubit c0|0> + c1|1> onto the CV mode of a hybrid state.

    The input mode C meets the hybrid DV mode A on a 50/50 beam splitter,
    C is projected on |1> and A traced out.  Returns (rho_B, probability).
    """
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1) > 1e-10:
        raise ValueError("qubit amplitudes must be normalized")
    if isinstance(hybrid, HeraldedState):
        hybrid = hybrid.pure if hybrid.pure is not None else hybrid.state
    hybrid = reorder(hybrid, ["A", "B"])
    d_a, d_b = hybrid.space.dims
    d = max(3, d_a)
    hybrid = embed(hybrid, (d, d_b))
    qubit = np.zeros(d, dtype=complex)
    qubit[:2] = (c0, c1)
    cin = PureState(ModeSpace((d,), ("C",)), qubit)
    if isinstance(hybrid, DensityOperator):
        cin = cin.to_density()
    joint = tensor(cin, hybrid)
    # C^dag -> (C^dag - A^dag)/sqrt 2 and A^dag -> (A^dag + C^dag)/sqrt 2
    u = beam_splitter_unitary(math.pi / 4, dims=(d, d))
    joint = apply_local(joint, u, ["A", "C"])
    joint, prob = project(joint, "C", 1)
    if prob <= 0:
        raise HeraldError("converter herald has zero probability")
    if isinstance(joint, PureState):
        out = reduced_density(joint, ["B"])
    else:
        out = partial_trace(joint, ["B"])
    return out.normalized(), prob
