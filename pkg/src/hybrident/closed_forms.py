"""Analytic expressions for the hybrid-entanglement figures of merit.

These are kept free of the Fock-space engine so they can serve as an
independent check of it.
"""
from __future__ import annotations

import math
from typing import NamedTuple


def c_of_zeta(zeta: float) -> float:
    """c = 1 / (sqrt(2) tanh zeta)."""
    if zeta <= 0:
        raise ValueError("c is defined for zeta > 0")
    return 1.0 / (math.sqrt(2.0) * math.tanh(zeta))


def _check_unit(name, v):
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"{name}={v} outside [0, 1]")


def w_qubit_lossy(eta_A: float, eta_B: float, mu: float) -> float:
    """Wigner origin value of the <0|rho|0> block of |0,1> + mu|1,0> after loss."""
    _check_unit("eta_A", eta_A)
    _check_unit("eta_B", eta_B)
    m2 = mu * mu
    return ((1 - 2 * eta_B) + (1 - eta_A) * m2) / (1 + (1 - eta_A) * m2)


def w_qubit_balanced(eta_A: float, eta_B: float) -> float:
    """:func:`w_qubit_lossy` at mu^2 = eta_B / eta_A."""
    _check_unit("eta_A", eta_A)
    _check_unit("eta_B", eta_B)
    return (eta_A + eta_B - 3 * eta_A * eta_B) / (eta_A + eta_B - eta_A * eta_B)


def wigner_negative_region(eta_A: float, eta_B: float) -> bool:
    """True when the balanced block keeps a negative origin value: 1/eta_A + 1/eta_B < 3."""
    return 1.0 / eta_A + 1.0 / eta_B < 3.0


def n_qubit_lossy(eta: float, mu: float) -> float:
    """Entanglement negativity of |0,1> + mu|1,0> with symmetric transmission eta."""
    _check_unit("eta", eta)
    s = 1 + mu * mu
    return (math.sqrt(4 * eta ** 2 * mu ** 2 + (1 - eta) ** 2 * s ** 2) - (1 - eta) * s) / (2 * s)


def n_enhanced_lossless(mu: float, c: float) -> float:
    k = 2 + 2 * c * c
    return mu * math.sqrt(k) / (k + mu * mu)


def _qutrit_root(c: float, mu: float) -> float:
    m4 = mu ** 4
    return math.sqrt(c ** 4 + 2 * c * c * (m4 + 1) + (m4 - 1) ** 2)


def n_qutrit_lossless(mu: float, c: float) -> float:
    """Negativity of the lossless qutrit state for weight ``mu`` and squeezing shorthand ``c``."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    m4 = mu ** 4
    root = _qutrit_root(c, mu)
    base = 1 + c * c + m4
    lo = math.sqrt(max(base - root, 0.0))
    hi = math.sqrt(base + root)
    return (mu * mu + mu * lo + mu * hi) / (c * c + (mu * mu + 1) ** 2)


def n_qutrit_max(c: float) -> float:
    """Qutrit negativity at the balancing point mu^4 = 1 + c^2."""
    s = math.sqrt(1 + c * c)
    return s * (math.sqrt(2 * s - 2 * c) + math.sqrt(2 * s + 2 * c) + 1) / (2 * (1 + c * c + s))


class Fidelities(NamedTuple):
    F0: float
    F1: float
    F2: float
    Fn0: float
    Fn1: float


def fidelity_formulas(alpha2: float, lam: float) -> Fidelities:
    """Overlaps of photon-subtracted squeezed vacua with cat states.

    ``alpha2`` is the cat size |alpha|^2 and ``lam`` = tanh(zeta).  F0, F1, F2
    compare |0PS>, |1PS>, |2PS> with cat_+, cat_-, cat_+; Fn0 and Fn1 are the
    fidelities of the balanced hybrid states without and with the local
    subtraction.
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError("lam must lie in [0, 1)")
    if alpha2 <= 0:
        raise ValueError("F1 is singular at alpha^2 = 0")
    e = math.exp(lam * alpha2)
    q = 1 - lam * lam
    f0 = math.sqrt(q) * e / math.cosh(alpha2)
    f1 = q ** 1.5 * alpha2 * e / math.sinh(alpha2)
    f2 = q ** 2.5 * (1 + lam * alpha2) ** 2 * e / ((1 + 2 * lam * lam) * math.cosh(alpha2))
    fn0 = (math.sqrt(f0) + math.sqrt(f1)) ** 2 / 4
    fn1 = (math.sqrt(f2) + math.sqrt(f1)) ** 2 / 4
    return Fidelities(f0, f1, f2, fn0, fn1)


def phase_decay(sigma: float) -> float:
    """Negativity of the balanced lossless qubit state under Gaussian phase noise."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    return 0.5 * math.exp(-sigma * sigma / 2)


def w_enhanced(eta_B: float) -> float:
    _check_unit("eta_B", eta_B)
    return 1 - 2 * eta_B
