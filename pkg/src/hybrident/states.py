"""Constructors for the single- and two-mode states and unitaries used by the schemes.

Conventions
-----------
* Squeezing: ``S(zeta) = exp(zeta/2 (a^dag^2 - a^2))`` so that S(zeta)|0> has
  positive even-Fock amplitudes ``(tanh zeta)^n sqrt((2n)!)/(2^n n!)/sqrt(cosh zeta)``
  and overlaps positively with an even cat of real amplitude.
* Beam splitter on modes (x, y): ``exp(theta (x y^dag - x^dag y))`` preceded by
  phase shifts, which maps x^dag -> e^{i phi1}(t x^dag + r y^dag) and
  y^dag -> e^{i phi2}(t y^dag - r x^dag) with t = cos(theta), r = sin(theta).
* Decibels: ``db = 20 / ln(10) * zeta`` (quadrature variance e^{-2 zeta}).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .fock import ModeSpace, PureState, TruncationError, apply_local

DB_PER_NEPER = 20.0 / math.log(10.0)
COHERENT_TAIL_TOL = 1e-10
SQUEEZE_TAIL_TOL = 1e-8


def db_to_zeta(db: float) -> float:
    return db / DB_PER_NEPER


def zeta_to_db(zeta: float) -> float:
    return zeta * DB_PER_NEPER


class CatParity(enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        return 1 if self is CatParity.EVEN else -1


@dataclass(frozen=True)
class SqueezeParam:
    zeta: float

    def __post_init__(self):
        if self.zeta < 0:
            raise ValueError("squeeze parameter must be nonnegative")

    @classmethod
    def from_db(cls, db: float) -> "SqueezeParam":
        return cls(db_to_zeta(db))

    @property
    def db(self) -> float:
        return zeta_to_db(self.zeta)

    @property
    def c(self) -> float:
        """Shorthand 1/(sqrt(2) tanh zeta) used by the enhanced and qutrit states."""
        if self.zeta == 0:
            return math.inf
        return 1.0 / (math.sqrt(2.0) * math.tanh(self.zeta))


@dataclass(frozen=True)
class TmssParam:
    lambda_gain: float

    def __post_init__(self):
        if not 0 <= self.lambda_gain < 1:
            raise ValueError("TMSS gain must lie in [0, 1)")


def _zeta(z) -> float:
    return z.zeta if isinstance(z, SqueezeParam) else float(z)


def annihilation_operator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def creation_operator(dim: int) -> np.ndarray:
    return annihilation_operator(dim).T.copy()


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def parity_operator(dim: int) -> np.ndarray:
    return np.diag((-1.0) ** np.arange(dim)).astype(complex)


def phase_rotation(phi: float, dim: int) -> np.ndarray:
    return np.diag(np.exp(1j * phi * np.arange(dim)))


def _single(amps, dim: int, label: str) -> PureState:
    return PureState(ModeSpace((dim,), (label,)), amps)


def fock_state(n: int, dim: int, label: str = "B") -> PureState:
    if not 0 <= n < dim:
        raise TruncationError(f"|{n}> does not fit in {dim} levels")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return _single(amps, dim, label)


def _coherent_amplitudes(alpha: float, dim: int) -> np.ndarray:
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim)
        out[0] = 1.0
        return out
    logmag = -0.5 * alpha ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.sign(alpha) ** n * np.exp(logmag)


def coherent_state(alpha: float, dim: int, label: str = "B",
                   tail_tol: float = COHERENT_TAIL_TOL) -> PureState:
    """Coherent state |alpha> for real ``alpha``.

    Raises :class:`TruncationError` when more than ``tail_tol`` of the
    photon-number distribution lies above the truncation.
    """
    amps = _coherent_amplitudes(float(alpha), dim)
    tail = 1.0 - float(np.sum(amps ** 2))
    if tail > tail_tol:
        raise TruncationError(f"coherent state alpha={alpha} loses {tail:.2e} beyond dim={dim}")
    return _single(amps / np.linalg.norm(amps), dim, label)


def cat_normalization(alpha: float, parity: CatParity) -> float:
    """N_+- = sqrt(2 (1 +- exp(-2 alpha^2)))."""
    return math.sqrt(2.0 * (1.0 + parity.sign * math.exp(-2.0 * alpha ** 2)))


def cat_state(alpha: float, parity: CatParity | str, dim: int, label: str = "B",
              tail_tol: float = COHERENT_TAIL_TOL) -> PureState:
    """(|alpha> +- |-alpha>)/N_+-; the odd cat is undefined at alpha = 0."""
    parity = CatParity(parity)
    if parity is CatParity.ODD and alpha == 0:
        raise ValueError("odd cat state is undefined at alpha = 0")
    plus = _coherent_amplitudes(float(alpha), dim)
    minus = _coherent_amplitudes(-float(alpha), dim)
    tail = 1.0 - float(np.sum(plus ** 2))
    if tail > tail_tol:
        raise TruncationError(f"cat state alpha={alpha} loses {tail:.2e} beyond dim={dim}")
    amps = plus + parity.sign * minus
    return _single(amps / np.linalg.norm(amps), dim, label)


def annihilate(state: PureState, mode=0) -> PureState:
    """Apply the annihilation operator to ``mode``.

    The result is stored normalized with the removed norm (sqrt(<n>) for a
    normalized input) multiplied into ``norm_weight``.  Annihilating the
    vacuum returns the zero vector with zero weight.
    """
    i = state.space.index(mode)
    a = annihilation_operator(state.space.dims[i])
    raw = apply_local(state, a, [i])
    n = raw.norm
    if n == 0:
        return PureState(state.space, np.zeros(state.space.total_dim), 0.0)
    return PureState(state.space, raw.amplitudes / n, state.norm_weight * n)


@lru_cache(maxsize=64)
def _squeeze_matrix(zeta: float, dim: int) -> np.ndarray:
    pad = 2 * dim + 40
    a = annihilation_operator(pad)
    ad = a.T
    full = expm(0.5 * zeta * (ad @ ad - a @ a))
    out = full[:dim, :dim].copy()
    out.flags.writeable = False
    return out


def squeeze_unitary(zeta, dim: int, tail_tol: float = SQUEEZE_TAIL_TOL) -> np.ndarray:
    """Matrix of S(zeta) on the first ``dim`` Fock levels.

    Built by exponentiating the generator in an enlarged space and cropping,
    so that the retained matrix elements are those of the untruncated
    operator.  Raises :class:`TruncationError` if S(zeta)|0> leaks more than
    ``tail_tol`` probability above the truncation.
    """
    zeta = _zeta(zeta)
    if zeta < 0:
        raise ValueError("squeeze parameter must be nonnegative")
    s = _squeeze_matrix(float(zeta), int(dim))
    tail = 1.0 - float(np.sum(np.abs(s[:, 0]) ** 2))
    if tail > tail_tol:
        raise TruncationError(f"squeezed vacuum zeta={zeta:.4f} loses {tail:.2e} beyond dim={dim}")
    return s


def squeezed_vacuum_dim(zeta, tail_tol: float = SQUEEZE_TAIL_TOL, extra: int = 0,
                        minimum: int = 10) -> int:
    """Smallest even truncation holding S(zeta)|0> to ``tail_tol``, plus ``extra`` levels."""
    lam2 = math.tanh(_zeta(zeta)) ** 2
    if lam2 == 0:
        return max(minimum, 2 + extra)
    # tail of sum_{n>=N} lam^{2n} C(2n,n)/4^n is bounded by lam^{2N}/(1-lam^2)
    n = math.log(tail_tol * (1.0 - lam2)) / math.log(lam2)
    return max(minimum, 2 * math.ceil(n) + 2 + extra)


def squeezed_vacuum_amplitudes(zeta: float, dim: int) -> np.ndarray:
    """Closed-form even-Fock amplitudes of S(zeta)|0>."""
    lam = math.tanh(zeta)
    out = np.zeros(dim)
    for n in range((dim + 1) // 2):
        out[2 * n] = lam ** n * math.exp(0.5 * gammaln(2 * n + 1) - gammaln(n + 1)) / 2 ** n
    return out / math.sqrt(math.cosh(zeta))


def subtracted_squeezed(n_subtract: int, zeta, dim: int, label: str = "B",
                        tail_tol: float = SQUEEZE_TAIL_TOL) -> PureState:
    """Photon-subtracted squeezed vacua |0PS>, |1PS>, |2PS> (normalized).

    |0PS> = S|0>, |1PS> = S|1>, and
    |2PS> = (cosh z S|0> + sqrt(2) sinh z S|2>) / sqrt(1 + 3 sinh^2 z).
    """
    zeta = _zeta(zeta)
    if n_subtract not in (0, 1, 2):
        raise ValueError("only 0, 1 or 2 subtracted photons are supported")
    if n_subtract and zeta <= 0:
        raise ValueError("photon subtraction needs zeta > 0")
    s = squeeze_unitary(zeta, dim, tail_tol)
    if n_subtract == 0:
        amps = s[:, 0]
    elif n_subtract == 1:
        amps = s[:, 1]
    else:
        sh, ch = math.sinh(zeta), math.cosh(zeta)
        amps = (ch * s[:, 0] + math.sqrt(2.0) * sh * s[:, 2]) / math.sqrt(1 + 3 * sh ** 2)
    return _single(amps, dim, label)


def _bs_block(theta: float, n_total: int, d1: int, d2: int):
    lo = max(0, n_total - d2 + 1)
    hi = min(n_total, d1 - 1)
    ns = np.arange(lo, hi + 1)
    k = ns.size
    gen = np.zeros((k, k))
    for j, n in enumerate(ns):
        m = n_total - n
        # theta * x y^dag : |n, m> -> sqrt(n (m+1)) |n-1, m+1>
        if n - 1 >= lo:
            gen[j - 1, j] += math.sqrt(n * (m + 1))
        # -theta * x^dag y : |n, m> -> -sqrt((n+1) m) |n+1, m-1>
        if n + 1 <= hi:
            gen[j + 1, j] -= math.sqrt((n + 1) * m)
    return ns, expm(theta * gen)


def beam_splitter_unitary(theta: float, phases: Sequence[float] = (0.0, 0.0),
                          dims: Sequence[int] = (20, 20)) -> np.ndarray:
    """Two-mode beam-splitter matrix on the product basis of ``dims``.

    Exponentiates the photon-number-conserving generator one total-photon
    block at a time, which is exact for total photon number below
    ``min(dims)``.
    """
    d1, d2 = int(dims[0]), int(dims[1])
    u = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for n_total in range(d1 + d2 - 1):
        ns, block = _bs_block(theta, n_total, d1, d2)
        idx = ns * d2 + (n_total - ns)
        u[np.ix_(idx, idx)] = block
    phi1, phi2 = phases
    n1, n2 = np.divmod(np.arange(d1 * d2), d2)
    return u * np.exp(1j * (phi1 * n1 + phi2 * n2))[None, :]


@lru_cache(maxsize=128)
def _loss_kraus_cached(eta: float, dim: int) -> np.ndarray:
    theta = math.acos(math.sqrt(eta))
    kraus = np.zeros((dim, dim, dim))
    for n_total in range(dim):
        ns, block = _bs_block(theta, n_total, dim, dim)
        # input |n_total, 0> is the last basis vector of the block
        col = block[:, -1]
        for j, n in enumerate(ns):
            kraus[n_total - n, n, n_total] = col[j]
    kraus.flags.writeable = False
    return kraus


def loss_kraus(eta: float, dim: int) -> np.ndarray:
    """Kraus operators <k|_anc U_BS |0>_anc of a beam splitter with cos^2 = eta.

    Returns an array of shape (dim, dim, dim) indexed [k, out, in].
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission {eta} outside [0, 1]")
    return _loss_kraus_cached(float(eta), int(dim))


def tmss_state(lambda_gain, order: Literal[1, 2, "exact"] = "exact", dim: int = 20,
               labels: Sequence[str] = ("c", "d"), normalize: bool = True,
               tail_tol: float = SQUEEZE_TAIL_TOL) -> PureState:
    """Two-mode squeezed vacuum sum_n lam^n |n, n>, truncated at ``order``.

    ``order="exact"`` includes the sqrt(1 - lam^2) prefactor and all terms
    that fit in ``dim``; first and second order give |00> + lam|11> (+ lam^2|22>).
    """
    lam = lambda_gain.lambda_gain if isinstance(lambda_gain, TmssParam) else float(lambda_gain)
    TmssParam(lam)
    space = ModeSpace((dim, dim), tuple(labels))
    amps = np.zeros((dim, dim), dtype=complex)
    if order == "exact":
        nmax = dim
        tail = lam ** (2 * dim)
        if tail > tail_tol:
            raise TruncationError(f"TMSS lambda={lam} loses {tail:.2e} beyond dim={dim}")
        pref = math.sqrt(1.0 - lam ** 2)
    elif order in (1, 2):
        nmax = order + 1
        if nmax > dim:
            raise TruncationError("TMSS expansion order exceeds truncation")
        pref = 1.0
    else:
        raise ValueError(f"unknown TMSS order {order!r}")
    for n in range(nmax):
        amps[n, n] = pref * lam ** n
    state = PureState(space, amps.reshape(-1))
    if normalize and order != "exact":
        state = state.normalized()
    return state
