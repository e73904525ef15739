"""Truncated multimode Fock-space algebra.

States are stored densely in the tensor-product number basis with C-ordered
mode indices: the basis vector |n_0, n_1, ..., n_{M-1}> sits at flat index
``np.ravel_multi_index((n_0, ..., n_{M-1}), dims)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-10

ModeRef = Union[int, str]


class TruncationError(ValueError):
    """Raised when a state does not fit inside the Fock truncation."""


class TruncationWarning(UserWarning):
    """Metric values changed when the truncation was enlarged."""


class DimensionError(ValueError):
    """Operands live on incompatible mode spaces."""


@dataclass(frozen=True)
class ModeSpace:
    """Mode bookkeeping for a tensor product of truncated Fock spaces.

    ``dims[i]`` is the number of Fock levels kept for mode ``i`` (|0> to
    |dims[i]-1>).  Labels are free-form strings used to address modes.
    """

    dims: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("a mode space needs at least one mode")
        if min(dims) < 2:
            raise DimensionError(f"each mode needs at least 2 Fock levels, got {dims}")
        labels = tuple(self.labels) if self.labels else tuple(f"m{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise DimensionError("one label per mode is required")
        if len(set(labels)) != len(labels):
            raise DimensionError(f"duplicate mode labels {labels}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def uniform(cls, mode_count: int, dim: int, labels: Sequence[str] = ()) -> "ModeSpace":
        return cls((dim,) * mode_count, tuple(labels))

    @property
    def mode_count(self) -> int:
        return len(self.dims)

    @property
    def dim_per_mode(self) -> int:
        if len(set(self.dims)) != 1:
            raise DimensionError(f"modes have different truncations {self.dims}")
        return self.dims[0]

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, mode: ModeRef) -> int:
        if isinstance(mode, (int, np.integer)):
            if not 0 <= mode < self.mode_count:
                raise DimensionError(f"mode index {mode} out of range")
            return int(mode)
        try:
            return self.labels.index(mode)
        except ValueError:
            raise DimensionError(f"unknown mode label {mode!r}; have {self.labels}") from None

    def indices(self, modes: Iterable[ModeRef]) -> list[int]:
        out = [self.index(m) for m in modes]
        if len(set(out)) != len(out):
            raise DimensionError("repeated mode in selection")
        return out

    def subspace(self, modes: Sequence[int]) -> "ModeSpace":
        return ModeSpace(tuple(self.dims[i] for i in modes), tuple(self.labels[i] for i in modes))

    def relabel(self, labels: Sequence[str]) -> "ModeSpace":
        return ModeSpace(self.dims, tuple(labels))

    def basis_index(self, occupations: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(occupations), self.dims))

    def __add__(self, other: "ModeSpace") -> "ModeSpace":
        return ModeSpace(self.dims + other.dims, self.labels + other.labels)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over a :class:`ModeSpace`.

    ``norm_weight`` carries a scalar that was divided out of the amplitudes,
    e.g. the norm lost by an annihilation operator or a herald projection.
    """

    space: ModeSpace
    amplitudes: np.ndarray
    norm_weight: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.space.total_dim:
            raise DimensionError(
                f"{amps.size} amplitudes for a space of dimension {self.space.total_dim}")
        if self.norm_weight < 0:
            raise ValueError("norm_weight must be nonnegative")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def basis(cls, space: ModeSpace, occupations: Sequence[int]) -> "PureState":
        amps = np.zeros(space.total_dim, dtype=complex)
        amps[space.basis_index(occupations)] = 1.0
        return cls(space, amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm ** 2 - 1.0) < tol

    def normalized(self) -> "PureState":
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(self.space, self.amplitudes / n, self.norm_weight * n)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per mode."""
        return self.amplitudes.reshape(self.space.dims)

    def amplitude(self, *occupations: int) -> complex:
        return complex(self.amplitudes[self.space.basis_index(occupations)])

    def overlap(self, other: "PureState") -> complex:
        _check_same_space(self.space, other.space)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density(self) -> "DensityOperator":
        return DensityOperator(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))

    def relabel(self, labels: Sequence[str]) -> "PureState":
        return PureState(self.space.relabel(labels), self.amplitudes, self.norm_weight)


@dataclass(frozen=True)
class DensityOperator:
    """Dense operator on a :class:`ModeSpace`.

    Also used for reduced blocks <k|rho|l> of a hybrid state, which are not
    Hermitian for k != l; ``hermitian`` records which case applies.
    """

    space: ModeSpace
    matrix: np.ndarray
    hermitian: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.space.total_dim
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} does not match dimension {n}")
        if self.hermitian:
            scale = max(1.0, float(np.max(np.abs(m))))
            if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * scale:
                raise ValueError("matrix flagged hermitian is not hermitian")
            m = 0.5 * (m + m.conj().T)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def trace(self) -> complex:
        t = complex(np.trace(self.matrix))
        return complex(t.real, 0.0) if self.hermitian else t

    def normalized(self) -> "DensityOperator":
        t = self.trace
        if abs(t) == 0:
            raise ValueError("cannot normalize a traceless operator")
        m = self.matrix / (t.real if self.hermitian else t)
        return DensityOperator(self.space, m, self.hermitian)

    def tensor(self) -> np.ndarray:
        """Matrix reshaped to ket axes followed by bra axes."""
        return self.matrix.reshape(self.space.dims + self.space.dims)

    def min_eigenvalue(self) -> float:
        return float(hermitian_eigenvalues(self.matrix)[0])

    def is_state(self, tol: float = 1e-8) -> bool:
        """True for a Hermitian, unit-trace, positive semidefinite operator."""
        return (self.hermitian and abs(self.trace.real - 1.0) < tol
                and self.min_eigenvalue() >= -tol)

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))

    def relabel(self, labels: Sequence[str]) -> "DensityOperator":
        return DensityOperator(self.space.relabel(labels), self.matrix, self.hermitian)


def _check_same_space(a: ModeSpace, b: ModeSpace) -> None:
    if a.dims != b.dims:
        raise DimensionError(f"mode spaces differ: {a.dims} vs {b.dims}")


def as_density(state: Union[PureState, DensityOperator]) -> DensityOperator:
    return state.to_density() if isinstance(state, PureState) else state


def tensor(a, b):
    """Tensor product of two states of the same kind; labels are concatenated.

    Modes may carry different truncations, but a label clash is an error.
    """
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(a.space + b.space, np.kron(a.amplitudes, b.amplitudes),
                         a.norm_weight * b.norm_weight)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(a.space + b.space, np.kron(a.matrix, b.matrix),
                               a.hermitian and b.hermitian)
    raise TypeError("tensor needs two PureStates or two DensityOperators")


def tensor_all(*parts):
    out = parts[0]
    for p in parts[1:]:
        out = tensor(out, p)
    return out


def partial_trace(rho: DensityOperator, keep: Iterable[ModeRef]) -> DensityOperator:
    """Trace out every mode not listed in ``keep`` (kept modes retain their order)."""
    keep_idx = sorted(rho.space.indices(keep))
    if not keep_idx:
        raise DimensionError("partial_trace needs at least one mode to keep")
    n = rho.space.mode_count
    traced = [i for i in range(n) if i not in keep_idx]
    t = rho.tensor()
    # einsum subscripts: ket axes 0..n-1, bra axes n..2n-1, traced pairs share a letter
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    for i in traced:
        letters[n + i] = letters[i]
    out = "".join(letters[i] for i in keep_idx) + "".join(letters[n + i] for i in keep_idx)
    reduced = np.einsum("".join(letters) + "->" + out, t)
    sub = rho.space.subspace(keep_idx)
    d = sub.total_dim
    return DensityOperator(sub, reduced.reshape(d, d), rho.hermitian)


def partial_transpose(rho: DensityOperator, modes: Iterable[ModeRef]) -> DensityOperator:
    """Transpose the ket and bra indices of the listed modes."""
    idx = rho.space.indices(modes)
    n = rho.space.mode_count
    perm = list(range(2 * n))
    for i in idx:
        perm[i], perm[n + i] = n + i, i
    t = rho.tensor().transpose(perm)
    d = rho.space.total_dim
    return DensityOperator(rho.space, t.reshape(d, d), rho.hermitian)


def hermitian_eigenvalues(m: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix.

    Raises ``ValueError`` if ``m`` deviates from its adjoint by more than
    ``tol`` (relative to its largest entry).
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.conj().T)) > tol * scale:
        raise ValueError("matrix is not hermitian")
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def apply_local(state, op: np.ndarray, modes: Sequence[ModeRef]):
    """Apply an operator acting on ``modes`` (in the given order) to a state.

    ``op`` is a square matrix over the tensor product of the listed modes.
    For a density operator the map is rho -> op rho op^dagger.
    """
    space = state.space
    idx = space.indices(modes)
    sub_dims = tuple(space.dims[i] for i in idx)
    k = int(np.prod(sub_dims))
    op = np.asarray(op, dtype=complex)
    if op.shape != (k, k):
        raise DimensionError(f"operator shape {op.shape} does not match modes {sub_dims}")
    opt = op.reshape(sub_dims + sub_dims)
    nsub = len(idx)
    n = space.mode_count

    def _left(t, offset):
        # contract op's input axes with axes idx (+offset) of t, then restore order
        axes_t = [i + offset for i in idx]
        res = np.tensordot(opt, t, axes=(list(range(nsub, 2 * nsub)), axes_t))
        rest = [ax for ax in range(t.ndim) if ax not in axes_t]
        order = [0] * t.ndim
        for j, ax in enumerate(axes_t):
            order[ax] = j
        for j, ax in enumerate(rest):
            order[ax] = nsub + j
        return res.transpose(order)

    if isinstance(state, PureState):
        t = _left(state.tensor(), 0)
        return PureState(space, t.reshape(-1), state.norm_weight)
    t = _left(state.tensor(), 0)
    # op rho op^dagger: conj(op) on the bra axes
    t = np.conj(_left(np.conj(t), n))
    d = space.total_dim
    return DensityOperator(space, t.reshape(d, d), state.hermitian)


def project(state, mode: ModeRef, n: int):
    """Project ``mode`` onto the Fock state |n> and drop it.

    Returns ``(reduced, probability)``; ``reduced`` is unnormalized (a pure
    state keeps ``norm_weight`` unchanged, its amplitudes carry the weight).
    """
    space = state.space
    i = space.index(mode)
    if not 0 <= n < space.dims[i]:
        raise TruncationError(f"cannot project mode {space.labels[i]} on |{n}>")
    rest = [j for j in range(space.mode_count) if j != i]
    sub = space.subspace(rest)
    if isinstance(state, PureState):
        amps = np.take(state.tensor(), n, axis=i).reshape(-1)
        return PureState(sub, amps, state.norm_weight), float(np.vdot(amps, amps).real)
    t = state.tensor()
    t = np.take(t, n, axis=space.mode_count + i)
    t = np.take(t, n, axis=i)
    d = sub.total_dim
    m = t.reshape(d, d)
    return DensityOperator(sub, m, state.hermitian), float(np.trace(m).real)


def reorder(state, modes: Sequence[ModeRef]):
    """Permute modes into the given order (all modes must be listed)."""
    idx = state.space.indices(modes)
    if sorted(idx) != list(range(state.space.mode_count)):
        raise DimensionError("reorder must list every mode exactly once")
    sub = state.space.subspace(idx)
    if isinstance(state, PureState):
        return PureState(sub, state.tensor().transpose(idx).reshape(-1), state.norm_weight)
    n = state.space.mode_count
    t = state.tensor().transpose(idx + [n + i for i in idx])
    d = sub.total_dim
    return DensityOperator(sub, t.reshape(d, d), state.hermitian)



def reduced_density(state: PureState, keep: Iterable[ModeRef]) -> DensityOperator:
    """Reduced density operator of a pure state without forming the full projector."""
    space = state.space
    keep_idx = space.indices(keep)
    if not keep_idx:
        raise DimensionError("reduced_density needs at least one mode to keep")
    rest = [i for i in range(space.mode_count) if i not in keep_idx]
    sub = space.subspace(keep_idx)
    m = state.tensor().transpose(keep_idx + rest).reshape(sub.total_dim, -1)
    return DensityOperator(sub, m @ m.conj().T)


def embed(state, dims: Sequence[int]):
    """Zero-pad a state into larger per-mode truncations."""
    dims = tuple(int(d) for d in dims)
    old = state.space.dims
    if len(dims) != len(old) or any(d < o for d, o in zip(dims, old)):
        raise DimensionError(f"cannot embed {old} into {dims}")
    space = ModeSpace(dims, state.space.labels)
    if isinstance(state, PureState):
        t = np.zeros(dims, dtype=complex)
        t[tuple(slice(0, o) for o in old)] = state.tensor()
        return PureState(space, t.reshape(-1), state.norm_weight)
    t = np.zeros(dims + dims, dtype=complex)
    t[tuple(slice(0, o) for o in old + old)] = state.tensor()
    return DensityOperator(space, t.reshape(space.total_dim, space.total_dim), state.hermitian)
