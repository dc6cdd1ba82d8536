"""Elementary operators on the truncated qubit x Fock space.

Conventions
-----------
* qubit basis ordering is ``[|g>, |e>]`` so ``sigma_z = diag(-1, +1)``
* ``sigma = |g><e|`` is the qubit *lowering* operator, ``sigma_plus`` its adjoint
* composite index layout is ``(qubit, fock)`` row-major, qubit leftmost,
  so ``P_g`` is the sum over the first ``fock_dim`` amplitudes
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpaceError

QUBIT_DIM = 2
DEFAULT_FOCK_DIM = 30


class Space(enum.Enum):
    FIELD = "field"
    QUBIT = "qubit"
    COMPOSITE = "composite"


@dataclass(frozen=True)
class HilbertConfig:
    fock_dim: int = DEFAULT_FOCK_DIM
    qubit_dim: int = QUBIT_DIM

    def __post_init__(self):
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise InvalidSpaceError(f"fock_dim must be an integer >= 2, got {self.fock_dim}")
        if self.qubit_dim != QUBIT_DIM:
            raise InvalidSpaceError("only two-level qubits are supported")

    @property
    def composite_dim(self) -> int:
        return self.qubit_dim * self.fock_dim

    def dim(self, space: Space) -> int:
        return {Space.FIELD: self.fock_dim, Space.QUBIT: self.qubit_dim,
                Space.COMPOSITE: self.composite_dim}[space]


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex square matrix tagged with the space it acts on."""

    matrix: np.ndarray
    space: Space

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidSpaceError(f"operator matrix must be square, got shape {m.shape}")
        if self.space is Space.QUBIT and m.shape[0] != QUBIT_DIM:
            raise InvalidSpaceError("qubit operators are 2x2")
        if self.space is Space.COMPOSITE and m.shape[0] % QUBIT_DIM:
            raise InvalidSpaceError("composite dimension must be even")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def fock_dim(self) -> int | None:
        if self.space is Space.FIELD:
            return self.dim
        if self.space is Space.COMPOSITE:
            return self.dim // QUBIT_DIM
        return None

    def dag(self) -> Operator:
        return Operator(self.matrix.conj().T, self.space)

    def is_hermitian(self, rtol: float = 1e-12) -> bool:
        m = self.matrix
        scale = max(np.linalg.norm(m), 1.0)
        return np.linalg.norm(m - m.conj().T) <= rtol * scale

    def _check(self, other: Operator):
        if other.space is not self.space or other.dim != self.dim:
            raise InvalidSpaceError(
                f"space mismatch: {self.space.value}[{self.dim}] vs {other.space.value}[{other.dim}]")

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.matrix + other.matrix, self.space)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.matrix - other.matrix, self.space)
        return NotImplemented

    def __neg__(self):
        return Operator(-self.matrix, self.space)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return Operator(scalar * self.matrix, self.space)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.matrix / scalar, self.space)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.matrix @ other.matrix, self.space)
        if isinstance(other, QuantumState):
            if other.space is not self.space or other.dim != self.dim:
                raise InvalidSpaceError("state/operator space mismatch")
            return QuantumState(self.matrix @ other.amplitudes, self.space, normalize=False)
        return NotImplemented

    def expect(self, state: QuantumState) -> complex:
        return complex(np.vdot(state.amplitudes, self.matrix @ state.amplitudes))

    def allclose(self, other: Operator, atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.matrix, other.matrix, atol=atol, rtol=0))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalised complex amplitude vector on a declared space."""

    amplitudes: np.ndarray
    space: Space
    normalize: bool = True

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.normalize:
            nrm = np.linalg.norm(v)
            if nrm == 0 or not np.isfinite(nrm):
                raise ValueError("cannot normalise a zero or non-finite vector")
            v = v / nrm
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def fock_dim(self) -> int | None:
        if self.space is Space.COMPOSITE:
            return self.dim // QUBIT_DIM
        if self.space is Space.FIELD:
            return self.dim
        return None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: QuantumState) -> complex:
        if other.space is not self.space or other.dim != self.dim:
            raise InvalidSpaceError("state space mismatch")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def as_blocks(self) -> np.ndarray:
        """Composite amplitudes reshaped to ``(qubit, fock)``."""
        if self.space is not Space.COMPOSITE:
            raise InvalidSpaceError("as_blocks needs a composite state")
        return self.amplitudes.reshape(QUBIT_DIM, -1)


# --- field operators -------------------------------------------------------

def fock_annihilator(cfg: HilbertConfig) -> Operator:
    n = cfg.fock_dim
    return Operator(np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1), Space.FIELD)


def fock_creator(cfg: HilbertConfig) -> Operator:
    return fock_annihilator(cfg).dag()


def number_operator(cfg: HilbertConfig) -> Operator:
    return Operator(np.diag(np.arange(cfg.fock_dim, dtype=float)), Space.FIELD)


def field_identity(cfg: HilbertConfig) -> Operator:
    return Operator(np.eye(cfg.fock_dim), Space.FIELD)


def quadratures(cfg: HilbertConfig) -> tuple[Operator, Operator]:
    """``x = (a + a^dag)/sqrt2`` and ``p = -i(a - a^dag)/sqrt2``."""
    a = fock_annihilator(cfg).matrix
    x = (a + a.conj().T) / np.sqrt(2)
    p = -1j * (a - a.conj().T) / np.sqrt(2)
    return Operator(x, Space.FIELD), Operator(p, Space.FIELD)


def parity(cfg: HilbertConfig) -> Operator:
    return Operator(np.diag((-1.0) ** np.arange(cfg.fock_dim)), Space.FIELD)


def hermitian_expm(h: np.ndarray, scale: complex) -> np.ndarray:
    """``exp(scale * h)`` for Hermitian ``h`` via its eigendecomposition."""
    e, v = np.linalg.eigh(h)
    return (v * np.exp(scale * e)) @ v.conj().T


def displacement(alpha: complex, cfg: HilbertConfig) -> Operator:
    """``D(alpha) = exp(alpha a^dag - alpha* a)`` on the truncated space.

    The generator ``G`` is anti-Hermitian, so ``iG`` is Hermitian and
    ``D = exp(-i (iG))`` is exact-unitary up to round-off.
    """
    a = fock_annihilator(cfg).matrix
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return Operator(hermitian_expm(1j * gen, -1j), Space.FIELD)


def fock_state(n: int, cfg: HilbertConfig) -> QuantumState:
    if not 0 <= n < cfg.fock_dim:
        raise InvalidSpaceError(f"Fock level {n} outside truncation {cfg.fock_dim}")
    v = np.zeros(cfg.fock_dim, dtype=complex)
    v[n] = 1.0
    return QuantumState(v, Space.FIELD)


def coherent_state(alpha: complex, cfg: HilbertConfig) -> QuantumState:
    return displacement(alpha, cfg) @ fock_state(0, cfg)


# --- qubit operators -------------------------------------------------------

def qubit_operators() -> dict[str, Operator]:
    """Pauli set in the ``[|g>, |e>]`` basis.

    ``sigma_y = i(sigma - sigma_plus)`` so that ``[sigma_x, sigma_y] = 2i sigma_z``.
    """
    sm = np.array([[0, 1], [0, 0]], dtype=complex)
    sp = sm.conj().T
    ops = {
        "sigma": sm,
        "sigma_plus": sp,
        "sigma_x": sm + sp,
        "sigma_y": 1j * (sm - sp),
        "sigma_z": np.diag([-1.0, 1.0]).astype(complex),
        "identity": np.eye(2, dtype=complex),
    }
    return {k: Operator(v, Space.QUBIT) for k, v in ops.items()}


def qubit_state(label: str) -> QuantumState:
    if label == "g":
        return QuantumState([1, 0], Space.QUBIT)
    if label == "e":
        return QuantumState([0, 1], Space.QUBIT)
    raise ValueError(f"unknown qubit label {label!r}")


def rotated_qubit_state(sign: int, phi: float = 0.0) -> QuantumState:
    """``(|g> + sign e^{-i phi} |e>)/sqrt2``; phi=0 gives the ``|+->`` basis."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return QuantumState(np.array([1.0, sign * np.exp(-1j * phi)]) / np.sqrt(2), Space.QUBIT)


def rotated_basis(phi: float = 0.0) -> np.ndarray:
    """Unitary whose columns are ``|+_phi>, |-_phi>`` in the ``[g, e]`` basis."""
    return np.column_stack([rotated_qubit_state(1, phi).amplitudes,
                            rotated_qubit_state(-1, phi).amplitudes])


# --- composition -----------------------------------------------------------

def tensor(q, f):
    """Qubit factor leftmost. Works for operator pairs and state pairs."""
    if isinstance(q, QuantumState) and isinstance(f, QuantumState):
        if q.space is not Space.QUBIT or f.space is not Space.FIELD:
            raise InvalidSpaceError("tensor expects (qubit state, field state)")
        return QuantumState(np.kron(q.amplitudes, f.amplitudes), Space.COMPOSITE)
    if not (isinstance(q, Operator) and isinstance(f, Operator)):
        raise InvalidSpaceError("tensor expects two operators or two states")
    if q.space is not Space.QUBIT or f.space is not Space.FIELD:
        raise InvalidSpaceError(
            f"tensor expects (qubit, field) operators, got ({q.space.value}, {f.space.value})")
    return Operator(np.kron(q.matrix, f.matrix), Space.COMPOSITE)


def composite_state(qubit: str | QuantumState, n: int | QuantumState, cfg: HilbertConfig) -> QuantumState:
    """``|q> (x) |n>``; ``qubit`` may be a label ('g', 'e') or a state."""
    q = qubit_state(qubit) if isinstance(qubit, str) else qubit
    f = fock_state(n, cfg) if isinstance(n, (int, np.integer)) else n
    return tensor(q, f)


def lift_field(op: Operator) -> Operator:
    """Identity on the qubit tensored with a field operator."""
    return tensor(qubit_operators()["identity"], op)


def lift_qubit(op: Operator, cfg: HilbertConfig) -> Operator:
    return tensor(op, field_identity(cfg))
