"""Measured quantities: populations, reduced field states, Wigner functions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import InvalidSpaceError, PostselectionError
from .evolution import TrajectoryResult
from .operators import (
    HilbertConfig,
    QuantumState,
    Space,
    displacement,
    fock_annihilator,
    fock_state,
    rotated_qubit_state,
)

WIGNER_BOUND = 2.0 / np.pi


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    space: Space = Space.FIELD

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidSpaceError("density matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @classmethod
    def pure(cls, psi: QuantumState) -> DensityMatrix:
        v = psi.amplitudes
        return cls(np.outer(v, v.conj()), psi.space)

    def padded(self, dim: int) -> DensityMatrix:
        """Embed into a larger Fock space (zeros on the new levels)."""
        if dim <= self.dim:
            return self
        m = np.zeros((dim, dim), dtype=complex)
        m[: self.dim, : self.dim] = self.matrix
        return DensityMatrix(m, self.space)


@dataclass(frozen=True, eq=False)
class WignerGrid:
    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray      # values[i, j] = W(x_axis[j] + i y_axis[i])
    eval_dim: int = 0
    outside_safe_radius: bool = False


@dataclass(frozen=True, eq=False)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")


def _as_composite(psi) -> np.ndarray:
    amps = psi.amplitudes if isinstance(psi, QuantumState) else np.asarray(psi)
    if amps.ndim != 1 or amps.size % 2:
        raise InvalidSpaceError("expected a composite state vector")
    return amps.reshape(2, -1)


def qubit_populations(psi) -> tuple[float, float]:
    """``(P_g, P_e)``: weight of the ``|g>`` and ``|e>`` blocks."""
    blocks = _as_composite(psi)
    w = np.sum(np.abs(blocks) ** 2, axis=1)
    total = w.sum()
    return float(w[0] / total), float(w[1] / total)


def partial_trace_qubit(psi_or_rho) -> DensityMatrix:
    """Reduced field state ``sum_q <q|rho|q>``."""
    if isinstance(psi_or_rho, DensityMatrix):
        m = psi_or_rho.matrix
        n = m.shape[0] // 2
        r = m[:n, :n] + m[n:, n:]
    else:
        b = _as_composite(psi_or_rho)
        r = b.T @ b.conj()
    return DensityMatrix(r / np.trace(r).real, Space.FIELD)


def _outcome_vector(outcome: str) -> np.ndarray:
    table = {
        "g": np.array([1, 0], dtype=complex),
        "e": np.array([0, 1], dtype=complex),
        "plus": rotated_qubit_state(1).amplitudes,
        "minus": rotated_qubit_state(-1).amplitudes,
    }
    aliases = {"ground": "g", "excited": "e", "+": "plus", "-": "minus"}
    key = aliases.get(outcome, outcome)
    if key not in table:
        raise ValueError(f"unknown postselection outcome {outcome!r}")
    return table[key]


def postselect_qubit(psi, outcome: str = "g", min_probability: float = 1e-12) -> tuple[QuantumState, float]:
    """Field state conditioned on the qubit outcome, and that outcome's probability."""
    b = _as_composite(psi)
    q = _outcome_vector(outcome)
    field = q.conj() @ b
    prob = float(np.vdot(field, field).real)
    if prob <= min_probability:
        raise PostselectionError(f"outcome {outcome!r} has probability {prob:.3g}")
    return QuantumState(field, Space.FIELD), prob


def photon_distribution(rho: DensityMatrix) -> np.ndarray:
    return np.clip(np.diag(rho.matrix).real, 0.0, None)


def fidelity(psi_ref: QuantumState, other) -> float:
    """``|<ref|psi>|^2`` for a state, ``<ref|rho|ref>`` for a density matrix."""
    ref = psi_ref.amplitudes
    if isinstance(other, DensityMatrix):
        if other.dim != ref.size:
            raise InvalidSpaceError("fidelity: dimension mismatch")
        return float(np.vdot(ref, other.matrix @ ref).real)
    if other.space is not psi_ref.space or other.dim != psi_ref.dim:
        raise InvalidSpaceError("fidelity: space mismatch")
    return float(abs(np.vdot(ref, other.amplitudes)) ** 2)


def cat_amplitude(g_eff: float, omega_eff: float, t: float) -> complex:
    """Coherent amplitude ``(g_eff/omega_eff)(exp(-i omega_eff t) - 1)`` of the cat lobes."""
    if omega_eff == 0:
        return complex(-1j * g_eff * t)      # omega_eff -> 0 limit
    return (g_eff / omega_eff) * (np.exp(-1j * omega_eff * t) - 1.0)


def cat_reference(alpha: complex, relative_phase: float, cfg: HilbertConfig) -> QuantumState:
    """Normalised ``|alpha> + e^{i theta} |-alpha>`` built from displacements."""
    vac = fock_state(0, cfg).amplitudes
    plus = displacement(alpha, cfg).matrix @ vac
    minus = displacement(-alpha, cfg).matrix @ vac
    v = plus + np.exp(1j * relative_phase) * minus
    if np.linalg.norm(v) < 1e-12:
        raise ValueError("cat superposition vanishes (odd cat with alpha = 0)")
    return QuantumState(v, Space.FIELD)


def fit_cat_phase(field_state: QuantumState, alpha: complex, n_grid: int = 720) -> tuple[float, float]:
    """Brute-force scan of the relative phase maximising fidelity; returns ``(theta, F)``."""
    cfg = HilbertConfig(field_state.dim)
    vac = fock_state(0, cfg).amplitudes
    plus = displacement(alpha, cfg).matrix @ vac
    minus = displacement(-alpha, cfg).matrix @ vac
    best = (0.0, -1.0)
    for theta in np.linspace(0.0, 2 * np.pi, n_grid, endpoint=False):
        v = plus + np.exp(1j * theta) * minus
        f = abs(np.vdot(v, field_state.amplitudes)) ** 2 / np.vdot(v, v).real
        if f > best[1]:
            best = (float(theta), float(f))
    return best


# --- Wigner function -------------------------------------------------------

def safe_radius(dim: int) -> float:
    return math.sqrt(dim) / 2


def _grid_axes(x_range=(-3.5, 3.5), n_points: int = 121, y_range=None):
    xs = np.linspace(x_range[0], x_range[1], n_points)
    yr = x_range if y_range is None else y_range
    ys = np.linspace(yr[0], yr[1], n_points)
    return xs, ys


def default_eval_dim(rho_dim: int, xs, ys) -> int:
    """Fock dimension large enough that every grid displacement stays in the safe radius."""
    r = float(np.max(np.hypot(*np.meshgrid(xs, ys))))
    return max(rho_dim, int(math.ceil(4 * r * r)) + 1)


def wigner(rho: DensityMatrix, x_range=(-3.5, 3.5), n_points: int = 121, y_range=None,
           eval_dim: int | None = None, fast: bool = True) -> WignerGrid:
    """``W(alpha) = (2/pi) Tr[D(alpha)^dag rho D(alpha) (-1)^n]`` on a rectangular grid.

    ``rho`` is zero-padded to ``eval_dim`` levels before displacing so the
    displaced state is not clipped by the truncation.  ``fast`` reuses one
    eigendecomposition for all grid points (``D(r e^{it}) = R(t) D(r) R(t)^dag``
    with ``R(t) = e^{i t n}``); ``fast=False`` exponentiates per point.
    """
    xs, ys = _grid_axes(x_range, n_points, y_range)
    dim = eval_dim or default_eval_dim(rho.dim, xs, ys)
    r = rho.padded(dim).matrix
    cfg = HilbertConfig(dim)
    par = (-1.0) ** np.arange(dim)
    outside = bool(np.max(np.hypot(*np.meshgrid(xs, ys))) > safe_radius(dim))

    if fast:
        a = fock_annihilator(cfg).matrix
        # D(s) for real s: exp(s (a^dag - a)) = exp(-i s K), K = i(a^dag - a) Hermitian
        e, v = np.linalg.eigh(1j * (a.conj().T - a))
        vh = v.conj().T
        nvec = np.arange(dim)

    w = np.empty((ys.size, xs.size))
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            alpha = complex(x, y)
            if fast:
                mod, arg = abs(alpha), np.angle(alpha)
                rot = np.exp(1j * arg * nvec)
                d = (rot[:, None] * ((v * np.exp(-1j * mod * e)) @ vh)) * rot.conj()[None, :]
            else:
                d = displacement(alpha, cfg).matrix
            # Tr(D^dag rho D P) = sum_n P_n <n|D^dag rho D|n>
            w[i, j] = (2 / np.pi) * np.einsum("kn,kn,n->", d.conj(), r @ d, par).real
    return WignerGrid(xs, ys, w, dim, outside)


def wigner_negativity(w: WignerGrid) -> tuple[float, float]:
    """``(min W, integral of max(0, -W))`` using the trapezoid rule."""
    neg = np.clip(-w.values, 0.0, None)
    integral = trapezoid(trapezoid(neg, w.x_axis, axis=1), w.y_axis)
    return float(w.values.min()), float(integral)


def wigner_integral(w: WignerGrid) -> float:
    return float(trapezoid(trapezoid(w.values, w.x_axis, axis=1), w.y_axis))


# --- time series -----------------------------------------------------------

def _field_ops(fock_dim: int):
    a = fock_annihilator(HilbertConfig(fock_dim)).matrix
    return a, a.conj().T


def expectation_series(traj: TrajectoryResult, field_op: np.ndarray, label: str) -> TimeSeries:
    """``<I (x) op>`` per time for a field operator ``op``."""
    vals = []
    for v in traj.amplitudes:
        b = v.reshape(2, -1)
        vals.append(np.einsum("qi,ij,qj->", b.conj(), field_op, b).real)
    return TimeSeries(traj.times.copy(), np.array(vals), label)


def quadrature_series(traj: TrajectoryResult, which: str = "x") -> TimeSeries:
    n = traj.amplitudes.shape[1] // 2
    a, ad = _field_ops(n)
    if which == "x":
        op = (a + ad) / np.sqrt(2)
    elif which == "p":
        op = -1j * (a - ad) / np.sqrt(2)
    else:
        raise ValueError("which must be 'x' or 'p'")
    return expectation_series(traj, op, f"<{which}>")


def photon_number_series(traj: TrajectoryResult) -> TimeSeries:
    n = traj.amplitudes.shape[1] // 2
    return expectation_series(traj, np.diag(np.arange(n, dtype=float)), "<n>")


def population_series(traj: TrajectoryResult, label: str = "P_g") -> TimeSeries:
    vals = np.array([qubit_populations(v)[0] for v in traj.amplitudes])
    return TimeSeries(traj.times.copy(), vals, label)


def qubit_expectation_series(traj: TrajectoryResult, op2: np.ndarray, label: str) -> TimeSeries:
    vals = []
    for v in traj.amplitudes:
        b = v.reshape(2, -1)
        rq = b @ b.conj().T       # reduced qubit density matrix
        vals.append(np.trace(rq @ op2).real)
    return TimeSeries(traj.times.copy(), np.array(vals), label)


def top_level_population(traj: TrajectoryResult, levels: int = 1) -> float:
    """Largest weight found in the highest ``levels`` Fock states (truncation diagnostic)."""
    b = np.abs(traj.amplitudes.reshape(len(traj.times), 2, -1)) ** 2
    return float(b[:, :, -levels:].sum(axis=(1, 2)).max())
