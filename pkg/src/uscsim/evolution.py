"""State propagation under static and time-dependent Hamiltonians.

The workhorse is the second-order midpoint exponential

    psi(t + dt) = exp(-i H(t + dt/2) dt) psi(t),

each step exponentiated through a Hermitian eigendecomposition, so every
step is unitary by construction.  Steps live on a global lattice
``t_offset + k*dt``; requested output times between lattice points are
reached with one extra partial step that does not perturb the lattice.
When ``H`` is periodic and ``dt`` divides the period, the per-step
unitaries are computed once per period and reused.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, IntegrationError, InvalidGeneratorError
from .hamiltonians import TWO_PI, TimeDependentHamiltonian
from .operators import Operator, QuantumState, Space

log = logging.getLogger(__name__)

NORM_RENORMALIZE_TOL = 1e-9
NORM_FAIL_TOL = 1e-6


class Method(enum.Enum):
    MIDPOINT = "midpoint_exponential"
    REFERENCE = "reference_fine_step"


@dataclass(frozen=True)
class PropagationSettings:
    dt: float | None = None
    method: Method = Method.MIDPOINT
    tolerance: float = 1e-8
    steps_per_fastest_period: int = 40
    cache_limit_mb: float = 256.0

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps_per_fastest_period < 10:
            raise ValueError("steps_per_fastest_period must be >= 10")
        if isinstance(self.method, str):
            object.__setattr__(self, "method", Method(self.method))


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    times: np.ndarray
    amplitudes: np.ndarray          # shape (len(times), dim)
    settings_used: PropagationSettings
    norm_drift: float
    dt_used: float | None = None

    @property
    def states(self) -> list[QuantumState]:
        return [QuantumState(v, Space.COMPOSITE, normalize=False) for v in self.amplitudes]

    def state(self, i: int) -> QuantumState:
        return QuantumState(self.amplitudes[i], Space.COMPOSITE, normalize=False)

    @property
    def final(self) -> QuantumState:
        return self.state(-1)

    def __len__(self):
        return len(self.times)


def resolve_dt(H: TimeDependentHamiltonian, s: PropagationSettings) -> float | None:
    """Step actually used: explicit, or ``steps_per_fastest_period`` per fastest cycle.

    For periodic ``H`` the auto step is shrunk slightly so that an integer
    number of steps spans the period (which enables unitary caching).
    """
    if H.static_flag:
        return s.dt
    if s.dt is not None:
        return s.dt
    dt = TWO_PI / (H.fastest_angular_frequency * s.steps_per_fastest_period)
    period = H.period
    if period is not None:
        dt = period / math.ceil(period / dt - 1e-9)
    return dt


def step_propagator(H: TimeDependentHamiltonian, t: float, dt: float) -> np.ndarray:
    """Midpoint-exponential propagator for ``[t, t + dt]``."""
    m = H.matrix(t + dt / 2)
    if not np.all(np.isfinite(m)):
        raise IntegrationError(f"evaluator error: non-finite entries in H({t + dt / 2:.6g})")
    try:
        e, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise IntegrationError(f"evaluator error: H({t + dt / 2:.6g}) is not diagonalisable") from exc
    return (v * np.exp(-1j * e * dt)) @ v.conj().T


def _check_inputs(psi0: QuantumState, t_grid) -> np.ndarray:
    ts = np.asarray(t_grid, dtype=float).reshape(-1)
    if ts.size == 0:
        raise ValueError("empty time grid")
    if ts[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("time grid must be strictly ascending")
    if abs(psi0.norm - 1.0) > NORM_RENORMALIZE_TOL:
        raise ValueError(f"initial state is not normalised (norm={psi0.norm:.12g})")
    return ts


def _finish(ts, out, s, dt) -> TrajectoryResult:
    norms = np.linalg.norm(out, axis=1)
    drift = float(np.max(np.abs(norms - 1.0)))
    if not np.isfinite(drift) or drift > NORM_FAIL_TOL:
        raise IntegrationError(f"norm drift {drift:.3g} exceeds {NORM_FAIL_TOL:g}; reduce dt")
    if drift <= NORM_RENORMALIZE_TOL:
        out = out / norms[:, None]
    else:
        log.warning("norm drift %.3g left uncorrected", drift)
    out.setflags(write=False)
    ts = ts.copy()
    ts.setflags(write=False)
    return TrajectoryResult(ts, out, s, drift, dt)


def propagate(H: TimeDependentHamiltonian, psi0: QuantumState, t_grid,
              s: PropagationSettings | None = None, t_offset: float = 0.0) -> TrajectoryResult:
    """Evolve ``psi0`` and record the state at every time in ``t_grid``.

    ``t_grid`` is measured from the start of the run; the Hamiltonian is
    evaluated at ``t_offset + t`` (used when a schedule continues global
    drive phases).
    """
    s = s or PropagationSettings()
    ts = _check_inputs(psi0, t_grid)
    if psi0.dim != H.dim:
        raise ValueError(f"state dim {psi0.dim} != Hamiltonian dim {H.dim}")
    psi = np.array(psi0.amplitudes)
    out = np.empty((ts.size, psi.size), dtype=complex)

    if H.static_flag:
        if not np.all(np.isfinite(H.static)):
            raise IntegrationError("evaluator error: non-finite static Hamiltonian")
        e, v = np.linalg.eigh(H.static)
        c = v.conj().T @ psi
        for j, t in enumerate(ts):
            out[j] = v @ (np.exp(-1j * e * t) * c)
        return _finish(ts, out, s, s.dt)

    if s.method is Method.REFERENCE:
        return _propagate_reference(H, psi, ts, s, t_offset)

    dt = resolve_dt(H, s)
    period = H.period
    cache = None
    if period is not None:
        m = period / dt
        n_per = int(round(m))
        if abs(m - n_per) < 1e-9 * m and n_per * psi.size ** 2 * 16 <= s.cache_limit_mb * 2 ** 20:
            cache = [step_propagator(H, t_offset + k * dt, dt) for k in range(n_per)]

    k = 0
    for j, t in enumerate(ts):
        target = t / dt
        n_j = int(math.floor(target + 1e-9))
        while k < n_j:
            if cache is not None:
                psi = cache[k % len(cache)] @ psi
            else:
                psi = step_propagator(H, t_offset + k * dt, dt) @ psi
            k += 1
        rem = t - n_j * dt
        if rem > 1e-9 * dt:
            out[j] = step_propagator(H, t_offset + n_j * dt, rem) @ psi
        else:
            out[j] = psi
    return _finish(ts, out, s, dt)


def _propagate_reference(H, psi, ts, s, t_offset) -> TrajectoryResult:
    """High-order adaptive Runge-Kutta (DOP853) used as an independent oracle."""
    max_step = TWO_PI / (8 * H.fastest_angular_frequency)

    def rhs(t, y):
        return -1j * (H.matrix(t_offset + t) @ y)

    sol = solve_ivp(rhs, (0.0, float(ts[-1])), psi, method="DOP853", t_eval=ts,
                    rtol=s.tolerance, atol=s.tolerance * 1e-2, max_step=max_step)
    if not sol.success:
        raise IntegrationError(f"reference integrator failed: {sol.message}")
    return _finish(ts, sol.y.T.copy(), s, None)


# --- frames ----------------------------------------------------------------

class FrameRotation:
    """``exp(sign * i * G * t)`` for a fixed Hermitian generator ``G``."""

    def __init__(self, generator: Operator | np.ndarray, rtol: float = 1e-12):
        g = generator.matrix if isinstance(generator, Operator) else np.asarray(generator)
        scale = max(np.linalg.norm(g), 1.0)
        if np.linalg.norm(g - g.conj().T) > rtol * scale:
            raise InvalidGeneratorError("frame generator must be Hermitian")
        self.e, self.v = np.linalg.eigh(g)
        self.vh = self.v.conj().T

    def apply(self, amplitudes: np.ndarray, t: float, sign: int = 1) -> np.ndarray:
        return self.v @ (np.exp(sign * 1j * self.e * t) * (self.vh @ amplitudes))

    def unitary(self, t: float, sign: int = 1) -> np.ndarray:
        return (self.v * np.exp(sign * 1j * self.e * t)) @ self.vh


def frame_transform(psi: QuantumState, generator: Operator, t: float, sign: int = 1) -> QuantumState:
    """``exp(+-i G t) psi``; ``sign=+1`` moves a lab state into the frame of ``G``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    rot = FrameRotation(generator)
    return QuantumState(rot.apply(psi.amplitudes, t, sign), psi.space, normalize=False)


def transform_trajectory(traj: TrajectoryResult, generator: Operator, sign: int = 1,
                         t_offset: float = 0.0) -> TrajectoryResult:
    """Apply ``exp(sign i G (t_offset + t))`` to every state of a trajectory."""
    rot = FrameRotation(generator)
    amps = np.array([rot.apply(v, t_offset + t, sign) for t, v in zip(traj.times, traj.amplitudes)])
    amps.setflags(write=False)
    return replace(traj, amplitudes=amps)


def overlap_modulo_phase(a: QuantumState, b: QuantumState) -> float:
    """``|<a|b>|``: state comparison that ignores global phase."""
    return abs(a.overlap(b))


# --- convergence ladders ---------------------------------------------------

def converge_fock_dim(run, start_dim: int = 8, tol: float = 1e-6, max_dim: int = 512):
    """Double ``fock_dim`` until ``run(dim)`` changes by less than ``tol``.

    Returns ``(dim, diagnostic)`` for the smaller dimension of the first
    agreeing pair.
    """
    if start_dim < 4:
        raise ValueError("start_dim must be >= 4")
    dim, prev = start_dim, run(start_dim)
    while True:
        nxt = 2 * dim
        if nxt > max_dim:
            raise ConvergenceError(f"fock_dim ladder did not converge by {max_dim} (tol {tol:g})")
        val = run(nxt)
        if abs(val - prev) < tol:
            return dim, prev
        dim, prev = nxt, val


def converge_dt(run, s: PropagationSettings, tol: float, hamiltonian: TimeDependentHamiltonian | None = None,
                min_dt: float = 1e-16):
    """Halve ``dt`` until ``run(settings)`` changes by less than ``tol``.

    ``run`` receives a :class:`PropagationSettings` with an explicit ``dt``.
    Returns ``(dt, diagnostic)`` for the coarser step of the agreeing pair.
    """
    dt = s.dt
    if dt is None:
        if hamiltonian is None or hamiltonian.static_flag:
            dt = 1e-9
        else:
            dt = resolve_dt(hamiltonian, s)
    prev = run(replace(s, dt=dt))
    while True:
        half = dt / 2
        if half < min_dt:
            raise ConvergenceError(f"dt ladder underflow below {min_dt:g} s")
        val = run(replace(s, dt=half))
        if abs(val - prev) < tol:
            return dt, prev
        dt, prev = half, val
