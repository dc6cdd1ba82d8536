"""Experimental sequences: two-tone simulation runs and the Ramsey-like echo.

A :class:`PulseSegment` always carries its lab-frame Hamiltonian.  It may
also carry a :class:`FrameSpec`: the same physics written in a frame
``psi_f = exp(i G t) psi_lab`` where it varies slowly or not at all.
:func:`run_schedule` integrates in that frame when available and maps the
states back exactly, which is far cheaper and more accurate than resolving
the GHz drive carriers step by step.  ``frame_mode="lab"`` forces brute
force lab integration (used to cross-check the two routes).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import USCSimError
from .evolution import (
    FrameRotation,
    PropagationSettings,
    TrajectoryResult,
    propagate,
    transform_trajectory,
)
from .hamiltonians import (
    Drive,
    SystemParams,
    TimeDependentHamiltonian,
    build_driven,
    build_driven_lab,
    build_effective,
    build_dirac,
    build_rotating_l1,
    mhz,
    rotating_frame_generator,
    strong_drive_generator,
)
from .observables import TimeSeries, population_series, qubit_populations
from .operators import HilbertConfig, Operator, QuantumState, composite_state, rotated_qubit_state


class TimeOrigin(enum.Enum):
    CONTINUE = "continue"   # drive phases referenced to global time
    RESET = "reset"         # segment clock restarts at zero


@dataclass(frozen=True, eq=False)
class FrameSpec:
    generator: Operator
    hamiltonian: TimeDependentHamiltonian


@dataclass(frozen=True, eq=False)
class PulseSegment:
    hamiltonian: TimeDependentHamiltonian
    duration: float
    time_origin: TimeOrigin = TimeOrigin.CONTINUE
    frame: FrameSpec | None = None
    label: str = ""

    def __post_init__(self):
        if not self.duration >= 0:
            raise ValueError(f"segment duration must be >= 0, got {self.duration}")


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    segments: tuple[PulseSegment, ...]
    initial_state: QuantumState

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        if not np.isfinite(self.total_duration):
            raise ValueError("schedule duration must be finite")

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))


@dataclass(frozen=True)
class RamseyConfig:
    """Echo segment settings; ``echo_amplitude=None`` means ``-Omega_1``.

    ``phase_continuous`` keeps the echo drive's phase continuous with the
    first drive at the switching instant (a frequency hop of the same
    source).  With ``False`` the echo phase is referenced to global time
    and the echo only refocuses when ``drive_detuning * t`` is a multiple
    of 2 pi.
    """

    qubit_detuning: float = mhz(-200.0)
    drive_detuning: float = mhz(-200.0)
    echo_amplitude: float | None = None
    phase_continuous: bool = True

    @classmethod
    def disabled(cls) -> RamseyConfig:
        """No detuning and no echo drive: plain free evolution after the drives stop."""
        return cls(qubit_detuning=0.0, drive_detuning=0.0, echo_amplitude=0.0)


def ground_state(cfg: HilbertConfig) -> QuantumState:
    return composite_state("g", 0, cfg)


def dirac_initial_state(cfg: HilbertConfig, phi: float = np.pi / 2) -> QuantumState:
    """Qubit along the strong drive axis, ``|+_phi> (x) |0>``.

    This is the basis state of the rotated qubit frame in which the Dirac
    mapping is written.
    """
    return composite_state(rotated_qubit_state(1, phi), 0, cfg)


def _l1_segment(p: SystemParams, duration: float, cfg: HilbertConfig) -> PulseSegment:
    frame = FrameSpec(rotating_frame_generator(p.omega_1, cfg), build_rotating_l1(p, cfg))
    return PulseSegment(build_driven_lab(p, cfg), duration, TimeOrigin.CONTINUE, frame, "two-tone")


def two_tone_protocol(p: SystemParams, t_final: float, cfg: HilbertConfig,
                      initial_state: QuantumState | None = None) -> PulseSchedule:
    """Switch both drives on at t=0 and let the system evolve for ``t_final``."""
    psi0 = initial_state or ground_state(cfg)
    return PulseSchedule((_l1_segment(p, t_final, cfg),), psi0)


def echo_segment(p: SystemParams, t_switch: float, duration: float, r: RamseyConfig,
                 cfg: HilbertConfig) -> PulseSegment:
    """Detuned qubit, drives 1 and 2 off, one echo drive near omega_1."""
    wq = p.omega_q + r.qubit_detuning
    w3 = p.omega_1 + r.drive_detuning
    amp = -p.Omega_1 if r.echo_amplitude is None else r.echo_amplitude
    phase = p.phi + ((p.omega_1 - w3) * t_switch if r.phase_continuous else 0.0)
    drives = (Drive(amp, w3, phase),)
    lab = build_driven(wq, p.omega, p.g, drives, cfg, label="ramsey-echo")
    frame = FrameSpec(rotating_frame_generator(w3, cfg),
                      build_driven(wq, p.omega, p.g, drives, cfg, frame_frequency=w3, label="ramsey-echo"))
    return PulseSegment(lab, duration, TimeOrigin.CONTINUE, frame, "ramsey-echo")


def ramsey_readout(p: SystemParams, t: float, r: RamseyConfig, cfg: HilbertConfig,
                   initial_state: QuantumState | None = None) -> PulseSchedule:
    """Drive for ``t``, then the echo segment for the same ``t``; P_g is read afterwards."""
    if t < 0:
        raise ValueError("t must be >= 0")
    psi0 = initial_state or ground_state(cfg)
    return PulseSchedule((_l1_segment(p, t, cfg), echo_segment(p, t, t, r, cfg)), psi0)


def run_schedule(schedule: PulseSchedule, settings: PropagationSettings | None = None,
                 t_grid=None, frame_mode: str = "auto") -> TrajectoryResult:
    """Propagate through every segment; the state is carried unchanged across boundaries.

    ``t_grid`` lists global record times (must start at 0); by default the
    segment boundaries are recorded.
    """
    if frame_mode not in ("auto", "lab"):
        raise ValueError("frame_mode must be 'auto' or 'lab'")
    s = settings or PropagationSettings()
    bounds = np.concatenate([[0.0], np.cumsum([seg.duration for seg in schedule.segments])])
    record = np.unique(bounds) if t_grid is None else np.asarray(t_grid, dtype=float)
    if record[0] != 0.0 or np.any(np.diff(record) <= 0):
        raise ValueError("record grid must start at 0 and be strictly ascending")
    if record[-1] > bounds[-1] * (1 + 1e-12):
        raise ValueError("record grid extends past the end of the schedule")

    psi = schedule.initial_state
    t_now = 0.0
    times, amps, drift, dt_used = [0.0], [np.array(psi.amplitudes)], 0.0, None
    for i, seg in enumerate(schedule.segments):
        if seg.duration == 0:
            continue
        snap = 1e-12 * seg.duration
        local = [x - t_now for x in record if t_now + snap < x < t_now + seg.duration - snap]
        local = np.array([0.0, *local, seg.duration])
        clock = t_now if seg.time_origin is TimeOrigin.CONTINUE else 0.0
        try:
            traj = _run_segment(seg, psi, local, s, clock, frame_mode)
        except USCSimError as exc:
            raise type(exc)(f"segment {i} ({seg.label or seg.hamiltonian.label}): {exc}") from exc
        drift = max(drift, traj.norm_drift)
        if traj.dt_used is not None:
            dt_used = max(dt_used or 0.0, traj.dt_used)
        times.extend(t_now + traj.times[1:])
        amps.extend(traj.amplitudes[1:])
        psi = QuantumState(traj.amplitudes[-1], psi.space, normalize=False)
        t_now += seg.duration

    times = np.array(times)
    amps = np.array(amps)
    # keep only requested times (segment ends are always computed)
    idx = [int(np.argmin(np.abs(times - t))) for t in record]
    times, amps = record.copy(), amps[idx]
    times.setflags(write=False)
    amps.setflags(write=False)
    return TrajectoryResult(times, amps, s, drift, dt_used)


def _run_segment(seg: PulseSegment, psi: QuantumState, local, s, clock, frame_mode) -> TrajectoryResult:
    if seg.frame is None or frame_mode == "lab":
        return propagate(seg.hamiltonian, psi, local, s, t_offset=clock)
    rot = FrameRotation(seg.frame.generator)
    psi_f = QuantumState(rot.apply(psi.amplitudes, clock, +1), psi.space, normalize=False)
    traj = propagate(seg.frame.hamiltonian, psi_f, local, s, t_offset=clock)
    return transform_trajectory(traj, seg.frame.generator, sign=-1, t_offset=clock)


# --- readouts --------------------------------------------------------------

def exact_trajectory(p: SystemParams, t_grid, cfg: HilbertConfig, settings: PropagationSettings | None = None,
                     frame: str = "rotating", initial_state: QuantumState | None = None) -> TrajectoryResult:
    """Lab-frame states of the full two-tone driven model."""
    sched = two_tone_protocol(p, float(np.max(t_grid)), cfg, initial_state)
    return run_schedule(sched, settings, t_grid, frame_mode="auto" if frame == "rotating" else "lab")


def to_interaction_frame(traj: TrajectoryResult, p: SystemParams, cfg: HilbertConfig) -> TrajectoryResult:
    """Lab states -> frame of the strong drive: ``exp(i H0 t) exp(i R t) psi``."""
    rot_frame = transform_trajectory(traj, rotating_frame_generator(p.omega_1, cfg), +1)
    return transform_trajectory(rot_frame, strong_drive_generator(p, cfg), +1)


def exact_interaction_trajectory(p: SystemParams, t_grid, cfg: HilbertConfig,
                                 settings: PropagationSettings | None = None, frame: str = "rotating",
                                 initial_state: QuantumState | None = None) -> TrajectoryResult:
    return to_interaction_frame(exact_trajectory(p, t_grid, cfg, settings, frame, initial_state), p, cfg)


def interaction_picture_readout(p: SystemParams, t_grid, cfg: HilbertConfig,
                                settings: PropagationSettings | None = None, frame: str = "rotating") -> TimeSeries:
    """P_g of the exact driven evolution viewed in the interaction frame."""
    traj = exact_interaction_trajectory(p, t_grid, cfg, settings, frame)
    return population_series(traj, "P_g_interaction")


def effective_trajectory(p: SystemParams, t_grid, cfg: HilbertConfig,
                         initial_state: QuantumState | None = None) -> TrajectoryResult:
    return propagate(build_effective(p, cfg), initial_state or ground_state(cfg), t_grid)


def dirac_trajectory(p: SystemParams, t_grid, cfg: HilbertConfig,
                     initial_state: QuantumState | None = None) -> TrajectoryResult:
    return propagate(build_dirac(p, cfg), initial_state or dirac_initial_state(cfg, p.phi), t_grid)


def ramsey_sweep(p: SystemParams, t_grid, r: RamseyConfig, cfg: HilbertConfig,
                 settings: PropagationSettings | None = None) -> TimeSeries:
    """P_g after :func:`ramsey_readout` for every ``t`` in ``t_grid``.

    Shares one driven trajectory across the sweep; each echo segment is
    static in its own rotating frame and is exponentiated exactly.  Equal
    to running every schedule separately through :func:`run_schedule`.
    """
    ts = np.asarray(t_grid, dtype=float)
    lab = exact_trajectory(p, ts, cfg, settings)
    vals = np.empty(ts.size)
    for j, (t, v) in enumerate(zip(lab.times, lab.amplitudes)):
        seg = echo_segment(p, t, t, r, cfg)
        rot = FrameRotation(seg.frame.generator)
        psi_f = rot.apply(v, t, +1)
        e, vec = np.linalg.eigh(seg.frame.hamiltonian.static)
        psi_f = vec @ (np.exp(-1j * e * t) * (vec.conj().T @ psi_f))
        vals[j] = qubit_populations(psi_f)[0]      # P_g is invariant under the diagonal frame map
    return TimeSeries(ts.copy(), vals, "P_g_ramsey")
