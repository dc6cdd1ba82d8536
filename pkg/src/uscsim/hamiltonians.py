"""Hamiltonians of the two-tone driven qubit-resonator system.

hbar = 1 throughout: every energy is an angular frequency in rad/s and
every time is in seconds.

Time dependence is always a finite sum of harmonics,

    H(t) = A + sum_k [ c_k exp(i(nu_k t + phi_k)) B_k + h.c. ],

which keeps evaluation cheap and lets the propagator know the fastest
frequency and (when the frequencies are commensurate) the period.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import InvalidMappingError, InvalidParametersError
from .operators import (
    HilbertConfig,
    Operator,
    Space,
    fock_annihilator,
    qubit_operators,
    rotated_basis,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def ghz(f: float) -> float:
    """Angular frequency (rad/s) of ``f`` GHz."""
    return TWO_PI * f * 1e9


def mhz(f: float) -> float:
    return TWO_PI * f * 1e6


@dataclass(frozen=True)
class SystemParams:
    """Angular frequencies (rad/s) of the driven Jaynes-Cummings system."""

    omega_q: float
    omega: float
    g: float
    omega_1: float
    omega_2: float
    Omega_1: float
    Omega_2: float
    phi: float = 0.0

    def __post_init__(self):
        for name in ("omega_q", "omega", "g", "omega_1", "omega_2", "Omega_1", "Omega_2", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParametersError(f"{name} must be finite")
        for name in ("omega_q", "omega"):
            if getattr(self, name) <= 0:
                raise InvalidParametersError(f"{name} must be positive")
        for name in ("g", "Omega_1", "Omega_2"):
            if getattr(self, name) < 0:
                raise InvalidParametersError(f"{name} must be non-negative")

    @classmethod
    def reference(cls, **overrides) -> SystemParams:
        """Parameter set used for the revival/cat figures (Omega_2 = 0)."""
        base = dict(omega_q=ghz(8.01), omega=ghz(8.01), g=mhz(20.0), omega_1=ghz(8.0),
                    omega_2=ghz(6.6), Omega_1=ghz(0.7), Omega_2=0.0, phi=0.0)
        base.update(overrides)
        return cls(**base)

    def replace(self, **changes) -> SystemParams:
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedParams:
    g_eff: float
    omega_eff: float
    qubit_eff: float
    resonance_residual: float
    ratio: float | None


@dataclass(frozen=True, eq=False)
class Harmonic:
    """One term ``amplitude * exp(i(frequency t + phase)) * operator + h.c.``."""

    operator: np.ndarray
    amplitude: complex
    frequency: float
    phase: float = 0.0


def common_period(frequencies, max_denominator: int = 10_000, rtol: float = 1e-10) -> float | None:
    """Smallest T with every ``nu*T`` a multiple of 2pi, or None if incommensurate."""
    nus = [abs(f) for f in frequencies if f != 0.0]
    if not nus:
        return None
    ref = min(nus)
    k = 1
    for nu in nus:
        r = nu / ref
        frac = Fraction(r).limit_denominator(max_denominator)
        if abs(r - float(frac)) > rtol * r:
            return None
        k = math.lcm(k, frac.denominator)
    return TWO_PI * k / ref


@dataclass(frozen=True, eq=False)
class TimeDependentHamiltonian:
    """Hermitian generator ``H(t)`` on the composite space.

    ``frame`` names the reference frame the operator is written in and
    ``qubit_basis`` holds the 2x2 unitary whose columns are the rotated
    qubit basis vectors (in ``[g, e]`` ordering) the model is naturally
    described in; it is the identity for lab-basis models.
    """

    static: np.ndarray
    harmonics: tuple[Harmonic, ...] = ()
    fock_dim: int = 0
    label: str = ""
    frame: str = "lab"
    qubit_basis: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        static = np.array(self.static, dtype=complex)
        live = []
        # round-off residues of exactly resonant combinations count as static
        zero_tol = 1e-12 * max((abs(h.frequency) for h in self.harmonics), default=0.0)
        for h in self.harmonics:
            if h.amplitude == 0:
                continue
            if abs(h.frequency) <= zero_tol:
                b = h.amplitude * np.exp(1j * h.phase) * h.operator
                static = static + b + b.conj().T
            else:
                live.append(h)
        static.setflags(write=False)
        object.__setattr__(self, "static", static)
        object.__setattr__(self, "harmonics", tuple(live))
        if not self.fock_dim:
            object.__setattr__(self, "fock_dim", static.shape[0] // 2)

    @property
    def dim(self) -> int:
        return self.static.shape[0]

    @property
    def static_flag(self) -> bool:
        return not self.harmonics

    @property
    def fastest_angular_frequency(self) -> float:
        return max((abs(h.frequency) for h in self.harmonics), default=0.0)

    @property
    def period(self) -> float | None:
        return common_period([h.frequency for h in self.harmonics])

    def matrix(self, t: float) -> np.ndarray:
        m = self.static.copy()
        for h in self.harmonics:
            b = (h.amplitude * np.exp(1j * (h.frequency * t + h.phase))) * h.operator
            m += b
            m += b.conj().T
        return m

    def __call__(self, t: float) -> Operator:
        return Operator(self.matrix(t), Space.COMPOSITE)

    @property
    def evaluator(self):
        return self.__call__

    def in_rotated_basis(self, t: float = 0.0) -> np.ndarray:
        """Matrix at ``t`` with the qubit factor expressed in ``qubit_basis``."""
        u = np.kron(self.qubit_basis, np.eye(self.fock_dim))
        return u.conj().T @ self.matrix(t) @ u


# --- building blocks -------------------------------------------------------

class _Ops:
    """Composite-space matrices reused by every builder."""

    def __init__(self, cfg: HilbertConfig):
        q = {k: v.matrix for k, v in qubit_operators().items()}
        a = fock_annihilator(cfg).matrix
        eye_f = np.eye(cfg.fock_dim)
        self.cfg = cfg
        self.a_f = a
        self.a = np.kron(q["identity"], a)
        self.ad = self.a.conj().T
        self.n = self.ad @ self.a
        self.sm = np.kron(q["sigma"], eye_f)
        self.sp = self.sm.conj().T
        self.sx = np.kron(q["sigma_x"], eye_f)
        self.sy = np.kron(q["sigma_y"], eye_f)
        self.sz = np.kron(q["sigma_z"], eye_f)
        self.jc = self.sp @ self.a + self.sm @ self.ad
        self.x_field = (self.a + self.ad) / np.sqrt(2)
        self.p_field = -1j * (self.a - self.ad) / np.sqrt(2)
        self.eye = np.eye(2 * cfg.fock_dim)

    def qubit(self, m2: np.ndarray) -> np.ndarray:
        return np.kron(m2, np.eye(self.cfg.fock_dim))


@dataclass(frozen=True)
class Drive:
    """Classical qubit drive ``-amplitude (e^{i(frequency t + phase)} sigma + h.c.)``."""

    amplitude: float
    frequency: float
    phase: float = 0.0


def build_driven(omega_q: float, omega: float, g: float, drives, cfg: HilbertConfig,
                 frame_frequency: float = 0.0, label: str = "driven") -> TimeDependentHamiltonian:
    """Driven JC Hamiltonian seen from a frame rotating at ``frame_frequency``.

    The frame generator is ``frame_frequency * (sigma_z/2 + a^dag a)``, so a
    drive at ``frequency`` appears at ``frequency - frame_frequency`` and
    becomes static when the two coincide.
    """
    o = _Ops(cfg)
    static = ((omega_q - frame_frequency) / 2) * o.sz + (omega - frame_frequency) * o.n - g * o.jc
    harmonics = tuple(Harmonic(o.sm, -d.amplitude, d.frequency - frame_frequency, d.phase)
                      for d in drives)
    frame = "lab" if frame_frequency == 0.0 else f"rotating@{frame_frequency:.12g}"
    return TimeDependentHamiltonian(static, harmonics, cfg.fock_dim, label, frame)


def rotating_frame_generator(omega_frame: float, cfg: HilbertConfig) -> Operator:
    """``omega_frame (sigma_z/2 + a^dag a)``: the excitation-number frame generator.

    This is ``omega_frame (sigma_plus sigma + a^dag a)`` shifted by the
    constant ``-omega_frame/2``, which keeps the transformed Hamiltonian
    free of an identity offset.
    """
    o = _Ops(cfg)
    return Operator(omega_frame * (o.sz / 2 + o.n), Space.COMPOSITE)


def strong_drive_generator(p: SystemParams, cfg: HilbertConfig) -> Operator:
    """``H0 = -Omega_1 (e^{i phi} sigma + h.c.)``, the static first drive in its own frame."""
    o = _Ops(cfg)
    b = np.exp(1j * p.phi) * o.sm
    return Operator(-p.Omega_1 * (b + b.conj().T), Space.COMPOSITE)


# --- the models ------------------------------------------------------------

def build_rabi(p: SystemParams, cfg: HilbertConfig) -> TimeDependentHamiltonian:
    """Full Rabi model ``(omega_q/2) sz + omega a^dag a - g sx (a + a^dag)``."""
    o = _Ops(cfg)
    static = (p.omega_q / 2) * o.sz + p.omega * o.n - p.g * o.sx @ (o.a + o.ad)
    return TimeDependentHamiltonian(static, (), cfg.fock_dim, "rabi", "lab")


def build_jc(p: SystemParams, cfg: HilbertConfig) -> TimeDependentHamiltonian:
    h = build_driven(p.omega_q, p.omega, p.g, (), cfg, label="jaynes-cummings")
    return h


def build_driven_lab(p: SystemParams, cfg: HilbertConfig) -> TimeDependentHamiltonian:
    drives = (Drive(p.Omega_1, p.omega_1, p.phi), Drive(p.Omega_2, p.omega_2, p.phi))
    return build_driven(p.omega_q, p.omega, p.g, drives, cfg, label="driven-lab")


def build_rotating_l1(p: SystemParams, cfg: HilbertConfig) -> TimeDependentHamiltonian:
    drives = (Drive(p.Omega_1, p.omega_1, p.phi), Drive(p.Omega_2, p.omega_2, p.phi))
    return build_driven(p.omega_q, p.omega, p.g, drives, cfg, frame_frequency=p.omega_1,
                        label="rotating-l1")


def build_interaction_picture(p: SystemParams, cfg: HilbertConfig, resonance_tol: float | None = None,
                              _mutation: str | None = None) -> TimeDependentHamiltonian:
    """Hand-written interaction-picture Hamiltonian w.r.t. the strong drive.

    Written with the rotated-basis projectors ``P+ = |+><+|``,
    ``P- = |-><-|``, ``K = |+><-|`` (phi-rotated when ``p.phi != 0``).
    Every term keeps its exp(+-2i Omega_1 t) phase; nothing is averaged.

    ``_mutation`` deliberately corrupts one term and exists only so the
    validation suite can show its conjugation check catches transcription
    errors.
    """
    o = _Ops(cfg)
    u = rotated_basis(p.phi)
    plus, minus = u[:, 0], u[:, 1]
    pp = o.qubit(np.outer(plus, plus.conj()))
    pm = o.qubit(np.outer(minus, minus.conj()))
    k_pm = o.qubit(np.outer(plus, minus.conj()))
    k_mp = o.qubit(np.outer(minus, plus.conj()))
    w_s = 2 * p.Omega_1
    dq = p.omega_q - p.omega_1
    d21 = p.omega_2 - p.omega_1
    a = np.exp(1j * p.phi) * o.a     # sigma_plus = e^{i phi} sigma'^dag in the rotated basis

    coupling = (pp - pm) @ a
    static = (p.omega - p.omega_1) * o.n - (p.g / 2) * (coupling + coupling.conj().T)
    h = [
        Harmonic(k_pm, -dq / 2, -w_s),
        Harmonic(k_pm @ a, -p.g / 2, -w_s),
        Harmonic(k_mp @ a, +p.g / 2, +w_s),
        Harmonic(pp - pm, -p.Omega_2 / 2, d21),
        Harmonic(k_pm, +p.Omega_2 / 2, d21 - w_s),
        Harmonic(k_mp, -p.Omega_2 / 2, d21 + w_s),
    ]
    if _mutation == "flip-coupling-sign":
        h[2] = Harmonic(k_mp @ a, -p.g / 2, +w_s)
    elif _mutation is not None:
        raise ValueError(f"unknown mutation {_mutation!r}")

    warnings = ()
    residual = p.omega_1 - p.omega_2 - 2 * p.Omega_1
    if resonance_tol is not None and abs(residual) > resonance_tol:
        msg = f"resonance residual {residual:.6g} rad/s exceeds tolerance {resonance_tol:.3g}"
        log.warning(msg)
        warnings = (msg,)
    return TimeDependentHamiltonian(static, tuple(h), cfg.fock_dim, "interaction-picture",
                                    "interaction", u, warnings)


def build_effective(p: SystemParams, cfg: HilbertConfig) -> TimeDependentHamiltonian:
    """Resonant (time-averaged) part of the interaction-picture Hamiltonian.

    ``(omega - omega_1) a^dag a + (Omega_2/2) sz - (g/2) s_phi (e^{i phi} a + h.c.)``
    with ``s_phi = e^{i phi} sigma + h.c.``; for phi = 0 this is the Rabi
    form with ``sx``. The Pauli matrices are those of the interaction frame
    in ``[g, e]`` ordering: ``s_phi`` is diagonal (``P+ - P-``) in the
    ``|+-_phi>`` basis stored in ``qubit_basis``.
    """
    o = _Ops(cfg)
    s_phi = np.exp(1j * p.phi) * o.sm
    s_phi = s_phi + s_phi.conj().T
    field_op = np.exp(1j * p.phi) * o.a
    field_op = field_op + field_op.conj().T
    static = (p.omega - p.omega_1) * o.n + (p.Omega_2 / 2) * o.sz - (p.g / 2) * s_phi @ field_op
    return TimeDependentHamiltonian(static, (), cfg.fock_dim, "effective", "interaction",
                                    rotated_basis(p.phi))


def build_dirac(p: SystemParams, cfg: HilbertConfig, rtol: float = 1e-9) -> TimeDependentHamiltonian:
    """``(Omega_2/2) sz + (g/sqrt2) sy p`` - the 1+1 Dirac form, mc^2 = Omega_2/2, c = g/sqrt2."""
    if abs(p.omega - p.omega_1) > rtol * abs(p.omega):
        raise InvalidMappingError(
            f"Dirac mapping needs omega == omega_1 (got {p.omega:.12g} vs {p.omega_1:.12g} rad/s)")
    if abs(p.phi - np.pi / 2) > 1e-9:
        raise InvalidMappingError(f"Dirac mapping needs drive phase phi = pi/2 (got {p.phi:.12g})")
    o = _Ops(cfg)
    static = (p.Omega_2 / 2) * o.sz + (p.g / np.sqrt(2)) * o.sy @ o.p_field
    return TimeDependentHamiltonian(static, (), cfg.fock_dim, "dirac", "interaction",
                                    rotated_basis(p.phi))


def derive_effective_params(p: SystemParams) -> DerivedParams:
    g_eff = p.g / 2
    omega_eff = p.omega - p.omega_1
    ratio = None if omega_eff == 0 else g_eff / omega_eff
    return DerivedParams(g_eff=g_eff, omega_eff=omega_eff, qubit_eff=p.Omega_2,
                         resonance_residual=p.omega_1 - p.omega_2 - 2 * p.Omega_1, ratio=ratio)


def solve_resonance(omega_1: float, Omega_1: float) -> float:
    """Second-drive frequency satisfying ``omega_1 - omega_2 = 2 Omega_1``."""
    omega_2 = omega_1 - 2 * Omega_1
    if not omega_2 > 0:
        raise InvalidParametersError(
            f"resonance gives non-positive omega_2 = {omega_2:.6g} rad/s "
            f"(omega_1={omega_1:.6g}, Omega_1={Omega_1:.6g})")
    return omega_2


@dataclass(frozen=True)
class RWAReport:
    ratios: dict
    passes: dict
    threshold: float

    @property
    def ok(self) -> bool:
        return all(self.passes.values())


def check_rwa_validity(p: SystemParams, threshold: float = 0.05) -> RWAReport:
    """Small-parameter ratios behind the rotating-wave approximations.

    Advisory only: the intended operating point already has
    Omega_1/omega_1 close to 0.09.
    """
    ratios = {
        "detuning": abs(p.omega - p.omega_q) / (p.omega + p.omega_q),
        "coupling": p.g / (p.omega + p.omega_q),
        "drive_1": p.Omega_1 / p.omega_1 if p.omega_1 else math.inf,
        "drive_2": p.Omega_2 / p.omega_2 if p.omega_2 else math.inf,
    }
    passes = {k: v < threshold for k, v in ratios.items()}
    for k, ok in passes.items():
        if not ok:
            log.warning("RWA ratio %s = %.4g exceeds %.3g", k, ratios[k], threshold)
    return RWAReport(ratios, passes, threshold)
