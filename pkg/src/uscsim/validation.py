"""Self-check suite behind ``uscsim validate``.

Every check compares the library against something it does not share code
with: a frame conjugation done by brute force, an analytic formula, or a
high-order adaptive integrator.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import USCSimError
from .evolution import FrameRotation, Method, PropagationSettings, converge_dt, converge_fock_dim, propagate, \
    step_propagator
from .hamiltonians import (
    SystemParams,
    build_dirac,
    build_driven_lab,
    build_effective,
    build_interaction_picture,
    build_jc,
    build_rabi,
    build_rotating_l1,
    ghz,
    mhz,
    rotating_frame_generator,
    strong_drive_generator,
)
from .observables import DensityMatrix, population_series, qubit_populations, wigner
from .operators import HilbertConfig, Space, composite_state, fock_state
from .protocols import effective_trajectory, exact_trajectory

MUTATIONS = ("flip-coupling-sign",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1.0))


def conjugated_rotating(p: SystemParams, cfg: HilbertConfig, t: float) -> np.ndarray:
    """``exp(iRt) (H_lab(t) - R) exp(-iRt)`` by direct matrix conjugation."""
    r = rotating_frame_generator(p.omega_1, cfg).matrix
    u = FrameRotation(r).unitary(t, +1)
    return u @ (build_driven_lab(p, cfg).matrix(t) - r) @ u.conj().T


def conjugated_interaction(p: SystemParams, cfg: HilbertConfig, t: float) -> np.ndarray:
    """``exp(i H0 t) (H_L1(t) - H0) exp(-i H0 t)`` by direct matrix conjugation."""
    h0 = strong_drive_generator(p, cfg).matrix
    u = FrameRotation(h0).unitary(t, +1)
    return u @ (build_rotating_l1(p, cfg).matrix(t) - h0) @ u.conj().T


def _sample_times(n: int, t_max: float, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, t_max, n)


def check_hermiticity(cfg: HilbertConfig, tol: float = 1e-12) -> CheckResult:
    p = SystemParams.reference(Omega_2=mhz(10))
    pd = p.replace(omega=p.omega_1, phi=np.pi / 2)
    models = [build_rabi(p, cfg), build_jc(p, cfg), build_driven_lab(p, cfg), build_rotating_l1(p, cfg),
              build_interaction_picture(p, cfg), build_effective(p, cfg), build_dirac(pd, cfg)]
    worst = 0.0
    for h in models:
        for t in _sample_times(5, 1e-7, 1):
            m = h.matrix(t)
            worst = max(worst, _rel(m, m.conj().T))
    return CheckResult("hermiticity (all models)", worst <= tol, worst, tol)


def check_rotating_conjugation(cfg: HilbertConfig, n_times: int = 50, tol: float = 1e-9) -> CheckResult:
    p = SystemParams.reference(Omega_2=mhz(10))
    h = build_rotating_l1(p, cfg)
    worst = max(_rel(h.matrix(t), conjugated_rotating(p, cfg, t)) for t in _sample_times(n_times, 1e-6, 2))
    return CheckResult("lab -> rotating-frame conjugation", worst <= tol, worst, tol, f"{n_times} random times")


def check_interaction_conjugation(cfg: HilbertConfig, n_times: int = 50, tol: float = 1e-9,
                                  mutation: str | None = None) -> CheckResult:
    """Literal interaction-picture Hamiltonian against the conjugated rotating-frame one."""
    worst = 0.0
    for phi, om2 in ((0.0, 0.0), (0.0, mhz(10)), (np.pi / 2, mhz(10)), (0.3, mhz(5))):
        p = SystemParams.reference(Omega_2=om2, phi=phi)
        h = build_interaction_picture(p, cfg, _mutation=mutation)
        for t in _sample_times(n_times, 1e-6, 3):
            worst = max(worst, _rel(h.matrix(t), conjugated_interaction(p, cfg, t)))
    detail = f"{n_times} random times x 4 parameter sets" + (f", mutation={mutation}" if mutation else "")
    return CheckResult("rotating -> interaction-picture conjugation", worst <= tol, worst, tol, detail)


def check_unitarity(cfg: HilbertConfig, tol: float = 1e-10) -> CheckResult:
    p = SystemParams.reference(Omega_2=mhz(10))
    worst = 0.0
    eye = np.eye(cfg.composite_dim)
    for h, dt in ((build_driven_lab(p, cfg), 1e-12), (build_rotating_l1(p, cfg), 1e-11)):
        for t in _sample_times(10, 1e-7, 4):
            u = step_propagator(h, t, dt)
            worst = max(worst, float(np.linalg.norm(u.conj().T @ u - eye, 2)))
    return CheckResult("per-step unitarity", worst <= tol, worst, tol)


def check_energy_conservation(cfg: HilbertConfig, tol: float = 1e-8) -> CheckResult:
    p = SystemParams.reference(g=ghz(1.0))
    h = build_rabi(p, cfg)
    psi0 = composite_state("e", 0, cfg)
    ts = np.linspace(0, 5e-9, 51)
    traj = propagate(h, psi0, ts)
    energies = np.einsum("ti,ij,tj->t", traj.amplitudes.conj(), h.static, traj.amplitudes).real
    rel = float(np.max(np.abs(energies - energies[0])) / abs(energies[0]))
    return CheckResult("static-H energy conservation", rel <= tol, rel, tol, "Rabi model, g/omega ~ 0.125")


def check_jc_rabi(cfg: HilbertConfig, tol: float = 1e-6) -> CheckResult:
    p = SystemParams.reference()
    p = p.replace(omega_q=p.omega)
    ts = np.linspace(0, 1e-7, 201)
    traj = propagate(build_jc(p, cfg), composite_state("e", 0, cfg), ts)
    pe = 1.0 - population_series(traj).values
    dev = float(np.max(np.abs(pe - np.cos(p.g * ts) ** 2)))
    return CheckResult("resonant JC: P_e = cos^2(g t)", dev <= tol, dev, tol)


def check_vacuum_wigner(tol: float = 1e-6) -> CheckResult:
    cfg = HilbertConfig(16)
    v = fock_state(0, cfg).amplitudes
    w = wigner(DensityMatrix(np.outer(v, v.conj()), Space.FIELD), (0.0, 0.0), 2, (0.0, 0.0))
    dev = abs(float(w.values[0, 0]) - 2 / np.pi)
    return CheckResult("vacuum Wigner W(0) = 2/pi", dev <= tol, dev, tol)


def observed_order(fock_dim: int = 8, t_final: float = 1e-9, steps=(100, 200, 400, 800)) -> tuple[float, list]:
    """Convergence order of the midpoint stepper on the lab-frame driven model."""
    cfg = HilbertConfig(fock_dim)
    p = SystemParams.reference(Omega_2=mhz(10))
    h = build_driven_lab(p, cfg)
    psi0 = composite_state("g", 0, cfg)
    ref = propagate(h, psi0, [0, t_final], PropagationSettings(method=Method.REFERENCE, tolerance=1e-13))
    errs = []
    for n in steps:
        out = propagate(h, psi0, [0, t_final], PropagationSettings(dt=t_final / n))
        errs.append(float(np.linalg.norm(out.final.amplitudes - ref.final.amplitudes)))
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    return float(np.median(slopes)), errs


def check_integrator_order() -> CheckResult:
    order, errs = observed_order()
    ok = 1.8 <= order <= 2.2
    return CheckResult("observed integrator order", ok, order, 2.0, "accept [1.8, 2.2]; errors " +
                       ", ".join(f"{e:.2e}" for e in errs))


def check_fock_ladder(tol: float = 1e-6) -> CheckResult:
    p = SystemParams.reference()
    ts = np.array([0.0, 0.1e-6])

    def run(dim):
        return qubit_populations(effective_trajectory(p, ts, HilbertConfig(dim)).final)[0]

    dim, val = converge_fock_dim(run, start_dim=8, tol=tol)
    return CheckResult("fock_dim ladder (effective P_g at 0.1 us)", True, float(dim), tol,
                       f"converged at fock_dim={dim}, P_g={val:.9f}")


def check_dt_ladder(tol: float = 1e-4) -> CheckResult:
    # with Omega_2 = 0 the rotating-frame model is static and dt is irrelevant
    p = SystemParams.reference(Omega_2=mhz(10))
    cfg = HilbertConfig(24)
    ts = np.array([0.0, 0.05e-6])

    def run(s):
        return qubit_populations(exact_trajectory(p, ts, cfg, s).final)[0]

    dt, val = converge_dt(run, PropagationSettings(), tol, build_rotating_l1(p, cfg))
    return CheckResult("dt ladder (exact P_g at 0.05 us)", True, dt * 1e12, tol,
                       f"converged at dt={dt * 1e12:.4g} ps, P_g={val:.9f}")


def run_all(fock_dim: int = 12, mutation: str | None = None) -> list[CheckResult]:
    if mutation is not None and mutation not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}")
    cfg = HilbertConfig(fock_dim)
    jobs = [
        lambda: check_hermiticity(cfg),
        lambda: check_rotating_conjugation(cfg),
        lambda: check_interaction_conjugation(cfg, mutation=mutation),
        lambda: check_unitarity(cfg),
        lambda: check_energy_conservation(HilbertConfig(30)),
        lambda: check_jc_rabi(HilbertConfig(8)),
        check_vacuum_wigner,
        check_integrator_order,
        check_fock_ladder,
        check_dt_ladder,
    ]
    results = []
    for job in jobs:
        t0 = time.perf_counter()
        try:
            r = job()
        except USCSimError as exc:
            r = CheckResult(getattr(job, "__name__", "check"), False, float("nan"), float("nan"), str(exc))
        results.append(CheckResult(r.name, r.passed, r.value, r.threshold, r.detail, time.perf_counter() - t0))
    return results


def format_report(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  {'value':>11}  {'limit':>9}  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.value:>11.4g}  "
                     f"{r.threshold:>9.3g}  {r.detail}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
