"""Time-dependent propagation and evolution-rate diagnostics.

States evolve under d psi / dt = -i H(t) psi (hbar = 1) with classic
fixed-step fourth-order Runge-Kutta.  The step is fixed, not adaptive,
because the rate diagnostics need uniformly sampled overlaps; accuracy is
policed by the norm-drift monitor and the documented dt^4 convergence.

Diagnostics:

- the energy uncertainty dE = sqrt(<H^2> - <H>^2) drives the speed of
  evolution: the measured ray angle per unit time equals 2 dE
  (checked per step by :func:`aa_consistency`);
- along a parameter schedule lambda(t), the instantaneous-eigenstate metric
  predicts dE = sqrt(g_mn d(lambda^m)/dt d(lambda^n)/dt) when the state
  tracks the level; :func:`adiabatic_diagnostic` reports the ratio R of the
  measured dE to that prediction together with the population leakage out
  of the level.
"""

import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import expr
from .errors import DegeneracyError, InputError, QgeomError, StepError
from .model import ModelSpec, hamiltonian_at
from .numerics import hermitian_eigensystem, state_vector
from .qgt import derivative_matrices, qgt_from_eigensystem

__all__ = [
    "Schedule",
    "schedule",
    "Trajectory",
    "evolve",
    "energy_uncertainty",
    "AaReport",
    "aa_consistency",
    "AdiabaticReport",
    "adiabatic_diagnostic",
]

MAX_NORM_DRIFT = 1e-6
STABILITY_LIMIT = 0.1  # dt * spectral radius must stay below this


@dataclass(frozen=True)
class Schedule:
    """Model parameters as expressions in the time t (units 1/energy)."""

    parameters: tuple[str, ...]
    coords: tuple[expr.ExprNode, ...]
    coord_sources: tuple[str, ...]

    def values(self, t: float) -> np.ndarray:
        return np.array([expr.evaluate(ast, {"t": t}) for ast in self.coords])

    def values_and_rates(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """lambda(t) and d lambda / dt, exact via dual numbers."""
        k = len(self.coords)
        lam, rate = np.empty(k), np.empty(k)
        for i, ast in enumerate(self.coords):
            lam[i], rate[i] = expr.evaluate_with_derivative(ast, {"t": t}, "t")
        return lam, rate


def schedule(model: ModelSpec, exprs: Mapping[str, str]) -> Schedule:
    """Build a :class:`Schedule` covering every model parameter."""
    missing = set(model.parameters) - set(exprs)
    if missing:
        raise InputError(f"schedule does not cover parameters {sorted(missing)}")
    extra = set(exprs) - set(model.parameters)
    if extra:
        raise InputError(f"schedule names unknown parameters {sorted(extra)}")
    coords = []
    sources = []
    for name in model.parameters:
        src = exprs[name]
        try:
            coords.append(expr.parse_expression(src, ("t",)))
        except expr.ParseError as exc:
            raise InputError(f"schedule for {name!r}: {exc}") from None
        sources.append(src)
    return Schedule(model.parameters, tuple(coords), tuple(sources))


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled evolution record.

    ``states`` are renormalized at recording time; ``norm_drift_max`` is the
    largest raw deviation |norm - 1| seen while propagating.  ``step_angle``
    holds the ray angle between consecutive recorded states,
    2 arccos |<psi_k|psi_k+1>|.
    """

    times: np.ndarray           # (n+1,)
    states: np.ndarray          # (n+1, dim)
    energy_mean: np.ndarray     # (n+1,)
    energy_uncertainty: np.ndarray  # (n+1,)
    step_angle: np.ndarray      # (n,)
    dt: float
    norm_drift_max: float

    @property
    def n_steps(self) -> int:
        return self.step_angle.size


def energy_uncertainty(psi, h: np.ndarray) -> float:
    """dE = sqrt(<H^2> - <H>^2) for a normalized state.

    Tiny negative variances from rounding (within 1e-12 of zero, relative to
    max(1, <H^2>)) are clamped to zero; anything more negative indicates an
    internal inconsistency and raises.
    """
    psi = state_vector(psi)
    h = np.asarray(h, dtype=complex)
    if h.shape != (psi.size, psi.size):
        raise InputError(f"operator shape {h.shape} does not match state dim {psi.size}")
    w = h @ psi
    mean = float(np.vdot(psi, w).real)
    mean_sq = float(np.vdot(w, w).real)
    var = mean_sq - mean * mean
    if var < -1e-12 * max(1.0, abs(mean_sq)):
        raise QgeomError(f"internal error: variance {var!r} is negative beyond rounding")
    return float(np.sqrt(max(var, 0.0)))


def _spectral_radius(h: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(h)).max())


def evolve(
    model: ModelSpec,
    sched: Schedule,
    psi0,
    t0: float,
    t1: float,
    dt: float,
) -> Trajectory:
    """Propagate psi0 from t0 to t1 with fixed-step RK4.

    Requires dt * (spectral radius of H(t0)) < 0.1; the bound is re-checked
    along the run and a warning is emitted if the spectrum grows past it.
    The raw propagated state is never renormalized; a drift of the norm
    beyond 1e-6 aborts with a suggested smaller step.
    """
    if sched.parameters != model.parameters:
        raise InputError("schedule was built for a different parameter list")
    if not dt > 0:
        raise InputError("dt must be positive")
    if not t1 > t0:
        raise InputError("t1 must exceed t0")
    n = int(round((t1 - t0) / dt))
    if n < 1:
        raise InputError("time span shorter than one step")
    psi = state_vector(psi0)
    if psi.size != model.dim:
        raise InputError(f"state dimension {psi.size} does not match model dim {model.dim}")

    last_lam = None
    last_h = None

    def h_at(t: float) -> np.ndarray:
        nonlocal last_lam, last_h
        lam = sched.values(t)
        if last_lam is not None and np.array_equal(lam, last_lam):
            return last_h
        last_lam, last_h = lam, hamiltonian_at(model, lam)
        return last_h

    h0 = h_at(t0)
    radius = _spectral_radius(h0)
    if dt * radius >= STABILITY_LIMIT:
        raise StepError(
            f"dt * spectral radius = {dt * radius:.3g} >= {STABILITY_LIMIT}; "
            f"use dt < {STABILITY_LIMIT / max(radius, 1e-300):.3g}"
        )

    dim = psi.size
    times = t0 + dt * np.arange(n + 1)
    states = np.empty((n + 1, dim), dtype=complex)
    means = np.empty(n + 1)
    uncertainties = np.empty(n + 1)
    check_every = max(1, n // 64)
    warned = False
    max_drift = 0.0
    h_left = h0

    def record(k: int, h: np.ndarray):
        nonlocal max_drift
        norm = float(np.linalg.norm(psi))
        drift = abs(norm - 1.0)
        max_drift = max(max_drift, drift)
        if drift > MAX_NORM_DRIFT:
            suggested = dt * (1e-8 / drift) ** 0.25
            raise StepError(
                f"norm drift {drift:.3e} at t = {times[k]:.9g} exceeds "
                f"{MAX_NORM_DRIFT}; suggested dt ~ {suggested:.3g}"
            )
        normalized = psi / norm
        states[k] = normalized
        means[k] = float(np.vdot(normalized, h @ normalized).real)
        uncertainties[k] = energy_uncertainty(normalized, h)

    record(0, h_left)
    for k in range(n):
        t = times[k]
        h_mid = h_at(t + 0.5 * dt)
        h_right = h_at(t + dt)
        k1 = -1j * (h_left @ psi)
        k2 = -1j * (h_mid @ (psi + 0.5 * dt * k1))
        k3 = -1j * (h_mid @ (psi + 0.5 * dt * k2))
        k4 = -1j * (h_right @ (psi + dt * k3))
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        h_left = h_right
        record(k + 1, h_left)
        if not warned and (k % check_every == 0):
            radius = _spectral_radius(h_left)
            if dt * radius >= STABILITY_LIMIT:
                warnings.warn(
                    f"dt * spectral radius grew to {dt * radius:.3g} at "
                    f"t = {times[k + 1]:.9g}; results past here are suspect",
                    stacklevel=2,
                )
                warned = True

    overlaps = np.abs(np.einsum("ki,ki->k", states[:-1].conj(), states[1:]))
    step_angle = 2.0 * np.arccos(np.clip(overlaps, 0.0, 1.0))
    return Trajectory(times, states, means, uncertainties, step_angle, dt, max_drift)


@dataclass(frozen=True)
class AaReport:
    """Per-step comparison of the measured ray speed with 2 dE.

    ``rate_measured[k]`` is 2 arccos |<psi_k|psi_k+1>| / dt.  ``rate_aa[k]``
    is dE(t_k) + dE(t_k+1), the step-centered estimate of 2 dE: the measured
    angle spans the step, so pairing it with a one-endpoint dE would leave a
    first-order mismatch for time-varying dE and mask the second-order
    overlap error.  ``relative_deviation`` is their gap over the larger of
    the two (0 when both vanish).
    """

    times: np.ndarray
    rate_measured: np.ndarray
    rate_aa: np.ndarray
    relative_deviation: np.ndarray

    @property
    def max_relative_deviation(self) -> float:
        return float(self.relative_deviation.max()) if self.relative_deviation.size else 0.0


def aa_consistency(traj: Trajectory) -> AaReport:
    """Check that energy uncertainty drives the evolution rate, step by step."""
    measured = traj.step_angle / traj.dt
    aa = traj.energy_uncertainty[:-1] + traj.energy_uncertainty[1:]
    scale = np.maximum(np.abs(measured), np.abs(aa))
    with np.errstate(invalid="ignore", divide="ignore"):
        deviation = np.where(scale > 0.0, np.abs(measured - aa) / np.where(scale > 0, scale, 1.0), 0.0)
    return AaReport(traj.times[:-1], measured, aa, deviation)


@dataclass(frozen=True)
class AdiabaticReport:
    """Measured dE against the metric prediction along a schedule.

    ``ratio[k]`` is dE(t_k) / sqrt(g_mn lam_dot^m lam_dot^n); where the
    prediction is exactly zero (stationary schedule) the entry is tagged in
    ``exact_zero`` and ``ratio`` is set to 0 rather than NaN.  ``leakage``
    is 1 - |<level state|psi>|^2, the population outside the tracked level.
    """

    times: np.ndarray
    delta_e: np.ndarray
    metric_rate: np.ndarray
    ratio: np.ndarray
    exact_zero: np.ndarray
    leakage: np.ndarray


def adiabatic_diagnostic(
    model: ModelSpec,
    sched: Schedule,
    level: int,
    traj: Trajectory,
) -> AdiabaticReport:
    """Per-step adiabaticity report for a trajectory along a schedule.

    Raises :class:`DegeneracyError` (naming the time) if the tracked level
    is degenerate somewhere on the schedule.
    """
    if sched.parameters != model.parameters:
        raise InputError("schedule was built for a different parameter list")
    n_rec = traj.times.size
    rate_pred = np.empty(n_rec)
    ratio = np.empty(n_rec)
    exact_zero = np.zeros(n_rec, dtype=bool)
    leakage = np.empty(n_rec)
    for k, t in enumerate(traj.times):
        lam, lam_dot = sched.values_and_rates(t)
        es = hermitian_eigensystem(hamiltonian_at(model, lam))
        try:
            g = qgt_from_eigensystem(es, derivative_matrices(model, lam), level).metric
        except DegeneracyError as exc:
            raise DegeneracyError(f"at t = {t:.9g}: {exc}") from None
        rate_pred[k] = np.sqrt(max(float(lam_dot @ g @ lam_dot), 0.0))
        leakage[k] = 1.0 - abs(np.vdot(es.vectors[:, level], traj.states[k])) ** 2
        if rate_pred[k] == 0.0:
            exact_zero[k] = True
            ratio[k] = 0.0
        else:
            ratio[k] = traj.energy_uncertainty[k] / rate_pred[k]
    return AdiabaticReport(
        traj.times.copy(), traj.energy_uncertainty.copy(), rate_pred,
        ratio, exact_zero, np.clip(leakage, 0.0, None),
    )
