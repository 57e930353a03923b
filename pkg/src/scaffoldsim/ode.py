"""Stiff time integration with periodic medium-renewal events.

The workhorse is an adaptive two-stage Rosenbrock pair with an embedded
third-order error estimate (L-stable, order 2). Steps are clamped so the
solver lands exactly on the fixed output cadence and on every renewal
time, which makes trajectories reproducible bit for bit regardless of the
adaptive history. A fixed-step Euler pair (explicit, and implicit via
functional iteration) is provided for cross-validation against the field
solver, which uses the same time discretizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import CHI_INDEX, OdeState

# Rosenbrock pair coefficients (order 2 with order-3 error estimate).
_ROS_D = 1.0 / (2.0 + math.sqrt(2.0))
_ROS_E32 = 6.0 + math.sqrt(2.0)

_MAX_STEPS = 50_000_000


class IntegrationError(RuntimeError):
    """Integration failure; carries the time at which it occurred."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t={t:.6g} h)")
        self.t = t


@dataclass(frozen=True)
class RenewalSchedule:
    """Periodic replacement or top-up of the differentiation medium.

    Renewals happen at every positive multiple of ``period`` strictly
    inside the run span. ``reset`` overwrites the medium concentration
    with ``value``; ``add`` increments it. All other components are left
    untouched.
    """

    period: float          # h between renewals
    value: float           # mol/um^2 applied to the medium
    mode: str = "reset"    # "reset" | "add"

    def __post_init__(self):
        if not self.period > 0.0:
            raise ValueError("renewal period must be > 0")
        if self.mode not in ("reset", "add"):
            raise ValueError(f"unknown renewal mode {self.mode!r}")

    def event_times(self, t0: float, t_end: float) -> list[float]:
        """Multiples of the period in (t0, t_end), exclusive at both ends."""
        times = []
        k = 1
        while True:
            t = k * self.period
            if t >= t_end:
                break
            if t > t0:
                times.append(t)
            k += 1
        return times


def apply_renewal(y, schedule: RenewalSchedule):
    """Apply one renewal event. Accepts an OdeState or a length-5 array."""
    if isinstance(y, OdeState):
        return OdeState.from_array(apply_renewal(y.to_array(), schedule))
    out = np.array(y, dtype=float)
    if schedule.mode == "reset":
        out[CHI_INDEX] = schedule.value
    else:
        out[CHI_INDEX] = out[CHI_INDEX] + schedule.value
    return out


@dataclass
class SolverStats:
    steps: int = 0               # accepted steps
    rejected: int = 0
    rhs_evals: int = 0
    jacobians: int = 0
    lu_decompositions: int = 0
    newton_iterations: int = 0   # nonlinear iterations (fixed implicit stepper only)


@dataclass
class Trajectory:
    """Sampled solution: strictly increasing times, one state row each."""

    t: np.ndarray                      # (n,)
    y: np.ndarray                      # (n, 5) or (n, m) for generic systems
    stats: SolverStats
    events: np.ndarray = field(default_factory=lambda: np.empty(0))  # renewal times

    def column(self, index: int) -> np.ndarray:
        return self.y[:, index]

    def final_state(self) -> np.ndarray:
        return self.y[-1].copy()


def _numerical_jacobian(rhs, t, y, f0, stats):
    n = y.size
    J = np.empty((n, n))
    for j in range(n):
        dj = math.sqrt(np.finfo(float).eps) * max(abs(y[j]), 1e-8)
        yp = y.copy()
        yp[j] += dj
        J[:, j] = (rhs(t, yp) - f0) / dj
    stats.rhs_evals += n
    stats.jacobians += 1
    return J


def _boundary_grid(t0, t_end, sample_dt, event_times):
    """Sorted times the stepper must land on exactly: samples, events, t_end."""
    n = int(math.floor((t_end - t0) / sample_dt + 1e-9))
    pts = {t0 + k * sample_dt for k in range(1, n + 1)}
    pts.update(event_times)
    pts.add(t_end)
    return sorted(p for p in pts if t0 < p <= t_end)


def integrate(rhs, y0, t0: float, t_end: float, schedule: RenewalSchedule | None = None,
              rtol: float = 1e-6, atol=1e-9, sample_dt: float = 0.5,
              h0: float = 1e-2, jac=None) -> Trajectory:
    """Adaptive Rosenbrock integration with event handling and dense sampling.

    Local error is controlled against atol + rtol*|y| (atol may be a
    scalar or a per-component array). The returned trajectory contains the
    state at t0, at every multiple of sample_dt, at t_end, and immediately
    before and after every renewal; the post-renewal sample is stamped one
    ulp after the event time so times stay strictly increasing. ``jac`` is
    an optional analytic Jacobian callable; the default is forward
    differences.
    """
    if not t_end > t0:
        raise ValueError("t_end must be > t0")
    if rtol <= 0.0 or np.any(np.asarray(atol) < 0.0):
        raise ValueError("tolerances must be positive")

    y = np.array(y0, dtype=float)
    atol = np.broadcast_to(np.asarray(atol, dtype=float), y.shape).copy()
    stats = SolverStats()
    events = schedule.event_times(t0, t_end) if schedule is not None else []
    event_set = set(events)
    boundaries = _boundary_grid(t0, t_end, sample_dt, events)

    ts = [t0]
    ys = [y.copy()]
    t = t0
    h = min(h0, boundaries[0] - t0)
    b_idx = 0
    reject_streak = 0
    eye = np.eye(y.size)
    sqrt_eps = math.sqrt(np.finfo(float).eps)

    while b_idx < len(boundaries):
        target = boundaries[b_idx]
        if h > target - t:
            h = target - t
        if h < 1e-12 * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", t)

        f0 = rhs(t, y)
        stats.rhs_evals += 1
        if jac is not None:
            J = jac(t, y)
            stats.jacobians += 1
        else:
            J = _numerical_jacobian(rhs, t, y, f0, stats)
        dt_fd = sqrt_eps * max(abs(t), 1e-3)
        T = (rhs(t + dt_fd, y) - f0) / dt_fd
        stats.rhs_evals += 1

        W = eye - (h * _ROS_D) * J
        Winv = np.linalg.inv(W)
        stats.lu_decompositions += 1

        hdT = (h * _ROS_D) * T
        k1 = Winv @ (f0 + hdT)
        f1 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k2 = Winv @ (f1 - k1) + k1
        y1 = y + h * k2
        f2 = rhs(t + h, y1)
        k3 = Winv @ (f2 - _ROS_E32 * (k2 - f1) - 2.0 * (k1 - f0) + hdT)
        stats.rhs_evals += 2

        if not np.all(np.isfinite(y1)):
            raise IntegrationError("non-finite state", t + h)

        err = (h / 6.0) * (k1 - 2.0 * k2 + k3)
        wt = atol + rtol * np.maximum(np.abs(y), np.abs(y1))
        enorm = float(np.max(np.abs(err) / wt))

        if enorm <= 1.0:
            t_new = t + h
            # land exactly on the boundary when we aimed at it
            if abs(t_new - target) < 1e-9 * max(1.0, abs(target)):
                t_new = target
            y = y1
            t = t_new
            stats.steps += 1
            reject_streak = 0
            if t == target:
                ts.append(t)
                ys.append(y.copy())
                if t in event_set:
                    y = apply_renewal(y, schedule)
                    ts.append(math.nextafter(t, math.inf))
                    ys.append(y.copy())
                b_idx += 1
            fac = 0.9 * enorm ** (-1.0 / 3.0) if enorm > 0.0 else 5.0
            h = h * min(5.0, max(0.2, fac))
        else:
            stats.rejected += 1
            reject_streak += 1
            fac = max(0.1 if reject_streak > 1 else 0.2,
                      0.9 * enorm ** (-1.0 / 3.0))
            h = h * min(1.0, fac)

        if stats.steps + stats.rejected > _MAX_STEPS:
            raise IntegrationError("step budget exceeded", t)

    return Trajectory(t=np.array(ts), y=np.array(ys), stats=stats,
                      events=np.array(events, dtype=float))


def integrate_fixed(rhs, y0, t0: float, t_end: float, dt: float,
                    method: str = "implicit-euler", schedule: RenewalSchedule | None = None,
                    picard_tol: float = 1e-13, picard_max_iter: int = 60) -> Trajectory:
    """Fixed-step Euler integration recording every step.

    ``implicit-euler`` solves the backward step by functional iteration
    (the reaction rates are mild at practical step sizes, so the map is a
    contraction); ``explicit-euler`` is the forward rule. Both exist to
    cross-validate the field solver, which advances local reactions with
    exactly these updates. Renewals are applied after the step that lands
    on the event time (post-event sample stamped one ulp later).
    """
    if method not in ("implicit-euler", "explicit-euler"):
        raise ValueError(f"unknown method {method!r}")
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    n_steps = int(round((t_end - t0) / dt))
    if abs(t0 + n_steps * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError("t_end - t0 must be an integer number of steps")

    events = schedule.event_times(t0, t_end) if schedule is not None else []
    event_steps = set()
    for te in events:
        k = int(round((te - t0) / dt))
        if abs(t0 + k * dt - te) > 1e-9 * max(1.0, te):
            raise ValueError(f"renewal time {te} is not on the step grid")
        event_steps.add(k)

    y = np.array(y0, dtype=float)
    stats = SolverStats()
    ts = [t0]
    ys = [y.copy()]
    for k in range(1, n_steps + 1):
        t_new = t0 + k * dt
        if method == "explicit-euler":
            y = y + dt * rhs(t0 + (k - 1) * dt, y)
            stats.rhs_evals += 1
        else:
            y = _backward_euler_step(rhs, t_new, y, dt, picard_tol, picard_max_iter, stats)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state", t_new)
        stats.steps += 1
        ts.append(t_new)
        ys.append(y.copy())
        if k in event_steps:
            y = apply_renewal(y, schedule)
            ts.append(math.nextafter(t_new, math.inf))
            ys.append(y.copy())
    return Trajectory(t=np.array(ts), y=np.array(ys), stats=stats,
                      events=np.array(events, dtype=float))


def _backward_euler_step(rhs, t_new, y, dt, tol, max_iter, stats):
    """One backward Euler step by damped-free functional iteration.

    The stopping rule (max |change| <= tol*(1 + |iterate|) elementwise) is
    mirrored by the field solver's fully implicit mode; keep the two in
    sync or the uniform-state reduction tests lose their meaning.
    """
    g = y + dt * rhs(t_new, y)
    stats.rhs_evals += 1
    for _ in range(max_iter):
        g_next = y + dt * rhs(t_new, g)
        stats.rhs_evals += 1
        stats.newton_iterations += 1
        if np.all(np.abs(g_next - g) <= tol * (1.0 + np.abs(g_next))):
            return g_next
        g = g_next
    raise IntegrationError(
        f"implicit step did not converge within {max_iter} iterations "
        f"(last change {float(np.max(np.abs(g_next - g))):.3e})", t_new)
