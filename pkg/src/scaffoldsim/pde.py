"""Reaction-diffusion-taxis solver on the masked scaffold grid.

Space: cell-centered finite volumes with a nine-point tensor stencil for
anisotropic diffusion and first-order upwinding for the adhesion-driven
drift of the stem cells; all transport is assembled in flux form, so
total mass of every diffusing species is conserved exactly under no-flux
boundaries.

Time: the default scheme is an IMEX split at fixed dt (diffusion by a
backward-Euler linear solve with a factorization reused across steps;
reactions and taxis explicit). A fully implicit backward-Euler mode
solves the coupled step by functional iteration with the diffusion
solves inside the loop; its local updates mirror the fixed-step
implicit integrator of the well-mixed model exactly.

The hyaluron and matrix fields have no spatial operator and evolve by
their local rate equations in every cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .grid import ScaffoldGrid
from .params import ParameterSet, StimulusSignal
from .rates import adhesion_rate, reaction_terms
from .ode import RenewalSchedule


class PdeSolverError(RuntimeError):
    pass


@dataclass
class FieldState:
    """The five fields as flat vectors over interior cells, plus time."""

    t: float
    c1: np.ndarray
    c2: np.ndarray
    chi: np.ndarray
    h: np.ndarray
    tau: np.ndarray

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.c1.copy(), self.c2.copy(), self.chi.copy(),
                          self.h.copy(), self.tau.copy())

    def as_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "chi": self.chi, "h": self.h, "tau": self.tau}

    def probe(self, cell: int) -> tuple:
        return (self.c1[cell], self.c2[cell], self.chi[cell], self.h[cell], self.tau[cell])


@dataclass(frozen=True)
class TaxisCoefficient:
    """Mobility of the adhesion-gradient drift of the stem cells.

    ``identity``: the benchmark simplification, mobility matrix = I.
    ``full``: k- lambda11 / (B^2 (B + lambda10)) times the stem-cell
    diffusion tensor; requires k_minus > 0 and lambda11.
    ``off``: no drift (used by pure-diffusion verification runs).
    """

    mode: str = "identity"

    def __post_init__(self):
        if self.mode not in ("identity", "full", "off"):
            raise ValueError(f"unknown taxis mode {self.mode!r}")

    def validate(self, p: ParameterSet):
        if self.mode == "full":
            if p.k_minus is None or p.lambda11 is None:
                raise ValueError("full taxis mode requires k_minus and lambda11")
            if not p.k_minus > 0.0:
                raise ValueError("full taxis mode requires k_minus > 0")


def init_fields(grid: ScaffoldGrid, seed: int, p: ParameterSet,
                center=(2500.0, 2500.0)) -> FieldState:
    """Benchmark initial data on the scaffold disk.

    Stem cells start as an isotropic Gaussian bump of peak 0.001 and
    width 1000 um about the center; the medium is uniform at 0.001; the
    hyaluron coating is 995 plus one independent U(0,1) draw per cell
    from a seeded PCG64 generator, assigned in C order of (i, j).
    """
    rng = np.random.default_rng(seed)
    x = (grid.cell_x - center[0]) / 1000.0
    y = (grid.cell_y - center[1]) / 1000.0
    c1 = 0.001 * np.exp(-15.0 * x**2 - 15.0 * y**2)
    n = grid.n_cells
    return FieldState(
        t=0.0,
        c1=c1,
        c2=np.zeros(n),
        chi=np.full(n, 0.001),
        h=995.0 + rng.random(n),
        tau=np.zeros(n),
    )


def uniform_fields(grid: ScaffoldGrid, values=(0.001, 0.0, 0.001, 1000.0, 0.0)) -> FieldState:
    """Spatially uniform initial data (defaults to the well-mixed benchmark)."""
    n = grid.n_cells
    c1, c2, chi, h, tau = (float(v) for v in values)
    return FieldState(0.0, np.full(n, c1), np.full(n, c2), np.full(n, chi),
                      np.full(n, h), np.full(n, tau))


def diffusion_divergence(field: np.ndarray, D, grid: ScaffoldGrid) -> np.ndarray:
    """Per-cell divergence of the tensor-diffusive flux of one field."""
    return grid.diffusion_operator(D) @ field


def taxis_divergence(c1: np.ndarray, h: np.ndarray, tau: np.ndarray,
                     coeff: TaxisCoefficient, grid: ScaffoldGrid, p: ParameterSet,
                     D1=None) -> np.ndarray:
    """Per-cell divergence of the upwinded adhesion-gradient drift of c1.

    The drift velocity on a face is the face-normal component of
    (mobility) grad B evaluated from the adhesion rate of the adjacent
    cells; the transported density is taken from the upwind cell. Flux
    form over interior faces only, so the boundary is automatically
    no-flux and the sum over cells vanishes.
    """
    if coeff.mode == "off":
        return np.zeros(grid.n_cells)
    coeff.validate(p)
    B = adhesion_rate(h, tau, p)
    div = np.zeros(grid.n_cells)
    dx = grid.dx

    if coeff.mode == "full":
        mob = p.k_minus * p.lambda11 / (B**2 * (B + p.lambda10))
        D1 = np.asarray(D1, dtype=float)
        if D1.shape != (2, 2):
            raise ValueError("full taxis mode needs the 2x2 stem-cell tensor")

    for axis, ft in ((0, grid.faces_x), (1, grid.faces_y)):
        gB_n = ft.Gn @ B
        if coeff.mode == "identity":
            v = gB_n
        else:
            gB_t = ft.Gt @ B
            s_face = 0.5 * (mob[ft.p] + mob[ft.q])
            if axis == 0:
                v = s_face * (D1[0, 0] * gB_n + D1[0, 1] * gB_t)
            else:
                v = s_face * (D1[1, 1] * gB_n + D1[0, 1] * gB_t)
        c_upw = np.where(v > 0.0, c1[ft.p], c1[ft.q])
        flux = v * c_upw * dx        # face-integrated transport from p toward q
        np.subtract.at(div, ft.p, flux / dx**2)
        np.add.at(div, ft.q, flux / dx**2)
    return div


@dataclass(frozen=True)
class StepperSettings:
    dt: float = 0.1
    scheme: str = "imex"            # "imex" | "implicit"
    picard_tol: float = 1e-13
    picard_max_iter: int = 60
    reactions_on: bool = True

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be > 0")
        if self.scheme not in ("imex", "implicit"):
            raise ValueError(f"unknown time scheme {self.scheme!r}")


class PdeStepper:
    """Advances the five fields at fixed dt on a prepared grid.

    The three implicit-diffusion matrices (I - dt L) are factorized once;
    the operators are constant in time, so the factorizations are reused
    for every step.
    """

    def __init__(self, grid: ScaffoldGrid, p: ParameterSet, D1_2d, D2_2d,
                 stimulus: StimulusSignal, taxis: TaxisCoefficient,
                 settings: StepperSettings):
        taxis.validate(p)
        self.grid = grid
        self.p = p
        self.D1 = np.asarray(D1_2d, dtype=float)
        self.D2 = np.asarray(D2_2d, dtype=float)
        self.stimulus = stimulus
        self.taxis = taxis
        self.settings = settings
        dt = settings.dt
        eye = sp.identity(grid.n_cells, format="csr")
        self._solve_c1 = splu((eye - dt * grid.diffusion_operator(self.D1)).tocsc())
        self._solve_c2 = splu((eye - dt * grid.diffusion_operator(self.D2)).tocsc())
        self._solve_chi = splu((eye - dt * grid.diffusion_operator(p.D_chi)).tocsc())
        self.min_seen = {name: np.inf for name in ("c1", "c2", "chi", "h", "tau")}

    def _reactions(self, s: FieldState, t_eval: float):
        if not self.settings.reactions_on:
            z = np.zeros(self.grid.n_cells)
            return z, z, z, z, z
        S = self.stimulus(t_eval)
        return reaction_terms(np.maximum(s.c1, 0.0), np.maximum(s.c2, 0.0),
                              np.maximum(s.chi, 0.0), np.maximum(s.h, 0.0),
                              np.maximum(s.tau, 0.0), S, self.p)

    def _taxis(self, s: FieldState):
        if self.taxis.mode == "off":
            return 0.0
        return taxis_divergence(s.c1, s.h, s.tau, self.taxis, self.grid, self.p,
                                D1=self.D1)

    def step(self, s: FieldState) -> FieldState:
        dt = self.settings.dt
        t_new = s.t + dt
        if self.settings.scheme == "imex":
            r1, r2, r3, r4, r5 = self._reactions(s, s.t)
            tax = self._taxis(s)
            c1 = self._solve_c1.solve(s.c1 + dt * (r1 + tax))
            c2 = self._solve_c2.solve(s.c2 + dt * r2)
            chi = self._solve_chi.solve(s.chi + dt * r3)
            out = FieldState(t_new, c1, c2, chi, s.h + dt * r4, s.tau + dt * r5)
        else:
            out = self._implicit_step(s, t_new)
        if not (np.all(np.isfinite(out.c1)) and np.all(np.isfinite(out.c2))
                and np.all(np.isfinite(out.chi)) and np.all(np.isfinite(out.h))
                and np.all(np.isfinite(out.tau))):
            raise PdeSolverError(f"non-finite field after step to t={t_new:.6g} h")
        self._track_min(out)
        return out

    def _implicit_step(self, s: FieldState, t_new: float) -> FieldState:
        """Backward Euler by functional iteration, diffusion solves inside.

        Same predictor and stopping rule as the fixed implicit integrator
        of the well-mixed model: iterate until every field changes by at
        most tol*(1 + |value|) elementwise.
        """
        dt = self.settings.dt
        tol = self.settings.picard_tol

        def apply(g: FieldState) -> FieldState:
            r1, r2, r3, r4, r5 = self._reactions(g, t_new)
            tax = self._taxis(g)
            return FieldState(
                t_new,
                self._solve_c1.solve(s.c1 + dt * (r1 + tax)),
                self._solve_c2.solve(s.c2 + dt * r2),
                self._solve_chi.solve(s.chi + dt * r3),
                s.h + dt * r4,
                s.tau + dt * r5,
            )

        g = apply(s)   # predictor: one forward evaluation
        for _ in range(self.settings.picard_max_iter):
            g_next = apply(g)
            ok = True
            for name in ("c1", "c2", "chi", "h", "tau"):
                a, b = getattr(g_next, name), getattr(g, name)
                if not np.all(np.abs(a - b) <= tol * (1.0 + np.abs(a))):
                    ok = False
                    break
            if ok:
                return g_next
            g = g_next
        resid = max(float(np.max(np.abs(getattr(g_next, n) - getattr(g, n))))
                    for n in ("c1", "c2", "chi", "h", "tau"))
        raise PdeSolverError(
            f"implicit step at t={t_new:.6g} h did not converge "
            f"({self.settings.picard_max_iter} iterations, last change {resid:.3e})")

    def _track_min(self, s: FieldState):
        for name in self.min_seen:
            v = float(np.min(getattr(s, name)))
            if v < self.min_seen[name]:
                self.min_seen[name] = v


@dataclass
class PdeRunResult:
    probe_t: np.ndarray
    probe_y: np.ndarray                 # (n, 5) at the probe cell
    snapshots: dict                     # {(field, time): vector}
    probe_cell: int
    min_seen: dict
    n_steps: int


def run_pde(stepper: PdeStepper, state: FieldState, t_end: float,
            probe_xy=(2500.0, 2500.0), probe_dt: float = 0.5,
            snapshot_times=(), snapshot_fields=("c1", "c2", "chi", "h", "tau"),
            renewal: RenewalSchedule | None = None) -> PdeRunResult:
    """March the fields to t_end, recording the probe series and snapshots.

    Probe cadence, snapshot times and renewal times must sit on the step
    grid. Renewal replaces (or tops up) the medium field uniformly and is
    applied after outputs at the event time are recorded.
    """
    dt = stepper.settings.dt
    n_steps = int(round((t_end - state.t) / dt))
    if abs(state.t + n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError("t_end must be an integer number of steps away")

    def step_index(t, what):
        k = (t - state.t) / dt
        ki = int(round(k))
        if abs(k - ki) > 1e-9 or not 0 <= ki <= n_steps:
            raise ValueError(f"{what} time {t} is not on the step grid")
        return ki

    probe_every = step_index(state.t + probe_dt, "probe cadence")
    if probe_every == 0:
        raise ValueError("probe cadence must be at least one step")
    snap_steps = {}
    for tt in snapshot_times:
        snap_steps.setdefault(step_index(tt, "snapshot"), []).append(tt)
    event_steps = {}
    if renewal is not None:
        for te in renewal.event_times(state.t, t_end):
            event_steps[step_index(te, "renewal")] = te

    probe_cell = stepper.grid.cell_at(*probe_xy)
    probe_t, probe_y = [], []
    snapshots = {}

    def record(k, s):
        if k % probe_every == 0 or k == n_steps:
            probe_t.append(s.t)
            probe_y.append(s.probe(probe_cell))
        for tt in snap_steps.get(k, ()):
            for name in snapshot_fields:
                snapshots[(name, tt)] = getattr(s, name).copy()

    stepper._track_min(state)
    record(0, state)
    s = state
    t0 = state.t
    for k in range(1, n_steps + 1):
        s = stepper.step(s)
        s.t = t0 + k * dt   # exact multiples, no accumulated drift
        record(k, s)
        if k in event_steps:
            s = s.copy()
            if renewal.mode == "reset":
                s.chi[:] = renewal.value
            else:
                s.chi += renewal.value
    return PdeRunResult(
        probe_t=np.array(probe_t), probe_y=np.array(probe_y),
        snapshots=snapshots, probe_cell=probe_cell,
        min_seen=dict(stepper.min_seen), n_steps=n_steps,
    )
