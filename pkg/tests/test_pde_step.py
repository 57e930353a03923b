"""Time stepping: reductions to the well-mixed model, conservation, symmetry."""

import numpy as np
import pytest

from scaffoldsim import (ParameterSet, RenewalSchedule, ScaffoldGrid,
                         StimulusSignal, TaxisCoefficient, integrate_fixed,
                         make_rhs, uniform_fields)
from scaffoldsim.fibers import SCAFFOLD_MOMENT_MATRIX, build_tensors, restrict_2d
from scaffoldsim.pde import (FieldState, PdeStepper, StepperSettings,
                             init_fields, run_pde)

P = ParameterSet()
STIM = StimulusSignal()
D1 = restrict_2d(build_tensors(SCAFFOLD_MOMENT_MATRIX, P).D1)
D2 = restrict_2d(build_tensors(SCAFFOLD_MOMENT_MATRIX, P).D2)
Y0 = np.array([0.001, 0.0, 0.001, 1000.0, 0.0])


def coarse_disk():
    return ScaffoldGrid.disk(dx=250.0)


def make_stepper(grid, dt=0.1, scheme="imex", taxis="identity", reactions=True,
                 p=P):
    return PdeStepper(grid, p, D1, D2, STIM, TaxisCoefficient(taxis),
                      StepperSettings(dt=dt, scheme=scheme, reactions_on=reactions))


def test_init_fields_benchmark_values():
    g = ScaffoldGrid.disk(dx=50.0)
    s = init_fields(g, seed=42, p=P)
    c = g.cell_at(2500.0, 2500.0)
    assert s.c1[c] == 0.001                      # peak of the bump
    far = g.cell_at(3500.0, 2500.0)
    assert s.c1[far] == pytest.approx(3.059023205018258e-10, rel=1e-12)
    assert np.all((s.h >= 995.0) & (s.h < 996.0))
    assert np.all(s.chi == 0.001) and np.all(s.c2 == 0.0) and np.all(s.tau == 0.0)
    # same seed, same field; different seed, different field
    s2 = init_fields(g, seed=42, p=P)
    assert np.array_equal(s.h, s2.h)
    s3 = init_fields(g, seed=43, p=P)
    assert not np.array_equal(s.h, s3.h)


def test_step_without_cells_preserves_medium_and_hyaluron():
    g = coarse_disk()
    st = make_stepper(g)
    n = g.n_cells
    s = FieldState(0.0, np.zeros(n), np.zeros(n), np.full(n, 1e-3),
                   np.full(n, 997.0), np.zeros(n))
    out = st.step(s)
    np.testing.assert_allclose(out.chi, 1e-3, rtol=1e-12)
    np.testing.assert_allclose(out.h, 997.0, rtol=1e-12)
    assert np.abs(out.c1).max() == 0.0 and np.abs(out.c2).max() == 0.0


def test_pure_diffusion_step_conserves_each_species():
    g = coarse_disk()
    st = make_stepper(g, taxis="off", reactions=False)
    s = init_fields(g, seed=3, p=P)
    m0 = {n: g.total(getattr(s, n)) for n in ("c1", "c2", "chi")}
    out = st.step(s)
    for n in ("c1", "c2", "chi"):
        m1 = g.total(getattr(out, n))
        assert abs(m1 - m0[n]) <= 1e-10 * max(m0[n], 1e-30)


def test_uniform_implicit_step_equals_backward_euler():
    g = coarse_disk()
    st = make_stepper(g, scheme="implicit")
    s = uniform_fields(g)
    out = st.step(s)
    tr = integrate_fixed(make_rhs(P, STIM), Y0, 0.0, 0.1, 0.1, "implicit-euler")
    probe = np.array(out.probe(g.cell_at(2500.0, 2500.0)))
    dev = np.abs(probe - tr.y[-1]) / np.maximum(np.abs(tr.y[-1]), 1e-30)
    assert dev.max() <= 1e-10


def test_uniform_imex_run_tracks_explicit_euler_twin():
    g = coarse_disk()
    st = make_stepper(g, scheme="imex")
    res = run_pde(st, uniform_fields(g), t_end=12.0, probe_dt=0.5)
    tr = integrate_fixed(make_rhs(P, STIM), Y0, 0.0, 12.0, 0.1, "explicit-euler")
    idx = [int(round(t / 0.1)) for t in res.probe_t]
    ref = tr.y[idx]
    scale = np.abs(ref).max(axis=0)
    dev = np.abs(res.probe_y - ref) / (np.abs(ref) + 1e-12 * scale)
    assert dev.max() <= 1e-8


def test_medium_mass_nonincreasing():
    g = coarse_disk()
    st = make_stepper(g)
    s = init_fields(g, seed=4, p=P)
    masses = [g.total(s.chi)]
    for _ in range(120):
        s = st.step(s)
        masses.append(g.total(s.chi))
    d = np.diff(masses)
    assert np.all(d <= 1e-12 * masses[0])


def test_reflection_symmetry_with_isotropic_tensor():
    """Symmetric data, isotropic diffusion, no adhesion gradient: the
    solution stays invariant under both grid reflections."""
    g = ScaffoldGrid.disk(dx=125.0)
    iso = 1e5 * np.eye(2)
    st = PdeStepper(g, P, iso, iso, STIM, TaxisCoefficient("identity"),
                    StepperSettings(dt=0.1))
    n = g.n_cells
    x = (g.cell_x - 2500.0) / 1000.0
    y = (g.cell_y - 2500.0) / 1000.0
    s = FieldState(0.0, 0.001 * np.exp(-15.0 * x**2 - 15.0 * y**2),
                   np.zeros(n), np.full(n, 1e-3), np.full(n, 995.5), np.zeros(n))
    for _ in range(20):
        s = st.step(s)
    for name in ("c1", "c2", "chi", "h", "tau"):
        f = g.to_grid(getattr(s, name), fill=0.0)
        assert np.abs(f - f[::-1, :]).max() <= 1e-10 * max(np.abs(f).max(), 1e-30)
        assert np.abs(f - f[:, ::-1]).max() <= 1e-10 * max(np.abs(f).max(), 1e-30)


def test_run_pde_grid_alignment_validation():
    g = coarse_disk()
    st = make_stepper(g)
    s = uniform_fields(g)
    with pytest.raises(ValueError):
        run_pde(st, s, t_end=1.05)
    with pytest.raises(ValueError):
        run_pde(st, s, t_end=2.0, snapshot_times=(0.15,))
    with pytest.raises(ValueError):
        run_pde(st, s, t_end=2.0, probe_dt=0.25)


def test_run_pde_renewal_resets_medium_field():
    g = coarse_disk()
    st = make_stepper(g)
    s = init_fields(g, seed=5, p=P)
    sched = RenewalSchedule(period=2.0, value=1e-3, mode="reset")
    res = run_pde(st, s, t_end=4.0, probe_dt=0.5, renewal=sched)
    i = int(np.argmin(np.abs(res.probe_t - 2.0)))
    # the recorded value at the event is pre-renewal; the next sample
    # starts from a refreshed, higher medium level
    assert res.probe_y[i, 2] < 1e-3
    assert res.probe_y[i + 1, 2] > res.probe_y[i, 2]


def test_positivity_guard_on_benchmark_short_run():
    g = ScaffoldGrid.disk(dx=100.0)
    st = PdeStepper(g, P, D1, D2, STIM, TaxisCoefficient("identity"),
                    StepperSettings(dt=0.1))
    res = run_pde(st, init_fields(g, seed=6, p=P), t_end=6.0, probe_dt=0.5)
    assert min(res.min_seen.values()) >= -1e-6
