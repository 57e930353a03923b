"""Nonlinear rate functions, the adhesion rate and the pointwise dynamics.

The chi-dependent factors and ``reaction_terms`` work elementwise, so the
same code evaluates a single well-mixed state and every cell of a
discretized field. The stimulus factors take a scalar S because the
stimulus is spatially uniform.
"""

from __future__ import annotations

import math

import numpy as np

from .params import ParameterSet, StimulusSignal


class RhsEvaluationError(ValueError):
    """Non-finite state handed to the dynamics."""


def alpha1_s(S: float, p: ParameterSet) -> float:
    """Stimulus factor of the differentiation rate, 1/h.

    A C1 piecewise function: constant alpha1_min outside [S_min - S_d,
    S_max + S_d], constant alpha1_max on the central plateau, and cubic
    ramps of half-width S_d joining the levels with zero slope at the
    joints.
    """
    lo, hi, sd = p.S_min, p.S_max, p.S_d
    a_min, a_max = p.alpha1_min, p.alpha1_max
    mid = (a_max + a_min) / 2.0
    if S <= lo - sd:
        return a_min
    if S <= lo + sd:
        u = (S - lo) / sd
        return (a_min - a_max) / 4.0 * u**3 + 3.0 * (a_max - a_min) / 4.0 * u + mid
    if S <= hi - sd:
        return a_max
    if S <= hi + sd:
        u = (S - hi) / sd
        return (a_max - a_min) / 4.0 * u**3 + 3.0 * (a_min - a_max) / 4.0 * u + mid
    return a_min


def alpha2_s(S: float, p: ParameterSet) -> float:
    """Stimulus factor of the dedifferentiation rate, 1/h.

    Constant alpha2_max up to S_min, then decaying like S_min/S.
    """
    if S <= p.S_min:
        return p.alpha2_max
    return p.alpha2_max * p.S_min / S


def alpha1_chi(chi, p: ParameterSet):
    """Medium factor of the differentiation rate: chi^2/(chi_c^2 + chi^2) in [0, 1)."""
    if np.any(np.asarray(chi) < 0.0):
        raise ValueError("alpha1_chi: negative medium concentration")
    return chi * chi / (p.chi_c * p.chi_c + chi * chi)


def alpha2_chi(chi, p: ParameterSet):
    """Medium factor of the dedifferentiation rate: chi_c^2/(chi_c^2 + chi^2) in (0, 1]."""
    if np.any(np.asarray(chi) < 0.0):
        raise ValueError("alpha2_chi: negative medium concentration")
    return p.chi_c * p.chi_c / (p.chi_c * p.chi_c + chi * chi)


def adhesion_rate(h, tau, p: ParameterSet):
    """Adhesion rate B(h, tau) = (k1+/H) h + (k2+/K) tau + k-, 1/h.

    Affine in both arguments. A missing k_minus contributes zero, which
    leaves the gradient of B (the only thing the default taxis mode uses)
    unchanged.
    """
    if np.any(np.asarray(h) < 0.0) or np.any(np.asarray(tau) < 0.0):
        raise ValueError("adhesion_rate: negative concentration")
    k_off = p.k_minus if p.k_minus is not None else 0.0
    return p.k1p_over_H * h + p.k2p_over_K * tau + k_off


def reaction_terms(c1, c2, chi, h, tau, S: float, p: ParameterSet):
    """Elementwise right-hand sides of the five rate equations (no transport).

    Inputs must already be nonnegative; solvers clip undershoot before
    calling. Returns the five derivatives in state order. The medium
    factors are inlined (without the domain guard of the public
    functions) because this sits on the hot path of the integrators.
    """
    chic2 = p.chi_c * p.chi_c
    chi2 = chi * chi
    a1 = alpha1_s(S, p) * (chi2 / (chic2 + chi2))
    a2 = alpha2_s(S, p) * (chic2 / (chic2 + chi2))
    frac1 = c1 / p.C1_star
    frac2 = c2 / p.C2_star
    dc1 = -a1 * c1 + a2 * (p.omega1 / p.omega2) * c2 + p.beta * c1 * (1.0 - frac1 - frac2)
    dc2 = a1 * (p.omega2 / p.omega1) * c1 - a2 * c2
    dchi = -p.a_chi * (frac1 + frac2) * chi
    dh = -p.gamma1 * frac1 * h - p.gamma2 * frac2 * h + p.gamma3 * c2 / (1.0 + frac2)
    dtau = -p.delta1 * frac1 * tau + p.delta2 * c2
    return dc1, dc2, dchi, dh, dtau


def ode_rhs(t: float, y, stimulus: StimulusSignal, p: ParameterSet) -> np.ndarray:
    """Time derivative of the well-mixed model at state y = (c1, c2, chi, h, tau).

    Rate functions are evaluated on max(component, 0) so that solver
    undershoot cannot flip reaction signs; the raw state is untouched.
    Non-finite input raises instead of propagating NaN.
    """
    c1, c2, chi, h, tau = (float(v) for v in y)
    if not (math.isfinite(c1) and math.isfinite(c2) and math.isfinite(chi)
            and math.isfinite(h) and math.isfinite(tau)):
        raise RhsEvaluationError(f"non-finite state at t={t}: {(c1, c2, chi, h, tau)}")
    c1 = c1 if c1 > 0.0 else 0.0
    c2 = c2 if c2 > 0.0 else 0.0
    chi = chi if chi > 0.0 else 0.0
    h = h if h > 0.0 else 0.0
    tau = tau if tau > 0.0 else 0.0
    return np.array(reaction_terms(c1, c2, chi, h, tau, stimulus(t), p), dtype=float)


def ode_jacobian(t: float, y, stimulus: StimulusSignal, p: ParameterSet) -> np.ndarray:
    """Analytic Jacobian of ``ode_rhs`` with respect to the raw state.

    Columns belonging to clipped (negative) components are zero, matching
    the derivative of the clipped evaluation.
    """
    raw = [float(v) for v in y]
    c1, c2, chi, h, tau = (v if v > 0.0 else 0.0 for v in raw)
    S = stimulus(t)
    a1s = alpha1_s(S, p)
    a2s = alpha2_s(S, p)
    chic2 = p.chi_c * p.chi_c
    den = chic2 + chi * chi
    hill = chi * chi / den
    dhill = 2.0 * chi * chic2 / (den * den)   # d/dchi of the increasing factor
    a1 = a1s * hill
    a2 = a2s * (chic2 / den)
    rho = p.omega1 / p.omega2
    sig = p.omega2 / p.omega1
    f1, f2 = c1 / p.C1_star, c2 / p.C2_star

    J = np.zeros((5, 5))
    J[0, 0] = -a1 + p.beta * (1.0 - 2.0 * f1 - f2)
    J[0, 1] = a2 * rho - p.beta * c1 / p.C2_star
    J[0, 2] = a1s * dhill * (-c1) + a2s * (-dhill) * rho * c2
    J[1, 0] = a1 * sig
    J[1, 1] = -a2
    J[1, 2] = a1s * dhill * sig * c1 - a2s * (-dhill) * c2
    J[2, 0] = -p.a_chi * chi / p.C1_star
    J[2, 1] = -p.a_chi * chi / p.C2_star
    J[2, 2] = -p.a_chi * (f1 + f2)
    J[3, 0] = -p.gamma1 * h / p.C1_star
    J[3, 1] = -p.gamma2 * h / p.C2_star + p.gamma3 / (1.0 + f2) ** 2
    J[3, 3] = -p.gamma1 * f1 - p.gamma2 * f2
    J[4, 0] = -p.delta1 * tau / p.C1_star
    J[4, 1] = p.delta2
    J[4, 4] = -p.delta1 * f1
    for j, v in enumerate(raw):
        if v < 0.0:
            J[:, j] = 0.0
    return J


def make_rhs(p: ParameterSet, stimulus: StimulusSignal):
    """Bind parameters and stimulus into an f(t, y) suitable for the integrators."""
    def rhs(t, y):
        return ode_rhs(t, y, stimulus, p)
    return rhs


def make_jacobian(p: ParameterSet, stimulus: StimulusSignal):
    def jac(t, y):
        return ode_jacobian(t, y, stimulus, p)
    return jac
