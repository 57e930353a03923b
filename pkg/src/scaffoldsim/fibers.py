"""Cell diffusion tensors from the fiber orientation distribution.

The orientation of fibers in the nonwoven is modelled by an angular
central Gaussian distribution on the sphere with an SPD parameter matrix
A. Its second-moment matrix M (trace 1) follows from improper integrals
over the eigenvalues of A^-1; the cell diffusion tensors are scalar
multiples of M.

Moments are always evaluated in the eigenbasis of A, where they are
diagonal by the sign symmetry of the distribution, and rotated back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .params import ParameterSet

# Benchmark second-moment matrix of the analyzed scaffold (dimensionless;
# the corresponding A is not available, so this matrix is input data).
SCAFFOLD_MOMENT_MATRIX = np.array([
    [0.204, 0.189, 0.169],
    [0.189, 0.447, 0.251],
    [0.169, 0.251, 0.349],
])


class QuadratureError(RuntimeError):
    """Moment integral did not reach the requested accuracy."""


class NotSPDError(ValueError):
    """Orientation parameter matrix is not symmetric positive definite."""


def validate_spd(A: np.ndarray, sym_tol: float = 1e-12) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3):
        raise NotSPDError(f"expected a 3x3 matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A))))
    if float(np.max(np.abs(A - A.T))) > sym_tol * scale:
        raise NotSPDError("matrix is not symmetric")
    if float(np.linalg.eigvalsh(A).min()) <= 0.0:
        raise NotSPDError("matrix is not positive definite")
    return A


def acg_moment_diag(b, epsabs: float = 1e-12, max_error: float = 1e-10) -> np.ndarray:
    """Diagonal second moments from the eigenvalues b of A^-1.

    Entry i is (prod b)^(1/2)/2 * int_0^inf (b_i+z)^(-3/2) prod_{j!=i}
    (b_j+z)^(-1/2) dz. The moments are scale invariant, so b is first
    normalized by its geometric mean; the improper integral is then split
    at z = 1 and the tail is mapped back onto [0, 1] by z = 1/w^2, which
    leaves two analytic integrands for the adaptive quadrature. The
    entries sum to one exactly (summed over i, the integrand is a total
    derivative).
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (3,) or np.any(b <= 0.0):
        raise ValueError("need three positive eigenvalues of A^-1")
    gm = (b[0] * b[1] * b[2]) ** (1.0 / 3.0)
    bn = b / gm   # product of the normalized eigenvalues is 1, prefactor 1/2
    out = np.empty(3)
    for i in range(3):
        def near(z, i=i):
            prod = 1.0
            for j in range(3):
                prod *= (bn[j] + z) ** (-0.5)
            return prod / (bn[i] + z)

        def tail(w, i=i):
            prod = 1.0
            for j in range(3):
                prod *= (1.0 + bn[j] * w * w) ** (-0.5)
            return 2.0 * w * w * prod / (1.0 + bn[i] * w * w)

        v1, e1 = quad(near, 0.0, 1.0, epsabs=epsabs, epsrel=1e-12, limit=200)
        v2, e2 = quad(tail, 0.0, 1.0, epsabs=epsabs, epsrel=1e-12, limit=200)
        if e1 + e2 > max_error:
            raise QuadratureError(
                f"moment integral for axis {i} reached error estimate {e1 + e2:.3e} "
                f"(requested {max_error:.1e})")
        out[i] = 0.5 * (v1 + v2)
    return out


def acg_moment(A) -> np.ndarray:
    """Second-moment matrix of the orientation distribution with parameter A.

    Scale invariant (M(cA) = M(A)), symmetric, positive definite, trace 1.
    """
    A = validate_spd(A)
    evals, R = np.linalg.eigh(A)
    m = acg_moment_diag(1.0 / evals)
    M = R @ np.diag(m) @ R.T
    return (M + M.T) / 2.0


@dataclass(frozen=True)
class DiffusionTensors:
    """Second-moment matrix and the two cell diffusion tensors (um^2/h)."""

    M: np.ndarray
    D1: np.ndarray
    D2: np.ndarray


def build_tensors(M, p: ParameterSet) -> DiffusionTensors:
    """Scale the moment matrix into the two cell diffusion tensors.

    D1 = (s1^2/lambda10) M for the stem cells; D2 = (lambda10/lambda2)
    (s2/s1)^2 D1 for the chondrocytes.
    """
    M = np.asarray(M, dtype=float)
    D1 = (p.s1 ** 2 / p.lambda10) * M
    # single quotient so that the benchmark values give a factor of exactly 1
    D2 = ((p.lambda10 * p.s2 ** 2) / (p.lambda2 * p.s1 ** 2)) * D1
    return DiffusionTensors(M=M, D1=D1, D2=D2)


def restrict_2d(D) -> np.ndarray:
    """Leading 2x2 principal submatrix, used for the planar simulations."""
    D = np.asarray(D, dtype=float)
    scale = max(1.0, float(np.max(np.abs(D))))
    if float(np.max(np.abs(D - D.T))) > 1e-12 * scale:
        raise ValueError("tensor must be symmetric")
    return D[:2, :2].copy()
