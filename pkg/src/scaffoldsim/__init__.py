"""Simulation toolkit for cell seeding dynamics in fibrous scaffolds.

Well-mixed five-variable dynamics (stem cells, chondrocytes,
differentiation medium, hyaluron, extracellular matrix) plus a planar
reaction-diffusion-taxis extension whose anisotropic cell motility comes
from the fiber orientation distribution of the scaffold.
"""

from .params import (ParameterSet, OdeState, StimulusSignal, STATE_FIELDS,
                     DEFAULT_INITIAL_STATE)
from .rates import (alpha1_s, alpha1_chi, alpha2_s, alpha2_chi, adhesion_rate,
                    reaction_terms, ode_rhs, make_rhs)
from .ode import (RenewalSchedule, Trajectory, SolverStats, integrate,
                  integrate_fixed, apply_renewal, IntegrationError)
from .fibers import (acg_moment, acg_moment_diag, build_tensors, restrict_2d,
                     DiffusionTensors, SCAFFOLD_MOMENT_MATRIX)
from .grid import ScaffoldGrid
from .pde import (FieldState, TaxisCoefficient, StepperSettings, PdeStepper,
                  init_fields, uniform_fields, diffusion_divergence,
                  taxis_divergence, run_pde)

__version__ = "0.1.0"
