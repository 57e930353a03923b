"""Figure regeneration for the scaffold seeding simulations.

Consumes the documented CSV outputs (trajectories, probe series, field
snapshots, rate samples) and renders the benchmark figure set; it never
recomputes model quantities.
"""

from .render import FIGURE_KINDS, FigureSpec, render
from .schemas import SchemaError

__version__ = "0.1.0"
