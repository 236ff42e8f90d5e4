"""Heat-kernel splitting of layer and volume potentials.

A potential u = G * F is split at time eps into a local part, evaluated at
targets near the boundary by asymptotic expansions in sqrt(eps), and a smooth
history part computed with the smoothed kernel.
"""
from .expansions2d import SplitParams
from .harness import RunConfig, greens_identity_eval, convergence_study

__version__ = "0.1.0"
__all__ = ["SplitParams", "RunConfig", "greens_identity_eval", "convergence_study"]
