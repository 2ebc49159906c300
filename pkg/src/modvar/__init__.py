"""Numerical laboratory for polynomially modulated ergodic averages.

The package builds the concrete objects behind variational convergence of
polynomial-phase averages -- smooth weights and telescoping kernels,
exact-phase polynomial evaluation, complete exponential sums, major-arc
multipliers, variation norms with chaining covers, and desk-scale dynamical
systems -- plus a harness that runs every property check as a named
experiment.
"""

__version__ = "0.1.0"

from . import arithmetic, averaging, bumpkit, harness, multipliers, \
    polykit, signalkit, systems, util, variation

__all__ = [
    "arithmetic", "averaging", "bumpkit", "harness", "multipliers",
    "polykit", "signalkit", "systems", "util", "variation", "__version__",
]
