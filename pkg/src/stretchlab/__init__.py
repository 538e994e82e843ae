"""stretchlab: a numerical laboratory for paired marked length spectra.

Builds convex-cocompact Schottky representations of free groups, computes
the paired length spectrum, estimates entropy and the critical exponent,
evaluates the stretch constants bounding their ratio, and solves the
conformal-factor ray of the vanishing-mean-curvature Gauss equation.
"""

__version__ = "0.1.0"

from . import germs, groups, growth, mobius, spectra, stretch, thermo  # noqa: F401
