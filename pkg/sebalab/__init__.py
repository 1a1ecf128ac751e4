"""Numerical experiments on point scatterers in quantum billiards.

The building blocks live in the ``lib`` subpackage: unperturbed spectra
in ``spectrum``, the secular equation and its roots in ``secular``,
quasimodes in ``quasimode``, gap quadruples and localisation in
``localisation`` and ``momentum``, and the Poisson simulations in
``stochastic``. The most used names are pulled into the top level of
this package for convenience, and ``run`` carries out a whole
experiment the way the command line does.
"""

# Hoist some core names straight into the public namespace
from .core import Command, RunConfig, run, __version__
from .lib.exceptions import SebaError, ParameterError, NumericalError
from .lib.spectrum import (Spectrum, SpectralLine, RectangleGeometry, reduce_multiplicities,
                           generate_rectangle_odd, generate_rectangle_full, generate_poisson)
from .lib.secular import ScattererConfig, secular_value, solve_all_eigenvalues
from .lib.quasimode import make_interval, build_quasimode, solve_quasi_eigenvalues
