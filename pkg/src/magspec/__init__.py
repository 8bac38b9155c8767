"""Eigenvalue bounds for non-self-adjoint perturbations of magnetic Hamiltonians.

Submodules:

* :mod:`magspec.landau_model` - Landau-basis truncations of magnetic Schrödinger
  and Pauli operators with complex potentials;
* :mod:`magspec.spectral` - eigenvalues, Schatten norms, weighted resolvents;
* :mod:`magspec.detreg` - regularised determinants and argument-principle zero search;
* :mod:`magspec.conformal` - Möbius distortion checks and the disk-to-rectangle map;
* :mod:`magspec.bgk` - zero sums for functions of the disk with boundary growth;
* :mod:`magspec.lt_sums` - Lieb-Thirring-type eigenvalue sums and constants;
* :mod:`magspec.harness` - configuration, sweeps, records, plots and the CLI.
"""

__version__ = "0.1.0"
