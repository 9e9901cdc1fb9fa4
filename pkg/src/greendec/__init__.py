"""Discrete exterior calculus testbed for Green kernels, Hodge potential
solvers, Sobolev-type inequality sweeps, and a planar dbar model.

Submodules
----------
mesh
    Simplicial meshes (disk, annulus, torus, box), distances, text I/O.
bundles
    Flat orthogonal vector bundles as edge transports.
operators
    Whitney mass matrices, twisted d, codifferential, Hodge Laplacians.
green
    Dirichlet Green kernels, decay reports, integral representations.
hodge
    Poisson and du = f potential solvers, Hodge decomposition.
inequalities
    Exponent admissibility and empirical Sobolev constants.
dbar
    Planar weighted dbar minimal solutions and improved L2 estimates.
reports
    Deterministic CSV / SVG / manifest emission.
cli
    The ``greendec`` experiment runner.
"""

__version__ = "0.1.0"
