"""Deformed convolution and Fourier algebras: numerical experiments on groups.

Subpackages and modules:

``lie``          duals of compact Lie groups (tori, SU(2), SO(3), SU(3), products)
``measures``     central deformation measures and dual summability verdicts
``finite``       exact finite-group models, Fourier calculus, deformed products
``gamma2``       the gamma_2 (Schur multiplier) norm by semidefinite programming
``growth``       word growth of finitely generated groups and radial deformations
``vn``           group von Neumann algebra norms and the Fourier-side pinch bounds
``acceptance``   the seeded acceptance suite
``cli``          the ``deforma`` command line
"""
__version__ = "0.1.0"
