"""Torsion subgroups of plane-quartic Jacobians and local conductor exponents.

The package computes the 3-torsion and 2-torsion subgroups of the Jacobian
of a smooth plane quartic over Q, by deriving polynomial systems whose
solutions are torsion data (cubic contact curves for 3-torsion, bitangent
lines for 2-torsion), solving them numerically by homotopy continuation and
monodromy, recognizing the numbers as exact algebraic data, and feeding the
resulting local Galois actions into Artin conductor arithmetic.
"""

__version__ = "0.1.0"
