"""Entanglement-free continuous-variable quantum Cournot duopoly.

Firms encode quantities as coherent-state displacements; a beam splitter
couples the two modes before photon detection. The package provides the
payoff functionals, closed-form equilibria for the symmetric,
asymmetric-information and asymmetric-loss games, a best-response oracle
that re-derives them numerically, and parameter sweeps.
"""

__version__ = "0.1.0"
