"""Similarity solutions and interface oscillations of the tenth-order thin-film equation.

Subpackages:
  odecore      stiff IVP integration, dense output, events, FD Jacobians
  oscillator   interface oscillation ODE: limit cycles, equilibria, heteroclinic point
  eigensolver  nonlinear eigenvalue shooting for similarity profiles and branches
  asymptotics  closed-form small-n laws, WKBJ phases, spectra, operator gap bound
  cli          command-line front end, CSV/JSON serialization, run manifests
"""

__version__ = "0.1.0"
