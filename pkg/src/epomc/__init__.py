"""Simulation toolkit for two mechanically coupled gain-loss optomechanical
oscillators: mean-field dynamics and limit cycles, exceptional-point
analysis, Lyapunov covariance propagation, and Gaussian quantum metrics
(phase synchronization, logarithmic negativity, Wigner surfaces, fidelity).
"""

__version__ = "0.1.0"
