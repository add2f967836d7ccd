"""Effective two-mode picture: induced gain/loss rates and eigenfrequencies.

Adiabatic elimination of the driven cavities leaves two coupled mechanical
modes, one with net loss Gamma_m1 = gamma_m1 + gamma_o1 and one with net gain
Gamma_m2 = gamma_o2 - gamma_m2, where gamma_oj = 4 G_j^2 / kappa and
G_j = g0 |<a_j>| (the optical spring shift is negligible in the resolved
sideband and dropped).  Gamma_m2 is reported as a gain rate: positive once
the blue-detuned cavity pushes the oscillator past its intrinsic damping, and
negative below that threshold.

The complex eigenfrequencies of the pair are

    omega_pm = (Omega_m1 + Omega_m2)/2 - i (Gamma_m1 - Gamma_m2)/4
               +- sqrt(J^2 - ((Gamma_m1 + Gamma_m2)/4)^2)

with the principal square root.  The discriminant under the root changes
sign at the exceptional point J = (Gamma_m1 + Gamma_m2)/4: positive means
frequency splitting (strong coupling), negative means lifetime splitting
(weak coupling).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from .model import SystemParams

#: |discriminant| below this counts as sitting on the exceptional point.
EP_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EffectiveRates:
    G1: float
    G2: float
    gamma_o1: float
    gamma_o2: float
    Gamma_m1: float     # net loss rate of the red-detuned oscillator
    Gamma_m2: float     # net gain rate of the blue-detuned oscillator
    Omega_m1: float
    Omega_m2: float


@dataclass(frozen=True)
class EffectiveSpectrum:
    omega_plus: complex
    omega_minus: complex
    discriminant: float
    at_ep: bool


def effective_rates(params: SystemParams, a1: complex, a2: complex) -> EffectiveRates:
    """Optomechanically induced rates at given intracavity amplitudes.

    The amplitudes may come from the algebraic fixed point
    (:func:`epomc.classical.fixed_point`) or from a trailing-window average
    of |<a_j>| on a self-oscillating trajectory
    (:func:`epomc.classical.trailing_field_average`); both parameterizations
    are in use, the trailing average being the default for limit cycles.
    """
    g1 = params.g0 * abs(a1)
    g2 = params.g0 * abs(a2)
    gamma_o1 = 4.0 * g1 ** 2 / params.kappa
    gamma_o2 = 4.0 * g2 ** 2 / params.kappa
    return EffectiveRates(
        G1=g1,
        G2=g2,
        gamma_o1=gamma_o1,
        gamma_o2=gamma_o2,
        Gamma_m1=params.gamma_m1 + gamma_o1,
        Gamma_m2=gamma_o2 - params.gamma_m2,
        Omega_m1=params.omega_m1,
        Omega_m2=params.omega_m2,
    )


def spectrum(rates: EffectiveRates, j_coupling: float) -> EffectiveSpectrum:
    """Complex eigenfrequencies of the effective gain-loss pair."""
    mean = 0.5 * (rates.Omega_m1 + rates.Omega_m2) \
        - 0.25j * (rates.Gamma_m1 - rates.Gamma_m2)
    disc = j_coupling ** 2 - (0.25 * (rates.Gamma_m1 + rates.Gamma_m2)) ** 2
    root = cmath.sqrt(complex(disc))
    return EffectiveSpectrum(
        omega_plus=mean + root,
        omega_minus=mean - root,
        discriminant=disc,
        at_ep=abs(disc) < EP_TOLERANCE,
    )


def spectrum_from_params(params: SystemParams, a1: complex, a2: complex) -> EffectiveSpectrum:
    return spectrum(effective_rates(params, a1, a2), params.j_coupling)
