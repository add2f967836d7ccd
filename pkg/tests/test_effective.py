"""Effective two-mode rates, eigenfrequencies, and the exceptional point."""

import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epomc import classical, effective
from epomc.model import PAPER_DEFAULTS


class TestEffectiveRates:
    def test_undriven(self):
        r = effective.effective_rates(PAPER_DEFAULTS, 0.0, 0.0)
        assert r.gamma_o1 == 0.0
        assert r.gamma_o2 == 0.0
        assert r.Gamma_m1 == pytest.approx(PAPER_DEFAULTS.gamma_m1)
        # Gain-rate convention: without optical pumping the blue oscillator
        # sits below threshold by exactly its intrinsic damping.
        assert r.Gamma_m2 == pytest.approx(-PAPER_DEFAULTS.gamma_m2)

    def test_quoted_arithmetic(self):
        p = PAPER_DEFAULTS  # g0 = 1e-4, kappa = 0.1
        r = effective.effective_rates(p, 1000.0, 0.0)
        assert r.G1 == pytest.approx(0.1)
        assert r.gamma_o1 == pytest.approx(0.4)

    def test_magnitude_only(self):
        r1 = effective.effective_rates(PAPER_DEFAULTS, 3 + 4j, 0.0)
        r2 = effective.effective_rates(PAPER_DEFAULTS, 5.0, 0.0)
        assert r1.G1 == pytest.approx(r2.G1)


class TestSpectrum:
    def test_symmetric_ep(self):
        gamma = 0.08
        rates = effective.EffectiveRates(
            G1=0, G2=0, gamma_o1=0, gamma_o2=0,
            Gamma_m1=gamma, Gamma_m2=gamma,
            Omega_m1=1.0, Omega_m2=1.0,
        )
        spec = effective.spectrum(rates, j_coupling=gamma / 2.0)
        assert spec.discriminant == pytest.approx(0.0, abs=1e-15)
        assert spec.at_ep
        assert spec.omega_plus == pytest.approx(spec.omega_minus)
        assert spec.omega_plus == pytest.approx(1.0)

    def test_decoupled_limit(self):
        rates = effective.EffectiveRates(
            G1=0, G2=0, gamma_o1=0, gamma_o2=0,
            Gamma_m1=0.05, Gamma_m2=0.02,
            Omega_m1=1.0, Omega_m2=1.01,
        )
        spec = effective.spectrum(rates, j_coupling=0.0)
        mean = 0.5 * (1.0 + 1.01) - 0.25j * (0.05 - 0.02)
        offset = 0.25j * (0.05 + 0.02)
        assert spec.omega_plus == pytest.approx(mean + offset)
        assert spec.omega_minus == pytest.approx(mean - offset)

    def test_strong_coupling_limit(self):
        rates = effective.EffectiveRates(
            G1=0, G2=0, gamma_o1=0, gamma_o2=0,
            Gamma_m1=1e-3, Gamma_m2=1e-3,
            Omega_m1=1.0, Omega_m2=1.0,
        )
        spec = effective.spectrum(rates, j_coupling=0.5)
        split = spec.omega_plus - spec.omega_minus
        assert split.real == pytest.approx(1.0, rel=1e-5)
        assert abs(split.imag) < 1e-12

    @settings(max_examples=500, deadline=None)
    @given(
        g1=st.floats(0, 0.5),
        g2=st.floats(-0.01, 0.5),
        j=st.floats(0, 0.2),
        om2=st.floats(0.99, 1.02),
    )
    def test_sum_rule(self, g1, g2, j, om2):
        rates = effective.EffectiveRates(
            G1=0, G2=0, gamma_o1=0, gamma_o2=0,
            Gamma_m1=g1, Gamma_m2=g2, Omega_m1=1.0, Omega_m2=om2,
        )
        spec = effective.spectrum(rates, j)
        want = (1.0 + om2) - 0.5j * (g1 - g2)
        assert abs(spec.omega_plus + spec.omega_minus - want) < 1e-12

    @settings(max_examples=500, deadline=None)
    @given(
        g1=st.floats(1e-4, 0.5),
        g2=st.floats(1e-4, 0.5),
        j=st.floats(1e-4, 0.2),
    )
    def test_splitting_exclusive_or(self, g1, g2, j):
        rates = effective.EffectiveRates(
            G1=0, G2=0, gamma_o1=0, gamma_o2=0,
            Gamma_m1=g1, Gamma_m2=g2, Omega_m1=1.0, Omega_m2=1.0,
        )
        spec = effective.spectrum(rates, j)
        if abs(spec.discriminant) < effective.EP_TOLERANCE:
            return
        re_split = abs((spec.omega_plus - spec.omega_minus).real)
        im_split = abs((spec.omega_plus - spec.omega_minus).imag)
        if spec.discriminant > 0:
            assert re_split > 0 and im_split < 1e-15
        else:
            assert im_split > 0 and re_split < 1e-15


class TestTwoModeOracle:
    """Cross-check against exact diagonalization of the gain-loss pair.

    The two-mode matrix [[W1 - i G1/2, -J], [-J, W2 + i G2/2]] (amplitude
    rates, so the paper's energy rates enter halved) has eigenvalues that
    reduce to the closed-form spectrum when W1 = W2; with mismatch the
    closed form drops a cross term of size |eps| = |dW| sqrt(dW^2/4 + Gbar^2)
    inside the root, bounding the eigenvalue deviation by sqrt(2 |eps|).
    """

    @staticmethod
    def exact_eigs(rates, j):
        m = np.array([
            [rates.Omega_m1 - 0.5j * rates.Gamma_m1, -j],
            [-j, rates.Omega_m2 + 0.5j * rates.Gamma_m2],
        ])
        return np.linalg.eigvals(m)

    def _match(self, spec, exact):
        pairs = [
            abs(spec.omega_plus - exact[0]) + abs(spec.omega_minus - exact[1]),
            abs(spec.omega_plus - exact[1]) + abs(spec.omega_minus - exact[0]),
        ]
        return min(pairs)

    @pytest.mark.parametrize("j", [0.01, 0.05])
    def test_degenerate_frequencies_exact(self, j):
        # Away from the exceptional point (where the matrix is defective and
        # numerical eigenvalues split by sqrt(machine eps)).
        rates = effective.EffectiveRates(
            G1=0, G2=0, gamma_o1=0, gamma_o2=0,
            Gamma_m1=0.07, Gamma_m2=0.05, Omega_m1=1.0, Omega_m2=1.0,
        )
        spec = effective.spectrum(rates, j)
        assert self._match(spec, self.exact_eigs(rates, j)) < 1e-10

    @settings(max_examples=300, deadline=None)
    @given(
        g1=st.floats(1e-3, 0.12),
        g2=st.floats(1e-3, 0.12),
        j=st.floats(0.01, 0.1),
        dw=st.floats(-0.01, 0.01),
    )
    def test_mismatch_bound(self, g1, g2, j, dw):
        rates = effective.EffectiveRates(
            G1=0, G2=0, gamma_o1=0, gamma_o2=0,
            Gamma_m1=g1, Gamma_m2=g2, Omega_m1=1.0, Omega_m2=1.0 + dw,
        )
        spec = effective.spectrum(rates, j)
        exact = self.exact_eigs(rates, j)
        gbar = 0.25 * (g1 + g2)
        eps = abs(dw) * np.hypot(0.5 * dw, gbar)
        # The 1e-6 floor covers the sqrt(machine-eps) eigenvalue sensitivity
        # of the numerical oracle when the pair sits on a defective point.
        bound = np.sqrt(2.0 * eps) + (dw ** 2) / (8.0 * j) + 1e-6
        assert self._match(spec, exact) < 2.0 * bound


class TestDriveConsistency:
    def test_discriminant_crosses_near_instability(self):
        # The discriminant at fixed-point fields changes sign between a
        # clearly stable and a clearly unstable drive.
        lo = PAPER_DEFAULTS.replace(drive=300.0)
        hi = PAPER_DEFAULTS.replace(drive=450.0)
        fp_lo = classical.fixed_point(lo)
        fp_hi = classical.fixed_point(hi)
        disc_lo = effective.spectrum_from_params(lo, fp_lo.a1, fp_lo.a2).discriminant
        disc_hi = effective.spectrum_from_params(hi, fp_hi.a1, fp_hi.a2).discriminant
        assert disc_lo > 0 > disc_hi

    def test_principal_root(self):
        rates = effective.EffectiveRates(
            G1=0, G2=0, gamma_o1=0, gamma_o2=0,
            Gamma_m1=0.3, Gamma_m2=0.3, Omega_m1=1.0, Omega_m2=1.0,
        )
        spec = effective.spectrum(rates, 0.01)
        root = cmath.sqrt(complex(spec.discriminant))
        assert (spec.omega_plus - spec.omega_minus) == pytest.approx(2 * root)
