"""Gradient-bound sharpness, scaling structure, Harnack-type ratios."""

import math

import numpy as np
import pytest

from emdenlab import estimates as E
from emdenlab.errors import InputError, PreconditionError


class TestHyperbolicExtremal:
    def test_log_gradient_approaches_bound(self):
        prof = E.hn_p_harmonic_profile(3, 2.0, 1.0)
        assert prof.certified
        # bound (n-1) sqrt(kappa) / (p-1) = 2
        assert prof.limit_estimate == pytest.approx(2.0, rel=1e-6)
        assert prof.sup_g == pytest.approx(2.0, rel=1e-5)

    def test_monotone_toward_limit(self):
        # the log-gradient decreases to the bound along the tail grid
        prof = E.hn_p_harmonic_profile(4, 3.0, 0.25)
        assert np.all(np.diff(prof.g) <= 1e-12 * prof.sup_g)
        assert prof.g[-1] >= prof.limit_estimate - 1e-9

    def test_p3_example(self):
        prof = E.hn_p_harmonic_profile(3, 3.0, 1.0)
        # g at radius 20 within one percent of the bound 1
        k = int(np.argmin(np.abs(prof.grid - 20.0)))
        assert abs(prof.g[k] - 1.0) <= 0.01

    def test_flux_constancy_certificate(self):
        prof = E.hn_p_harmonic_profile(2, 1.5, 4.0)
        assert prof.residual_max <= 1e-9

    def test_pole_excess_visible_on_inner_grid(self):
        # near the puncture the profile is not entire and exceeds the bound
        prof = E.hn_p_harmonic_profile(3, 2.0, 1.0, grid=np.geomspace(0.05, 2.0, 40))
        assert prof.sup_g > 2.0 * 1.5


class TestGlobalBound:
    def test_pass_and_sharp(self):
        prof = E.hn_p_harmonic_profile(3, 2.0, 1.0)
        chk = E.global_bound_check(prof, 3, 2.0, 1.0, 0.0)
        assert chk["pass"] and chk["sharp"]
        assert chk["bound"] == pytest.approx(2.0, rel=1e-15)

    def test_delta0_relaxes_bound(self):
        prof = E.hn_p_harmonic_profile(3, 2.0, 1.0)
        chk = E.global_bound_check(prof, 3, 2.0, 1.0, 0.5)
        assert chk["bound"] == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-15)
        assert chk["pass"] and not chk["sharp"]

    def test_flat_limit_consistency(self):
        # kappa -> 0: the bound is 0 and constants are the only radial
        # entire profiles; a constant has zero log-gradient
        grid = np.linspace(1.0, 10.0, 20)
        prof = E.LogGradientProfile(
            grid=grid, u=np.ones_like(grid), g=np.zeros_like(grid),
            sup_g=0.0, limit_estimate=0.0, certified=True, residual_max=0.0,
        )
        bound = (3 - 1) / (2 - 1) * math.sqrt(0.0)
        assert prof.sup_g <= bound

    def test_uncertified_rejected(self):
        grid = np.linspace(1.0, 2.0, 5)
        prof = E.LogGradientProfile(
            grid=grid, u=np.ones_like(grid), g=np.zeros_like(grid),
            sup_g=0.0, limit_estimate=0.0, certified=False, residual_max=1.0,
        )
        with pytest.raises(PreconditionError):
            E.global_bound_check(prof, 3, 2.0, 1.0)


class TestLocalScaling:
    def test_affine_quantity_four_thirds(self):
        out = E.local_scaling_check(3, 2.0, radii=(1.0,))
        affine = next(m for m in out["members"] if m["kind"] == "affine_dilated")
        assert affine["quantities"][0] == pytest.approx(4.0 / 3.0, rel=1e-6)

    def test_dilation_invariance(self):
        out = E.local_scaling_check(3, 2.0)
        assert out["pass"]
        for member in out["members"]:
            assert abs(member["log_slope"]) <= 0.05
            q = member["quantities"]
            np.testing.assert_allclose(q, q[0], rtol=1e-9)

    def test_fundamental_profile_dimension_two(self):
        # |x - x0|^{(p-n)/(p-1)} with p=3, n=2: exponent 1/2
        out = E.local_scaling_check(2, 3.0)
        fund = next(m for m in out["members"] if m["kind"] == "fundamental")
        assert fund["pass"]
        assert fund["quantities"][0] == pytest.approx(0.5 / 2.75, rel=1e-6)


class TestHarnackRatios:
    def test_constant_profile_scale_free(self):
        rep = E.weak_harnack_ratio("constant", 3, 2.0, 1.0)
        assert rep["pass"]
        assert rep["band"] == pytest.approx(1.0, rel=1e-9)

    def test_inverse_sqrt_band(self):
        rep = E.weak_harnack_ratio("inverse_sqrt", 3, 2.0, 1.0)
        assert rep["pass"] and rep["min_rho"] > 0
        assert rep["band"] <= 1e3

    def test_smoothed_cap_band(self):
        rep = E.weak_harnack_ratio("smoothed_cap", 3, 2.0, 2.0)
        assert rep["pass"]

    def test_q_window_enforced(self):
        with pytest.raises(PreconditionError):
            E.weak_harnack_ratio("constant", 3, 2.0, 3.0)  # (p-1)chi = 3

    def test_subharmonic_profile_rejected(self):
        grow = E.RadialProfileSpec(
            "growing",
            lambda r: (1.0 + r**2) ** 0.5,
            lambda r: r * (1.0 + r**2) ** -0.5,
            lambda r: (1.0 + r**2) ** -1.5,
        )
        with pytest.raises(PreconditionError):
            E.weak_harnack_ratio(grow, 3, 2.0, 1.0)

    def test_local_max_principle_constant_unity(self):
        rep = E.local_max_principle_ratio("constant", 3, 2.0, 1.0)
        for row in rep["rows"]:
            assert row["ratio"] == pytest.approx(1.0, rel=1e-9)

    def test_local_max_principle_decaying(self):
        rep = E.local_max_principle_ratio("inverse_sqrt", 3, 2.0, 1.0)
        assert rep["pass"] and rep["band"] <= 1e3
        rep2 = E.local_max_principle_ratio("smoothed_cap", 3, 2.0, 1.0)
        assert rep2["pass"]

    def test_unknown_profile(self):
        with pytest.raises(InputError):
            E.named_profile("mystery")
