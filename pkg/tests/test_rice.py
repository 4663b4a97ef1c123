import math

import numpy as np
import pytest

import critfield.rice as rice_mod
from critfield.covariance import conditional_covariance
from critfield.models import gaussian_model
from critfield.rice import (InsufficientSamplesError, hessian_index,
                            index_ratio_mc, maxima_share,
                            mean_critical_density, projection_point, psi_ratio,
                            rice_density_mc, rice_density_quadrature,
                            sign_ratio)


class TestHessianIndex:
    def test_negative_identity_is_maximum(self):
        idx, degen = hessian_index(-np.eye(4))
        assert idx == 4 and not degen

    def test_saddle(self):
        idx, degen = hessian_index(np.diag([1.0, -1.0]))
        assert idx == 1 and not degen

    def test_degenerate_flagged(self):
        idx, degen = hessian_index(np.diag([1.0, 0.0, -2.0]))
        assert degen and idx == 1

    def test_matches_characteristic_root_oracle(self, rng):
        # companion-matrix roots of the characteristic polynomial as an
        # independent counter of negative eigenvalues
        for _ in range(20):
            n = int(rng.integers(2, 6))
            g = rng.normal(size=(n, n))
            mat = (g + g.T) / math.sqrt(2.0 * n)
            roots = np.roots(np.poly(mat))
            brute = int((roots.real < 0).sum())
            idx, degen = hessian_index(mat)
            assert not degen
            assert idx == brute


class TestDensityEstimator:
    def test_deterministic(self, gauss2):
        a = rice_density_mc(gauss2, 0.5, 0.0, k=2, n=40_000, seed=9)
        b = rice_density_mc(gauss2, 0.5, 0.0, k=2, n=40_000, seed=9)
        assert a.value == b.value and a.stderr == b.stderr

    def test_out_of_range_index_is_exact_zero(self, gauss2):
        assert rice_density_mc(gauss2, 0.5, 0.0, k=5, n=1000, seed=0).value == 0.0
        assert rice_density_mc(gauss2, 0.5, 0.0, k=-1, n=1000, seed=0).value == 0.0

    def test_partition_is_bitwise(self, gauss2):
        est = rice_density_mc(gauss2, 0.5, 0.0, k=None, n=120_000, seed=3)
        buckets = est.extras["bucket_sums"]
        assert float(np.sum(buckets)) == est.extras["raw_sum"]
        per_k = [
            rice_density_mc(gauss2, 0.5, 0.0, k=k, n=120_000, seed=3)
            for k in range(3)
        ]
        for k, e in enumerate(per_k):
            assert e.extras["raw_sum"] == buckets[k]

    def test_sign_split_partitions_total(self, gauss2):
        # even-index plus odd-index mass recovers the unrestricted mass
        est = rice_density_mc(gauss2, 0.3, 0.5, k=None, n=150_000, seed=4)
        b = est.extras["bucket_sums"]
        assert (b[0] + b[2]) + b[1] == pytest.approx(est.extras["raw_sum"], rel=1e-12)

    def test_value_positive_with_prefactor(self, gauss2):
        est = rice_density_mc(gauss2, 0.5, 0.0, k=2, n=60_000, seed=1)
        assert est.value > 0.0
        assert est.stderr > 0.0

    def test_rejects_bad_inputs(self, gauss2):
        with pytest.raises(ValueError):
            rice_density_mc(gauss2, 0.5, 0.0, n=0)
        with pytest.raises(ValueError):
            rice_density_mc(gauss2, 0.5, 0.0, factor="qr", n=100)


class TestQuadratureOracle:
    def test_matches_monte_carlo_at_zero_threshold(self, gauss2):
        quad = rice_density_quadrature(gauss2, 0.5, 0.0, 2)
        mc = rice_density_mc(gauss2, 0.5, 0.0, k=2, n=400_000, seed=2, shift="none")
        assert abs(mc.value - quad.value) / quad.value < 0.02

    def test_node_refinement_stable(self, gauss2):
        a = rice_density_quadrature(gauss2, 0.5, 0.0, 2)
        b = rice_density_quadrature(gauss2, 0.5, 0.0, 2, n_rad=110, n_t=60)
        assert abs(a.value - b.value) / a.value < 1e-6

    def test_saddle_by_complement(self, gauss2):
        total = rice_density_quadrature(gauss2, 0.5, 0.0, None)
        parts = [rice_density_quadrature(gauss2, 0.5, 0.0, k) for k in (0, 1, 2)]
        assert sum(p.value for p in parts) == pytest.approx(total.value, rel=1e-9)

    def test_requires_two_dimensions(self, gauss3):
        with pytest.raises(ValueError):
            rice_density_quadrature(gauss3, 0.5, 0.0, 2)


class TestRatios:
    def test_prefactor_never_enters(self, gauss2, monkeypatch):
        base = sign_ratio(gauss2, 0.1, 0.5, n=60_000, seed=5)
        monkeypatch.setattr(rice_mod, "_prefactor", lambda *a, **k: 1.0)
        patched = sign_ratio(gauss2, 0.1, 0.5, n=60_000, seed=5)
        assert base.value == patched.value
        assert base.stderr == patched.stderr

    def test_share_and_complement_sum_to_one(self, gauss2):
        top = maxima_share(gauss2, 0.1, 1.0, n=80_000, seed=6)
        other = index_ratio_mc(gauss2, 0.1, 1.0, (1,), (1, 2), n=80_000, seed=6,
                               stream="share")
        # the numerator masses partition the shared denominator exactly
        assert top.extras["num_sum"] + other.extras["num_sum"] == top.extras["den_sum"]
        assert top.value + other.value == pytest.approx(1.0, abs=1e-14)

    def test_share_within_unit_interval(self, gauss2):
        est = maxima_share(gauss2, 0.3, 0.0, n=50_000, seed=7)
        assert 0.0 <= est.value <= 1.0

    def test_two_seeds_agree(self, gauss2):
        a = sign_ratio(gauss2, 0.1, 1.0, n=400_000, seed=1)
        b = sign_ratio(gauss2, 0.1, 1.0, n=400_000, seed=2)
        assert abs(a.value - b.value) < 3.0 * math.hypot(a.stderr, b.stderr)

    def test_factor_choice_agrees_in_distribution(self, gauss2):
        a = rice_density_mc(gauss2, 0.4, 0.0, k=2, n=400_000, seed=11, factor="sqrt")
        b = rice_density_mc(gauss2, 0.4, 0.0, k=2, n=400_000, seed=12, factor="eig")
        assert abs(a.value - b.value) < 3.0 * math.hypot(a.stderr, b.stderr)

    def test_psi_numerator_is_low_indices(self, gauss2):
        est = psi_ratio(gauss2, 0.3, 0.5, n=60_000, seed=8)
        assert est.k == "psi"
        explicit = index_ratio_mc(gauss2, 0.3, 0.5, (0,), (1, 2), n=60_000, seed=8,
                                  stream="psi")
        assert est.value == explicit.value

    def test_psi_decreasing_in_threshold(self, gauss2):
        # monotone collapse of the low-index mass at moderate separation
        ests = [
            psi_ratio(gauss2, 0.3, u, n=300_000, seed=0)
            for u in (1.0, 2.0, 3.0, 4.0)
        ]
        for a, b in zip(ests, ests[1:]):
            assert a.value - b.value > math.hypot(a.stderr, b.stderr)

    def test_psi_unthresholded_limit(self, gauss2):
        # with the threshold far below every sample the indicators are all
        # live, so the ratio matches the unconstrained index ratio
        a = psi_ratio(gauss2, 0.3, -10.0, n=300_000, seed=9, shift="none")
        b = psi_ratio(gauss2, 0.3, -math.inf, n=300_000, seed=10, shift="none")
        assert a.value > 0.0
        assert abs(a.value - b.value) < 3.0 * math.hypot(a.stderr, b.stderr)

    def test_empty_denominator_raises(self, gauss2):
        with pytest.raises(InsufficientSamplesError):
            index_ratio_mc(gauss2, 0.1, 30.0, (2,), (1,), n=2000, seed=0,
                           shift="none")

    def test_flip_antithetic_resolves_deviation(self, gauss2):
        # the class-swapping pairing collapses shared noise: the systematic
        # deviation is visible and shrinks with r
        a = sign_ratio(gauss2, 0.2, 1.0, n=400_000, seed=0, antithetic="flip")
        b = sign_ratio(gauss2, 0.05, 1.0, n=400_000, seed=0, antithetic="flip")
        assert abs(a.value - 1.0) > 2.0 * a.stderr
        assert abs(a.value - 1.0) > abs(b.value - 1.0)

    @pytest.mark.parametrize("u_thr", [0.0, 1.0])
    def test_sign_ratio_monotone_convergence(self, gauss2, u_thr):
        # |ratio - 1| decreases along r = 0.2, 0.1, 0.05, 0.02 beyond error
        # bars (paired-reflection estimator resolves the deviation)
        ests = [
            sign_ratio(gauss2, r, u_thr, n=1_000_000, seed=0, antithetic="flip")
            for r in (0.2, 0.1, 0.05, 0.02)
        ]
        gaps = [abs(e.value - 1.0) for e in ests]
        for (ga, ea), (gb, eb) in zip(
            zip(gaps, ests), list(zip(gaps, ests))[1:]
        ):
            assert ga - gb > math.hypot(ea.stderr, eb.stderr)


class TestProjection:
    def test_candidates_coincide_in_limit(self, gauss2):
        small = projection_point(gauss2, 1e-9, 1.0)
        limit = projection_point(gauss2, 0.0, 1.0)
        assert np.abs(small.y_hat - limit.y_hat).max() < 1e-6

    def test_scaling_in_threshold(self, gauss2):
        one = projection_point(gauss2, 0.5, 1.0)
        three = projection_point(gauss2, 0.5, 3.0)
        assert np.allclose(three.y_hat, 3.0 * one.y_hat, rtol=1e-12)

    def test_edge_selected_away_from_limit(self, gauss2):
        assert projection_point(gauss2, 0.5, 1.0).which == "edge"

    def test_negative_eigenvalue_count(self, gauss2, gauss3):
        for model in (gauss2, gauss3):
            for r in (0.0, 0.2, 0.5):
                diag = projection_point(model, r, 1.0)
                assert diag.negative_count >= model.n_dim - 1

    def test_rebuilt_hessian_diagonal_with_negative_block(self, gauss3):
        from critfield.symmetric import matriculate

        diag = projection_point(gauss3, 0.4, 1.0)
        sig = conditional_covariance(gauss3, 0.4).sigma
        lam, vec = np.linalg.eigh(sig)
        root = (vec * np.sqrt(np.clip(lam, 0, None))) @ vec.T
        hess = matriculate(root @ diag.y_hat, 3)
        off = hess - np.diag(np.diag(hess))
        assert np.abs(off).max() < 1e-10
        assert (np.diag(hess)[: gauss3.n_dim - 1] < 0).all()

    def test_requires_positive_threshold(self, gauss2):
        with pytest.raises(ValueError):
            projection_point(gauss2, 0.5, 0.0)


def test_mean_critical_density_total_partition(gauss2):
    total = mean_critical_density(gauss2, k=None, n=200_000, seed=0)
    parts = [mean_critical_density(gauss2, k=k, n=200_000, seed=0) for k in (0, 1, 2)]
    assert sum(p.value for p in parts) == pytest.approx(total.value, rel=1e-12)
