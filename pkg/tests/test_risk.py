import numpy as np
import pytest

from meanrisk import risk as rk
from meanrisk.errors import InvalidSpec, OutOfRange
from meanrisk.measure import ScalarDistribution, quantile

from oracles import (
    direct_semidev,
    direct_target_semidev,
    random_distribution,
    riemann_avar,
    stop_loss_grid,
)


def dist(values, weights):
    return ScalarDistribution.from_pairs(values, weights)


TWO_POINT = dist([0, 2], [0.5, 0.5])
QUARTERS = dist([1, 2, 3, 4], [0.25] * 4)

ALL_SPECS = [
    rk.RiskSpec("expectation"),
    rk.RiskSpec("avar", alpha=0.5),
    rk.RiskSpec("avar", alpha=0.9),
    rk.RiskSpec("semidev", a=1.0, p=1.0),
    rk.RiskSpec("semidev", a=0.5, p=2.0),
    rk.RiskSpec("target_semidev", a=1.0, c=1.0, p=1.0),
    rk.RiskSpec("target_semidev", a=0.7, c=2.0, p=2.0),
]

EQUIVARIANT_SPECS = [s for s in ALL_SPECS if s.kind != "target_semidev"]


class TestSpecValidation:
    def test_bad_kind(self):
        with pytest.raises(InvalidSpec):
            rk.RiskSpec("made_up")

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5, 2.0, None])
    def test_bad_alpha(self, alpha):
        with pytest.raises(InvalidSpec):
            rk.RiskSpec("avar", alpha=alpha)

    def test_bad_semidev(self):
        with pytest.raises(InvalidSpec):
            rk.RiskSpec("semidev", a=1.5, p=1.0)
        with pytest.raises(InvalidSpec):
            rk.RiskSpec("semidev", a=0.5, p=0.5)
        with pytest.raises(InvalidSpec):
            rk.RiskSpec("target_semidev", a=0.5, c=-1.0, p=1.0)

    def test_round_trip(self):
        spec = rk.RiskSpec("target_semidev", a=0.5, c=2.0, p=3.0)
        assert rk.RiskSpec.from_dict(spec.to_dict()) == spec


class TestEvaluate:
    def test_expectation(self):
        assert rk.evaluate_risk(rk.RiskSpec("expectation"), TWO_POINT) == pytest.approx(1.0)

    def test_avar_constant(self):
        for c in (-3.0, 0.0, 7.5):
            d = dist([c], [1.0])
            assert rk.evaluate_risk(rk.RiskSpec("avar", alpha=0.5), d) == pytest.approx(c)

    def test_semidev_a0_is_mean(self):
        spec = rk.RiskSpec("semidev", a=0.0, p=2.0)
        for d in (TWO_POINT, QUARTERS):
            assert rk.evaluate_risk(spec, d) == pytest.approx(d.mean(), abs=1e-12)


class TestAvar:
    def test_two_point_half(self):
        assert rk.avar(dist([0, 1], [0.5, 0.5]), 0.5) == pytest.approx(1.0)

    def test_quarters(self):
        assert rk.avar(QUARTERS, 0.5) == pytest.approx(3.5)
        assert rk.avar(QUARTERS, 0.75) == pytest.approx(4.0)

    def test_riemann_oracle(self):
        assert rk.avar(QUARTERS, 0.5) == pytest.approx(riemann_avar(QUARTERS, 0.5, 200_000), abs=1e-4)

    def test_alpha_range(self):
        with pytest.raises(OutOfRange):
            rk.avar(QUARTERS, 0.0)
        with pytest.raises(OutOfRange):
            rk.avar(QUARTERS, 1.0)

    def test_against_ru_oracle_random(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            d = random_distribution(rng, max_atoms=50)
            alpha = float(rng.uniform(0.05, 0.95))
            assert rk.avar(d, alpha) == pytest.approx(rk.avar_ru_oracle(d, alpha), abs=1e-9)


class TestRuOracle:
    def test_dirac(self):
        assert rk.avar_ru_oracle(dist([4.2], [1.0]), 0.3) == pytest.approx(4.2)

    def test_two_point(self):
        assert rk.avar_ru_oracle(dist([0, 1], [0.5, 0.5]), 0.5) == pytest.approx(1.0)

    def test_quarters(self):
        assert rk.avar_ru_oracle(QUARTERS, 0.5) == pytest.approx(3.5)


class TestSemidev:
    def test_order_one(self):
        assert rk.semidev(TWO_POINT, 1, 1) == pytest.approx(
            direct_semidev([0, 2], [0.5, 0.5], 1, 1)
        )
        assert rk.semidev(TWO_POINT, 1, 1) == pytest.approx(1.5)

    def test_dirac_no_deviation(self):
        for a, p in ((0.3, 1.0), (1.0, 2.0)):
            assert rk.semidev(dist([5.0], [1.0]), a, p) == pytest.approx(5.0)

    def test_order_two(self):
        expect = 1 + 0.5**0.5
        assert rk.semidev(TWO_POINT, 1, 2) == pytest.approx(expect)

    def test_direct_oracle_random(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            d = random_distribution(rng)
            a, p = float(rng.uniform(0, 1)), float(rng.uniform(1, 3))
            assert rk.semidev(d, a, p) == pytest.approx(
                direct_semidev(d.values, d.weights, a, p), abs=1e-12
            )


class TestTargetSemidev:
    def test_basic(self):
        assert rk.target_semidev(TWO_POINT, 1, 1, 1) == pytest.approx(1.5)

    def test_translation_equivariance_fails(self):
        shifted = dist([1, 3], [0.5, 0.5])
        v_shift = rk.target_semidev(shifted, 1, 1, 1)
        v_base = rk.target_semidev(TWO_POINT, 1, 1, 1)
        assert v_shift == pytest.approx(3.0)
        assert v_shift - (v_base + 1.0) >= 0.5 - 1e-10

    def test_below_target_is_mean(self):
        d = dist([-2, 0.5], [0.5, 0.5])
        assert rk.target_semidev(d, 0.8, 1.0, 2.0) == pytest.approx(d.mean())

    def test_direct_oracle_random(self):
        rng = np.random.default_rng(37)
        for _ in range(40):
            d = random_distribution(rng)
            a, c, p = float(rng.uniform(0, 1)), float(rng.uniform(0.5, 3)), float(rng.uniform(1, 3))
            assert rk.target_semidev(d, a, c, p) == pytest.approx(
                direct_target_semidev(d.values, d.weights, a, c, p), abs=1e-12
            )


class TestLawInvariance:
    def test_permutations_and_splits_exact(self):
        rng = np.random.default_rng(41)
        values = rng.uniform(-5, 5, size=8)
        weights = rng.uniform(0.1, 1, size=8)
        weights /= weights.sum()
        reference = dist(values, weights)
        perm = rng.permutation(8)
        permuted = dist(values[perm], weights[perm])
        split_vals = np.concatenate([values, values])
        split_wts = np.concatenate([weights / 2, weights / 2])
        split = dist(split_vals, split_wts)
        for spec in ALL_SPECS:
            ref = rk.evaluate_risk(spec, reference)
            assert rk.evaluate_risk(spec, permuted) == ref  # exact
            assert rk.evaluate_risk(spec, split) == ref  # exact


class TestMonotonicity:
    def test_quantile_dominance(self):
        rng = np.random.default_rng(43)
        grid = np.linspace(1e-4, 1 - 1e-4, 10_000)
        for _ in range(15):
            d = random_distribution(rng, max_atoms=10)
            lift = np.abs(rng.normal(size=len(d.values)))
            dominating = dist(d.values + lift, d.weights)
            assert np.all(quantile(dominating, grid) >= quantile(d, grid))
            for spec in ALL_SPECS:
                assert rk.evaluate_risk(spec, dominating) >= rk.evaluate_risk(spec, d) - 1e-10


class TestConvexity:
    def test_comonotone_mixtures(self):
        rng = np.random.default_rng(47)
        for _ in range(10):
            mu = random_distribution(rng, max_atoms=8)
            nu = random_distribution(rng, max_atoms=8)
            for lam in np.arange(0.1, 0.95, 0.1):
                mixed = rk.comonotone_mixture(mu, nu, lam)
                for spec in ALL_SPECS:
                    bound = lam * rk.evaluate_risk(spec, mu) + (1 - lam) * rk.evaluate_risk(
                        spec, nu
                    )
                    assert rk.evaluate_risk(spec, mixed) <= bound + 1e-10


class TestTranslation:
    def test_equivariance(self):
        rng = np.random.default_rng(53)
        for _ in range(10):
            d = random_distribution(rng)
            t = float(rng.normal())
            for spec in EQUIVARIANT_SPECS:
                assert rk.evaluate_risk(spec, d.shifted(t)) == pytest.approx(
                    rk.evaluate_risk(spec, d) + t, abs=1e-10
                )


class TestIcx:
    def test_reflexive(self):
        assert rk.icx_leq(QUARTERS, QUARTERS)

    def test_mean_preserving_spread(self):
        mu = dist([1], [1.0])
        nu = dist([0, 2], [0.5, 0.5])
        assert rk.icx_leq(mu, nu)
        # dense-grid stop-loss oracle agrees
        ts, mu_sl = stop_loss_grid(mu, -1, 3)
        _, nu_sl = stop_loss_grid(nu, -1, 3)
        assert np.all(mu_sl <= nu_sl + 1e-10)

    def test_strictly_larger_dirac_not_dominated(self):
        assert not rk.icx_leq(dist([2], [1.0]), dist([1], [1.0]))

    def test_implies_ordering_for_equivariant_specs(self):
        rng = np.random.default_rng(59)
        for _ in range(20):
            mu = random_distribution(rng, max_atoms=6)
            # mean preserving spread of one atom
            i = int(rng.integers(len(mu.values)))
            delta = float(rng.uniform(0.5, 2.0))
            vals = list(mu.values)
            wts = list(mu.weights)
            v, w = vals.pop(i), wts.pop(i)
            vals += [v - delta, v + delta]
            wts += [w / 2, w / 2]
            nu = dist(vals, wts)
            assert rk.icx_leq(mu, nu)
            for spec in EQUIVARIANT_SPECS:
                assert rk.evaluate_risk(spec, mu) <= rk.evaluate_risk(spec, nu) + 1e-10
