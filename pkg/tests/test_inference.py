import numpy as np
import pytest

import lstree as ls
from lstree.estimation import collapse
from lstree.inference import (
    PermutationTestSpec,
    bonferroni_level,
    max_selected_statistic,
    permutation_test,
)
from lstree.split_search import build_node_scans, search_best_split

from util import dataset
from test_split_search import planted_location_data


def noise_data(n=120, seed=0):
    rng = np.random.default_rng(seed)
    x = np.round(rng.normal(size=(n, 2)), 1)
    y = rng.integers(1, 4, size=n)
    y[:3] = [1, 2, 3]
    return dataset(y, x)


class TestSpecValidation:
    def test_minimum_permutations(self):
        with pytest.raises(ValueError):
            PermutationTestSpec(n_permutations=18)

    def test_alpha_range(self):
        for bad in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                PermutationTestSpec(alpha_global=bad)

    def test_p_positive(self):
        with pytest.raises(ValueError):
            PermutationTestSpec(p=0)

    def test_bonferroni(self):
        assert bonferroni_level(0.05, 5) == pytest.approx(0.01)
        with pytest.raises(ValueError):
            bonferroni_level(0.05, 0)


class TestObservedStatistic:
    def test_unpermuted_column_reproduces_search_max(self):
        d = planted_location_data(seed=11)
        result = search_best_split(ls.TreeStructure(), d, min_node_size=10)
        sel = result.best
        restricted = ls.fit_mle(ls.TreeStructure(), d, "logit")
        design = collapse(ls.TreeStructure(), d)
        scans = build_node_scans(ls.TreeStructure(), design, sel.component, ls.FitOptions())
        t = max_selected_statistic(
            scans, d.x[:, sel.variable], d.y, restricted,
            ls.get_link("logit").link_id, ls.FitOptions(), 10,
        )
        assert t == pytest.approx(sel.lr_stat, abs=1e-8)


class TestPermutationTest:
    def run_test(self, d, seed=0, B=99, alpha=0.05, p=None):
        result = search_best_split(ls.TreeStructure(), d, min_node_size=10)
        spec = PermutationTestSpec(
            n_permutations=B, seed=seed, alpha_global=alpha,
            p=d.p if p is None else p,
        )
        with np.errstate(all="ignore"):
            return result.best, permutation_test(ls.TreeStructure(), d, result.best, spec)

    def test_p_value_formula_and_bounds(self):
        d = noise_data(seed=1)
        sel, res = self.run_test(d, seed=5)
        B = len(res.null_Ts)
        exceed = int(np.sum(res.null_Ts >= res.observed_T - 1e-12))
        assert res.p_value == pytest.approx((1 + exceed) / (B + 1))
        assert 1 / (B + 1) <= res.p_value <= 1.0
        assert res.observed_T == pytest.approx(sel.lr_stat)

    def test_deterministic_given_seed(self):
        d = noise_data(seed=2)
        _, res_a = self.run_test(d, seed=7)
        _, res_b = self.run_test(d, seed=7)
        np.testing.assert_array_equal(res_a.null_Ts, res_b.null_Ts)
        assert res_a.p_value == res_b.p_value
        _, res_c = self.run_test(d, seed=8)
        assert not np.array_equal(res_a.null_Ts, res_c.null_Ts)

    def test_noise_not_significant(self):
        d = noise_data(seed=3)
        _, res = self.run_test(d, seed=1)
        assert res.decision == "stop"
        assert res.p_value > 0.025

    def test_signal_significant(self):
        d = planted_location_data(n=250, shift=2.0, seed=4)
        _, res = self.run_test(d, seed=1)
        assert res.decision == "split"
        assert res.p_value <= 0.025

    def test_decision_matches_bonferroni_level(self):
        d = noise_data(seed=6)
        _, res = self.run_test(d, seed=2, alpha=0.999, p=1)
        expected = "split" if res.p_value <= 0.999 else "stop"
        assert res.decision == expected

    def test_warns_when_b_small(self):
        d = noise_data(seed=9)
        result = search_best_split(ls.TreeStructure(), d, min_node_size=10)
        spec = PermutationTestSpec(n_permutations=19, seed=0, alpha_global=0.05, p=2)
        with pytest.warns(UserWarning, match="too few"):
            permutation_test(ls.TreeStructure(), d, result.best, spec)

    def test_null_split_rate_coarse(self):
        # the raw p-value is anti-conservative (the statistic was selected
        # over components and variables), but the alpha / p decision should
        # keep false splits rare: expect about 1.5 of 30 at alpha = 0.05
        import warnings

        splits = 0
        for rep in range(30):
            d = noise_data(n=90, seed=100 + rep)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                try:
                    _, res = self.run_test(d, seed=rep, B=199)
                except ls.NoCandidatesError:
                    continue
            splits += res.decision == "split"
        assert splits <= 5
