import numpy as np
import pytest

import lstree as ls
from lstree.model_core import LOCATION, SCALE
from lstree.split_search import (
    SplitCandidate,
    enumerate_candidates,
    lr_statistic,
    search_best_split,
)

from util import dataset, random_instance


def planted_location_data(n=200, shift=1.5, seed=0):
    rng = np.random.default_rng(seed)
    x = np.round(rng.normal(size=(n, 2)), 1)
    eta = shift * (x[:, 0] <= 0.0)
    ystar = eta + rng.logistic(size=n)
    y = np.where(ystar <= 0.0, 1, np.where(ystar <= 1.5, 2, 3))
    if len(np.unique(y)) < 3:
        raise AssertionError("bad seed for planted data")
    return dataset(y, x)


class TestLrStatistic:
    def test_doubles_difference(self):
        assert lr_statistic(-10.0, -12.5) == pytest.approx(5.0)

    def test_clamps_negative_noise(self):
        assert lr_statistic(-10.0 - 1e-13, -10.0) == 0.0


class TestEnumerate:
    def test_counts_and_admissibility(self):
        y = [1, 2] * 15
        x = np.repeat([0.0, 1.0, 2.0], 10)
        d = dataset(y, x)
        stubs = enumerate_candidates(ls.TreeStructure(), d, min_node_size=10)
        # thresholds 0.0 and 1.0 admissible, once per component
        assert len(stubs) == 4
        assert {(s.component, s.threshold) for s in stubs} == {
            (LOCATION, 0.0), (LOCATION, 1.0), (SCALE, 0.0), (SCALE, 1.0),
        }

    def test_min_node_size_excludes(self):
        y = [1, 2] * 15
        x = np.repeat([0.0, 1.0, 2.0, 3.0], [5, 10, 10, 5])
        d = dataset(y, x)
        stubs = enumerate_candidates(ls.TreeStructure(), d, min_node_size=10)
        # left sizes 5, 15, 25: only threshold 1.0 keeps both children at 10+
        assert {s.threshold for s in stubs} == {1.0}

    def test_constant_column_skipped(self):
        d = dataset([1, 2] * 12, np.zeros((24, 1)))
        assert enumerate_candidates(ls.TreeStructure(), d) == []


class TestSearchAgainstBruteForce:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_candidate_logliks_match_direct_fits(self, seed):
        rng = np.random.default_rng(seed)
        d = random_instance(rng, 60, 3, p=2)
        current = ls.TreeStructure()
        result = search_best_split(current, d, min_node_size=10)
        stubs = enumerate_candidates(current, d, min_node_size=10)
        assert result.all_evaluated == len(stubs)

        best_direct = None
        restricted = ls.fit_mle(current, d, "logit")
        for stub in stubs:
            fit = ls.fit_mle(current.with_split(stub.as_split()), d, "logit")
            lr = lr_statistic(fit.loglik, restricted.loglik)
            cand = SplitCandidate(
                component=stub.component, node_id=stub.node_id,
                variable=stub.variable, threshold=stub.threshold, lr_stat=lr,
            )
            if best_direct is None or cand.sort_key() < best_direct.sort_key():
                best_direct = cand

        assert result.best.lr_stat == pytest.approx(best_direct.lr_stat, abs=2e-6)
        assert (result.best.component, result.best.variable) == (
            best_direct.component, best_direct.variable,
        )
        assert result.best.threshold == pytest.approx(best_direct.threshold)

    def test_search_after_first_split(self):
        d = planted_location_data(seed=3)
        first = search_best_split(ls.TreeStructure(), d, min_node_size=10)
        grown = ls.TreeStructure().with_split(first.best.as_split())
        result = search_best_split(grown, d, min_node_size=10)
        restricted = ls.fit_mle(grown, d, "logit")
        full = ls.fit_mle(grown.with_split(result.best.as_split()), d, "logit")
        direct = lr_statistic(full.loglik, restricted.loglik)
        assert result.best.lr_stat >= direct - 1e-6
        assert result.best.lr_stat == pytest.approx(direct, abs=1e-4)


class TestSelection:
    def test_planted_signal_found(self):
        d = planted_location_data()
        result = search_best_split(ls.TreeStructure(), d, min_node_size=10)
        assert result.best.component == LOCATION
        assert result.best.variable == 0
        assert abs(result.best.threshold) <= 0.3
        assert result.best.lr_stat > 20.0

    def test_duplicate_column_tie_breaks_to_first(self):
        d0 = planted_location_data(seed=5)
        x = np.column_stack([d0.x[:, 0], d0.x[:, 0]])
        d = dataset(d0.y, x)
        result = search_best_split(ls.TreeStructure(), d, min_node_size=10)
        twin = result.per_variable_max[(result.best.component, 1)]
        assert twin.lr_stat == pytest.approx(result.best.lr_stat, abs=1e-9)
        assert result.best.variable == 0

    def test_per_variable_max_covers_all(self):
        rng = np.random.default_rng(9)
        d = random_instance(rng, 80, 3, p=3)
        result = search_best_split(ls.TreeStructure(), d, min_node_size=10)
        assert set(result.per_variable_max) == {
            (c, j) for c in (LOCATION, SCALE) for j in range(3)
        }
        best_of_maxima = min(
            result.per_variable_max.values(), key=SplitCandidate.sort_key
        )
        assert best_of_maxima is result.best or (
            best_of_maxima.sort_key() == result.best.sort_key()
        )
        for cand in result.per_variable_max.values():
            assert cand.lr_stat >= 0.0

    def test_sort_key_ordering(self):
        a = SplitCandidate(LOCATION, 1, 0, 0.5, lr_stat=3.0)
        b = SplitCandidate(SCALE, 1, 0, 0.5, lr_stat=3.0)
        c = SplitCandidate(LOCATION, 1, 1, 0.5, lr_stat=3.0)
        e = SplitCandidate(LOCATION, 1, 0, 0.5, lr_stat=4.0)
        assert e.sort_key() < a.sort_key() < b.sort_key()
        assert a.sort_key() < c.sort_key()

    def test_no_candidates_raises(self):
        d = dataset([1, 2] * 10, np.zeros((20, 1)))
        with pytest.raises(ls.NoCandidatesError):
            search_best_split(ls.TreeStructure(), d)

    def test_min_node_size_too_large_raises(self):
        rng = np.random.default_rng(13)
        d = random_instance(rng, 30, 2, p=1)
        with pytest.raises(ls.NoCandidatesError):
            search_best_split(ls.TreeStructure(), d, min_node_size=100)
