import itertools

import numpy as np
import pytest

from helpers import brute_ndcg, brute_recall
from tagrec.errors import ValidationError
from tagrec.evaluation import (
    GridSearchResult,
    ModelBundle,
    SimulationConfig,
    evaluate,
    grid_search,
    ndcg_at_k,
    rank_for_user,
    recall_at_k,
    simulate_feedback,
)
from tagrec.ease import train_ease
from tagrec.recommend import UserState
from tagrec.solver import Hyperparams, train


class TestRecall:
    def test_hand_example(self):
        assert recall_at_k([1, 9, 2], {1, 2, 3}, 2) == pytest.approx(0.5)

    def test_denominator_capped_by_k(self):
        truth = set(range(10))
        assert recall_at_k(list(range(5)), truth, 5) == pytest.approx(1.0)

    def test_denominator_capped_by_truth(self):
        assert recall_at_k([7, 3, 8, 9], {3}, 4) == pytest.approx(1.0)

    def test_no_hits(self):
        assert recall_at_k([4, 5], {0, 1}, 2) == 0.0

    def test_rejects_bad_args(self):
        with pytest.raises(ValidationError):
            recall_at_k([1], set(), 1)
        with pytest.raises(ValidationError):
            recall_at_k([1], {1}, 0)


class TestNdcg:
    def test_single_hit_at_rank_two(self):
        # one relevant item placed second: 1/log2(3)
        assert ndcg_at_k([7, 3], {3}, 100) == pytest.approx(0.6309, abs=1e-4)

    def test_perfect_ranking(self):
        assert ndcg_at_k([0, 1, 2], {0, 1, 2}, 100) == pytest.approx(1.0)

    def test_no_hits_zero(self):
        assert ndcg_at_k([5, 6], {0}, 100) == 0.0

    def test_earlier_hit_scores_higher(self):
        late = ndcg_at_k([9, 8, 3], {3}, 100)
        early = ndcg_at_k([3, 9, 8], {3}, 100)
        assert early > late

    def test_rejects_bad_args(self):
        with pytest.raises(ValidationError):
            ndcg_at_k([1], set(), 1)
        with pytest.raises(ValidationError):
            ndcg_at_k([1], {1}, -1)


class TestExhaustiveOracle:
    def test_all_rankings_and_truths_up_to_five_items(self):
        for n in range(1, 6):
            items = list(range(n))
            for perm in itertools.permutations(items):
                for r in range(1, n + 1):
                    for truth in itertools.combinations(items, r):
                        truth_set = set(truth)
                        for k in range(1, n + 1):
                            assert recall_at_k(perm, truth_set, k) == pytest.approx(
                                brute_recall(perm, truth_set, k)
                            )
                            assert ndcg_at_k(perm, truth_set, k) == pytest.approx(
                                brute_ndcg(perm, truth_set, k)
                            )


@pytest.fixture(scope="module")
def trained(synthetic_data):
    hp = Hyperparams(lam1=1.0, lam2=1.0, rho=2.0, max_iterations=300)
    encoder = train(synthetic_data.train.matrix, synthetic_data.tags, hp)
    return encoder


class TestEvaluate:
    def test_deterministic(self, synthetic_data, trained):
        bundle = ModelBundle(trained, synthetic_data.tags)
        a = evaluate(bundle, synthetic_data.test)
        b = evaluate(bundle, synthetic_data.test)
        assert a.recall == b.recall
        assert a.ndcg == b.ndcg
        np.testing.assert_array_equal(a.per_user_ndcg, b.per_user_ndcg)

    def test_metrics_in_unit_interval(self, synthetic_data, trained):
        bundle = ModelBundle(trained, synthetic_data.tags)
        report = evaluate(bundle, synthetic_data.test)
        assert 0.0 <= report.ndcg <= 1.0
        for val in report.recall.values():
            assert 0.0 <= val <= 1.0
        assert report.n_users == synthetic_data.test.n_users

    def test_model_beats_random_on_planted_topics(self, synthetic_data, trained):
        # planted topic structure: the learned ranker should clear the
        # expected score of a uniformly random ranking by a wide margin
        bundle = ModelBundle(trained, synthetic_data.tags)
        report = evaluate(bundle, synthetic_data.test)
        n_items = synthetic_data.dataset.n_items
        random_recall = 20 / n_items  # expected recall@20 of a random ranking
        assert report.recall[20] > 2 * random_recall

    def test_rank_excludes_history(self, synthetic_data, trained):
        bundle = ModelBundle(trained, synthetic_data.tags)
        hist = synthetic_data.test.histories[0]
        ranked = rank_for_user(bundle, UserState(history=hist))
        assert not set(ranked) & set(hist)

    def test_ensemble_requires_static_model(self, synthetic_data, trained):
        with pytest.raises(ValidationError):
            ModelBundle(trained, synthetic_data.tags, static=None, use_ensemble=True)

    def test_ensemble_path_runs(self, synthetic_data, trained):
        static = train_ease(synthetic_data.train.matrix.to_dense(), 10.0)
        bundle = ModelBundle(
            trained, synthetic_data.tags, static=static, use_ensemble=True
        )
        report = evaluate(bundle, synthetic_data.test)
        assert 0.0 <= report.ndcg <= 1.0


class TestGridSearch:
    def test_best_matches_table_maximum(self, synthetic_data):
        grid = [
            Hyperparams(lam1=0.5, lam2=0.5, max_iterations=200),
            Hyperparams(lam1=2.0, lam2=2.0, max_iterations=200),
        ]
        result = grid_search(
            grid, synthetic_data.train.matrix, synthetic_data.tags, synthetic_data.validation
        )
        assert isinstance(result, GridSearchResult)
        assert result.best in grid
        assert result.best_ndcg == pytest.approx(
            max(report.ndcg for _, report in result.table)
        )

    def test_tie_broken_towards_smaller_lam(self, synthetic_data):
        # with an enormous lam2 both encoders collapse to ~0, producing
        # identical rankings and therefore a tie on validation nDCG
        grid = [
            Hyperparams(lam1=5.0, lam2=1e9, max_iterations=50),
            Hyperparams(lam1=1.0, lam2=1e9, max_iterations=50),
        ]
        result = grid_search(
            grid, synthetic_data.train.matrix, synthetic_data.tags, synthetic_data.validation
        )
        assert result.best.lam1 == 1.0

    def test_empty_grid_rejected(self, synthetic_data):
        with pytest.raises(ValidationError):
            grid_search(
                [], synthetic_data.train.matrix, synthetic_data.tags, synthetic_data.validation
            )


class TestSimulation:
    def test_config_validation(self):
        with pytest.raises(ValidationError):
            SimulationConfig(tags_boosted=3)
        with pytest.raises(ValidationError):
            SimulationConfig(clicks=0)
        with pytest.raises(ValidationError):
            SimulationConfig(runs=0)

    def test_deterministic(self, synthetic_data, trained):
        bundle = ModelBundle(trained, synthetic_data.tags)
        cfg = SimulationConfig(tags_boosted=1, clicks=3, runs=2, seed=0)
        a = simulate_feedback(bundle, synthetic_data.test, cfg)
        b = simulate_feedback(bundle, synthetic_data.test, cfg)
        assert a.improvement_percent == b.improvement_percent
        np.testing.assert_array_equal(
            a.interactive.per_user_ndcg, b.interactive.per_user_ndcg
        )

    def test_truthful_boost_improves_ranking(self, synthetic_data, trained):
        # boosting a tag drawn from the held-out items should help
        bundle = ModelBundle(trained, synthetic_data.tags)
        cfg = SimulationConfig(tags_boosted=1, clicks=3, runs=2, seed=0)
        result = simulate_feedback(bundle, synthetic_data.test, cfg)
        assert result.improvement_percent > 0.0

    def test_static_side_matches_evaluate(self, synthetic_data, trained):
        bundle = ModelBundle(trained, synthetic_data.tags)
        cfg = SimulationConfig(tags_boosted=1, clicks=1, runs=1, seed=0)
        result = simulate_feedback(bundle, synthetic_data.test, cfg)
        plain = evaluate(bundle, synthetic_data.test)
        assert result.static.ndcg == pytest.approx(plain.ndcg)
