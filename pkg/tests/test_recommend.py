import numpy as np
import pytest

from tagrec.data import TagMatrix
from tagrec.errors import ValidationError
from tagrec.linalg import SparseBinaryMatrix
from tagrec.recommend import (
    CLICK_STEP,
    Explanation,
    TagProfile,
    UserState,
    apply_feedback,
    category_impact,
    certainty,
    ensemble_scores,
    explain_item,
    profile,
    recommend,
    score_items,
)
from tagrec.solver import ConvergenceReport, EncoderModel, Hyperparams


def make_tags(binary, popularity, vocab_binary):
    return TagMatrix(
        binary=SparseBinaryMatrix.from_dense(np.asarray(binary, dtype=float)),
        popularity=np.asarray(popularity, dtype=float),
        vocabulary=tuple(vocab_binary) + (("popularity", "popularity"),),
    )


@pytest.fixture
def setup():
    # 4 items, 2 binary tags + popularity
    tags = make_tags(
        [[1, 0], [0, 1], [1, 1], [0, 1]],
        [1.0, 0.5, 0.25, 0.75],
        [("genre", "a"), ("genre", "b")],
    )
    e = np.array(
        [
            [0.9, 0.1, 0.2],
            [0.0, 0.8, 0.1],
            [0.4, 0.5, 0.3],
            [-0.2, 0.6, 0.0],
        ]
    )
    model = EncoderModel(
        e=e,
        vocabulary=tags.vocabulary,
        hyperparams=Hyperparams(),
        convergence=ConvergenceReport(1, True, 0.0, 0.0),
    )
    return model, tags


def make_profile(raw, c=0.8):
    raw = np.asarray(raw, dtype=float)
    span = np.abs(raw).max(initial=0.0)
    display = c * raw / span if span > 0 else np.zeros_like(raw)
    return TagProfile(raw=raw, display=display, certainty=c, feedback_scale=span / c if span else 1.0)


class TestProfile:
    def test_cold_user(self, setup):
        model, tags = setup
        prof = profile(UserState(), model, tags)
        np.testing.assert_array_equal(prof.raw, np.zeros(3))
        assert prof.certainty == pytest.approx(0.2)

    def test_single_item_row(self, setup):
        model, tags = setup
        prof = profile(UserState(history=(1,)), model, tags)
        np.testing.assert_allclose(prof.raw, model.e[1])
        assert prof.certainty == pytest.approx(0.4)

    def test_three_items_certainty_capped(self, setup):
        model, tags = setup
        prof = profile(UserState(history=(0, 1, 2)), model, tags)
        assert prof.certainty == pytest.approx(0.8)
        np.testing.assert_allclose(prof.raw, model.e[[0, 1, 2]].sum(axis=0))

    def test_certainty_function(self):
        assert certainty(0) == pytest.approx(0.2)
        assert certainty(3) == pytest.approx(0.8)
        assert certainty(10) == pytest.approx(0.8)

    def test_display_in_range_and_rank_preserving(self, setup):
        model, tags = setup
        prof = profile(UserState(history=(0, 2, 3)), model, tags)
        assert np.abs(prof.display).max() <= prof.certainty + 1e-12
        np.testing.assert_array_equal(np.argsort(prof.display), np.argsort(prof.raw))

    def test_one_click_moves_display_by_step(self, setup):
        # while the boosted tag stays below the strongest affinity the
        # display span is unchanged, so a click shifts display by exactly 0.2
        model, tags = setup
        state = UserState(history=(0, 1, 2))
        prof0 = profile(state, model, tags)
        prof = profile(apply_feedback(state, 2, +1, tags.n_tags), model, tags)
        assert prof.display[2] == pytest.approx(prof0.display[2] + CLICK_STEP, abs=1e-9)

    def test_heavy_boost_saturates_at_certainty(self, setup):
        model, tags = setup
        state = UserState(history=(0, 1, 2))
        for _ in range(5):
            state = apply_feedback(state, 2, +1, tags.n_tags)
        prof = profile(state, model, tags)
        # boosted tag becomes the strongest affinity; display caps at c
        assert prof.display[2] == pytest.approx(prof.certainty)

    def test_invalid_history_rejected(self, setup):
        model, tags = setup
        with pytest.raises(ValidationError):
            profile(UserState(history=(99,)), model, tags)


class TestScoreItems:
    def test_one_hot_profile_selects_tag_column(self, setup):
        _, tags = setup
        prof = make_profile([1.0, 0.0, 0.0])
        scores = score_items(prof, tags)
        np.testing.assert_allclose(scores, tags.dense()[:, 0])

    def test_zero_profile(self, setup):
        _, tags = setup
        np.testing.assert_array_equal(
            score_items(make_profile([0, 0, 0]), tags), np.zeros(4)
        )

    def test_two_tag_item_scores_two(self, setup):
        _, tags = setup
        prof = make_profile([1.0, 1.0, 0.0])
        assert score_items(prof, tags)[2] == pytest.approx(2.0)

    def test_excluded_items_minus_inf(self, setup):
        _, tags = setup
        scores = score_items(make_profile([1, 1, 1]), tags, exclude=[0, 2])
        assert scores[0] == -np.inf and scores[2] == -np.inf


class TestExplain:
    def test_single_term_hundred_percent(self, setup):
        _, tags = setup
        out = explain_item(make_profile([0.5, 0.0, 0.0]), tags, 0)
        assert len(out) == 1
        assert out[0].percent == pytest.approx(100.0)

    def test_hand_normalization(self):
        tags = make_tags(
            [[1, 1, 1]], [1.0], [("c", "x"), ("c", "y"), ("c", "z")]
        )
        prof = make_profile([0.4, -0.2, 0.4, 0.0])
        out = explain_item(prof, tags, 0)
        by_tag = {e.tag: e.percent for e in out}
        assert by_tag[0] == pytest.approx(40.0)
        assert by_tag[1] == pytest.approx(-20.0)
        assert by_tag[2] == pytest.approx(40.0)

    def test_top_five_cap(self):
        binary = np.ones((1, 6))
        vocab = [("c", f"t{i}") for i in range(6)]
        tags = make_tags(binary, [0.0], vocab)
        prof = make_profile([1.0] * 6 + [0.0])
        out = explain_item(prof, tags, 0)
        assert len(out) == 5
        assert all(abs(e.percent) >= 5.0 for e in out)

    def test_below_threshold_dropped(self):
        tags = make_tags([[1, 1]], [0.0], [("c", "big"), ("c", "small")])
        prof = make_profile([0.97, 0.03, 0.0])
        out = explain_item(prof, tags, 0)
        assert [e.tag for e in out] == [0]

    def test_all_zero_terms_empty(self, setup):
        _, tags = setup
        assert explain_item(make_profile([0, 0, 0]), tags, 0) == ()

    def test_score_reconstruction(self, setup):
        _, tags = setup
        rng = np.random.default_rng(0)
        for _ in range(50):
            prof = make_profile(rng.standard_normal(3))
            item = int(rng.integers(4))
            terms = prof.raw * tags.dense()[item]
            total = np.abs(terms).sum()
            if total == 0:
                continue
            percents = 100.0 * terms / total
            # signed percents times the normalization constant re-sum to the score
            assert np.sum(percents) * total / 100.0 == pytest.approx(
                float(tags.dense()[item] @ prof.raw), abs=1e-10
            )


class TestFeedback:
    def test_click_step(self, setup):
        _, tags = setup
        state = apply_feedback(UserState(), 1, +1, tags.n_tags)
        assert state.feedback[1] == pytest.approx(CLICK_STEP)

    def test_inverse_restores(self, setup):
        model, tags = setup
        base = UserState(history=(0,))
        state = apply_feedback(base, 0, +1, tags.n_tags)
        state = apply_feedback(state, 0, -1, tags.n_tags)
        before = recommend(base, model, tags, 4)
        after = recommend(state, model, tags, 4)
        assert before == after

    def test_clamp_at_five_clicks(self, setup):
        _, tags = setup
        state = UserState()
        for _ in range(7):
            state = apply_feedback(state, 0, +1, tags.n_tags)
        assert state.feedback[0] == pytest.approx(1.0)

    def test_invalid_tag_rejected(self, setup):
        _, tags = setup
        with pytest.raises(ValidationError):
            apply_feedback(UserState(), 99, +1, tags.n_tags)


class TestCategoryImpact:
    def test_single_category_dominates(self, setup):
        _, tags = setup
        impacts = category_impact(make_profile([0.5, 0.3, 0.0]), tags)
        assert impacts["genre"] == pytest.approx(1.0)
        assert impacts["popularity"] == pytest.approx(0.0)

    def test_zero_profile_uniform(self, setup):
        _, tags = setup
        impacts = category_impact(make_profile([0, 0, 0]), tags)
        assert impacts["genre"] == pytest.approx(0.5)
        assert impacts["popularity"] == pytest.approx(0.5)

    def test_hand_ratio(self):
        tags = make_tags([[1, 1]], [0.0], [("a", "x"), ("b", "y")])
        prof = make_profile([0.3, -0.1, 0.0])
        impacts = category_impact(prof, tags)
        assert impacts["a"] == pytest.approx(0.75)
        assert impacts["b"] == pytest.approx(0.25)

    def test_sums_to_one(self, setup):
        _, tags = setup
        rng = np.random.default_rng(1)
        for _ in range(20):
            impacts = category_impact(make_profile(rng.standard_normal(3)), tags)
            assert sum(impacts.values()) == pytest.approx(1.0)


class TestEnsemble:
    def test_negative_gates_to_zero(self):
        out = ensemble_scores(np.array([-1.0, 2.0]), np.array([5.0, -3.0]))
        np.testing.assert_array_equal(out, [0.0, 0.0])

    def test_idempotent_on_equal_nonneg(self):
        s = np.array([0.0, 1.0, 4.0])
        np.testing.assert_allclose(ensemble_scores(s, s), s)

    def test_geometric_mean(self):
        assert ensemble_scores(np.array([4.0]), np.array([1.0]))[0] == pytest.approx(2.0)

    def test_commutative(self):
        rng = np.random.default_rng(0)
        a, b = rng.standard_normal(10), rng.standard_normal(10)
        np.testing.assert_allclose(ensemble_scores(a, b), ensemble_scores(b, a))


class TestRecommend:
    def test_history_excluded(self, setup):
        model, tags = setup
        for k in (1, 2, 3, 4):
            recs = recommend(UserState(history=(0, 2)), model, tags, k)
            assert all(r.item not in (0, 2) for r in recs)

    def test_sorted_by_score_desc(self, setup):
        model, tags = setup
        recs = recommend(UserState(history=(1,)), model, tags, 3)
        scores = [r.score for r in recs]
        assert scores == sorted(scores, reverse=True)

    def test_k_larger_than_catalog(self, setup):
        model, tags = setup
        recs = recommend(UserState(history=(0,)), model, tags, 100)
        assert len(recs) == 3  # 4 items minus 1 history item

    def test_cold_user_popularity_boost_orders_by_popularity(self, setup):
        model, tags = setup
        state = UserState()
        pop_tag = tags.n_tags - 1
        for _ in range(3):
            state = apply_feedback(state, pop_tag, +1, tags.n_tags)
        recs = recommend(state, model, tags, 4)
        got = [r.item for r in recs]
        expected = sorted(range(4), key=lambda i: (-tags.popularity[i], i))
        assert got == expected

    def test_ensemble_flat_static_matches_plain_order_on_positive(self, setup):
        model, tags = setup
        from tagrec.ease import ItemItemModel

        state = UserState(history=(1,))
        plain = recommend(state, model, tags, 4)
        flat = ItemItemModel(b=np.ones((4, 4)) - np.eye(4), regularization=1.0)
        # equal static scores: ordering restricted to positive scores matches
        ens = recommend(state, model, tags, 4, ensemble=flat)
        plain_pos = [r.item for r in plain if r.score > 0]
        ens_pos = [r.item for r in ens if r.score > 0]
        assert ens_pos == plain_pos

    def test_explanations_attached(self, setup):
        model, tags = setup
        recs = recommend(UserState(history=(0,)), model, tags, 2)
        assert all(isinstance(e, Explanation) for r in recs for e in r.explanations)
