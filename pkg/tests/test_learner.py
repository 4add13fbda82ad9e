import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcontext.context import Context
from arcontext.errors import ValidationError
from arcontext.learner import FeedbackEvent, LearnerConfig, PersonalModel, signature
from arcontext.rules import Adaptation
from arcontext.study import STUDY

C6 = Context(1, 0, STUDY.assignments("C6"))
HEAD = Adaptation("frame_of_reference", "HeadFixed", ("Book2",))
BODY = Adaptation("frame_of_reference", "BodyFixed", ("Book2",))


def ema_oracle(rewards, alpha=0.2):
    """Textbook EMA from zero, no clipping needed for rewards in [-1, 1]."""
    e = 0.0
    for r in rewards:
        e = e + alpha * (r - e)
    return e


def feed(model, n, automatic=(HEAD,), manual=(), ctx=C6):
    for i in range(n):
        model.observe(FeedbackEvent(ctx, automatic, manual, i))
    return model


class TestUpdates:
    def test_accept_matches_oracle(self):
        m = feed(PersonalModel(), 7)
        ema, count = m.lookup(C6, "frame_of_reference", "Book2", "HeadFixed")
        assert count == 7 and ema == pytest.approx(ema_oracle([1.0] * 7))

    def test_override_splits_sign(self):
        m = feed(PersonalModel(), 3, manual=(BODY,))
        assert m.lookup(C6, "frame_of_reference", "Book2", "HeadFixed")[0] < 0
        assert m.lookup(C6, "frame_of_reference", "Book2", "BodyFixed")[0] > 0

    def test_manual_only(self):
        m = feed(PersonalModel(), 1, automatic=(), manual=(BODY,))
        assert m.lookup(C6, "frame_of_reference", "Book2", "BodyFixed") == (pytest.approx(0.2), 1)

    def test_shrinkage(self):
        m = PersonalModel(LearnerConfig(k=1))
        assert m.impact(1.0, 9) == pytest.approx(0.9)
        assert m.impact(0.5, 0) == 0.0

    def test_alternating_near_zero(self):
        rewards = []
        m = PersonalModel()
        for i in range(100):
            manual = (BODY,) if i % 2 else ()
            rewards.append(-1.0 if manual else 1.0)
            m.observe(FeedbackEvent(C6, (HEAD,), manual, i))
        ema, _ = m.lookup(C6, "frame_of_reference", "Book2", "HeadFixed")
        assert ema == pytest.approx(ema_oracle(rewards))
        assert abs(ema) < 0.25

    @given(st.lists(st.booleans(), max_size=60))
    @settings(max_examples=60)
    def test_ema_bounded_and_matches_oracle(self, overrides):
        m = PersonalModel()
        for i, ov in enumerate(overrides):
            m.observe(FeedbackEvent(C6, (HEAD,), (BODY,) if ov else (), i))
        ema, count = m.lookup(C6, "frame_of_reference", "Book2", "HeadFixed")
        assert -1.0 <= ema <= 1.0 and count == len(overrides)
        assert ema == pytest.approx(ema_oracle([-1.0 if ov else 1.0 for ov in overrides]))

    def test_inverted_feedback_flag(self):
        m = feed(PersonalModel(LearnerConfig(paper_literal_feedback=True)), 3, manual=(BODY,))
        assert m.lookup(C6, "frame_of_reference", "Book2", "HeadFixed")[0] > 0
        assert m.lookup(C6, "frame_of_reference", "Book2", "BodyFixed")[0] < 0

    def test_values_snapped(self):
        m = PersonalModel()
        m.observe(FeedbackEvent(C6, (), (Adaptation("scale", 0.79, ("Map",)),)))
        assert m.lookup(C6, "scale", "Map", 0.8)[1] == 1

    def test_manual_validation(self, study_pack):
        m = PersonalModel()
        with pytest.raises(ValidationError):
            m.observe(FeedbackEvent(C6, (), (Adaptation("glow", 1.0, ("Map",)),)), study_pack.dimensions)


class TestInfer:
    def test_unseen_signature(self):
        m = feed(PersonalModel(), 5)
        assert m.infer(Context(2, 0, STUDY.assignments("C1"))) == []

    def test_min_support(self):
        m = feed(PersonalModel(), 2)
        assert m.infer(C6) == []
        feed(m, 1)
        (inf,) = m.infer(C6)
        assert inf.source == "personalized" and inf.adaptations == (HEAD,)
        assert inf.impact == pytest.approx(ema_oracle([1.0] * 3) * 3 / 4)

    def test_signature_ignores_other_components(self):
        extra = Context(2, 0, {**STUDY.assignments("C6"), "user.state.heart_rate": 80.0})
        assert signature(extra) == signature(C6)

    def test_deterministic(self):
        a, b = feed(PersonalModel(), 10, manual=(BODY,)), feed(PersonalModel(), 10, manual=(BODY,))
        assert a == b and a.infer(C6) == b.infer(C6)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        m = feed(PersonalModel(LearnerConfig(alpha=0.3)), 4, manual=(BODY,))
        m.observe(FeedbackEvent(C6, (), (Adaptation("scale", 0.6, ("Map",)),)))
        path = tmp_path / "model.json"
        m.save(path)
        back = PersonalModel.load(path)
        assert back == m and back.infer(C6) == m.infer(C6)

    def test_copy_is_independent(self):
        m = feed(PersonalModel(), 3)
        c = m.copy()
        feed(c, 3)
        assert m.lookup(C6, "frame_of_reference", "Book2", "HeadFixed")[1] == 3

    @pytest.mark.parametrize("bad", [{"alpha": 0}, {"alpha": 1.5}, {"k": -1}, {"min_support": 0}, {"beta": 1}])
    def test_bad_config(self, bad):
        with pytest.raises(ValidationError):
            LearnerConfig.from_json(bad)
