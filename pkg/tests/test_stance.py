import json

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contraqa.corpus import Question, QType, Tweet
from contraqa.errors import TransportError
from contraqa.remote import RemoteScorer, SidecarClient
from contraqa.stance import (
    Claim,
    LexicalBaselineScorer,
    NliLabel,
    StanceJudgment,
    StanceLabel,
    make_claim,
    map_nli_label,
)

ENTITY_Q = Question(id="q1", text="What can spread COVID-19?", qtype=QType.ENTITY)


class TestMakeClaim:
    def test_connector_string(self):
        claim = make_claim(ENTITY_Q, "swim water")
        assert claim.text == "What can spread COVID-19? Answer is swim water."

    def test_yesno_positive_claim(self):
        q = Question(id="q2", text="Can shoes spread COVID-19?", qtype=QType.YESNO)
        assert make_claim(q, "yes").text == "Can shoes spread COVID-19? Answer is yes."

    def test_no_double_punctuation(self):
        q = Question(id="q3", text="Q?", qtype=QType.ENTITY)
        assert make_claim(q, "maybe.").text == "Q? Answer is maybe."

    def test_empty_answer_rejected(self):
        with pytest.raises(ValueError):
            make_claim(ENTITY_Q, "   ")


class TestMapNliLabel:
    def test_entailment(self):
        assert map_nli_label(NliLabel.ENTAILMENT) is StanceLabel.SUPPORTING

    def test_contradiction(self):
        assert map_nli_label(NliLabel.CONTRADICTION) is StanceLabel.REFUTING

    def test_neutral(self):
        assert map_nli_label("neutral") is StanceLabel.NEUTRAL


class TestJudgmentArgmax:
    def test_label_is_argmax(self):
        judgment = StanceJudgment.from_scores(
            {StanceLabel.SUPPORTING: 0.1, StanceLabel.REFUTING: 0.7, StanceLabel.NEUTRAL: 0.2}
        )
        assert judgment.label is StanceLabel.REFUTING

    def test_tie_order_supporting_first(self):
        judgment = StanceJudgment.from_scores(
            {StanceLabel.SUPPORTING: 0.5, StanceLabel.REFUTING: 0.5, StanceLabel.NEUTRAL: 0.0}
        )
        assert judgment.label is StanceLabel.SUPPORTING

    @given(st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=3, max_size=3))
    def test_argmax_invariant(self, values):
        scores = dict(zip((StanceLabel.SUPPORTING, StanceLabel.REFUTING, StanceLabel.NEUTRAL), values))
        judgment = StanceJudgment.from_scores(scores)
        assert judgment.scores[judgment.label] == max(values)


class TestLexicalBaseline:
    def classify_one(self, claim_text, tweet_text):
        claim = Claim(question_id="q1", answer_text="x", text=claim_text)
        scorer = LexicalBaselineScorer()
        return scorer.classify_batch(claim, [Tweet(id="t1", text=tweet_text)])[0]

    def test_identical_text_supporting(self):
        claim_text = "What can spread COVID-19? Answer is shoes."
        assert self.classify_one(claim_text, claim_text).label is StanceLabel.SUPPORTING

    def test_disjoint_text_neutral(self):
        judgment = self.classify_one(
            "What can spread COVID-19? Answer is shoes.", "totally unrelated gardening tips"
        )
        assert judgment.label is StanceLabel.NEUTRAL
        assert judgment.scores[StanceLabel.NEUTRAL] == 1.0

    def test_cue_flips_to_refuting(self):
        claim_text = "What can spread COVID-19? Answer is shoes."
        judgment = self.classify_one(claim_text, claim_text + " is fake")
        assert judgment.label is StanceLabel.REFUTING

    def test_pure_function(self):
        claim = Claim(question_id="q1", answer_text="x", text="covid spreads via shoes.")
        tweets = [Tweet(id=f"t{i}", text=f"shoes covid claim {i}") for i in range(5)]
        scorer = LexicalBaselineScorer()
        assert scorer.classify_batch(claim, tweets) == scorer.classify_batch(claim, tweets)

    def test_output_length_and_order(self):
        claim = Claim(question_id="q1", answer_text="x", text="covid spreads via shoes.")
        tweets = [Tweet(id=f"t{i}", text=f"text {i}") for i in range(7)]
        judgments = LexicalBaselineScorer().classify_batch(claim, tweets)
        assert len(judgments) == 7


def fake_nli_transport(handler):
    def responder(request: httpx.Request) -> httpx.Response:
        payload = json.loads(request.content)
        return handler(request.url.path, payload)

    return httpx.MockTransport(responder)


def nli_ok(results):
    def handler(path, payload):
        assert path == "/nli"
        return httpx.Response(200, json={"results": results})

    return handler


class TestRemoteScorer:
    def make_scorer(self, handler, **kwargs):
        client = SidecarClient("http://sidecar", transport=fake_nli_transport(handler))
        return RemoteScorer(client, **kwargs)

    def test_entailment_maps_to_supporting(self):
        scorer = self.make_scorer(nli_ok([{"label": "entailment", "scores": [0.9, 0.05, 0.05]}]))
        claim = Claim(question_id="q1", answer_text="a", text="claim text.")
        [judgment] = scorer.classify_batch(claim, [Tweet(id="t1", text="tweet text")])
        assert judgment.label is StanceLabel.SUPPORTING
        assert judgment.scores[StanceLabel.SUPPORTING] == 0.9

    def test_empty_tweets_empty_judgments(self):
        scorer = self.make_scorer(nli_ok([]))
        claim = Claim(question_id="q1", answer_text="a", text="claim text.")
        assert scorer.classify_batch(claim, []) == []

    def test_argmax_scores_map_to_refuting(self):
        scorer = self.make_scorer(nli_ok([{"label": "contradiction", "scores": [0.1, 0.2, 0.7]}]))
        claim = Claim(question_id="q1", answer_text="a", text="claim text.")
        [judgment] = scorer.classify_batch(claim, [Tweet(id="t1", text="tweet text")])
        assert judgment.label is StanceLabel.REFUTING
        assert judgment.scores[StanceLabel.REFUTING] == 0.7

    def test_premise_is_tweet_by_default(self):
        seen = {}

        def handler(path, payload):
            seen["pairs"] = payload["pairs"]
            return httpx.Response(200, json={"results": [{"label": "neutral", "scores": [0, 1, 0]}]})

        scorer = self.make_scorer(handler)
        claim = Claim(question_id="q1", answer_text="a", text="the claim.")
        scorer.classify_batch(claim, [Tweet(id="t1", text="the tweet")])
        assert seen["pairs"] == [{"premise": "the tweet", "hypothesis": "the claim."}]

    def test_orientation_switch(self):
        seen = {}

        def handler(path, payload):
            seen["pairs"] = payload["pairs"]
            return httpx.Response(200, json={"results": [{"label": "neutral", "scores": [0, 1, 0]}]})

        scorer = self.make_scorer(handler, claim_as_premise=True)
        claim = Claim(question_id="q1", answer_text="a", text="the claim.")
        scorer.classify_batch(claim, [Tweet(id="t1", text="the tweet")])
        assert seen["pairs"] == [{"premise": "the claim.", "hypothesis": "the tweet"}]

    def test_non_200_raises_transport_error_with_offset(self):
        def handler(path, payload):
            return httpx.Response(503, text="model not loaded")

        scorer = self.make_scorer(handler, batch_size=2)
        claim = Claim(question_id="q1", answer_text="a", text="claim.")
        tweets = [Tweet(id=f"t{i}", text=f"tweet {i}") for i in range(3)]
        with pytest.raises(TransportError) as err:
            scorer.classify_batch(claim, tweets)
        assert err.value.offset in (0, 2)

    def test_malformed_body_raises(self):
        def handler(path, payload):
            return httpx.Response(200, json={"unexpected": True})

        scorer = self.make_scorer(handler)
        claim = Claim(question_id="q1", answer_text="a", text="claim.")
        with pytest.raises(TransportError):
            scorer.classify_batch(claim, [Tweet(id="t1", text="tweet")])

    def test_batching_preserves_order(self):
        def handler(path, payload):
            results = []
            for pair in payload["pairs"]:
                # Tag the judgment with the premise so order is observable.
                score = float(pair["premise"].split()[-1]) / 100.0
                results.append({"label": "entailment", "scores": [score, 0.0, 0.0]})
            return httpx.Response(200, json={"results": results})

        scorer = self.make_scorer(handler, batch_size=2, max_in_flight=3)
        claim = Claim(question_id="q1", answer_text="a", text="claim.")
        tweets = [Tweet(id=f"t{i}", text=f"tweet {i}") for i in range(7)]
        judgments = scorer.classify_batch(claim, tweets)
        got = [judgment.scores[StanceLabel.SUPPORTING] for judgment in judgments]
        assert got == [i / 100.0 for i in range(7)]
