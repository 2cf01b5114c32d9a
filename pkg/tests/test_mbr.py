import numpy as np
import pytest

import oracles
from mtkit.errors import DataError
from mtkit.mbr import (
    ChrfUtility,
    MatrixUtility,
    MbrResult,
    PseudoReferenceSet,
    SentenceBleuUtility,
    UtilityFunction,
    make_utility,
    mbr_decode,
    parse_utility_matrix,
    two_stage_decode,
    utility_matrix,
    write_utility_matrix,
)
from mtkit.metrics import sentence_chrf
from mtkit.nbest import (
    Hypothesis,
    NBestList,
    ORIGIN_DOCUMENT,
    ORIGIN_ENSEMBLE,
    WeightVector,
)

WORDS = ["kočka", "pes", "dům", "strom", "вода", "hora", "město", "ліс"]


def random_sentences(rng, count, max_len=6):
    return [
        " ".join(rng.choice(WORDS) for _ in range(rng.integers(1, max_len + 1)))
        for _ in range(count)
    ]


def as_nbest(texts, segment_id=0, origin=ORIGIN_ENSEMBLE):
    return NBestList(
        segment_id,
        tuple(
            Hypothesis(segment_id, t, {"score": -float(i)}, -float(i), origin)
            for i, t in enumerate(texts)
        ),
    )


class AffineUtility(UtilityFunction):
    def __init__(self, base, scale, shift):
        self.base = base
        self.scale = scale
        self.shift = shift

    def pairwise(self, sample, candidate):
        return self.scale * self.base.pairwise(sample, candidate) + self.shift


class TestUtilityMatrix:
    def test_identity_single(self):
        matrix = utility_matrix(["s"], ["s"], ChrfUtility())
        assert matrix == [[pytest.approx(100.0)]]

    def test_chrf_matrix_matches_naive(self):
        rng = np.random.default_rng(0)
        candidates = random_sentences(rng, 6)
        samples = random_sentences(rng, 5)
        matrix = utility_matrix(candidates, samples, ChrfUtility())
        for i, cand in enumerate(candidates):
            for j, samp in enumerate(samples):
                assert matrix[i][j] == oracles.naive_sentence_chrf(cand, samp)

    def test_caching_is_bit_exact(self):
        rng = np.random.default_rng(1)
        candidates = random_sentences(rng, 5) * 2  # force duplicates
        samples = candidates
        u = ChrfUtility()
        cached = utility_matrix(candidates, samples, u)
        plain = [[u.pairwise(s, c) for s in samples] for c in candidates]
        assert cached == plain

    def test_external_matrix_verbatim(self):
        values = [[0.1, 0.2], [0.3, 0.4]]
        matrix = utility_matrix(["a", "b"], ["x", "y"], MatrixUtility(values))
        assert matrix == values

    def test_external_matrix_dimension_mismatch(self):
        with pytest.raises(DataError):
            utility_matrix(["a"], ["x", "y"], MatrixUtility([[0.1]]))

    def test_file_round_trip(self):
        values = [[0.5, -1.25, 3.0], [0.0, 2.5, 1e-3]]
        assert parse_utility_matrix(write_utility_matrix(values)) == values

    def test_bad_header(self):
        with pytest.raises(DataError):
            parse_utility_matrix("2 2 1.0 2.0 3.0")


class TestMbrDecode:
    def test_single_candidate(self):
        nbest = as_nbest(["jediný kandidát"])
        prefs = PseudoReferenceSet(0, ("jediný kandidát",))
        result = mbr_decode(nbest, prefs, ChrfUtility())
        assert result.best.text == "jediný kandidát"
        assert result.expected_utilities == (pytest.approx(100.0),)

    def test_duplicate_majority_wins(self):
        texts = ["a a", "a a", "b"]
        nbest = as_nbest(texts)
        prefs = PseudoReferenceSet(0, tuple(texts))
        result = mbr_decode(nbest, prefs, ChrfUtility())
        assert result.best.text == "a a"
        assert result.best_index == 0

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_naive_exactly(self, seed):
        rng = np.random.default_rng(seed)
        candidates = random_sentences(rng, int(rng.integers(1, 20)))
        samples = random_sentences(rng, int(rng.integers(1, 20)))
        nbest = as_nbest(candidates)
        prefs = PseudoReferenceSet(0, tuple(samples))
        u = ChrfUtility()
        result = mbr_decode(nbest, prefs, u)
        naive_best, naive_expected = oracles.naive_mbr(
            candidates, samples, lambda s, c: oracles.naive_sentence_chrf(c, s)
        )
        assert result.best_index == naive_best
        assert list(result.expected_utilities) == naive_expected

    def test_affine_invariance(self):
        rng = np.random.default_rng(3)
        candidates = random_sentences(rng, 12)
        nbest = as_nbest(candidates)
        prefs = PseudoReferenceSet(0, tuple(random_sentences(rng, 10)))
        base = mbr_decode(nbest, prefs, ChrfUtility())
        scaled = mbr_decode(nbest, prefs, AffineUtility(ChrfUtility(), 3.0, 7.0))
        assert scaled.best_index == base.best_index
        assert np.argsort(scaled.expected_utilities).tolist() == np.argsort(
            base.expected_utilities
        ).tolist()

    def test_sample_permutation_invariance(self):
        rng = np.random.default_rng(4)
        candidates = random_sentences(rng, 6)
        samples = random_sentences(rng, 8)
        nbest = as_nbest(candidates)
        base = mbr_decode(nbest, PseudoReferenceSet(0, tuple(samples)), ChrfUtility())
        permuted = mbr_decode(
            nbest,
            PseudoReferenceSet(0, tuple(reversed(samples))),
            ChrfUtility(),
        )
        for a, b in zip(base.expected_utilities, permuted.expected_utilities):
            assert a == pytest.approx(b, abs=1e-9)

    def test_expected_bounded_by_matrix(self):
        rng = np.random.default_rng(5)
        candidates = random_sentences(rng, 7)
        samples = random_sentences(rng, 7)
        matrix = utility_matrix(candidates, samples, ChrfUtility())
        result = mbr_decode(
            as_nbest(candidates), PseudoReferenceSet(0, tuple(samples)), ChrfUtility()
        )
        low = min(min(row) for row in matrix)
        high = max(max(row) for row in matrix)
        for value in result.expected_utilities:
            assert low - 1e-9 <= value <= high + 1e-9

    def test_empty_candidates(self):
        with pytest.raises(DataError):
            mbr_decode(
                NBestList(0, ()), PseudoReferenceSet(0, ("x",)), ChrfUtility()
            )

    def test_bleu_sentence_utility(self):
        nbest = as_nbest(["a b c d", "x y z w"])
        prefs = PseudoReferenceSet(0, ("a b c d",))
        result = mbr_decode(nbest, prefs, SentenceBleuUtility())
        assert result.best.text == "a b c d"

    def test_make_utility(self):
        assert make_utility("chrf").name == "chrf"
        assert make_utility("bleu-sentence").name == "bleu-sentence"
        assert make_utility("external-matrix", [[1.0]]).name == "external-matrix"
        with pytest.raises(DataError):
            make_utility("comet")


class TestTwoStageDecode:
    def make_lists(self, rng, n_ens=200, n_doc=50):
        ens_texts = random_sentences(rng, n_ens)
        doc_texts = random_sentences(rng, n_doc)
        ens = NBestList(
            0,
            tuple(
                Hypothesis(0, t, {"model_ll": float(rng.normal())}, 0.0, ORIGIN_ENSEMBLE)
                for t in ens_texts
            ),
        )
        doc = NBestList(
            0,
            tuple(
                Hypothesis(0, t, {"model_ll": float(rng.normal())}, 0.0, ORIGIN_DOCUMENT)
                for t in doc_texts
            ),
        )
        return ens, doc

    def test_paper_shape_200_50(self):
        rng = np.random.default_rng(0)
        ens, doc = self.make_lists(rng)
        result = two_stage_decode(
            ens, doc, WeightVector({"model_ll": 1.0}), 50, ChrfUtility()
        )
        assert len(result.expected_utilities) == 50

    def test_degenerate_merge_equals_plain_mbr(self):
        rng = np.random.default_rng(1)
        ens, _ = self.make_lists(rng, n_ens=30)
        empty_doc = NBestList(0, ())
        weights = WeightVector({"model_ll": 1.0})
        staged = two_stage_decode(ens, empty_doc, weights, 200, ChrfUtility())
        from mtkit.rerank import prune_topk

        pruned = prune_topk(ens, weights, 200)
        plain = mbr_decode(
            pruned,
            PseudoReferenceSet(0, tuple(h.text for h in pruned)),
            ChrfUtility(),
        )
        assert staged.best.text == plain.best.text
        assert staged.expected_utilities == plain.expected_utilities

    def test_matches_manual_composition(self):
        rng = np.random.default_rng(2)
        ens, doc = self.make_lists(rng, n_ens=40, n_doc=10)
        weights = WeightVector({"model_ll": 1.0})
        staged = two_stage_decode(ens, doc, weights, 12, ChrfUtility())

        from mtkit.nbest import merge_nbest
        from mtkit.rerank import prune_topk

        pruned = prune_topk(merge_nbest(ens, doc, dedupe=False), weights, 12)
        manual = mbr_decode(
            pruned,
            PseudoReferenceSet(0, tuple(h.text for h in pruned)),
            ChrfUtility(),
        )
        assert staged.best == manual.best
        assert staged.expected_utilities == manual.expected_utilities
