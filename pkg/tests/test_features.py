import math

import numpy as np
import pytest

from treegaze import corpus, features, gaze, synth
from treegaze.errors import DataError


def sentence_with(words):
    rows = [f"{i}\t{w}\t_\t_\t_\t_\t{0 if i == 1 else 1}\t{'root' if i == 1 else 'dep'}\t_\t_"
            for i, w in enumerate(words, start=1)]
    return corpus.parse_conllu("\n".join(rows) + "\n")[0]


def test_familiarity_examples():
    sent = sentence_with(["unseen", "words"])
    assert features.familiarity(sent, {}) == 0.0

    sent = sentence_with(["cat"])
    assert features.familiarity(sent, {"cat": 99.0}) == pytest.approx(2.0)

    sent = sentence_with(["a", "b"])
    norms = {"a": 9.0, "b": 999.0}
    assert features.familiarity(sent, norms) == pytest.approx(2.0)


def test_familiarity_is_case_folded():
    sent = sentence_with(["The"])
    assert features.familiarity(sent, {"the": 99.0}) == pytest.approx(2.0)


def test_sentence_surprisal():
    assert features.sentence_surprisal([2.0, 4.0]) == 3.0
    assert features.sentence_surprisal([5.0]) == 5.0
    assert features.sentence_surprisal([1, 2, 3, 4]) == 2.5
    with pytest.raises(DataError):
        features.sentence_surprisal([])


def test_zscore_examples():
    z = features.zscore([1.0, 3.0])
    assert z == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2)])

    with pytest.warns(UserWarning):
        z = features.zscore([5.0, 5.0, 5.0])
    assert np.all(z == 0.0)

    standardized = features.zscore([4.0, 8.0, 1.0, 2.0, 9.0])
    assert features.zscore(standardized) == pytest.approx(standardized, abs=1e-9)
    assert standardized.mean() == pytest.approx(0.0, abs=1e-9)
    assert standardized.std(ddof=1) == pytest.approx(1.0, abs=1e-9)


def test_discretize_examples():
    bins = features.discretize_equal_width([0.0, 1.0, 2.0, 3.0, 4.0], k=4)
    assert list(bins) == [0, 1, 2, 3, 3]

    values = [3.0, -1.0, 0.5, 7.0, 2.0]
    bins = features.discretize_equal_width(values, k=4)
    assert bins[values.index(-1.0)] == 0
    assert bins[values.index(7.0)] == 3

    assert list(features.discretize_equal_width([2.0, 2.0, 2.0], k=4)) == [0, 0, 0]


def test_discretize_is_monotone():
    rng = np.random.default_rng(8)
    for _ in range(20):
        x = rng.normal(size=30)
        bins = features.discretize_equal_width(x, k=4)
        order = np.argsort(x)
        assert np.all(np.diff(bins[order]) >= 0)


def test_correlation_examples():
    x = np.array([1.0, 2.0, 3.0])
    r = features.correlation_matrix(np.column_stack([x, x]))
    assert r[0, 1] == pytest.approx(1.0)

    r = features.correlation_matrix(np.column_stack([x, -x]))
    assert r[0, 1] == pytest.approx(-1.0)

    y = np.array([1.0, 2.0, 4.0])
    r = features.correlation_matrix(np.column_stack([x, y]))
    assert r[0, 1] == pytest.approx(0.9820, abs=5e-5)
    assert r[0, 0] == 1.0 and r[1, 1] == 1.0


def test_correlation_affine_invariance():
    rng = np.random.default_rng(9)
    x = rng.normal(size=25)
    y = rng.normal(size=25)
    base = features.correlation_matrix(np.column_stack([x, y]))[0, 1]
    scaled = features.correlation_matrix(np.column_stack([3.5 * x + 2.0, 0.25 * y - 7.0]))[0, 1]
    assert scaled == pytest.approx(base, abs=1e-12)


def test_correlation_degenerate_column():
    x = np.array([1.0, 2.0, 3.0])
    with pytest.warns(UserWarning):
        r = features.correlation_matrix(np.column_stack([x, np.ones(3)]))
    assert np.isnan(r[0, 1]) and np.isnan(r[1, 1])
    assert r[0, 0] == 1.0


def build_small_dataset(n_sentences=12, seed=21):
    sentences = synth.random_sentences(n_sentences, seed=seed)
    model = synth.ReaderModel(kind="tree_guided", head_attraction=0.6, regress_prob=0.1)
    records = synth.simulate_reader_records(sentences, model, n_participants=4, seed=seed)
    sequences = gaze.build_all_sequences(records)
    norms = synth.zipf_norms(synth.vocabulary())
    surprisals = synth.random_surprisal(sentences, seed=seed)
    return sentences, sequences, norms, surprisals


def test_assemble_features_invariants():
    sentences, sequences, norms, surprisals = build_small_dataset()
    table, dropped = features.assemble_features(sentences, sequences, norms, surprisals)
    assert dropped == []
    assert table.names == features.FEATURE_NAMES
    assert table.raw.shape == (len(sentences), 5)
    for j in range(5):
        col = table.z[:, j]
        if col.std(ddof=1) > 0:
            assert col.mean() == pytest.approx(0.0, abs=1e-9)
            assert col.std(ddof=1) == pytest.approx(1.0, abs=1e-9)
    assert table.bins.min() >= 0 and table.bins.max() <= 3
    # raw columns carry the per-sentence statistics they claim to
    idx = {s.id: i for i, s in enumerate(sentences)}
    for sent in sentences[:4]:
        assert table.raw[idx[sent.id], 1] == corpus.max_depth(sent)
        assert table.raw[idx[sent.id], 4] == corpus.count_clauses(sent)
        assert table.raw[idx[sent.id], 3] == pytest.approx(
            features.sentence_surprisal(surprisals[sent.id]["lexical"])
        )


def test_assemble_drops_incomplete_sentences():
    sentences, sequences, norms, surprisals = build_small_dataset()
    missing = sentences[0].id
    del surprisals[missing]
    table, dropped = features.assemble_features(sentences, sequences, norms, surprisals)
    assert dropped == [missing]
    assert missing not in table.sentence_ids


def test_norm_and_surprisal_loaders(tmp_path):
    norms_path = tmp_path / "norms.csv"
    norms_path.write_text("word,freq_per_million\nThe,99\ncat,5\n")
    norms = features.load_norms(norms_path)
    assert norms["the"] == 99.0

    surp_path = tmp_path / "surprisal.csv"
    surp_path.write_text(
        "sentence_id,token_index,lexical_surprisal,syntactic_surprisal\n"
        "s1,2,1.5,0.5\ns1,1,2.5,1.5\n"
    )
    table = features.load_surprisal(surp_path)
    assert table["s1"]["lexical"] == [2.5, 1.5]  # sorted by token index
    assert table["s1"]["syntactic"] == [1.5, 0.5]

    bad = tmp_path / "bad.csv"
    bad.write_text("word\nx\n")
    with pytest.raises(DataError, match="freq_per_million"):
        features.load_norms(bad)
