import io

import numpy as np
import pytest

from treegaze import corpus, gaze, synth
from treegaze.corpus import ROLE_HEAD


def test_serial_reader_reproduces_the_text_sequence():
    sentences = synth.random_sentences(10, seed=1)
    model = synth.ReaderModel(kind="serial")
    for si, sent in enumerate(sentences):
        rng = np.random.default_rng([0, 0, si])
        path = synth.simulate_path(sent, model, rng)
        assert path == list(range(1, len(sent) + 1))


def test_tree_guided_lambda1_head_transitions_target_heads():
    sentences = synth.random_sentences(30, seed=2)
    model = synth.ReaderModel(kind="tree_guided", head_attraction=1.0)
    for si, sent in enumerate(sentences):
        role_map = corpus.roles(sent)
        rng = np.random.default_rng([1, 0, si])
        path = synth.simulate_path(sent, model, rng)
        for a, b in zip(path, path[1:]):
            if role_map[a] == ROLE_HEAD:
                assert role_map[b] == ROLE_HEAD


def test_lambda0_tree_guided_equals_serial_byte_for_byte():
    sentences = synth.random_sentences(8, seed=3)
    serial = synth.gen_reader_paths(sentences, synth.ReaderModel(kind="serial"), 3, seed=9)
    tree0 = synth.gen_reader_paths(
        sentences, synth.ReaderModel(kind="tree_guided", head_attraction=0.0), 3, seed=9
    )
    assert serial == tree0


def test_generation_is_seed_deterministic():
    sentences = synth.random_sentences(5, seed=4)
    model = synth.ReaderModel(kind="tree_guided", head_attraction=0.7, skip_prob=0.1)
    a = synth.gen_reader_paths(sentences, model, 4, seed=11)
    b = synth.gen_reader_paths(sentences, model, 4, seed=11)
    assert a == b
    c = synth.gen_reader_paths(sentences, model, 4, seed=12)
    assert a != c


def test_generated_csv_round_trips_through_the_loader():
    sentences = synth.random_sentences(6, seed=5)
    model = synth.ReaderModel(kind="tree_guided", head_attraction=0.5, regress_prob=0.2)
    text = synth.gen_reader_paths(sentences, model, 3, seed=21)
    records = gaze.load_fixations(io.StringIO(text))
    assert records, "the 100 ms filter must not drop generated fixations"
    by_sentence = {}
    for r in records:
        assert r.duration_ms >= 100.0
        by_sentence.setdefault((r.participant, r.sentence_id), []).append(r)
    for (_, sid), group in by_sentence.items():
        onsets = [r.onset_ms for r in group]
        assert onsets == sorted(onsets)
        assert all(b > a for a, b in zip(onsets, onsets[1:]))
        n = len(next(s for s in sentences if s.id == sid))
        assert all(1 <= r.word_index <= n for r in group)


def test_head_attraction_raises_head_to_head_probability():
    sentences = synth.random_sentences(60, seed=6)
    lam = 0.8

    def head_rate(model, seed):
        transitions_from_head = 0
        to_head = 0
        for pi in range(4):
            for si, sent in enumerate(sentences):
                role_map = corpus.roles(sent)
                rng = np.random.default_rng([seed, pi, si])
                path = synth.simulate_path(sent, model, rng)
                for a, b in zip(path, path[1:]):
                    if role_map[a] == ROLE_HEAD:
                        transitions_from_head += 1
                        to_head += role_map[b] == ROLE_HEAD
        return to_head / transitions_from_head

    serial_rate = head_rate(synth.ReaderModel(kind="serial"), seed=31)
    guided_rate = head_rate(
        synth.ReaderModel(kind="tree_guided", head_attraction=lam), seed=31
    )
    assert guided_rate >= serial_rate + 0.2
    assert guided_rate >= lam * 0.9  # the jump branch always lands on a head


def test_random_sentences_are_valid_trees():
    sentences = synth.random_sentences(40, seed=7, min_tokens=3, max_tokens=9)
    assert len(sentences) == 40
    for sent in sentences:
        assert 3 <= len(sent) <= 9
        assert sum(1 for t in sent.tokens if t.head == 0) == 1
        recomputed = corpus.label_roles(corpus.compute_depths(sent))
        assert recomputed == sent
    # ids are unique
    assert len({s.id for s in sentences}) == 40


def test_reader_model_validation():
    with pytest.raises(ValueError):
        synth.ReaderModel(kind="diagonal")
    with pytest.raises(ValueError):
        synth.ReaderModel(head_attraction=1.5)
    with pytest.raises(ValueError):
        synth.ReaderModel(skip_prob=1.0)


def test_bn_dataset_marginals_within_binomial_bound():
    bn = synth.planted_network()
    data = synth.gen_bn_dataset(bn, 10000, seed=8)
    # root nodes are uniform over 3 levels
    for node in (1, 2, 3):
        freq = np.bincount(data[:, node], minlength=3) / 10000
        assert np.allclose(freq, 1 / 3, atol=0.02)


def test_surprisal_table_covers_every_token():
    sentences = synth.random_sentences(5, seed=9)
    table = synth.random_surprisal(sentences, seed=9)
    for sent in sentences:
        assert len(table[sent.id]["lexical"]) == len(sent)
        assert len(table[sent.id]["syntactic"]) == len(sent)
        assert all(v > 0 for v in table[sent.id]["lexical"])


def test_norms_csv_and_surprisal_csv_parse_back():
    vocab = synth.vocabulary(10)
    norms_text = synth.norms_csv(synth.zipf_norms(vocab))
    assert norms_text.startswith("word,freq_per_million\n")
    assert len(norms_text.strip().splitlines()) == 11

    sentences = synth.random_sentences(3, seed=10)
    surp_text = synth.surprisal_csv(synth.random_surprisal(sentences, seed=10))
    lines = surp_text.strip().splitlines()
    assert lines[0] == "sentence_id,token_index,lexical_surprisal,syntactic_surprisal"
    assert len(lines) == 1 + sum(len(s) for s in sentences)
