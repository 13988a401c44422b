from __future__ import annotations

import importlib
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nolgat.diffcore import DiffNode
from nolgat.errors import ConfigError, DataError
from nolgat.graph.dataset import save_dataset_csv
from nolgat.graph.hops import build_hop_index, khop_neighbors
from nolgat.pipeline import (
    featurize,
    hashed_tf,
    load_dataset,
    load_text_corpus,
    make_split,
    masked_bce_loss,
    synth_corpus,
    synth_longrange,
)
from nolgat.pipeline.featurize import token_bucket, tokenize, write_text_corpus
from nolgat.pipeline.synth import SIGNAL_COLUMN


def test_single_token_document_is_a_basis_vector() -> None:
    rows = hashed_tf(["hello"], 16).rows
    assert rows.sum() == 1.0
    assert np.count_nonzero(rows) == 1
    assert rows[0, token_bucket("hello", 16)] == 1.0


def test_hashed_tf_lowercases_and_strips_punctuation() -> None:
    assert tokenize("Hello, World! 42x") == ["hello", "world", "42x"]
    first, second = hashed_tf(["Hello, World!", "hello world"], 32).rows
    assert np.array_equal(first, second)


def test_hashed_tf_rows_are_unit_length() -> None:
    rows = hashed_tf(["a b c a", "the quick brown fox", "x"], 8).rows
    assert np.allclose(np.linalg.norm(rows, axis=1), 1.0)


def test_token_bucket_is_stable() -> None:
    assert token_bucket("fake", 500) == token_bucket("fake", 500)
    assert 0 <= token_bucket("news", 7) < 7


def test_empty_document_is_rejected_with_its_id() -> None:
    with pytest.raises(DataError, match="Document 1"):
        hashed_tf(["fine text", "!!!"], 8)


def test_precomputed_vectors_pass_through() -> None:
    vectors = np.random.default_rng(0).normal(size=(4, 500))
    features = featurize(list(vectors), "precomputed", 0)
    assert features.rows.shape == (4, 500)
    assert np.array_equal(features.rows, vectors)


def test_precomputed_vectors_need_one_width() -> None:
    with pytest.raises(DataError, match="document 1"):
        featurize([[1.0, 2.0], [1.0]], "precomputed", 0)


def test_unknown_featurizer_is_a_config_error() -> None:
    with pytest.raises(ConfigError):
        featurize(["a"], "doc2vec", 8)


def test_text_corpus_round_trip(tmp_path: Path) -> None:
    write_text_corpus(["one doc", "two doc"], [0, 1], tmp_path / "t.txt", tmp_path / "l.txt")
    documents, labels, ids = load_text_corpus(tmp_path / "t.txt", tmp_path / "l.txt")
    assert documents == ["one doc", "two doc"]
    assert labels.tolist() == [0, 1]
    assert ids == ["0", "1"]
    dataset = load_dataset("hashed-tf", 16, text_path=tmp_path / "t.txt", labels_path=tmp_path / "l.txt")
    assert dataset.features.rows.shape == (2, 16)


def test_text_corpus_rejects_bad_labels(tmp_path: Path) -> None:
    (tmp_path / "t.txt").write_text("a\nb\n")
    (tmp_path / "l.txt").write_text("0\nyes\n")
    with pytest.raises(DataError, match="document 1"):
        load_text_corpus(tmp_path / "t.txt", tmp_path / "l.txt")


def test_text_corpus_needs_parallel_files(tmp_path: Path) -> None:
    (tmp_path / "t.txt").write_text("a\nb\n")
    (tmp_path / "l.txt").write_text("0\n")
    with pytest.raises(DataError):
        load_text_corpus(tmp_path / "t.txt", tmp_path / "l.txt")


def test_load_dataset_dispatches_through_featurize(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    module = importlib.import_module("nolgat.pipeline.featurize")
    calls = []
    original = module.featurize

    def recording(corpus, featurizer, dim, ids=None):
        calls.append(featurizer)
        return original(corpus, featurizer, dim, ids)

    monkeypatch.setattr(module, "featurize", recording)
    source, _ = synth_longrange(16, 1, 0)
    save_dataset_csv(source, tmp_path / "data.csv")
    write_text_corpus(["red apple", "blue sky"], [0, 1], tmp_path / "t.txt", tmp_path / "l.txt")

    dataset = load_dataset("precomputed", 500, dataset_path=tmp_path / "data.csv")
    load_dataset("hashed-tf", 16, text_path=tmp_path / "t.txt", labels_path=tmp_path / "l.txt")
    assert calls == ["precomputed", "hashed-tf"]
    assert np.allclose(dataset.features.rows, source.features.rows)
    assert dataset.ids.tolist() == source.ids.tolist()


def test_load_dataset_requires_its_inputs() -> None:
    with pytest.raises(ConfigError):
        load_dataset("precomputed", 0)
    with pytest.raises(ConfigError):
        load_dataset("hashed-tf", 8, text_path=Path("x.txt"))


def test_split_of_four_labels_takes_one_per_class() -> None:
    split = make_split(np.array([0, 0, 1, 1]), 0.5, 0)
    assert split.labeled_mask[:2].sum() == 1
    assert split.labeled_mask[2:].sum() == 1


def test_split_of_balanced_thousand() -> None:
    labels = np.repeat([0, 1], 500)
    split = make_split(labels, 0.1, 3)
    assert split.labeled_count == 100
    assert split.labeled_mask[labels == 0].sum() == 50
    assert split.labeled_mask[labels == 1].sum() == 50


def test_split_is_deterministic_per_seed() -> None:
    labels = np.random.default_rng(0).integers(0, 2, size=300)
    assert np.array_equal(make_split(labels, 0.2, 7).labeled_mask, make_split(labels, 0.2, 7).labeled_mask)
    assert not np.array_equal(make_split(labels, 0.2, 7).labeled_mask, make_split(labels, 0.2, 8).labeled_mask)


def test_split_only_draws_from_candidates() -> None:
    labels = np.array([0, 1, 0, 1, 0, 1, 0, 1])
    candidates = np.array([True, True, True, True, False, False, False, False])
    split = make_split(labels, 0.5, 0, candidates)
    assert not split.labeled_mask[4:].any()
    assert split.labeled_count == 2


def test_split_needs_both_classes() -> None:
    with pytest.raises(DataError):
        make_split(np.zeros(10, dtype=int), 0.5, 0)


def test_split_rejects_fraction_with_empty_class() -> None:
    with pytest.raises(DataError, match="class 1"):
        make_split(np.array([0] * 40 + [1] * 3), 0.1, 0)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(5, 200),
    st.integers(5, 200),
    st.sampled_from([0.1, 0.2, 0.3, 0.5]),
    st.integers(0, 2**32 - 1),
)
def test_split_takes_the_rounded_share_of_each_class(zeros: int, ones: int, fraction: float, seed: int) -> None:
    labels = np.random.default_rng(seed).permutation(np.repeat([0, 1], [zeros, ones]))
    split = make_split(labels, fraction, seed)
    for cls, size in ((0, zeros), (1, ones)):
        assert split.labeled_mask[labels == cls].sum() == int(np.floor(fraction * size + 0.5))


@pytest.mark.parametrize("fraction", [0.0, 1.0, 1.5])
def test_split_fraction_must_be_proper(fraction: float) -> None:
    with pytest.raises(ConfigError):
        make_split(np.array([0, 1, 0, 1]), fraction, 0)


def test_loss_of_one_half_is_log_two() -> None:
    loss = masked_bce_loss(np.array([0.5, 0.5, 0.9]), np.array([0, 1, 1]), np.array([True, True, False]))
    assert loss.item() == pytest.approx(np.log(2.0), abs=1e-12)


def test_loss_of_perfect_predictions_sits_at_clamp_floor() -> None:
    loss = masked_bce_loss(np.array([1.0, 0.0, 1.0]), np.array([1, 0, 1]), np.ones(3, dtype=bool))
    assert 0.0 <= loss.item() <= 1e-11


def test_loss_ignores_unlabeled_nodes() -> None:
    labels = np.array([1, 0, 1, 0])
    mask = np.array([True, False, True, False])
    base = masked_bce_loss(np.array([0.7, 0.2, 0.4, 0.9]), labels, mask).item()
    perturbed = masked_bce_loss(np.array([0.7, 0.99, 0.4, 0.01]), labels, mask).item()
    assert base == perturbed


def test_loss_gradient_only_reaches_labeled_nodes() -> None:
    probs = DiffNode(np.array([0.3, 0.6, 0.8]), requires_grad=True)
    masked_bce_loss(probs, np.array([1, 0, 0]), np.array([True, False, True])).backward()
    assert probs.grad[1] == 0.0
    assert probs.grad[0] == pytest.approx(-1.0 / (2 * 0.3))
    assert probs.grad[2] == pytest.approx(1.0 / (2 * 0.2))


def test_loss_needs_labeled_nodes() -> None:
    with pytest.raises(DataError):
        masked_bce_loss(np.array([0.5]), np.array([1]), np.array([False]))


def test_longrange_heads_read_their_tails() -> None:
    dataset, graph = synth_longrange(40, 3, 5)
    hop_index = build_hop_index(graph, 8)
    heads = np.flatnonzero(dataset.target_mask)
    assert heads.tolist() == list(range(0, 40, 4))
    for head in heads:
        (tail,) = khop_neighbors(hop_index, int(head), 3)
        expected = 1 if dataset.features.rows[tail, SIGNAL_COLUMN] > 0 else 0
        assert dataset.labels[head] == expected
    assert hop_index.effective_diameter == 3
    assert not dataset.labeled_mask.any()


def test_longrange_classes_are_balanced() -> None:
    dataset, _ = synth_longrange(200, 2, 1)
    head_labels = dataset.labels[dataset.target_mask]
    assert abs(int(head_labels.sum()) * 2 - head_labels.size) <= 1


def test_longrange_leftover_nodes_form_an_untargeted_path() -> None:
    dataset, graph = synth_longrange(10, 2, 0)
    assert dataset.target_mask.tolist() == [True, False, False, True, False, False, True, False, False, False]
    assert graph.neighbors(9).tolist() == []


def test_longrange_is_deterministic() -> None:
    first, first_graph = synth_longrange(30, 2, 9)
    second, second_graph = synth_longrange(30, 2, 9)
    assert np.array_equal(first.features.rows, second.features.rows)
    assert np.array_equal(first_graph.edges(), second_graph.edges())


@pytest.mark.parametrize(("nodes", "distance"), [(10, 0), (11, 3)])
def test_longrange_rejects_bad_sizes(nodes: int, distance: int) -> None:
    with pytest.raises(DataError):
        synth_longrange(nodes, distance, 0)


def test_corpus_is_balanced_and_deterministic() -> None:
    documents, labels = synth_corpus(101, 2)
    again, _ = synth_corpus(101, 2)
    assert documents == again
    assert abs(int(labels.sum()) * 2 - 101) == 1
    assert all(document for document in documents)
    prefixes = {0: set(), 1: set()}
    for document, label in zip(documents, labels):
        prefixes[int(label)].update(word[:2] for word in document.split() if word.startswith("c"))
    assert prefixes == {0: {"c0"}, 1: {"c1"}}
