# tests/test_model.py
"""
Tests for embeddings, the end-to-end classifier and checkpoints
"""
import numpy as np
import pytest

from src.autodiff import constant, grad_check
from src.autodiff.tensor import constants
from src.errors import CheckpointError, DataError, EmbeddingLookupError, GraphMismatchError
from src.graph import build_tree_graph, graph_merge
from src.ingest.aligner import align
from src.ingest.conllu_reader import DepParse
from src.ingest.dataset_loader import LabeledExample
from src.model import (
    EmbeddingProvider,
    ModelSpec,
    aspect_pool,
    classify,
    embed,
    forward,
    graph_input,
    init_model,
    l2_penalty,
    load_checkpoint,
    loss,
    save_checkpoint,
)
from src.model.classifier import HEAD_W1, HEAD_W2
from src.model.embeddings import EMBEDDING_TABLE, POSITION_TABLE, UNK, load_embedding_file
from src.model.rgat import stack_forward

SIX_TOKENS = ("the", "pasta", "was", "not", "very", "good")


def _spec(**overrides):
    values = dict(embedding_dim=4, hidden_dim=4, heads=2, layers=2, dropout=0.0, max_len=8, parser_ids=["A", "B"])
    values.update(overrides)
    return ModelSpec(**values)


def _model(tokens=SIX_TOKENS, seed=0, **overrides):
    spec = _spec(**overrides)
    return init_model(spec, EmbeddingProvider.trainable(tokens, spec.embedding_dim), seed)


def _six_token_case():
    example = LabeledExample(SIX_TOKENS, 2, 1, 2, ((4, 6),))
    a = DepParse("A", SIX_TOKENS, (2, 3, 0, 6, 6, 3))
    b = DepParse("B", SIX_TOKENS, (2, 6, 6, 6, 6, 0))
    return example, a, b


def test_trainable_vocabulary_is_sorted_with_unknown_row():
    provider = EmbeddingProvider.trainable(["b", "a", "b"], 3)
    assert provider.vocabulary == [UNK, "a", "b"]
    np.testing.assert_array_equal(provider.token_ids(["a", "zzz", "b"]), [1, 0, 2])


def test_embedding_file_lookup(tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("2 3\nfood 1 2 3\ngood 0.5 0 -1 \n", encoding="utf-8")
    provider = EmbeddingProvider.from_file(str(path))

    assert provider.dim == 3
    np.testing.assert_array_equal(provider.lookup(["good"]), [[0.5, 0.0, -1.0]])
    with pytest.raises(EmbeddingLookupError, match="'bad'"):
        provider.lookup(["food", "bad"])


def test_embedding_file_unknown_row(tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text(f"2 2\n{UNK} 9 9\nfood 1 2\n", encoding="utf-8")
    provider = EmbeddingProvider.from_file(str(path))
    np.testing.assert_array_equal(provider.lookup(["mystery"]), [[9.0, 9.0]])


def test_embedding_file_format_errors(tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("2 3\nfood 1 2\n", encoding="utf-8")
    with pytest.raises(DataError, match=":2:"):
        load_embedding_file(str(path))


def test_embed_with_zero_positions():
    params = _model()
    example = LabeledExample(SIX_TOKENS, 1, 1, 0)
    arrays = dict(params.arrays)
    arrays[POSITION_TABLE] = np.zeros_like(arrays[POSITION_TABLE])

    X = embed(example, params.provider, constants(arrays), params.spec)
    ids = params.provider.token_ids(SIX_TOKENS)
    np.testing.assert_array_equal(X.data, arrays[EMBEDDING_TABLE][ids])


def test_embed_with_zero_embeddings():
    params = _model()
    example = LabeledExample(SIX_TOKENS, 1, 1, 0)
    arrays = dict(params.arrays)
    arrays[EMBEDDING_TABLE] = np.zeros_like(arrays[EMBEDDING_TABLE])

    X = embed(example, params.provider, constants(arrays), params.spec)
    np.testing.assert_array_equal(X.data, arrays[POSITION_TABLE][:6])


def test_embed_rejects_long_sentence():
    params = _model(max_len=5)
    with pytest.raises(DataError, match="max_len"):
        embed(LabeledExample(SIX_TOKENS, 1, 1, 0), params.provider, params.bind(), params.spec)


def test_aspect_pool():
    H = constant([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    np.testing.assert_array_equal(aspect_pool(H, 2, 1).data, [[3.0, 4.0]])
    np.testing.assert_array_equal(aspect_pool(H, 1, 2).data, [[2.0, 3.0]])
    same = constant(np.tile([[7.0, -1.0]], (3, 1)))
    np.testing.assert_array_equal(aspect_pool(same, 1, 3).data, [[7.0, -1.0]])


def test_classify_values():
    h = constant(np.random.default_rng(0).normal(size=(1, 4)))
    uniform = classify(h, constant(np.ones((4, 4))), constant(np.zeros((3, 4))))
    np.testing.assert_allclose(uniform.data, [[1 / 3, 1 / 3, 1 / 3]], atol=1e-15)

    probs = classify(constant([[1.0]]), constant([[1.0]]), constant([[np.log(2.0)], [0.0], [0.0]]))
    np.testing.assert_allclose(probs.data, [[0.5, 0.25, 0.25]], atol=1e-15)


def test_probabilities_are_valid():
    example, a, b = _six_token_case()
    g = graph_merge([build_tree_graph(a), build_tree_graph(b)])
    for seed in range(20):
        p = forward(example, g, _model(seed=seed)).data
        assert np.all((p >= 0) & (p <= 1))
        assert abs(p.sum() - 1.0) < 1e-12


def test_forward_matches_manual_chain():
    params = _model(tokens=("a", "b", "c", "d"))
    example = LabeledExample(("a", "b", "c", "d"), 2, 2, 1)
    g = build_tree_graph(DepParse("A", example.tokens, (2, 0, 2, 3)))

    w = params.bind()
    X = embed(example, params.provider, w, params.spec)
    H = stack_forward(X, g, params.stack_layers(w, 0))
    manual = classify(aspect_pool(H, 2, 2), w[HEAD_W1], w[HEAD_W2])

    np.testing.assert_array_equal(forward(example, g, params).data, manual.data)
    np.testing.assert_array_equal(forward(example, g, params).data, forward(example, g, params).data)


def test_merge_of_identical_parses_is_bitwise_equal():
    example, a, _ = _six_token_case()
    params = _model()
    single = forward(example, build_tree_graph(a), params).data
    merged = forward(example, graph_merge([build_tree_graph(a)] * 3), params).data
    assert np.array_equal(single, merged)


def test_loss_values():
    assert loss(constant([[1.0, 0.0, 0.0]]), 0, {}).item() == 0.0
    assert abs(loss(constant([[1 / 3, 1 / 3, 1 / 3]]), 1, {}).item() - np.log(3.0)) < 1e-12


def test_l2_penalty_matches_direct_sum():
    params = _model()
    rows = params.provider.token_ids(["pasta", "good", "pasta"])
    expected = sum(
        float((value ** 2).sum()) for name, value in params.arrays.items() if name != EMBEDDING_TABLE
    )
    expected += float((params.arrays[EMBEDDING_TABLE][np.unique(rows)] ** 2).sum())

    assert abs(l2_penalty(params.bind(), rows).item() - expected) < 1e-12


def test_end_to_end_gradients():
    example, a, b = _six_token_case()
    g = graph_merge([build_tree_graph(a), build_tree_graph(b)])
    params = _model()
    arrays = {name: value.copy() for name, value in params.arrays.items()}
    rng = np.random.default_rng(2)
    for name in arrays:
        if name.endswith(".a_e"):
            arrays[name] = rng.normal(size=arrays[name].shape)
    rows = params.provider.token_ids(example.tokens)

    def loss_fn(w):
        return loss(forward(example, g, params, False, w), example.label, w, 1e-3, rows)

    per_parameter = {}
    assert grad_check(loss_fn, arrays, step=1e-5, per_parameter=per_parameter) < 1e-4
    assert set(per_parameter) == set(arrays), "every parameter group is checked"


def test_feature_ensemble_single_stack_equals_forward():
    example, a, _ = _six_token_case()
    plain = _model(graph_mode="single:A", parser_ids=["A"])
    ensemble = _model(architecture="feature_ensemble", parser_ids=["A"])

    assert sorted(plain.arrays) == sorted(ensemble.arrays)
    g = build_tree_graph(a)
    np.testing.assert_array_equal(forward(example, g, plain).data, forward(example, [g], ensemble).data)


def test_feature_ensemble_tied_stacks_give_equal_halves():
    example, a, _ = _six_token_case()
    params = _model(architecture="feature_ensemble")
    for name in list(params.arrays):
        if name.startswith("stack1."):
            params.arrays[name] = params.arrays[name.replace("stack1.", "stack0.", 1)].copy()

    g = build_tree_graph(a)
    w = params.bind()
    X = embed(example, params.provider, w, params.spec)
    halves = [aspect_pool(stack_forward(X, g, params.stack_layers(w, m)), 2, 1).data for m in range(2)]
    np.testing.assert_array_equal(halves[0], halves[1])
    assert params.arrays[HEAD_W1].shape == (4, 8)


def test_feature_ensemble_parameter_count():
    single = _model(architecture="feature_ensemble", parser_ids=["A"])
    double = _model(architecture="feature_ensemble", parser_ids=["A", "B"])
    stack = sum(v.size for k, v in single.arrays.items() if k.startswith("stack0."))
    d_out, d_h = single.spec.head_hidden, single.spec.hidden_dim

    assert double.parameter_count() - single.parameter_count() == stack + d_out * d_h


def test_feature_ensemble_rejects_graph_count_mismatch():
    example, a, _ = _six_token_case()
    params = _model(architecture="feature_ensemble")
    with pytest.raises(GraphMismatchError):
        forward(example, [build_tree_graph(a)], params)


def test_graph_input_follows_spec():
    example, a, b = _six_token_case()
    aligned = align(example, [a, b])
    assert graph_input(aligned, _spec(graph_mode="single:B")) == build_tree_graph(b)
    assert graph_input(aligned, _spec(architecture="feature_ensemble")) == [build_tree_graph(a), build_tree_graph(b)]


def test_plain_gat_and_no_position_ablation():
    params = _model(use_edge_types=False, use_position=False)
    assert POSITION_TABLE not in params.arrays
    assert not any(name.endswith(("a_e", "edge_emb")) for name in params.arrays)
    example, a, _ = _six_token_case()
    assert forward(example, build_tree_graph(a), params).data.shape == (1, 3)


def test_checkpoint_roundtrip(tmp_path):
    example, a, b = _six_token_case()
    params = _model(shared_attention=False)
    path = tmp_path / "model.ckpt"
    save_checkpoint(str(path), params, {"seed": 3})

    loaded, metadata = load_checkpoint(str(path))
    assert metadata == {"seed": 3}
    assert loaded.spec == params.spec
    assert loaded.provider.vocabulary == params.provider.vocabulary
    assert sorted(loaded.arrays) == sorted(params.arrays)
    for name in params.arrays:
        assert np.array_equal(loaded.arrays[name], params.arrays[name])

    g = graph_merge([build_tree_graph(a), build_tree_graph(b)])
    assert np.array_equal(forward(example, g, loaded).data, forward(example, g, params).data)


def test_checkpoint_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"NOPE")
    with pytest.raises(CheckpointError):
        load_checkpoint(str(bad))

    params = _model()
    good = tmp_path / "good.ckpt"
    save_checkpoint(str(good), params)
    truncated = tmp_path / "short.ckpt"
    truncated.write_bytes(good.read_bytes()[:-10])
    with pytest.raises(CheckpointError, match="truncated"):
        load_checkpoint(str(truncated))


def test_file_mode_model(tmp_path):
    path = tmp_path / "vec.txt"
    lines = [f"{len(SIX_TOKENS)} 4"] + [f"{t} " + " ".join(str(0.1 * (i + j)) for j in range(4)) for i, t in enumerate(SIX_TOKENS)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    provider = EmbeddingProvider.from_file(str(path))
    params = init_model(_spec(), provider, 0)
    assert EMBEDDING_TABLE not in params.arrays

    example, a, _ = _six_token_case()
    ckpt = tmp_path / "file.ckpt"
    save_checkpoint(str(ckpt), params)
    loaded, _ = load_checkpoint(str(ckpt))
    g = build_tree_graph(a)
    assert np.array_equal(forward(example, g, loaded).data, forward(example, g, params).data)
