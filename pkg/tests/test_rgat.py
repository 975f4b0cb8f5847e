# tests/test_rgat.py
"""
Tests for relational graph attention layers
"""
import numpy as np
import pytest

from src.autodiff import constant, grad_check, mul, relu, sum_all
from src.errors import ShapeError
from src.graph import TypedGraph, build_tree_graph, graph_merge
from src.ingest.conllu_reader import DepParse
from src.model.rgat import (
    LayerConfig,
    RgatLayerParams,
    attention_scores,
    init_layer_arrays,
    layer_forward,
    stack_forward,
)
from src.autodiff.tensor import constants


def _layer(rng, in_dim, cfg, prefix="l0", zero_attention=False):
    arrays = init_layer_arrays(rng, prefix, in_dim, cfg)
    if zero_attention:
        for name in arrays:
            if ".att." in name:
                arrays[name] = np.zeros_like(arrays[name])
    if cfg.use_edge_types:
        # generic parameters: a_e starts at zero
        for name in arrays:
            if name.endswith(".a_e") and not zero_attention:
                arrays[name] = rng.normal(size=arrays[name].shape)
    return arrays


def _params(arrays, prefix, cfg):
    return RgatLayerParams.from_weights(constants(arrays), prefix, cfg)


def _toy_merged():
    a = DepParse("A", ("x", "y", "z"), (2, 0, 2))
    b = DepParse("B", ("x", "y", "z"), (2, 3, 0))
    return graph_merge([build_tree_graph(a), build_tree_graph(b)])


def _random_tree_graph(rng, n):
    order = rng.permutation(n)
    pairs = [(int(order[rng.integers(k)]), int(order[k])) for k in range(1, n)]
    return TypedGraph.from_head_pairs(n, pairs)


def _segment_sums(alpha, src, n):
    totals = np.zeros(n)
    np.add.at(totals, src, alpha.data.reshape(-1))
    return totals


def test_layer_config_validation():
    with pytest.raises(ValueError):
        LayerConfig(heads=3, out_dim=8)
    with pytest.raises(ValueError):
        LayerConfig(heads=1, out_dim=4, activation='leaky_relu', leaky_slope=0.0)
    assert LayerConfig(heads=4, out_dim=8).head_dim == 2


def test_self_loop_only_node_has_unit_weight():
    cfg = LayerConfig(heads=1, out_dim=2)
    g = TypedGraph.from_head_pairs(1, [])
    p = _params(_layer(np.random.default_rng(0), 2, cfg), "l0", cfg)

    (alpha,) = attention_scores(constant([[0.3, -1.0]]), g, p, cfg)
    np.testing.assert_array_equal(alpha.data, [[1.0]])


def test_zero_attention_params_give_uniform_weights():
    cfg = LayerConfig(heads=2, out_dim=4)
    g = _toy_merged()
    p = _params(_layer(np.random.default_rng(1), 3, cfg, zero_attention=True), "l0", cfg)
    H = constant(np.random.default_rng(2).normal(size=(3, 3)))

    (alpha,) = attention_scores(H, g, p, cfg)
    src, _, _ = g.edge_index
    degree = np.bincount(src, minlength=g.n)
    np.testing.assert_allclose(alpha.data.reshape(-1), 1.0 / degree[src], atol=1e-15)


@pytest.mark.parametrize("use_edge_types", [True, False])
@pytest.mark.parametrize("shared", [True, False])
def test_attention_normalization(use_edge_types, shared):
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        g = graph_merge([_random_tree_graph(rng, n) for _ in range(2)])
        cfg = LayerConfig(heads=2, out_dim=4, activation='leaky_relu',
                          use_edge_types=use_edge_types, shared_attention=shared)
        p = _params(_layer(rng, 3, cfg), "l0", cfg)
        H = constant(rng.normal(size=(n, 3)))

        scores = attention_scores(H, g, p, cfg)
        assert len(scores) == (1 if shared else 2)
        src, _, _ = g.edge_index
        for alpha in scores:
            assert np.all(alpha.data >= 0)
            np.testing.assert_allclose(_segment_sums(alpha, src, n), 1.0, atol=1e-12)


def test_single_node_identity_layer_is_relu():
    cfg = LayerConfig(heads=1, out_dim=3)
    arrays = _layer(np.random.default_rng(4), 3, cfg, zero_attention=True)
    arrays["l0.W.0"] = np.eye(3)
    H = constant([[1.0, -2.0, 0.5]])

    out = layer_forward(H, TypedGraph.from_head_pairs(1, []), _params(arrays, "l0", cfg), cfg)
    np.testing.assert_array_equal(out.data, relu(H).data)


def test_identical_neighbours_absorb_attention():
    cfg = LayerConfig(heads=1, out_dim=2)
    arrays = _layer(np.random.default_rng(5), 2, cfg)
    # star: node 0 is the head of every other node
    g = TypedGraph.from_head_pairs(4, [(0, 1), (0, 2), (0, 3)])
    H = constant(np.tile([[0.7, -0.2]], (4, 1)))

    out = layer_forward(H, g, _params(arrays, "l0", cfg), cfg)
    expected = np.maximum(H.data[0] @ arrays["l0.W.0"], 0.0)
    np.testing.assert_allclose(out.data[0], expected, atol=1e-14)


@pytest.mark.parametrize("use_edge_types", [True, False])
def test_permutation_equivariance(use_edge_types):
    rng = np.random.default_rng(6)
    cfg = LayerConfig(heads=2, out_dim=4, use_edge_types=use_edge_types)
    for _ in range(50):
        n = 6
        g = graph_merge([_random_tree_graph(rng, n) for _ in range(3)])
        layers = [
            (_params(_layer(rng, 5, cfg, "l0"), "l0", cfg), cfg),
            (_params(_layer(rng, 4, cfg, "l1"), "l1", cfg), cfg),
        ]
        H = rng.normal(size=(n, 5))
        perm = rng.permutation(n)
        moved = np.zeros_like(H)
        moved[perm] = H

        out = stack_forward(constant(H), g, layers).data
        out_moved = stack_forward(constant(moved), g.relabel([int(i) for i in perm]), layers).data
        np.testing.assert_allclose(out_moved[perm], out, atol=1e-9)


def test_edge_type_sensitivity():
    rng = np.random.default_rng(7)
    H = constant(rng.normal(size=(3, 4)))
    chain = TypedGraph.from_head_pairs(3, [(0, 1), (1, 2)])
    flipped = TypedGraph.from_head_pairs(3, [(0, 1), (2, 1)])
    # same neighbourhoods, one edge with swapped type
    assert {(s, d) for s, d, _ in chain.edges} == {(s, d) for s, d, _ in flipped.edges}

    typed = LayerConfig(heads=2, out_dim=4, activation='leaky_relu', use_edge_types=True)
    p = _params(_layer(rng, 4, typed), "l0", typed)
    assert not np.array_equal(layer_forward(H, chain, p, typed).data, layer_forward(H, flipped, p, typed).data)

    plain = LayerConfig(heads=2, out_dim=4, activation='leaky_relu', use_edge_types=False)
    q = _params(_layer(rng, 4, plain), "l0", plain)
    assert np.array_equal(layer_forward(H, chain, q, plain).data, layer_forward(H, flipped, q, plain).data)


def test_plain_gat_has_no_edge_parameters():
    arrays = init_layer_arrays(np.random.default_rng(8), "l0", 4, LayerConfig(heads=2, out_dim=4, use_edge_types=False))
    assert not any(name.endswith(("a_e", "edge_emb")) for name in arrays)
    typed = init_layer_arrays(np.random.default_rng(8), "l0", 4, LayerConfig(heads=2, out_dim=4))
    assert typed["l0.att.0.edge_emb"].shape == (3, 4)
    assert np.all(typed["l0.att.0.a_e"] == 0.0)


def test_stack_composition():
    rng = np.random.default_rng(9)
    cfg = LayerConfig(heads=2, out_dim=4)
    g = _toy_merged()
    first = (_params(_layer(rng, 3, cfg, "l0"), "l0", cfg), cfg)
    second = (_params(_layer(rng, 4, cfg, "l1"), "l1", cfg), cfg)
    H = constant(rng.normal(size=(3, 3)))

    assert stack_forward(H, g, []) is H
    np.testing.assert_array_equal(stack_forward(H, g, [first]).data, layer_forward(H, g, *first).data)
    manual = layer_forward(layer_forward(H, g, *first), g, *second)
    np.testing.assert_array_equal(stack_forward(H, g, [first, second]).data, manual.data)


def test_dimension_mismatch():
    cfg = LayerConfig(heads=1, out_dim=2)
    p = _params(_layer(np.random.default_rng(10), 3, cfg), "l0", cfg)
    with pytest.raises(ShapeError):
        layer_forward(constant(np.ones((3, 5))), _toy_merged(), p, cfg)
    with pytest.raises(ShapeError):
        layer_forward(constant(np.ones((2, 3))), _toy_merged(), p, cfg)


@pytest.mark.parametrize("shared", [True, False])
def test_layer_gradients(shared):
    rng = np.random.default_rng(11)
    cfg = LayerConfig(heads=2, out_dim=4, activation='leaky_relu', shared_attention=shared)
    arrays = _layer(rng, 3, cfg)
    arrays["H"] = rng.normal(size=(3, 3))
    g = _toy_merged()
    target = rng.normal(size=(3, 4))

    def loss_fn(w):
        p = RgatLayerParams.from_weights(w, "l0", cfg)
        out = layer_forward(w["H"], g, p, cfg)
        return sum_all(mul(out, constant(target)))

    assert grad_check(loss_fn, arrays) < 1e-4
