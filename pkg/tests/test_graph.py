import numpy as np
import pytest
from hypothesis import given, strategies as st

from oilevents.errors import IndexOutOfRange, PruningFailure, ShapeMismatch
from oilevents.graph import (DepTree, GcnLayerParams, PrunedSubtree, expand_k, gcn_backward, gcn_forward,
                             normalized_adjacency, path_prune, prune, tree_problem)
from oracles import ball_union, bfs_path, central_diff, random_tree, rel_err


def test_tree_validation():
    assert tree_problem([-1, 0, 1]) is None
    assert tree_problem([1, 0, -1]) is not None        # cycle
    assert tree_problem([-1, -1]) is not None          # two roots
    with pytest.raises(ValueError):
        DepTree((0, -1, 5))


def test_path_prune_trivial_cases():
    chain = DepTree((1, 2, -1))        # 0 <- 1 <- 2
    assert path_prune(chain, 1, 1).kept == {1}
    assert path_prune(chain, 0, 2).kept == {0, 1, 2}
    with pytest.raises(IndexOutOfRange):
        path_prune(chain, 0, 3)


def test_expand_k_star_and_identity():
    star = DepTree((-1, 0, 0, 0, 0))
    sub = PrunedSubtree(frozenset({0}))
    assert expand_k(star, sub, 0).kept == {0}
    assert expand_k(star, sub, 1).kept == set(range(5))
    with pytest.raises(ValueError):
        expand_k(star, sub, -1)


def test_pruning_failure_on_forest():
    forest = DepTree.unchecked((-1, -1, 1))
    with pytest.raises(PruningFailure):
        path_prune(forest, 0, 2)


@st.composite
def tree_pairs(draw):
    seed = draw(st.integers(0, 10_000))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(1, 40))
    head = random_tree(rng, n)
    a, b = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
    return head, a, b


@given(tree_pairs(), st.sampled_from([0, 1, 2]))
def test_prune_matches_bfs_oracles(case, k):
    head, a, b = case
    tree = DepTree(tuple(head))
    path = path_prune(tree, a, b)
    assert set(path.kept) == bfs_path(head, a, b)
    assert set(prune(tree, a, b, k).kept) == ball_union(head, bfs_path(head, a, b), k)


@given(tree_pairs())
def test_expand_k_monotone(case):
    head, a, b = case
    tree = DepTree(tuple(head))
    sizes = [len(prune(tree, a, b, k).kept) for k in range(4)]
    sets = [prune(tree, a, b, k).kept for k in range(4)]
    assert sizes == sorted(sizes)
    assert all(sets[i] <= sets[i + 1] for i in range(3))


def test_normalized_adjacency_small_cases():
    tree = DepTree((-1, 0))
    assert normalized_adjacency(PrunedSubtree(frozenset({0})), tree).tolist() == [[1.0]]
    A = normalized_adjacency(PrunedSubtree(frozenset({0, 1})), tree)
    assert np.allclose(A, 0.5)


@given(tree_pairs())
def test_normalized_adjacency_symmetric(case):
    head, a, b = case
    tree = DepTree(tuple(head))
    A = normalized_adjacency(prune(tree, a, b, 1), tree)
    assert np.allclose(A, A.T, atol=1e-9)
    assert (A.diagonal() > 0).all()


def test_gcn_identity_wiring():
    H = np.array([[1.0, -2.0], [-0.5, 3.0]])
    layer = GcnLayerParams(np.eye(2), np.zeros(2))
    assert np.array_equal(gcn_forward(H, np.eye(2), [layer]), np.maximum(H, 0))
    zero = GcnLayerParams(np.zeros((2, 3)), np.zeros(3))
    assert not gcn_forward(H, np.eye(2), [zero]).any()


def test_gcn_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        gcn_forward(np.zeros((3, 2)), np.eye(2), [GcnLayerParams(np.eye(2), np.zeros(2))])
    with pytest.raises(ShapeMismatch):
        gcn_forward(np.zeros((2, 2)), np.eye(2), [GcnLayerParams(np.eye(3), np.zeros(3))])


def gcn_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    tree = DepTree(tuple(random_tree(rng, n)))
    A = normalized_adjacency(PrunedSubtree(frozenset(range(n))), tree)
    dims = [3, 4, 2]
    layers = [GcnLayerParams.init(dims[i], dims[i + 1], rng) for i in range(2)]
    for l in layers:
        l.b = rng.normal(size=l.b.shape) * 0.1
    H = rng.normal(size=(n, dims[0]))
    G = rng.normal(size=(n, dims[-1]))
    return H, A, layers, G


def gcn_gradient_errors(seed):
    """Analytic vs finite-difference relative errors for input, weights, biases."""
    H, A, layers, G = gcn_instance(seed)

    def loss(H_=None, which=None, value=None):
        ls = [GcnLayerParams(l.W.copy(), l.b.copy()) for l in layers]
        if which is not None:
            i, name = which
            setattr(ls[i], name, value)
        return float((gcn_forward(H if H_ is None else H_, A, ls) * G).sum())

    out, cache = gcn_forward(H, A, layers, return_cache=True)
    dH, grads = gcn_backward(A, layers, cache, G)
    errs = [rel_err(dH, central_diff(lambda x: loss(H_=x), H))]
    for i, (dW, db) in enumerate(grads):
        errs.append(rel_err(dW, central_diff(lambda x: loss(which=(i, "W"), value=x), layers[i].W)))
        errs.append(rel_err(db, central_diff(lambda x: loss(which=(i, "b"), value=x), layers[i].b)))
    return errs


@pytest.mark.parametrize("seed", range(5))
def test_gcn_gradient(seed):
    assert max(gcn_gradient_errors(seed)) < 1e-4


def test_torch_gcn_matches_numpy():
    import torch

    from oilevents.tasks.arp import TorchGcn

    H, A, layers, _ = gcn_instance(11)
    mod = TorchGcn([3, 4, 2]).double()
    with torch.no_grad():
        for lin, l in zip(mod.layers, layers):
            lin.weight.copy_(torch.from_numpy(l.W.T))
            lin.bias.copy_(torch.from_numpy(l.b))
    got = mod(torch.from_numpy(H), torch.from_numpy(A)).detach().numpy()
    assert np.allclose(got, gcn_forward(H, A, layers), atol=1e-12)
