"""Dependency-tree algorithms and the graph-convolution kernel used for
argument role prediction.

Edges are treated as undirected for pruning and adjacency; dependency
direction only reaches the models through the dependency-label channel.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import IndexOutOfRange, PruningFailure, ShapeMismatch

ROOT = -1


@dataclass(frozen=True)
class DepTree:
    head: tuple
    label: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(int(h) for h in self.head))
        if not self.label:
            object.__setattr__(self, "label", ("dep",) * len(self.head))
        else:
            object.__setattr__(self, "label", tuple(self.label))
        if len(self.label) != len(self.head):
            raise ValueError("head and label arrays differ in length")
        problem = tree_problem(self.head)
        if problem:
            raise ValueError(problem)

    @property
    def n(self) -> int:
        return len(self.head)

    @property
    def root(self) -> int:
        return self.head.index(ROOT)

    @cached_property
    def neighbors(self) -> tuple:
        nb = [[] for _ in range(self.n)]
        for child, parent in enumerate(self.head):
            if parent != ROOT:
                nb[child].append(parent)
                nb[parent].append(child)
        return tuple(tuple(sorted(x)) for x in nb)

    @cached_property
    def children(self) -> tuple:
        ch = [[] for _ in range(self.n)]
        for child, parent in enumerate(self.head):
            if parent != ROOT:
                ch[parent].append(child)
        return tuple(tuple(x) for x in ch)

    def ancestors(self, i: int) -> list[int]:
        """``i`` followed by its ancestors up to the root."""
        chain = [i]
        while self.head[chain[-1]] != ROOT:
            chain.append(self.head[chain[-1]])
        return chain

    def descendants(self, i: int) -> list[int]:
        """``i`` and everything it dominates, ascending."""
        out, stack = [], [i]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(self.children[node])
        return sorted(out)

    def span_head(self, start: int, end: int) -> int:
        """Syntactic head of the token span [start, end]: the first token whose
        parent lies outside the span."""
        for i in range(start, end + 1):
            h = self.head[i]
            if h == ROOT or not start <= h <= end:
                return i
        return start

    @classmethod
    def unchecked(cls, head: Sequence[int], label: Sequence[str] = ()) -> "DepTree":
        """Wrap a raw parse without validation (e.g. a forest from a broken
        parser); pruning over unconnected anchors then raises PruningFailure."""
        tree = object.__new__(cls)
        object.__setattr__(tree, "head", tuple(int(h) for h in head))
        object.__setattr__(tree, "label", tuple(label) or ("dep",) * len(head))
        return tree

    @classmethod
    def right_branching(cls, n: int, label: str = "dep") -> "DepTree":
        """Degenerate tree: every token headed by its right neighbour."""
        return cls(tuple(list(range(1, n)) + [ROOT]) if n else (), (label,) * n)


def tree_problem(head: Sequence[int]) -> str | None:
    """Describe why ``head`` is not a single-root tree, or None if it is."""
    n = len(head)
    if n == 0:
        return None
    roots = [i for i, h in enumerate(head) if h == ROOT]
    if len(roots) != 1:
        return f"expected exactly one root, found {len(roots)}"
    for i, h in enumerate(head):
        if h != ROOT and not 0 <= h < n:
            return f"head of token {i} out of range: {h}"
        if h == i:
            return f"token {i} heads itself"
    state = [0] * n  # 0 unseen, 1 on current walk, 2 reaches root
    for i in range(n):
        walk = []
        j = i
        while j != ROOT and state[j] == 0:
            state[j] = 1
            walk.append(j)
            j = head[j]
        if j != ROOT and state[j] == 1:
            return f"cycle through token {j}"
        for w in walk:
            state[w] = 2
    return None


@dataclass(frozen=True)
class PrunedSubtree:
    kept: frozenset
    k: int = 0
    anchors: tuple = field(default=(), compare=False)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.kept)


def _check_index(tree: DepTree, i: int):
    if not 0 <= i < tree.n:
        raise IndexOutOfRange(f"token {i} outside tree of size {tree.n}")


def path_prune(tree: DepTree, a: int, b: int) -> PrunedSubtree:
    """Nodes on the unique tree path between ``a`` and ``b``, both included."""
    _check_index(tree, a)
    _check_index(tree, b)
    up_a = tree.ancestors(a)
    up_b = tree.ancestors(b)
    on_a = set(up_a)
    kept = set()
    for node in up_b:
        kept.add(node)
        if node in on_a:
            lca = node
            break
    else:
        raise PruningFailure(f"tokens {a} and {b} are not connected")
    for node in up_a:
        kept.add(node)
        if node == lca:
            break
    return PrunedSubtree(frozenset(kept), 0, (a, b))


def expand_k(tree: DepTree, sub: PrunedSubtree, k: int) -> PrunedSubtree:
    """Grow ``sub`` by every node within ``k`` undirected hops of it."""
    if k < 0:
        raise ValueError("k must be non-negative")
    dist = {node: 0 for node in sub.kept}
    queue = deque(sub.kept)
    while queue:
        node = queue.popleft()
        if dist[node] == k:
            continue
        for nb in tree.neighbors[node]:
            if nb not in dist:
                dist[nb] = dist[node] + 1
                queue.append(nb)
    return PrunedSubtree(frozenset(dist), sub.k + k, sub.anchors)


def prune(tree: DepTree, a: int, b: int, k: int = 1) -> PrunedSubtree:
    return expand_k(tree, path_prune(tree, a, b), k)


def normalized_adjacency(sub: PrunedSubtree, tree: DepTree) -> np.ndarray:
    """D^-1/2 (A + I) D^-1/2 over the induced subgraph, rows ordered by token index."""
    nodes = sub.nodes
    if not nodes:
        raise ValueError("pruned subtree is empty")
    pos = {node: i for i, node in enumerate(nodes)}
    m = len(nodes)
    adj = np.eye(m)
    for node in nodes:
        parent = tree.head[node]
        if parent in pos:
            adj[pos[node], pos[parent]] = adj[pos[parent], pos[node]] = 1.0
    inv_sqrt = 1.0 / np.sqrt(adj.sum(axis=1))
    return adj * inv_sqrt[:, None] * inv_sqrt[None, :]


@dataclass
class GcnLayerParams:
    W: np.ndarray
    b: np.ndarray

    @classmethod
    def init(cls, in_dim: int, out_dim: int, rng: np.random.Generator) -> "GcnLayerParams":
        bound = np.sqrt(6.0 / (in_dim + out_dim))
        return cls(rng.uniform(-bound, bound, (in_dim, out_dim)), np.zeros(out_dim))


def _check_chain(H, A, layers):
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != H.shape[0]:
        raise ShapeMismatch(f"adjacency {A.shape} incompatible with features {H.shape}")
    width = H.shape[1]
    for i, layer in enumerate(layers):
        if layer.W.shape[0] != width or layer.b.shape != (layer.W.shape[1],):
            raise ShapeMismatch(f"layer {i}: W {layer.W.shape}, b {layer.b.shape}, input width {width}")
        width = layer.W.shape[1]


def gcn_forward(H: np.ndarray, A: np.ndarray, layers: Sequence[GcnLayerParams],
                final_linear: bool = False, return_cache: bool = False):
    """Stack of ``H <- relu(A H W + b)``; with ``final_linear`` the last layer
    skips the relu."""
    H = np.asarray(H, dtype=float)
    _check_chain(H, A, layers)
    cache = []
    for i, layer in enumerate(layers):
        pre = A @ H @ layer.W + layer.b
        cache.append((H, pre))
        last = i == len(layers) - 1
        H = pre if (last and final_linear) else np.maximum(pre, 0.0)
    return (H, cache) if return_cache else H


def gcn_backward(A: np.ndarray, layers: Sequence[GcnLayerParams], cache, grad_out: np.ndarray,
                 final_linear: bool = False):
    """Gradients of a scalar loss given ``grad_out`` = dL/d(output).

    Returns (dL/dH_input, [(dL/dW, dL/db) per layer]).
    """
    grads = [None] * len(layers)
    g = np.asarray(grad_out, dtype=float)
    for i in reversed(range(len(layers))):
        H_in, pre = cache[i]
        last = i == len(layers) - 1
        if not (last and final_linear):
            g = g * (pre > 0)
        AH = A @ H_in
        grads[i] = (AH.T @ g, g.sum(axis=0))
        g = A.T @ (g @ layers[i].W.T)
    return g, grads
