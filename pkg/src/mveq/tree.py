"""Finite event trees encoding the probability space and filtration.

Conventions used throughout the package:

* Nodes carry integer ids ``0 .. n_nodes-1`` with node 0 the unique root
  (time 0).  Children ids are strictly larger than their parent's id, so a
  single forward (resp. backward) sweep over node ids walks the tree from
  the root down (resp. from the leaves up).
* All leaves sit at the horizon ``T``; the time-t nodes are the atoms of
  the time-t sigma-algebra.
* An *adapted* scalar process is a ``numpy`` array of shape ``(n_nodes,)``;
  a d-dimensional one has shape ``(n_nodes, d)``.
* A *predictable* process for the increment over ``(t-1, t]`` is stored on
  the time-(t-1) node, i.e. it is an array of shape ``(n_nodes, d)`` whose
  entries are only meaningful at non-terminal nodes.
* A *leaf-indexed* vector lists one value per leaf, in increasing order of
  the leaf node ids.
"""

from __future__ import annotations

import numpy as np

__all__ = ["FiltrationTree"]


class FiltrationTree:
    """Event tree with leaf probabilities.

    Parameters
    ----------
    children:
        ``children[i]`` lists the ids of the children of node ``i`` (empty
        for leaves).  Node 0 must be the root and every child id must be
        strictly larger than its parent's id.
    leaf_probs:
        One probability per leaf, in increasing order of leaf node ids.
        Positivity and summing to 1 are checked by scenario validation,
        not here; interior node probabilities are always the sum of their
        children's.
    """

    def __init__(self, children, leaf_probs):
        self.children = [list(map(int, cs)) for cs in children]
        n = len(self.children)
        if n == 0:
            raise ValueError("tree must have at least the root node")
        parent = np.full(n, -1, dtype=int)
        for i, cs in enumerate(self.children):
            for c in cs:
                if not i < c < n:
                    raise ValueError(f"child id {c} of node {i} out of order")
                if parent[c] != -1:
                    raise ValueError(f"node {c} has two parents")
                parent[c] = i
        if np.any(parent[1:] == -1):
            raise ValueError("tree is disconnected")
        self.parent = parent

        self.time = np.zeros(n, dtype=int)
        for i in range(1, n):
            self.time[i] = self.time[parent[i]] + 1
        self.horizon = int(self.time.max()) if n > 1 else 0
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")

        self.leaves = np.array([i for i in range(n) if not self.children[i]])
        if np.any(self.time[self.leaves] != self.horizon):
            raise ValueError("all leaves must sit at the horizon")

        leaf_probs = np.asarray(leaf_probs, dtype=float)
        if leaf_probs.shape != (len(self.leaves),):
            raise ValueError(
                f"expected {len(self.leaves)} leaf probabilities, "
                f"got {leaf_probs.shape}"
            )
        self.leaf_probs = leaf_probs

        # position of each leaf in the leaf ordering; -1 for interior nodes
        self.leaf_row = np.full(n, -1, dtype=int)
        self.leaf_row[self.leaves] = np.arange(len(self.leaves))

        # leaf rows lying under each node
        self.leaves_under: list[np.ndarray] = [None] * n  # type: ignore[list-item]
        for i in range(n - 1, -1, -1):
            if not self.children[i]:
                self.leaves_under[i] = np.array([self.leaf_row[i]])
            else:
                self.leaves_under[i] = np.concatenate(
                    [self.leaves_under[c] for c in self.children[i]]
                )

        self.prob = np.zeros(n)
        self.prob[self.leaves] = leaf_probs
        for i in range(n - 1, 0, -1):
            self.prob[parent[i]] += self.prob[i]

        self.nodes_at = [
            np.array([i for i in range(n) if self.time[i] == t])
            for t in range(self.horizon + 1)
        ]

    @property
    def n_nodes(self) -> int:
        return len(self.children)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def nonterminal(self) -> np.ndarray:
        """Ids of all nodes strictly before the horizon."""
        return np.array([i for i in range(self.n_nodes) if self.children[i]])

    def child_weights(self, node: int) -> np.ndarray:
        """Conditional probabilities of the children given the node."""
        cs = self.children[node]
        p = self.prob[node]
        if p <= 0:
            raise ValueError(f"node {node} has nonpositive probability")
        return self.prob[cs] / p

    def path(self, node: int) -> list[int]:
        """Node ids from the root to ``node`` inclusive."""
        out = [node]
        while out[-1] != 0:
            out.append(int(self.parent[out[-1]]))
        return out[::-1]

    def subtree(self, node: int) -> np.ndarray:
        """Ids of all nodes in the subtree rooted at ``node``."""
        out = [node]
        i = 0
        while i < len(out):
            out.extend(self.children[out[i]])
            i += 1
        return np.array(sorted(out))
