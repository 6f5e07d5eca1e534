"""Martingale calculus on filtration trees.

Conditional expectations, predictable brackets, the orthogonal
(Galtchouk-Kunita-Watanabe style) decomposition of a martingale against a
family of reference martingales, discrete stochastic integrals and
restarted stochastic exponentials.  All functions are pure and operate on
the array conventions documented in :mod:`mveq.tree`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import DEFAULT_TOL
from .tree import FiltrationTree

__all__ = [
    "cond_expect",
    "martingale_from_terminal",
    "delta_bracket",
    "delta_bracket_all",
    "gkw_decompose",
    "GkwDecomposition",
    "stoch_integral",
    "restarted_exponential",
    "is_martingale",
]


def cond_expect(tree: FiltrationTree, x_leaf, t: int) -> np.ndarray:
    """E[x | F_t], one value per time-t node (ordered by node id)."""
    if not 0 <= t <= tree.horizon:
        raise ValueError(f"time {t} outside 0..{tree.horizon}")
    x_leaf = np.asarray(x_leaf, dtype=float)
    out = np.empty(len(tree.nodes_at[t]))
    for i, n in enumerate(tree.nodes_at[t]):
        rows = tree.leaves_under[n]
        out[i] = tree.leaf_probs[rows] @ x_leaf[rows] / tree.prob[n]
    return out


def martingale_from_terminal(tree: FiltrationTree, x_leaf) -> np.ndarray:
    """The martingale closed by the leaf values, one value per node."""
    x_leaf = np.asarray(x_leaf, dtype=float)
    out = np.zeros(tree.n_nodes)
    out[tree.leaves] = x_leaf
    for n in range(tree.n_nodes - 1, -1, -1):
        cs = tree.children[n]
        if cs:
            out[n] = tree.child_weights(n) @ out[cs]
    return out


def _check_martingale(tree, x, tol, name):
    res, ok = is_martingale(tree, x, tol)
    if not ok:
        raise ValueError(f"{name} is not a martingale (max drift {res!r})")


def delta_bracket(
    tree: FiltrationTree, a, b, t: int, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """Predictable bracket increment E[da*db | F_{t-1}] of two scalar
    martingales, one value per time-(t-1) node."""
    if not 1 <= t <= tree.horizon:
        raise ValueError(f"time {t} outside 1..{tree.horizon}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_martingale(tree, a, tol, "first input")
    _check_martingale(tree, b, tol, "second input")
    out = np.empty(len(tree.nodes_at[t - 1]))
    for i, n in enumerate(tree.nodes_at[t - 1]):
        cs = tree.children[n]
        w = tree.child_weights(n)
        out[i] = w @ ((a[cs] - a[n]) * (b[cs] - b[n]))
    return out


def delta_bracket_all(tree: FiltrationTree, a, b) -> np.ndarray:
    """Bracket increment over the step starting at each node, as an array
    over all nodes (zero at leaves).  No martingale check; internal use."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(tree.n_nodes)
    for n in tree.nonterminal():
        cs = tree.children[n]
        w = tree.child_weights(n)
        out[n] = w @ ((a[cs] - a[n]) * (b[cs] - b[n]))
    return out


@dataclass(frozen=True)
class GkwDecomposition:
    """z = z0 + (xi . m) + residual with residual strongly orthogonal to
    every reference martingale."""

    xi: np.ndarray  # (n_nodes, d1), meaningful at non-terminal nodes
    residual: np.ndarray  # (n_nodes,), martingale null at the root
    z0: float


def gkw_decompose(
    tree: FiltrationTree, z, m, tol: float = DEFAULT_TOL
) -> GkwDecomposition:
    """Orthogonal decomposition of the martingale ``z`` against the columns
    of ``m`` (shape ``(n_nodes, d1)``).

    Per node, the increment of ``z`` is orthogonally projected onto the
    span of the reference increments in the conditional inner product.
    The integrand is computed by Gram-Schmidt in column order; directions
    with vanishing conditional variance get coefficient 0, which picks a
    canonical representative when the increments are linearly dependent.
    """
    z = np.asarray(z, dtype=float)
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    d1 = m.shape[1]
    _check_martingale(tree, z, tol, "z")
    for j in range(d1):
        _check_martingale(tree, m[:, j], tol, f"m[{j}]")

    xi = np.zeros((tree.n_nodes, d1))
    residual = np.zeros(tree.n_nodes)
    for n in tree.nonterminal():
        cs = tree.children[n]
        w = tree.child_weights(n)
        dz = z[cs] - z[n]
        dm = m[cs] - m[n]  # (n_children, d1)

        def inner(x, y):
            return float(w @ (x * y))

        # Gram-Schmidt over the reference increments, tracking how each
        # orthogonal direction expands in the original columns.
        xi_n = np.zeros(d1)
        basis: list[tuple[np.ndarray, np.ndarray]] = []  # (direction, expansion)
        for i in range(d1):
            o = dm[:, i].copy()
            coeffs = np.zeros(d1)
            coeffs[i] = 1.0
            for ob, cb in basis:
                c = inner(dm[:, i], ob) / inner(ob, ob)
                o -= c * ob
                coeffs -= c * cb
            nrm = inner(o, o)
            if nrm > tol:
                basis.append((o, coeffs))
                xi_n += (inner(dz, o) / nrm) * coeffs
        xi[n] = xi_n
        dres = dz - dm @ xi_n
        residual[cs] = residual[n] + dres
    return GkwDecomposition(xi=xi, residual=residual, z0=float(z[0]))


def stoch_integral(tree: FiltrationTree, theta, s) -> np.ndarray:
    """Discrete stochastic integral (theta . s), one value per node, null
    at the root.  ``theta`` is predictable of shape ``(n_nodes, d)`` and
    ``s`` adapted of shape ``(n_nodes, d)``; scalar shapes are accepted."""
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    if theta.ndim == 1:
        theta = theta[:, None]
    out = np.zeros(tree.n_nodes)
    for n in tree.nonterminal():
        for c in tree.children[n]:
            out[c] = out[n] + theta[n] @ (s[c] - s[n])
    return out


def restarted_exponential(
    tree: FiltrationTree, z, s: int, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """Multiplicative restart of the martingale ``z`` at time ``s``.

    The increment ratio dz/z_prev is taken to be 0 wherever the previous
    value vanishes (within ``tol``), so the process is absorbed at 0 when
    ``z`` hits 0 from a nonzero value.  Returns one value per node; nodes
    before time ``s`` carry NaN.
    """
    if not 0 <= s <= tree.horizon:
        raise ValueError(f"time {s} outside 0..{tree.horizon}")
    z = np.asarray(z, dtype=float)
    out = np.full(tree.n_nodes, np.nan)
    out[tree.nodes_at[s]] = 1.0
    for n in range(tree.n_nodes):
        if tree.time[n] < s or not tree.children[n]:
            continue
        for c in tree.children[n]:
            dn = (z[c] - z[n]) / z[n] if abs(z[n]) > tol else 0.0
            out[c] = out[n] * (1.0 + dn)
    return out


def is_martingale(
    tree: FiltrationTree, x, tol: float = DEFAULT_TOL
) -> tuple[float, bool]:
    """Max absolute one-step drift of an adapted scalar process and whether
    it stays within ``tol``."""
    x = np.asarray(x, dtype=float)
    worst = 0.0
    for n in tree.nonterminal():
        cs = tree.children[n]
        drift = tree.child_weights(n) @ x[cs] - x[n]
        worst = max(worst, abs(float(drift)))
    return worst, worst <= tol
