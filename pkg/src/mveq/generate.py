"""Seeded random scenario generation for the property suites.

All sampling goes through one ``numpy`` generator, so a given seed yields
a bit-identical scenario stream.  Martingale parts are built by centring
sampled increments nodewise, which makes the martingale property exact up
to rounding.
"""

from __future__ import annotations

import numpy as np

from .scenario import AgentSpec, LinearMV, Quadratic, Scenario
from .tree import FiltrationTree

__all__ = ["generate_random_scenario", "random_tree"]

MAX_HORIZON = 6
MAX_BRANCHING = 4
MAX_ASSETS = 4
MAX_AGENTS = 5


def random_tree(rng: np.random.Generator, horizon: int, branching: int) -> FiltrationTree:
    """Uniform-depth tree with 2..branching children per node and positive
    normalised leaf probabilities."""
    children: list[list[int]] = [[]]
    frontier = [0]
    cond: dict[int, float] = {0: 1.0}
    for _ in range(horizon):
        nxt = []
        for n in frontier:
            k = int(rng.integers(2, branching + 1)) if branching >= 2 else 1
            ids = list(range(len(children), len(children) + k))
            children[n] = ids
            children.extend([[] for _ in ids])
            ws = rng.uniform(0.1, 1.0, size=k)
            ws /= ws.sum()
            for c, w in zip(ids, ws):
                cond[c] = cond[n] * w
            nxt.extend(ids)
        frontier = nxt
    leaf_probs = np.array([cond[n] for n in frontier])
    order = np.argsort(frontier)
    return FiltrationTree(children, leaf_probs[order])


def generate_random_scenario(
    seed: int,
    horizon: int = 2,
    branching: int = 3,
    d1: int = 1,
    d2: int = 1,
    n_agents: int = 2,
    preference_kind: str = "quadratic",
) -> Scenario:
    """Deterministic random scenario within the documented bounds.

    Quadratic scenarios get an aggregate bliss point strictly above the
    endowment maximum, so the density process is strictly positive.  For
    linear mean-variance scenarios, risk tolerances are sampled so the
    existence condition holds with probability about 0.8.
    """
    if not 1 <= horizon <= MAX_HORIZON:
        raise ValueError(f"horizon must be 1..{MAX_HORIZON}")
    if not 2 <= branching <= MAX_BRANCHING:
        raise ValueError(f"branching must be 2..{MAX_BRANCHING}")
    if d1 < 0 or d2 < 0 or not 1 <= d1 + d2 <= MAX_ASSETS:
        raise ValueError(f"need 1 <= d1 + d2 <= {MAX_ASSETS}")
    if not 1 <= n_agents <= MAX_AGENTS:
        raise ValueError(f"n_agents must be 1..{MAX_AGENTS}")
    if preference_kind not in ("quadratic", "linear_mv"):
        raise ValueError("preference_kind must be 'quadratic' or 'linear_mv'")

    rng = np.random.default_rng(seed)
    tree = random_tree(rng, horizon, branching)

    m_fin = np.zeros((tree.n_nodes, d1))
    for j in range(d1):
        for n in tree.nonterminal():
            cs = tree.children[n]
            inc = rng.uniform(-1.0, 1.0, size=len(cs))
            inc -= tree.child_weights(n) @ inc
            m_fin[cs, j] = m_fin[n, j] + inc
    s0_fin = rng.uniform(0.5, 2.0, size=d1)

    dividends = rng.uniform(0.0, 3.0, size=(tree.n_leaves, d2))
    eta2 = rng.uniform(0.0, 2.0, size=(n_agents, d2))
    xi_n = rng.uniform(0.0, 2.0, size=(n_agents, tree.n_leaves))

    xi_bar = dividends @ eta2.sum(axis=0) + xi_n.sum(axis=0)
    mean_xi = float(tree.leaf_probs @ xi_bar)
    max_xi = float(np.max(xi_bar))

    agents = []
    if preference_kind == "quadratic":
        gamma_bar = max_xi + rng.uniform(0.5, 2.0)
        weights = rng.uniform(0.2, 1.0, size=n_agents)
        gammas = gamma_bar * weights / weights.sum()
        for k in range(n_agents):
            agents.append(
                AgentSpec(eta2[k], xi_n[k], Quadratic(gamma=float(gammas[k])))
            )
    else:
        gap = max_xi - mean_xi
        base = gap if gap > 1e-12 else 1.0
        lam_sum = base * rng.uniform(0.2, 4.2)  # existence holds ~80% of draws
        weights = rng.uniform(0.2, 1.0, size=n_agents)
        lams = lam_sum * weights / weights.sum()
        for k in range(n_agents):
            agents.append(AgentSpec(eta2[k], xi_n[k], LinearMV(lam=float(lams[k]))))

    return Scenario(
        tree=tree,
        d1=d1,
        d2=d2,
        s0_fin=s0_fin,
        m_fin=m_fin,
        dividends=dividends,
        agents=agents,
    )
