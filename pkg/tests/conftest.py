"""Shared fixtures: small hand-checked markets reused across the suite.

Expected values are frozen from independent one-period oracles:

* price of a productive asset: first-order condition
  E[(D - S0) * (gamma_bar - D)] = 0, i.e. S0 = E[(gamma_bar - D) D] / E[gamma_bar - D];
* pure-investment error in one period: ell = 1 - E[dS]^2 / E[dS^2];
* financial drift in one period: dA = -xi * E[dM^2] / Z0 with
  xi = E[dZ dM] / E[dM^2].
"""

from __future__ import annotations

import numpy as np
import pytest

from mveq import AgentSpec, FiltrationTree, LinearMV, Quadratic, Scenario


def one_period_tree(probs=(0.5, 0.5)) -> FiltrationTree:
    n = len(probs)
    return FiltrationTree([list(range(1, n + 1))] + [[] for _ in range(n)], probs)


@pytest.fixture
def coin_tree() -> FiltrationTree:
    return one_period_tree()


@pytest.fixture
def scen_a(coin_tree) -> Scenario:
    """One productive asset D=(2,1), single quadratic agent gamma=10,
    eta=1, no outside income.  Oracle: S0 = (0.5*8*2 + 0.5*9*1)/8.5 = 25/17."""
    return Scenario(
        tree=coin_tree,
        d1=0,
        d2=1,
        s0_fin=np.zeros(0),
        m_fin=np.zeros((3, 0)),
        dividends=np.array([[2.0], [1.0]]),
        agents=[AgentSpec(eta2=[1.0], xi_n=[0.0, 0.0], preference=Quadratic(10.0))],
    )


@pytest.fixture
def scen_b(coin_tree) -> Scenario:
    """Same market as scen_a with one linear mean-variance agent lambda=1.
    Oracle: gamma_bar = 1 + E[D] = 2.5, S0 = E[(2.5-D)D]/E[2.5-D] = 1.25,
    dS = (0.75, -0.25), ell = 1 - .25^2/.3125 = 0.8, c1 = 1.25, y1 = 1.25."""
    return Scenario(
        tree=coin_tree,
        d1=0,
        d2=1,
        s0_fin=np.zeros(0),
        m_fin=np.zeros((3, 0)),
        dividends=np.array([[2.0], [1.0]]),
        agents=[AgentSpec(eta2=[1.0], xi_n=[0.0, 0.0], preference=LinearMV(1.0))],
    )


@pytest.fixture
def scen_c(coin_tree) -> Scenario:
    """Degenerate-but-solvable: gamma=2, aggregate endowment (3,1), constant
    dividend D=1.  Z0 = E[2 - (3,1)] = 0 but E[(2-Xi)*D] = 0, so prices
    exist and S0 is not pinned down (1 is canonical, 0.5 also clears)."""
    return Scenario(
        tree=coin_tree,
        d1=0,
        d2=1,
        s0_fin=np.zeros(0),
        m_fin=np.zeros((3, 0)),
        dividends=np.array([[1.0], [1.0]]),
        agents=[AgentSpec(eta2=[1.0], xi_n=[2.0, 0.0], preference=Quadratic(2.0))],
    )


@pytest.fixture
def scen_c_prime(coin_tree) -> Scenario:
    """Degenerate and unsolvable: same bliss point and endowment but a
    non-constant dividend, so E[(2-Xi)*D] = -0.5 != 0 on {Z=0}."""
    return Scenario(
        tree=coin_tree,
        d1=0,
        d2=1,
        s0_fin=np.zeros(0),
        m_fin=np.zeros((3, 0)),
        dividends=np.array([[2.0], [1.0]]),
        agents=[AgentSpec(eta2=[1.0], xi_n=[1.0, 0.0], preference=Quadratic(2.0))],
    )


@pytest.fixture
def scen_d(coin_tree) -> Scenario:
    """One financial asset with dM = (+1, -1), quadratic agent gamma=4 and
    income 2 + M1.  Oracle: Z0 = 2, xi = -1, E[dM^2] = 1, drift dA = +0.5."""
    m = np.array([[0.0], [1.0], [-1.0]])
    return Scenario(
        tree=coin_tree,
        d1=1,
        d2=0,
        s0_fin=np.array([0.0]),
        m_fin=m,
        dividends=np.zeros((2, 0)),
        agents=[AgentSpec(eta2=[], xi_n=[3.0, 1.0], preference=Quadratic(4.0))],
    )


@pytest.fixture
def cancel_tree_prices():
    """Two-period single-path-splitting price process whose second-period
    increment undoes the first (dS2 = -dS1 pathwise): terminal gains of the
    buy-and-hold vanish yet the time-1 gains do not, so equal terminal
    gains do not imply equal gains paths."""
    tree = FiltrationTree([[1, 2], [3], [4], [], []], [0.5, 0.5])
    prices = np.array([0.0, 1.0, -1.0, 0.0, 0.0])[:, None]
    return tree, prices
