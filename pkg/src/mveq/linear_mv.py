"""Linear mean-variance equilibria via the closed-form fixed point.

A linear mean-variance equilibrium coincides with the quadratic
equilibrium whose aggregate risk tolerance solves a one-line fixed-point
equation: the sum of the agents' risk tolerances plus the expected
aggregate endowment.  It exists in the solved class iff that value
exceeds the essential supremum of the aggregate endowment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mvh import (
    pure_investment,
    solve_exmvh,
    uniqueness_of_values,
)
from .quadratic import construct_prices, _constant_strategy, _full_eta
from .scenario import DEFAULT_TOL, LinearMV, Scenario, aggregate_endowment, total_endowment
from .stoch import delta_bracket_all, martingale_from_terminal, stoch_integral

__all__ = [
    "FrontierData",
    "MvEquilibriumReport",
    "gamma_bar_fixed_point",
    "solve_linear_mv",
    "agent_frontier",
    "optimal_mv_strategy",
    "mv_efficiency_check",
    "verify_fixed_point",
]


@dataclass(frozen=True)
class FrontierData:
    """Efficient frontier of one agent, parametrised by the speculative
    exposure y >= 0."""

    ell: float
    c_k: float
    eps2_k: float

    def mean(self, y: float) -> float:
        return self.c_k + (1.0 - self.ell) * y

    def stdev(self, y: float) -> float:
        return float(np.sqrt(self.eps2_k + self.ell * (1.0 - self.ell) * y**2))

    def point(self, y: float) -> tuple[float, float]:
        return self.mean(y), self.stdev(y)


@dataclass
class MvEquilibriumReport:
    gamma_bar: float
    gamma_bar_0: float
    exists: bool
    prices: np.ndarray | None = None
    ell: float = float("nan")
    c_k: list[float] = field(default_factory=list)
    eps2_k: list[float] = field(default_factory=list)
    y_k: list[float] = field(default_factory=list)
    strategies: list[np.ndarray] = field(default_factory=list)
    fp_residual: float = float("nan")
    identity_residual: float = float("nan")
    clearing_residual: float = float("nan")
    trivial_regime: bool = False


def _lambdas(s: Scenario) -> list[float]:
    lams = []
    for a in s.agents:
        if not isinstance(a.preference, LinearMV):
            raise ValueError("linear mean-variance solver requires LinearMV agents only")
        lams.append(a.preference.lam)
    return lams


def gamma_bar_fixed_point(
    s: Scenario, tol: float = DEFAULT_TOL
) -> tuple[float, float, bool]:
    """Aggregate risk tolerance of the candidate equilibrium, the essential
    supremum of the aggregate endowment, and the existence flag."""
    lams = _lambdas(s)
    xi_bar = aggregate_endowment(s)
    if np.min(xi_bar) < -tol:
        raise ValueError("aggregate endowment must be nonnegative")
    mean_xi = float(s.tree.leaf_probs @ xi_bar)
    gamma_bar = float(sum(lams)) + mean_xi
    gamma_bar_0 = float(np.max(xi_bar))
    return gamma_bar, gamma_bar_0, gamma_bar > gamma_bar_0 + tol


def _is_trivial_regime(s: Scenario, gamma_bar_0: float, tol: float) -> bool:
    """All asset martingales strongly orthogonal to the density at the
    boundary tolerance level: prices are martingales for every choice of
    risk tolerances."""
    tree = s.tree
    z0 = martingale_from_terminal(tree, gamma_bar_0 - aggregate_endowment(s))
    for j in range(s.d1):
        if np.max(np.abs(delta_bracket_all(tree, s.m_fin[:, j], z0))) > tol:
            return False
    for j in range(s.d2):
        mj = martingale_from_terminal(tree, s.dividends[:, j])
        if np.max(np.abs(delta_bracket_all(tree, mj, z0))) > tol:
            return False
    return True


def solve_linear_mv(s: Scenario, tol: float = DEFAULT_TOL) -> MvEquilibriumReport:
    """Construct and cross-check the linear mean-variance equilibrium."""
    gamma_bar, gamma_bar_0, exists = gamma_bar_fixed_point(s, tol)
    report = MvEquilibriumReport(
        gamma_bar=gamma_bar, gamma_bar_0=gamma_bar_0, exists=exists
    )
    if not exists:
        return report

    tree = s.tree
    xi_bar = aggregate_endowment(s)
    h_bar = gamma_bar - xi_bar
    prices = construct_prices(
        tree, s.s0_fin, s.m_fin, s.dividends, h_bar, tol, degenerate=False
    )
    report.prices = prices
    report.trivial_regime = _is_trivial_regime(s, gamma_bar_0, tol)

    lams = _lambdas(s)
    _, ell = pure_investment(tree, prices, tol)
    report.ell = ell
    total = np.zeros((tree.n_nodes, s.d))
    for k, lam in enumerate(lams):
        y_k, theta = optimal_mv_strategy(s, prices, k, tol)
        ex = solve_exmvh(tree, prices, total_endowment(s, k), tol)
        report.c_k.append(float(ex.c))
        report.eps2_k.append(float(ex.sq_error))
        report.y_k.append(y_k)
        report.strategies.append(theta)
        total += theta

    fp = verify_fixed_point(s, prices, gamma_bar, tol)
    report.fp_residual = fp["fp_residual"]
    report.identity_residual = fp["identity_residual"]

    supply = stoch_integral(tree, _constant_strategy(tree, s.eta_bar()), prices)
    report.clearing_residual = float(
        np.max(np.abs(stoch_integral(tree, total, prices) - supply))
    )
    return report


def agent_frontier(
    s: Scenario, prices, k: int, tol: float = DEFAULT_TOL
) -> FrontierData:
    """Closed-form efficient frontier of agent ``k`` under the given
    prices; requires uniqueness of value processes."""
    tree = s.tree
    if not uniqueness_of_values(tree, prices, tol):
        raise ValueError("frontier requires uniqueness of value processes")
    _, ell = pure_investment(tree, prices, tol)
    ex = solve_exmvh(tree, prices, total_endowment(s, k), tol)
    return FrontierData(ell=ell, c_k=float(ex.c), eps2_k=float(ex.sq_error))


def optimal_mv_strategy(
    s: Scenario, prices, k: int, tol: float = DEFAULT_TOL
) -> tuple[float, np.ndarray]:
    """Optimal strategy lam_k/ell units of the pure-investment hedge on
    top of holding the endowment and hedging the income."""
    tree = s.tree
    if not uniqueness_of_values(tree, prices, tol):
        raise ValueError("optimal strategy requires uniqueness of value processes")
    lam = s.agents[k].preference.lam
    theta1, ell = pure_investment(tree, prices, tol)
    ex = solve_exmvh(tree, prices, total_endowment(s, k), tol)
    y_k = lam / ell
    theta = y_k * theta1 + _constant_strategy(tree, _full_eta(s, k)) - ex.theta
    return y_k, theta


def mv_efficiency_check(
    s: Scenario, prices, theta, k: int, tol: float = DEFAULT_TOL
) -> bool:
    """Decide whether ``theta`` is mean-variance efficient for agent ``k``:
    its centred part must be a nonnegative multiple of the pure-investment
    hedge at the gains-path level, and its mean/stdev must sit on the
    frontier."""
    tree = s.tree
    if not uniqueness_of_values(tree, prices, tol):
        raise ValueError("efficiency check requires uniqueness of value processes")
    prices = np.asarray(prices, dtype=float).reshape(tree.n_nodes, s.d)
    theta1, ell = pure_investment(tree, prices, tol)
    ex = solve_exmvh(tree, prices, total_endowment(s, k), tol)

    centred = theta - _constant_strategy(tree, _full_eta(s, k)) + ex.theta
    g_centred = stoch_integral(tree, centred, prices)
    g_one = stoch_integral(tree, theta1, prices)
    denom = float(tree.leaf_probs @ g_one[tree.leaves] ** 2)
    if denom <= tol:
        y = 0.0
    else:
        y = float(tree.leaf_probs @ (g_centred[tree.leaves] * g_one[tree.leaves])) / denom
    if y < -tol:
        return False
    y = max(y, 0.0)
    if np.max(np.abs(g_centred - y * g_one)) > tol:
        return False

    front = FrontierData(ell=ell, c_k=float(ex.c), eps2_k=float(ex.sq_error))
    net = theta - _constant_strategy(tree, _full_eta(s, k))
    v = stoch_integral(tree, net, prices)[tree.leaves] + total_endowment(s, k)
    mean_v = float(tree.leaf_probs @ v)
    var_v = float(tree.leaf_probs @ (v - mean_v) ** 2)
    return (
        abs(mean_v - front.mean(y)) <= tol
        and abs(var_v - (front.eps2_k + ell * (1.0 - ell) * y**2)) <= tol
    )


def verify_fixed_point(
    s: Scenario, prices, gamma_bar: float, tol: float = DEFAULT_TOL
) -> dict:
    """Residuals of the fixed-point equation and of the structural
    identity linking the pure-investment error, the aggregate hedging
    constants and the mean aggregate endowment."""
    tree = s.tree
    lams = _lambdas(s)
    _, ell = pure_investment(tree, prices, tol)
    cs = [
        float(solve_exmvh(tree, prices, total_endowment(s, k), tol).c)
        for k in range(len(s.agents))
    ]
    fp = abs(gamma_bar - sum(c + lam / ell for c, lam in zip(cs, lams)))
    mean_xi = float(tree.leaf_probs @ aggregate_endowment(s))
    ident = abs((gamma_bar - mean_xi) - (gamma_bar - sum(cs)) * ell)
    return {"fp_residual": float(fp), "identity_residual": float(ident)}
