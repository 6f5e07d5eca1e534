import numpy as np
import pytest

from mveq import gamma_bar_fixed_point, validate_scenario
from mveq.generate import generate_random_scenario


def test_same_seed_same_scenario():
    a = generate_random_scenario(1)
    b = generate_random_scenario(1)
    assert a.tree.children == b.tree.children
    np.testing.assert_array_equal(a.tree.leaf_probs, b.tree.leaf_probs)
    np.testing.assert_array_equal(a.m_fin, b.m_fin)
    np.testing.assert_array_equal(a.dividends, b.dividends)
    for x, y in zip(a.agents, b.agents):
        np.testing.assert_array_equal(x.xi_n, y.xi_n)
        assert x.preference == y.preference


def test_generated_scenarios_validate():
    for seed in range(20):
        kind = "quadratic" if seed % 2 == 0 else "linear_mv"
        s = generate_random_scenario(seed, horizon=2, branching=3, d1=1, d2=1,
                                     n_agents=2, preference_kind=kind)
        assert validate_scenario(s) == []


def test_linear_sampling_hits_both_existence_branches():
    hits = {True: 0, False: 0}
    for seed in range(100):
        s = generate_random_scenario(seed, preference_kind="linear_mv")
        _, _, exists = gamma_bar_fixed_point(s)
        hits[exists] += 1
    assert hits[True] >= 1 and hits[False] >= 1


def test_bounds_are_enforced():
    with pytest.raises(ValueError):
        generate_random_scenario(0, horizon=7)
    with pytest.raises(ValueError):
        generate_random_scenario(0, branching=5)
    with pytest.raises(ValueError):
        generate_random_scenario(0, d1=3, d2=2)
    with pytest.raises(ValueError):
        generate_random_scenario(0, n_agents=6)
    with pytest.raises(ValueError):
        generate_random_scenario(0, preference_kind="exotic")
