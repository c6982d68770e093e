import dataclasses

import numpy as np
import pytest

from quartic_synapse.entry_exit import (exit_integral, exit_point,
                                        simulated_exit,
                                        upper_branch_accessible)
from quartic_synapse.errors import EntryOutOfRange, PoleInInterval

from conftest import make_params


@pytest.fixture(scope="module")
def p():
    return make_params(V=0.0)


def entry_grid(p, n=10, margin=0.05):
    lo = -p.b_tilde / p.a_tilde + margin
    hi = p.quartic.gamma0 - margin
    return np.linspace(lo, hi, n)


def test_methods_agree(p):
    for p10 in entry_grid(p):
        c = exit_point(p, float(p10), method="closed_form")
        q = exit_point(p, float(p10), method="quadrature")
        assert q.p11 == pytest.approx(c.p11, rel=1e-8)
        assert c.p11 > p.quartic.gamma0


def test_exit_balances_integral(p):
    for p10 in entry_grid(p, n=5):
        res = exit_point(p, float(p10))
        assert abs(exit_integral(p, res.p10, res.p11)) < 1e-10


def test_exit_strictly_decreasing(p):
    grid = entry_grid(p, n=20)
    exits = [exit_point(p, float(x)).p11 for x in grid]
    assert all(b < a for a, b in zip(exits, exits[1:]))


def test_entry_at_tc_is_fixed(p):
    g0 = p.quartic.gamma0
    res = exit_point(p, g0)
    assert res.p11 == g0


def test_entry_out_of_range(p):
    with pytest.raises(EntryOutOfRange):
        exit_point(p, p.quartic.gamma0 + 0.1)
    with pytest.raises(EntryOutOfRange):
        exit_point(p, -p.b_tilde / p.a_tilde - 0.1)


def test_pole_in_interval(p):
    # integrating across the pole at -b/a = -2.3 must be refused
    with pytest.raises(PoleInInterval):
        exit_integral(p, -2.5, 0.0)


def test_simulated_exit_matches_formula(p):
    p10 = -1.0
    formula = exit_point(p, p10).p11
    sim = simulated_exit(p, p10)
    assert abs(sim.p11 - formula) < 0.1


def test_simulated_discrepancy_shrinks_with_epsilon(p):
    p10 = -1.0
    formula = exit_point(p, p10).p11
    gaps = []
    for eps in (0.02, 0.01, 0.005):
        pe = dataclasses.replace(p, epsilon=eps)
        gaps.append(abs(simulated_exit(pe, p10).p11 - formula))
    assert gaps[0] > gaps[1] > gaps[2]


def test_upper_branch_accessibility(p):
    # deep entries exit far to the right, past the local-max fold
    assert upper_branch_accessible(p, -1.5)
