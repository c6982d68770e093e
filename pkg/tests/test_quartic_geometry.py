import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quartic_synapse.errors import DuplicateZero, NonNegativityViolation
from quartic_synapse.quartic_geometry import (BranchStability, FoldKind,
                                              QuarticSpec,
                                              fast_branch_stability,
                                              fold_points, gamma_deriv,
                                              gamma_eval, gamma_second_deriv,
                                              gamma_zeros, tc_point)

Q_FIG3 = QuarticSpec(Q=0.05, c=(-3.0,) * 4, r=(6.4, 4.0, 2.0, 0.0))
Q_FIG6 = QuarticSpec(Q=0.05, c=(-3.0,) * 4, r=(5.0, 4.0, 2.0, 0.0))


def test_zeros_fig3():
    assert gamma_zeros(Q_FIG3) == pytest.approx([0.0, 2 / 3, 4 / 3, 32 / 15],
                                                abs=1e-14)


def test_zeros_fig6():
    assert gamma_zeros(Q_FIG6) == pytest.approx([0.0, 2 / 3, 4 / 3, 5 / 3],
                                                abs=1e-14)


def test_duplicate_zero_rejected():
    with pytest.raises(DuplicateZero):
        QuarticSpec(Q=0.05, c=(-3.0,) * 4, r=(4.0, 4.0, 2.0, 0.0))


def test_negative_zero_rejected():
    with pytest.raises(NonNegativityViolation):
        QuarticSpec(Q=0.05, c=(-3.0,) * 4, r=(6.4, 4.0, 2.0, -1.0))


def test_gamma0_is_product_of_factors():
    assert Q_FIG3.gamma0 == pytest.approx(0.05 * 6.4 * 4.0 * 2.0 * 0.0)
    q = QuarticSpec(Q=0.05, c=(-3.0,) * 4, r=(6.4, 4.0, 2.0, 0.3))
    assert q.gamma0 == pytest.approx(0.05 * 6.4 * 4.0 * 2.0 * 0.3)
    assert gamma_eval(q, 0.0) == pytest.approx(q.gamma0)


def test_fold_values_fig3():
    p2s = [f.p2 for f in fold_points(Q_FIG3)]
    assert p2s == pytest.approx([0.256461, 1.005947, 1.837592], abs=1e-5)


def test_fold_values_fig6():
    p2s = [f.p2 for f in fold_points(Q_FIG6)]
    assert p2s == pytest.approx([0.248750, 0.976512, 1.524738], abs=1e-5)


def test_fold_pattern_and_residual():
    for q in (Q_FIG3, Q_FIG6):
        folds = fold_points(q)
        assert [f.kind for f in folds] == [FoldKind.LOCAL_MIN,
                                           FoldKind.LOCAL_MAX,
                                           FoldKind.LOCAL_MIN]
        for f in folds:
            assert abs(gamma_deriv(q, f.p2)) <= 1e-10
            assert f.p1 == pytest.approx(gamma_eval(q, f.p2))


def test_folds_interlace_zeros():
    zeros = gamma_zeros(Q_FIG3)
    folds = fold_points(Q_FIG3)
    for f, lo, hi in zip(folds, zeros, zeros[1:]):
        assert lo < f.p2 < hi


def test_tc_point_flag():
    g0, p2, ok = tc_point(Q_FIG3, -1.0, -2.2)
    assert (g0, p2) == (0.0, 0.0)
    assert ok            # Gamma(0)=0 >= -2.2
    _, _, bad = tc_point(Q_FIG3, -1.0, 0.5)
    assert not bad       # axis switch left of U


def test_branch_stability_alternates():
    folds = fold_points(Q_FIG3)
    mids = [0.5 * (0 + folds[0].p2),
            0.5 * (folds[0].p2 + folds[1].p2),
            0.5 * (folds[1].p2 + folds[2].p2),
            0.5 * (folds[2].p2 + gamma_zeros(Q_FIG3)[-1])]
    kinds = [fast_branch_stability(Q_FIG3, m) for m in mids]
    assert kinds == [BranchStability.REPELLING, BranchStability.ATTRACTING,
                     BranchStability.REPELLING, BranchStability.ATTRACTING]
    assert fast_branch_stability(Q_FIG3, folds[0].p2) is BranchStability.FOLD


@settings(max_examples=100, deadline=None)
@given(p2=st.floats(min_value=-1.0, max_value=3.0),
       r1=st.floats(min_value=4.5, max_value=7.0))
def test_derivative_matches_finite_differences(p2, r1):
    q = QuarticSpec(Q=0.05, c=(-3.0,) * 4, r=(r1, 4.0, 2.0, 0.0))
    h = 1e-6 * max(1.0, abs(p2))
    fd = (gamma_eval(q, p2 + h) - gamma_eval(q, p2 - h)) / (2 * h)
    scale = max(1.0, abs(fd))
    assert gamma_deriv(q, p2) == pytest.approx(fd, abs=1e-5 * scale)


@settings(max_examples=50, deadline=None)
@given(p2=st.floats(min_value=-1.0, max_value=3.0))
def test_second_derivative_matches_finite_differences(p2):
    h = 1e-5 * max(1.0, abs(p2))
    fd = (gamma_deriv(Q_FIG3, p2 + h) - gamma_deriv(Q_FIG3, p2 - h)) / (2 * h)
    scale = max(1.0, abs(fd))
    assert gamma_second_deriv(Q_FIG3, p2) == pytest.approx(fd, abs=1e-4 * scale)


def test_vectorized_evaluation_matches_scalar():
    grid = np.linspace(-0.5, 2.5, 17)
    vec = gamma_eval(Q_FIG3, grid)
    assert vec == pytest.approx([gamma_eval(Q_FIG3, float(x)) for x in grid])
