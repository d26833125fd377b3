import math

import pytest

from satmc.cnf import Formula, Residual, apply_assignment, generate_random_3cnf
from satmc.features import FEATURE_NAMES, extract_features
from satmc.rng import SplitMix64

F0 = Formula(4, ((1, 2, 4), (-2, 3, -4), (1, -3, -4)))


def test_example_formula_hand_counts():
    fv = extract_features(F0)
    assert fv.clause_var_ratio == pytest.approx(0.75)
    assert fv.frac_binary == 0.0
    assert fv.frac_horn == pytest.approx(2 / 3)
    # balances: x1 -> 1 (2 pos, 0 neg), x2 -> 0, x3 -> 0, x4 -> 1/3 (1 pos, 2 neg)
    assert fv.posneg_var_max == pytest.approx(1.0)
    assert fv.posneg_var_min == pytest.approx(0.0)
    assert fv.posneg_var_mean == pytest.approx(1 / 3)
    assert fv.posneg_var_std == pytest.approx(math.sqrt(1 / 6))
    assert fv.posneg_var_variation == pytest.approx(3 * math.sqrt(1 / 6))
    # the LP optimum is the integral all-ones point
    assert fv.lpslack_mean == pytest.approx(0.0, abs=1e-9)
    assert fv.lpslack_coeff_variation == pytest.approx(0.0, abs=1e-9)


def test_residual_after_fixing_is_all_binary():
    out = apply_assignment(F0, {4: True})
    assert isinstance(out, Residual)
    fv = extract_features(out.formula)
    assert fv.frac_binary == 1.0
    assert fv.clause_var_ratio == pytest.approx(2 / 3)


def test_zero_clause_sentinel():
    fv = extract_features(Formula(3, ()))
    assert fv.as_tuple() == (0.0,) * 10


def test_zero_variables_rejected():
    with pytest.raises(ValueError):
        extract_features(Formula(0, ()))


def test_fresh_3cnf_has_no_binary_clauses():
    f = generate_random_3cnf(40, 170, seed=4)
    assert extract_features(f).frac_binary == 0.0


def test_feature_order_and_names():
    assert FEATURE_NAMES[0] == "clause_var_ratio"
    assert FEATURE_NAMES[8] == "lpslack_mean"
    fv = extract_features(F0)
    assert fv.as_tuple()[0] == fv.clause_var_ratio
    assert len(fv.as_tuple()) == 10


def test_invariance_under_renaming_and_reordering():
    f = generate_random_3cnf(12, 50, seed=99)
    # reverse both the clause order and the variable naming
    renamed = Formula(12, tuple(
        tuple((13 - abs(l)) * (1 if l > 0 else -1) for l in clause)
        for clause in reversed(f.clauses)))
    a = extract_features(f).as_tuple()
    b = extract_features(renamed).as_tuple()
    assert a == pytest.approx(b, abs=1e-9)


def test_bounds_and_ordering_invariants():
    rng = SplitMix64(17)
    for i in range(25):
        nv = 8 + i % 14
        f = generate_random_3cnf(nv, int(4.3 * nv), seed=600 + i)
        fixing = {v: rng.coin() for v in rng.choose(list(range(1, nv + 1)), 3)}
        out = apply_assignment(f, fixing)
        g = out.formula if isinstance(out, Residual) else f
        fv = extract_features(g)
        assert 0.0 <= fv.frac_binary <= 1.0
        assert 0.0 <= fv.frac_horn <= 1.0
        assert 0.0 <= fv.posneg_var_min <= fv.posneg_var_mean <= fv.posneg_var_max <= 1.0
        assert fv.posneg_var_std >= 0.0
        assert fv.posneg_var_variation >= 0.0
        assert 0.0 <= fv.lpslack_mean <= 0.5
        assert fv.lpslack_coeff_variation >= 0.0
        assert all(math.isfinite(x) for x in fv.as_tuple())


def test_variables_absent_from_clauses_are_ignored():
    # 5 declared variables, only 3 occur: statistics run over the occurring ones
    f = Formula(5, ((1, 2, 3), (-1, -2, -3)))
    fv = extract_features(f)
    assert fv.clause_var_ratio == pytest.approx(2 / 3)
    assert fv.posneg_var_max == pytest.approx(0.0)  # each var once per sign
