import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signfem.errors import DomainError, NoAdmissibleRatio, NoCriticalMesh
from signfem.spectral import REFERENCE_HCRIT, REFERENCE_RY, MeshConfig, PhysicalConfig, s_crit
from signfem.stability import (
    SEMI_UNSTABLE_NOTE,
    SMALL_MESH_NOTE,
    ConditionId,
    Regime,
    classify_bounded,
    classify_full,
    classify_semi,
    critical_meshes,
    min_abs_diagonal,
    solve_ry_for_rational_s,
)

FLIPPED_RY = 4 / math.sqrt(11)
REFERENCE = PhysicalConfig(-1.0, 1.2)


def test_classify_semi_examples():
    v = classify_semi(-1.2, 0.5)
    assert (v.regime, v.condition_id) == (Regime.Unstable, ConditionId.AssR_b)
    assert v.critical_t == pytest.approx(math.sqrt(8.25))
    v = classify_semi(-1.2, 2.0)
    assert (v.regime, v.condition_id) == (Regime.Stable, ConditionId.AssR_vv_b)
    assert v.min_factor == pytest.approx(0.1)
    assert v.bound_for(-2.0) == pytest.approx(5.0)
    assert classify_semi(-1.0, 3.0).regime is Regime.Boundary
    assert classify_semi(-0.5, 2.0).regime is Regime.Boundary
    with pytest.raises(DomainError):
        classify_semi(0.5, 1.0)


def test_classify_full_examples():
    v = classify_full(-1.2, 0.5, REFERENCE_RY)
    assert (v.regime, v.condition_id) == (Regime.Unstable, ConditionId.AssRy_b)
    assert v.critical_s == pytest.approx(math.pi / 2, abs=1e-12)
    v = classify_full(-1.2, 2.0, FLIPPED_RY)
    assert (v.regime, v.condition_id) == (Regime.Stable, ConditionId.AssRy_vv_b)
    assert v.min_factor == pytest.approx(0.1)
    v = classify_full(-0.9, 1.0, 1.0)
    assert (v.regime, v.condition_id) == (Regime.Stable, ConditionId.AssRy_vv_a)


def test_full_stable_but_semi_unstable_note():
    # r|kappa| < 1 with |kappa| > 1 but a large ry restores stability
    v = classify_full(-1.2, 0.5, 2.0)
    assert v.regime is Regime.Stable
    assert SEMI_UNSTABLE_NOTE in v.notes


def test_classify_bounded_examples():
    v = classify_bounded(-1.2, 2.0, FLIPPED_RY, 0.05)
    assert (v.regime, v.condition_id) == (Regime.Stable, ConditionId.AssRyL_vv_b)
    assert SMALL_MESH_NOTE in v.notes
    assert v.epsilon_slack == 0.05
    v = classify_bounded(-1.2, 0.5, REFERENCE_RY, 0.05)
    assert (v.regime, v.condition_id) == (Regime.Unstable, ConditionId.AssRy_b)
    assert classify_bounded(-0.99, 1.005, None, 0.05).regime is Regime.Boundary
    assert classify_bounded(-0.5, 1.0, None, 0.05).condition_id is ConditionId.AssRL_vv_a
    with pytest.raises(DomainError):
        classify_bounded(-1.2, 2.0, None, 1.0)


def test_bounded_bound_tends_to_unbounded_bound():
    full = classify_full(-1.2, 2.0, FLIPPED_RY)
    bounded = classify_bounded(-1.2, 2.0, FLIPPED_RY, 1e-9)
    assert bounded.inverse_norm_bound == pytest.approx(full.inverse_norm_bound, rel=1e-6)


def test_swap_duality_flips_regime():
    r, ry = 0.5, REFERENCE_RY
    assert classify_full(-1.2, r, ry).regime is Regime.Unstable
    assert classify_full(-1.2, 1 / r, ry / r).regime is Regime.Stable


@settings(max_examples=200, deadline=None)
@given(st.floats(-3.0, -0.05), st.floats(0.05, 5.0))
def test_small_ry_agrees_with_semi(kappa, r):
    semi = classify_semi(kappa, r)
    full = classify_full(kappa, r, 1e-7)
    if semi.regime is not Regime.Boundary and abs(r * r * kappa * kappa - 1) > 1e-6:
        assert semi.regime is full.regime


def test_stable_bound_shape_for_unit_ratios():
    kappas = np.linspace(-1 + 1e-3, -1e-3, 200)
    bounds = np.array([classify_full(k, 1.0, 1.0).inverse_norm_bound for k in kappas])
    assert np.all(bounds > 0)
    # with r = ry = 1 the min-factor is min(|kappa|, |1 + kappa|/2)
    expected = 1.0 / np.minimum(np.abs(kappas), np.abs(1 + kappas) / 2)
    assert bounds == pytest.approx(expected, rel=1e-12)
    # where |1 + kappa|/2 binds, the bound shrinks as kappa moves away from -1
    left = bounds[kappas <= -1 / 3]
    assert np.all(np.diff(left) <= 1e-12)


def test_critical_meshes():
    pairs = critical_meshes(-1.2, 0.5, REFERENCE_RY, 3)
    assert [m for m, _ in pairs] == [1, 2, 3]
    assert [h for _, h in pairs] == pytest.approx([2.60487, 1.30244, 0.86829], abs=1e-5)
    s = s_crit(-1.2, 0.5, REFERENCE_RY)
    for m, h in pairs:
        assert h * REFERENCE_RY * m == pytest.approx(s, rel=1e-15)
    semi = critical_meshes(-1.2, 0.5, None, 2)
    assert semi[1][1] == pytest.approx(math.sqrt(8.25) / 2)
    with pytest.raises(NoCriticalMesh):
        critical_meshes(-1.2, 2.0, FLIPPED_RY, 3)


def test_solve_ry_for_rational_s():
    assert solve_ry_for_rational_s(-1.2, 0.5, 1, 2) == pytest.approx(2 / math.sqrt(11), abs=1e-12)
    ry = solve_ry_for_rational_s(-1.2, 0.5, 1, 3)
    assert ry == pytest.approx(math.sqrt(0.32 / 2.2), rel=1e-12)
    assert s_crit(-1.2, 0.5, ry) == pytest.approx(math.pi / 3, abs=1e-12)
    with pytest.raises(NoAdmissibleRatio):
        solve_ry_for_rational_s(-1.2, 2.0, 1, 2)
    with pytest.raises(DomainError):
        solve_ry_for_rational_s(-1.2, 0.5, 2, 2)


def test_min_abs_diagonal():
    m_star, value = min_abs_diagonal(REFERENCE, MeshConfig.create(REFERENCE_HCRIT, 0.5, REFERENCE_RY))
    assert m_star == 1 and value < 1e-8
    near = MeshConfig.create(REFERENCE_HCRIT / 1.5, 0.5, REFERENCE_RY)
    assert min_abs_diagonal(REFERENCE, near)[1] >= 0.01
    flipped = MeshConfig.create(REFERENCE_HCRIT / 2, 2.0, FLIPPED_RY)
    assert min_abs_diagonal(REFERENCE, flipped)[1] >= 0.1 - 1e-9
