import math

import numpy as np
import pytest

from entdist import linalg, states
from entdist.states import StateValidationError
from conftest import loop_partial_transpose


def test_validate_accepts_maximally_mixed():
    s = states.validate(np.eye(4) / 4, (2, 2))
    assert s.dims == (2, 2)
    assert abs(np.trace(s.matrix).real - 1.0) < 1e-15


def test_validate_rejects_negative_eigenvalue():
    with pytest.raises(StateValidationError):
        states.validate(np.diag([0.6, 0.5, -0.1, 0.0]), (2, 2))


def test_validate_renormalizes_tiny_trace_drift():
    m = np.eye(4) / 4 * (1.0 + 1e-12)
    s = states.validate(m, (2, 2))
    assert abs(np.trace(s.matrix).real - 1.0) < 1e-15


def test_validate_rejects_bad_shapes_and_nonhermitian():
    with pytest.raises(StateValidationError):
        states.validate(np.eye(3) / 3, (2, 2))
    m = np.eye(4) / 4
    m[0, 1] = 0.5
    with pytest.raises(StateValidationError):
        states.validate(m, (2, 2))


def test_is_ppt_classifications():
    assert not states.is_ppt(states.bell_state())
    assert abs(states.ppt_min_eigenvalue(states.bell_state()) + 0.5) < 1e-12
    prod = states.product_of_marginals(states.random_density((2, 2), seed=4))
    assert states.is_ppt(prod)
    assert states.is_ppt(states.example4_state(0.0))


def test_is_ppt_cross_check_on_2x3(rng):
    for _ in range(20):
        s = states.random_density((2, 3), seed=int(rng.integers(2**31)))
        oracle = np.linalg.eigvalsh(loop_partial_transpose(s.matrix, (2, 3)))[0] >= -1e-10
        assert states.is_ppt(s) == oracle


def test_example4_state_definition():
    assert np.max(np.abs(states.example4_state(0.0).matrix - np.eye(4) / 4)) < 1e-15
    pure = states.example4_state(1.0)
    vals = np.linalg.eigvalsh(pure.matrix)
    assert np.allclose(vals, [0.0, 0.0, 0.0, 1.0], atol=1e-12)
    # amplitudes (1, 1+i, 1-i, 0)/sqrt(5) entry by entry
    v = np.array([1.0, 1.0 + 1.0j, 1.0 - 1.0j, 0.0]) / math.sqrt(5.0)
    assert np.max(np.abs(pure.matrix - np.outer(v, v.conj()))) < 1e-15
    with pytest.raises(StateValidationError):
        states.example4_state(1.5)


def test_example4_ppt_threshold_is_a_root():
    p_star = states.example4_ppt_threshold()
    assert 0.0 < p_star < 1.0
    assert abs(states.ppt_min_eigenvalue(states.example4_state(p_star))) < 1e-12
    assert states.ppt_min_eigenvalue(states.example4_state(p_star - 1e-3)) > 0
    assert states.ppt_min_eigenvalue(states.example4_state(p_star + 1e-3)) < 0


def test_product_of_marginals():
    assert np.max(np.abs(states.product_of_marginals(states.bell_state()).matrix - np.eye(4) / 4)) < 1e-12
    for seed in (1, 2, 3):
        s = states.random_density((2, 3), seed=seed)
        prod = states.product_of_marginals(s)
        assert np.max(np.abs(prod.marginal("A") - s.marginal("A"))) < 1e-12
        assert np.max(np.abs(prod.marginal("B") - s.marginal("B"))) < 1e-12
        assert states.is_ppt(prod)


def test_random_density_is_seeded_and_respects_rank():
    a = states.random_density((2, 2), seed=9)
    b = states.random_density((2, 2), seed=9)
    assert np.array_equal(a.matrix, b.matrix)
    low = states.random_density((2, 2), rank=1, seed=9)
    assert np.sum(np.linalg.eigvalsh(low.matrix) > 1e-12) == 1


def test_random_instrument_completeness(rng):
    for _ in range(10):
        instr = states.random_instrument(2, int(rng.integers(1, 4)), seed=int(rng.integers(2**31)))
        assert instr.completeness_residual() < 1e-10


def test_apply_instrument_identity():
    s = states.random_density((2, 2), seed=13)
    instr = states.LocalInstrument((np.eye(2, dtype=complex),))
    out = states.apply_instrument(s, instr)
    assert len(out) == 1
    p, post = out[0]
    assert abs(p - 1.0) < 1e-12
    assert np.max(np.abs(post.matrix - s.matrix)) < 1e-12


def test_apply_instrument_projective_on_bell():
    bell = states.bell_state()
    proj = states.LocalInstrument(
        (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex))
    )
    out = states.apply_instrument(bell, proj)
    assert len(out) == 2
    for i, (p, post) in enumerate(out):
        assert abs(p - 0.5) < 1e-12
        e = np.zeros(4)
        e[i * 3] = 1.0  # |00> and |11>
        assert np.max(np.abs(post.matrix - np.outer(e, e))) < 1e-12
        assert states.is_ppt(post)


def test_apply_instrument_probabilities_depend_only_on_marginal(rng):
    sigma = states.random_density((2, 2), seed=31)
    rho = states.product_of_marginals(sigma)  # shares sigma's marginals
    instr = states.random_instrument(2, 3, seed=7)
    p_sigma = [p for p, _ in states.apply_instrument(sigma, instr)]
    p_rho = [p for p, _ in states.apply_instrument(rho, instr)]
    assert np.allclose(p_sigma, p_rho, atol=1e-12)


def test_apply_instrument_outcome_probabilities_sum_to_one(rng):
    for _ in range(10):
        s = states.random_density((2, 3), seed=int(rng.integers(2**31)))
        instr = states.random_instrument(2, int(rng.integers(2, 5)), seed=int(rng.integers(2**31)))
        out = states.apply_instrument(s, instr)
        assert abs(sum(p for p, _ in out) - 1.0) < 1e-10
        for _, post in out:
            assert isinstance(post, states.DensityMatrix)


def test_swap_subsystems():
    s = states.random_density((2, 3), seed=17)
    sw = states.swap_subsystems(s)
    assert sw.dims == (3, 2)
    assert np.max(np.abs(sw.marginal("A") - s.marginal("B"))) < 1e-12
    back = states.swap_subsystems(sw)
    assert np.max(np.abs(back.matrix - s.matrix)) < 1e-14


def test_feasible_set_interior_point_membership():
    s = states.random_density((2, 2), seed=23)
    fs = states.FeasibleSetSpec(s)
    rep = states.feasibility_report(fs.interior_point().matrix, fs)
    assert rep["ppt_min_eig"] > -1e-12
    assert rep["marginal_dev_a"] < 1e-12 and rep["marginal_dev_b"] < 1e-12


def test_compress_to_marginal_support_roundtrip():
    v = np.zeros(4)
    v[0] = 1.0
    s = states.validate(np.outer(v, v), (2, 2))
    comp, embed = states.compress_to_marginal_support(s)
    assert comp.dims == (1, 1)
    assert np.max(np.abs(embed(comp.matrix) - s.matrix)) < 1e-14
    full = states.random_density((2, 2), seed=2)
    comp, embed = states.compress_to_marginal_support(full)
    assert comp.dims == (2, 2)
    assert np.array_equal(embed(comp.matrix), comp.matrix)


def test_state_json_round_trip(tmp_path):
    s = states.random_density((2, 3), seed=41)
    path = tmp_path / "state.json"
    states.write_state_json(str(path), s)
    back = states.read_state_json(str(path))
    assert back.dims == s.dims
    assert np.max(np.abs(back.matrix - s.matrix)) < 1e-15
    # 17 significant digits survive a second round trip bitwise
    states.write_state_json(str(path), back)
    again = states.read_state_json(str(path))
    assert np.array_equal(again.matrix, back.matrix)


def test_read_state_json_rejects_malformed(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dims": [2, 2], "re": [[1]]}')
    with pytest.raises(StateValidationError):
        states.read_state_json(str(p))
