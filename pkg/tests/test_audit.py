from fractions import Fraction

import pytest

from smbmm.audit import (
    assert_nonsingular,
    certify_server_privacy,
    enumerate_leakage,
    ssmm_noise_grid,
)
from smbmm.batch import SmbmmParams
from smbmm.errors import (
    EnumerationBudgetExceeded,
    ParamError,
    SingularNoiseMatrix,
)
from smbmm.field import FieldConfig
from smbmm.ssmm import SsmmParams, noise_exponents


def test_certify_ssmm_exhaustive_small():
    # N=6, X_A=2: all 15 subsets certified
    params = SsmmParams.make(1, 1, 1, 2, 1, 6, 101, variant="a")
    cert = certify_server_privacy(params, "a")
    assert cert.subsets_checked == 15
    assert cert.protocol == "ssmm" and cert.security_level == 2
    cert_b = certify_server_privacy(params, "b")
    assert cert_b.subsets_checked == 6


def test_certify_x1_reduces_to_nonzero_column():
    params = SsmmParams.make(2, 1, 2, 1, 1, 12, 101, variant="a")
    cert = certify_server_privacy(params, "a")
    assert cert.subsets_checked == 12


def test_certify_smbmm_both_sides_and_groups():
    params = SmbmmParams.make(2, 1, 2, 2, 2, 1, 2, 19, 101, variant="a")
    for side in ("a", "b"):
        cert = certify_server_privacy(params, side)
        assert cert.groups_checked == 1
        assert cert.subsets_checked == 19 * 18 // 2
    # multi-group certification with sampled subsets
    params = SmbmmParams.make(2, 1, 2, 2, 2, 2, 2, 29, 101, variant="a")
    for side in ("a", "b"):
        cert = certify_server_privacy(params, side, max_subsets=40, seed=5)
        assert cert.groups_checked == 2
        assert cert.subsets_checked == 40


def test_certify_worked_example_parameters():
    # the staggered noise exponents (15,16 on side a; 6,7,8 on side b)
    # give row-scaled Vandermonde matrices for every sampled subset
    params = SsmmParams.make(2, 3, 2, 2, 3, 30, 257, variant="a")
    for side, x in (("a", 2), ("b", 3)):
        cert = certify_server_privacy(params, side, max_subsets=50, seed=3)
        assert cert.subsets_checked == 50
        assert cert.security_level == x


def test_certify_sampled_subsets_for_large_n():
    params = SsmmParams.make(1, 1, 1, 2, 2, 30, 101, variant="a")
    with pytest.raises(ParamError):
        certify_server_privacy(params, "a")  # too many to exhaust
    cert = certify_server_privacy(params, "a", max_subsets=25, seed=1)
    assert cert.subsets_checked == 25
    assert all(len(s) == 2 for s in cert.subsets)


def test_adversarial_zero_point_breaks_masking():
    # alpha = 0 zeroes a whole noise row: exactly why nonzero points are
    # a precondition of the single-product scheme
    f = FieldConfig(101)
    exps = noise_exponents(2, 3, 2, 2, 3, "a", "a")
    grid = ssmm_noise_grid(f, [0, 5], exps)
    with pytest.raises(SingularNoiseMatrix):
        assert_nonsingular(f, grid, "alpha=0")


def test_leakage_ssmm_share_single_server():
    params = SsmmParams.make(1, 1, 1, 1, 1, 4, 5, variant="a")
    rep = enumerate_leakage("ssmm_share", params, side="a")
    assert rep.max_distance == Fraction(0)
    assert rep.cases == 5 * 5 * 4
    assert all(d == 0 for d in rep.distances.values())


def test_tiny_share_multiset_uniform():
    # with one noise block the share values sweep the whole field: for
    # every fixed scalar datum, {datum + z*alpha : z} is all of F_q
    q = 5
    for alpha in (1, 2, 3, 4):
        for a in range(q):
            views = sorted((a + z * alpha) % q for z in range(q))
            assert views == list(range(q))


def test_leakage_ssmm_share_two_colluders():
    params = SsmmParams.make(1, 1, 1, 2, 1, 4, 5, variant="a")
    rep = enumerate_leakage("ssmm_share", params, side="a")
    assert rep.max_distance == Fraction(0)
    assert rep.cases == 5 * 25 * 6


def test_leakage_ssmm_share_b_side():
    params = SsmmParams.make(1, 1, 1, 1, 2, 4, 7, variant="a")
    rep = enumerate_leakage("ssmm_share", params, side="b")
    assert rep.max_distance == Fraction(0)


def test_leakage_user_view_tiny():
    params = SmbmmParams.make(2, 1, 2, 1, 1, 1, 2, n_servers=0, q=5)
    rep = enumerate_leakage("smbmm_user_view", params, data_samples=3, seed=9)
    assert rep.max_distance == Fraction(0)
    # every masked stack coordinate was audited: K=16 minus 8 pinned
    assert len(rep.distances) == 8
    assert rep.cases == 8 * 5 * 5  # coords x datasets (3+zeros+ones) x masks


def test_leakage_user_view_single_coordinate_and_pinned_rejection():
    params = SmbmmParams.make(2, 1, 2, 1, 1, 1, 2, n_servers=0, q=5)
    from smbmm.batch import pinned_positions
    pinned = pinned_positions(params)
    masked = next(c for c in range(params.threshold) if c not in pinned)
    rep = enumerate_leakage("smbmm_user_view", params, coordinate=masked, seed=2)
    assert list(rep.distances) == [f"coordinate={masked}"]
    assert rep.max_distance == 0
    with pytest.raises(ParamError):
        enumerate_leakage("smbmm_user_view", params, coordinate=sorted(pinned)[0])


def test_leakage_protocol_params_type_guard():
    ssmm_params = SsmmParams.make(1, 1, 1, 1, 1, 4, 5, variant="a")
    batch_params = SmbmmParams.make(2, 1, 2, 1, 1, 1, 2, n_servers=0, q=5)
    with pytest.raises(ParamError):
        enumerate_leakage("ssmm_share", batch_params, side="a")
    with pytest.raises(ParamError):
        enumerate_leakage("smbmm_user_view", ssmm_params)
    with pytest.raises(ParamError):
        enumerate_leakage("nonsense", ssmm_params)


def test_leakage_budget_guard():
    params = SsmmParams.make(1, 1, 1, 2, 1, 4, 5, variant="a")
    with pytest.raises(EnumerationBudgetExceeded):
        enumerate_leakage("ssmm_share", params, side="a", budget=100)


def test_leakage_report_serialization():
    params = SsmmParams.make(1, 1, 1, 1, 1, 4, 5, variant="a")
    rep = enumerate_leakage("ssmm_share", params, side="a")
    blob = rep.to_json()
    assert '"max_distance": "0"' in blob
    assert "ssmm_share" in rep.to_text()


def test_user_view_masking_is_active():
    # resampling only the common randomness changes every masked solved
    # coordinate's value while the desired slots stay identical
    from smbmm.batch import (
        encode_smbmm, gen_common_randomness, pinned_positions,
        server_compute_smbmm, solve_response_stack,
    )
    from smbmm.matrix import random_matrix
    from smbmm.rng import Stream
    params = SmbmmParams.make(2, 1, 2, 1, 1, 1, 2, 16, 101)
    st = Stream(31)
    batch_a = [random_matrix(2, 1, params.field, st.derive(f"A{i}")) for i in range(2)]
    batch_b = [random_matrix(1, 2, params.field, st.derive(f"B{i}")) for i in range(2)]
    shares = encode_smbmm(batch_a, batch_b, params, noise_seed=1)
    stacks = []
    for cr_seed in (100, 200):
        cr = gen_common_randomness(params, cr_seed, (1, 1))
        responses = [server_compute_smbmm(s, cr, params) for s in shares]
        stacks.append(solve_response_stack(responses, params))
    pinned = pinned_positions(params)
    masked_changed = [
        pos for pos in range(params.threshold)
        if pos not in pinned and stacks[0][pos] != stacks[1][pos]
    ]
    assert masked_changed  # masking is active
    for pos in pinned:
        assert stacks[0][pos] == stacks[1][pos]
