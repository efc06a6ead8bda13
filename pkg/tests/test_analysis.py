from fractions import Fraction

import pytest

from smbmm.analysis import (
    KNOWN_BILINEAR_R,
    baseline_threshold,
    chen_interference_dimensions,
    chen_randomness,
    compare_eep_rows,
    compare_smbmm_rows,
    improvement_regime,
    interference_decomposition,
    interference_dimensions,
    k_degraded_arbitrary,
    k_degraded_row_col,
    k_degraded_smbmm,
    randomness_regime,
    render_csv,
    render_markdown,
)
from smbmm.errors import DegradedOnly, DomainError, MissingR
from smbmm.rng import Stream


def test_a3s_worked_value():
    assert baseline_threshold("a3s", m=2, n=2, x=1) == 8


def test_uscsa_values():
    assert baseline_threshold("uscsa0", m=2, n=3, x=2) == 6 + 2 + 4 - 1
    assert baseline_threshold("uscsa1", m=2, n=3, x=2) == 6 + 3 + 4 - 1


def test_gasp_piecewise_cases():
    assert baseline_threshold("gasp", m=3, n=2, x=1) == 6 + 3 + 2
    assert baseline_threshold("gasp", m=4, n=3, x=2) == 12 + 4 + 3 + 4 + 2 - 3
    assert baseline_threshold("gasp", m=3, n=2, x=5) == (3 + 5) * 3 - 1
    # swap rule for m < n
    assert baseline_threshold("gasp", m=2, n=3, x=1) == baseline_threshold(
        "gasp", m=3, n=2, x=1)
    with pytest.raises(DomainError):
        baseline_threshold("gasp", m=4, n=2, x=3)  # n <= X < m gap


def test_sgpd_piecewise_cases():
    # exact-division branch: p < m, X divisible by p
    assert baseline_threshold("sgpd", m=3, p=2, n=2, x=2) == (3 + 1) * 2 * 3 + 2 - 1
    # fractional branch
    assert baseline_threshold("sgpd", m=3, p=2, n=2, x=3) == (3 + 2) * 2 * 3 - 2 * 2 + 6 - 1
    # p >= m branch
    c2 = 1  # ceil(2 / min(2,3)) = 1
    assert baseline_threshold("sgpd", m=2, p=3, n=3, x=2) == 2 * (9 + 3 * c2 - c2) + 6 + 4 - 1


def test_ps_and_dftp_values():
    assert baseline_threshold("ps", m=2, p=3, n=2, x=2) == 24 + 4 - 1
    assert baseline_threshold("dftp", m=2, p=3, n=2, x=2) == 12 + 2 * 4 * 2


def test_eep_requires_r():
    assert baseline_threshold("eep", m=2, p=2, n=2, x=1) == 15  # built-in R=7
    assert baseline_threshold("eep", m=2, p=3, n=2, x=1, r=11) == 23
    with pytest.raises(MissingR):
        baseline_threshold("eep", m=2, p=3, n=2, x=1)


def test_eep_vs_ours_worked_row():
    # square 2x2x2 partition: 13+2X vs 3X+11, improvement exactly when X < 2
    for x in (1, 2, 3, 4):
        k_eep = baseline_threshold("eep", m=2, p=2, n=2, x=x)
        k_ours = k_degraded_arbitrary(2, 2, 2, x)
        assert k_eep == 13 + 2 * x
        assert k_ours == 3 * x + 11
        assert (k_ours < k_eep) == (x < 2)


def test_known_bilinear_rows():
    # the published R values and the resulting comparisons
    expect = {
        (2, 2, 2): (7, lambda x: 3 * x + 11),
        (3, 3, 3): (23, lambda x: 4 * x + 35),
        (5, 5, 5): (98, lambda x: 6 * x + 149),
        (7, 7, 7): (250, lambda x: 8 * x + 391),
        (9, 9, 9): (511, lambda x: 10 * x + 809),
    }
    for (m, p, n), (r, ours) in expect.items():
        assert KNOWN_BILINEAR_R[(m, p, n)] == r
        for x in (1, 3):
            assert baseline_threshold("eep", m=m, p=p, n=n, x=x) == 2 * r + 2 * x - 1
            assert k_degraded_arbitrary(m, p, n, x) == ours(x)


def test_chen_worked_value_vs_ours():
    assert baseline_threshold("chen", m=2, p=1, n=2, x=1, g=1, l=2) == 17
    assert k_degraded_smbmm(2, 1, 2, 1, 1, 2) == 16


def test_degraded_row_col_formula():
    assert k_degraded_row_col(2, 2, 1) == min(3 * 3, 3 * 3) - 1 == 8
    assert k_degraded_row_col(3, 2, 2) == min(4 * (2 + 2), 3 * (3 + 2)) - 1


def test_improvement_regime_worked_examples():
    rep = improvement_regime(2, 3, 2, 2, 2, 2, 2)
    assert rep.predicted and rep.improved and rep.margin > 0
    # just past the boundary: X = max(np,mp)/(G+1) + 1
    boundary = max(2 * 3, 2 * 3) // 3
    rep = improvement_regime(2, 3, 2, 2, 2, boundary + 1, boundary + 1)
    assert not rep.predicted and not rep.improved
    with pytest.raises(DegradedOnly):
        improvement_regime(2, 3, 2, 2, 2, 1, 2)


def test_improvement_margin_nonnegative_inside_regime():
    st = Stream(55)
    seen_true = 0
    for _ in range(50):
        m, n = 2 + st.next_below(2), 2 + st.next_below(2)
        p = 1 + st.next_below(3)
        g, l = 1 + st.next_below(3), 2 + st.next_below(2)
        x = 1 + st.next_below(4)
        rep = improvement_regime(m, p, n, g, l, x, x)
        if rep.predicted:
            seen_true += 1
            assert rep.improved and rep.margin > 0
    assert seen_true > 5


def test_randomness_regime_and_worked_amounts():
    # worked example parameters, degraded to X=2
    chen = chen_randomness(2, 3, 2, 2, 2, 2)
    assert chen == Fraction((4 + 2) * 12 - 6 + 3 + 2 - 1, 16) - 1
    rep = randomness_regime(2, 3, 2, 2, 2, 2, 2)
    assert rep.improved == (rep.margin > 0)
    with pytest.raises(DegradedOnly):
        randomness_regime(2, 3, 2, 2, 2, 1, 3)


def test_interference_accounting_matches_decomposition():
    st = Stream(66)
    for _ in range(20):
        m, n = 2 + st.next_below(2), 2 + st.next_below(2)
        p = 1 + st.next_below(3)
        g, l = 1 + st.next_below(3), 2 + st.next_below(2)
        x = 1 + st.next_below(3)
        k_int = interference_dimensions(m, p, n, x, g, l)
        assert k_int == interference_decomposition(m, p, n, x, g, l)
        # desired + interference dimensions account for the threshold
        assert k_int == k_degraded_smbmm(m, p, n, x, g, l) - l * g * m * p * n
        assert chen_interference_dimensions(m, p, n, x, g, l) == (
            baseline_threshold("chen", m=m, p=p, n=n, x=x, g=g, l=l)
            - l * g * m * p * n
        )


def test_compare_rows_worked_grid():
    rows = compare_smbmm_rows(2, 3, 2, 2, 2, [1, 2, 3])
    by_x = {r["X"]: r for r in rows}
    assert by_x[1]["K_ours"] == 69 and by_x[1]["K_chen"] == 73
    assert by_x[2]["K_ours"] == 73 and by_x[2]["K_chen"] == 75
    assert by_x[3]["K_ours"] == 77 and by_x[3]["K_chen"] == 77
    assert [by_x[x]["K_improved"] for x in (1, 2, 3)] == [True, True, False]
    assert [by_x[x]["regime_K"] for x in (1, 2, 3)] == [True, True, False]


def test_render_formats():
    rows = compare_eep_rows(2, 2, 2, [1, 2])
    csv_text = render_csv(rows, ["X", "K_eep", "K_ours", "improved"])
    assert csv_text.splitlines()[0] == "X,K_eep,K_ours,improved"
    assert "true" in csv_text and "false" in csv_text
    md = render_markdown(rows, ["X", "K_eep", "K_ours", "improved"])
    assert md.startswith("| X | K_eep")
    assert "|---|" in md
