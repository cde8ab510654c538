import mpmath

from kseq import verify
from kseq.precision import working


def test_eigen_product_comparison_gap_shrinks_with_s():
    # log[v_0(N) / prod x_1 z] approaches ((k-1)/(2k)) log N + log(k^{-3/2} (2pi)^{(k-1)/(2k)})
    with working(40):
        gaps = [verify.eigen_product_comparison_gap(2, mpmath.mpf(s), 8.0, 40) for s in ("0.02", "0.01", "0.005")]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_quick_grid_wrappers_pass():
    assert verify.oracle_equivalence(k_values=(2,), r_values=(1, None),
                                     b_values=(0,), n_limit=12)["passed"]
    assert verify.transfer_matches_dp(k_values=(2,), N=10)["passed"]
    assert verify.runup_matches_product(k_values=(2,), n_values=(1, 2, 3))["passed"]
    assert verify.fk_lambda_identity(k_values=(2,), n_points=4)["passed"]


def test_spectral_invariants_report_shape():
    result = verify.spectral_invariants(k_values=(2, 3), points_per_k=4, digits=40)
    assert result["passed"]
    assert result["grid_points"] == 8
    assert set(result["worst"]) == {
        "residual", "vieta_sum", "vieta_prod", "reconstruction", "transition"
    }
