import mpmath
import pytest

from kseq.counting import gk_coefficients
from kseq.precision import working
from kseq.transfer import (
    RunupState,
    gk_eval,
    convergence_trace,
    iterate_product,
    log_unrestricted_gf,
    m_matrix,
    runup_asymptotic,
    runup_config_count,
    runup_oracle,
    runup_states,
    runup_vector,
    z_of,
)
from kseq.series import eval_at


def test_z_at_half_q():
    with working(40):
        assert abs(z_of(1, mpmath.log(2), 40) - 1) < mpmath.mpf("1e-45")


def test_z_small_ns_expansion():
    with working(40):
        s = mpmath.mpf("1e-6")
        z = z_of(1, s, 40)
        assert abs(z - (1 / s - mpmath.mpf(1) / 2)) < 1e-5


def test_z_decreasing_in_n():
    with working(30):
        vals = [z_of(n, 0.1, 30) for n in range(1, 40)]
        assert all(b < a for a, b in zip(vals, vals[1:]))


def test_m_matrix_shape_k2():
    m = m_matrix(3, 0.5, 2)
    z = z_of(3, 0.5)
    assert m[0, 0] == 1 and m[0, 1] == 1
    assert m[1, 0] == z and m[1, 1] == 0


def test_m_matrix_trace_and_det():
    with working(40):
        for k in (2, 3, 4):
            m = m_matrix(2, 0.3, k, 40)
            z = z_of(2, 0.3, 40)
            assert sum(m[i, i] for i in range(k)) == 1
            det = mpmath.det(m)
            expected = (-1) ** (k + 1) * z ** (k - 1)
            assert abs(det - expected) < abs(expected) * mpmath.mpf("1e-40")


def test_single_step_state():
    sv = iterate_product(3, 1, s=0.4)
    with working(50):
        assert sv.entries[0].to_number() == 1
        assert abs(sv.entries[1].to_number() - z_of(1, 0.4)) < mpmath.mpf("1e-45")
        assert sv.entries[2].is_zero()


def test_formal_entries_nonnegative():
    sv = iterate_product(3, 10, mode="formal", n_max=14)
    for entry in sv.entries:
        assert all(c >= 0 for c in entry.coeffs)


def test_first_row_sums_entries():
    # v_0(N+1) = sum_a v_a(N)
    n_max = 18
    sv = iterate_product(3, 6, mode="formal", n_max=n_max)
    sv_next = iterate_product(3, 7, mode="formal", n_max=n_max)
    total = sv.entries[0]
    for e in sv.entries[1:]:
        total = total + e
    assert total.coeffs == sv_next.entries[0].coeffs


def test_formal_entry0_is_parts_strictly_below_N():
    # the N-step entry 0 is G_{k,N} (parts < N): it misses {N} at weight N
    k, N = 2, 12
    entry = iterate_product(k, N, mode="formal", n_max=N).entries[0]
    dp = gk_coefficients(k, N)
    assert entry.coeffs[:N] == dp.values[:N]
    assert dp[N] - entry.coeffs[N] == 1
    full = iterate_product(k, N + 1, mode="formal", n_max=N).entries[0]
    assert full.coeffs == dp.values


def test_iterate_argument_validation():
    with pytest.raises(ValueError):
        iterate_product(2, 0, s=0.1)
    with pytest.raises(ValueError):
        iterate_product(2, 3, mode="numeric")
    with pytest.raises(ValueError):
        iterate_product(2, 3, mode="formal")
    with pytest.raises(ValueError):
        iterate_product(2, 3, s=0.1, mode="sideways")
    with pytest.raises(MemoryError):
        iterate_product(2, 3, mode="formal", n_max=10**7)


def test_gk_eval_dominant_term_large_s():
    with working(40):
        val = gk_eval(2, 5, mpmath.mpf("1e-10"), 40).value.to_number()
        # next omitted term is 2 q^2 = 2 e^{-10}
        assert abs(val - (1 + mpmath.exp(mpmath.mpf(-5)))) < 3 * mpmath.exp(mpmath.mpf(-10))


def test_gk_eval_matches_formal_series():
    with working(50):
        s = mpmath.mpf("0.1")
        res = gk_eval(2, s, mpmath.mpf("1e-14"))
        table = gk_coefficients(2, 900)
        ev = eval_at(table.series(), s)
        gap = abs(res.value.log() - mpmath.log(ev.value))
        assert gap < mpmath.mpf("1e-12")


def test_gk_eval_monotone_in_k():
    with working(40):
        s = mpmath.mpf("0.2")
        g2 = gk_eval(2, s, 1e-10, 40).value.log()
        g3 = gk_eval(3, s, 1e-10, 40).value.log()
        g_all, _, _ = log_unrestricted_gf(s, 1e-10, 40)
        assert g2 < g3 < g_all


def test_gk_eval_unreachable_tolerance():
    with pytest.raises(ArithmeticError):
        gk_eval(2, 0.1, 1e-80, digits=30)


def test_runup_state_structure():
    state = RunupState.from_shortenings(3, 9, (1, 0, 2, 0))
    assert state.ell == 3
    assert state.t == (1, 3, 3)
    assert state.M == 4  # (9 + 3) // 3
    # n_i = k i - #{t_j <= i}
    assert state.missing == (2, 5, 6, 9)
    assert state.a == 0
    with pytest.raises(ValueError):
        RunupState.from_shortenings(3, 9, (1, 0, 2))  # one count per gap


def test_runup_state_count_matches_subset_count():
    for k in (2, 3, 4):
        for N in range(1, 9):
            assert sum(1 for _ in runup_states(k, N)) == runup_config_count(k, N)


def test_runup_entry_congruence_when_k_divides_N():
    for k in (2, 3):
        for N in (k, 2 * k, 3 * k):
            for state in runup_states(k, N):
                assert state.ell % k == state.a


def test_runup_guard_refuses_large_enumeration():
    with pytest.raises(ValueError):
        runup_vector(2, 400, s=0.1)


def test_runup_oracle_matches_product_entrywise():
    n_max = 15
    for k in (2, 3):
        for N in (2, 4, 5):
            for a in range(k):
                oracle = runup_oracle(k, N, a, mode="formal", n_max=n_max)
                product = iterate_product(k, N, mode="formal", n_max=n_max)
                assert oracle.coeffs == product.entries[a].coeffs


def test_runup_ell_zero_pattern():
    # with no shortenings, exactly every k-th part size is missing
    k, N = 3, 9
    states = [st for st in runup_states(k, N) if st.ell == 0]
    assert len(states) == 1
    assert states[0].missing == (3, 6, 9)
    assert states[0].a == 0


def test_runup_asymptotic_entry_ratio():
    with working(40):
        s = mpmath.mpf("1e-4")
        base = runup_asymptotic(2, s, 60, 0, 40)
        upper = runup_asymptotic(2, s, 60, 1, 40)
        gap = upper.value.log() - base.value.log()
        assert abs(gap + mpmath.log(s * 60) / 2) < mpmath.mpf("1e-30")


def test_runup_asymptotic_matches_exact_product():
    with working(50):
        s = mpmath.mpf("1e-4")
        asy = runup_asymptotic(2, s, 60, 0)
        exact = iterate_product(2, 60, s=s).entries[0]
        assert not asy.in_window  # desk-scale N sits below the proof window
        assert abs(asy.value.log() - exact.log()) < 2 * asy.predicted_error


def test_runup_asymptotic_requires_divisibility():
    with pytest.raises(ValueError):
        runup_asymptotic(2, 0.01, 61, 0)
    with pytest.raises(ValueError):
        runup_asymptotic(2, 0.01, 60, 2)


def test_runup_asymptotic_window_flag():
    loose = runup_asymptotic(2, 1e-4, 60, 0, window_multiplier=0.1)
    assert loose.in_window
    tight = runup_asymptotic(2, 1e-4, 60, 0, window_multiplier=8.0)
    assert not tight.in_window


def test_convergence_trace_rows():
    rows = convergence_trace(2, 0.2, 12, stride=4)
    assert [r[0] for r in rows] == [4, 8, 12]
    assert len(rows[0]) == 3
