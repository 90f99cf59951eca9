import math

import pytest

from mcf.catalog import build
from mcf.graph import GraphError, find_positive_path
from mcf.thermo import (
    asymptotic_gasket_bound,
    build_induced_alphabet,
    hausdorff_bound,
    loop_words,
    partition_sum,
    perron_value,
    pressure_analysis,
    solve_kappa,
    tuple_log_radii,
)


def gauss():
    return build("gauss").system


def gauss_star():
    s = gauss()
    g = find_positive_path(s)
    assert s.path_labels(g) == ("1", "2")
    return s, g


def test_perron_oracle_fibonacci_square():
    lam = (3 + math.sqrt(5)) / 2
    assert math.isclose(perron_value(((1, 1), (1, 2))), math.log(lam), rel_tol=1e-9)


def test_perron_rank_one():
    assert math.isclose(perron_value(((1, 1), (1, 1))), math.log(2), rel_tol=1e-9)


def test_perron_permutation_similarity_invariant():
    m = ((2, 3, 1), (1, 5, 2), (4, 1, 1))
    # conjugate by the cyclic permutation of coordinates
    p = ((m[1][1], m[1][2], m[1][0]),
         (m[2][1], m[2][2], m[2][0]),
         (m[0][1], m[0][2], m[0][0]))
    assert math.isclose(perron_value(m), perron_value(p), rel_tol=1e-9)


def test_perron_rejects_zero_matrix():
    with pytest.raises(GraphError):
        perron_value(((0, 0), (0, 0)))


def test_loop_words_exclude_forbidden_factor():
    s, g = gauss_star()
    words = loop_words(s, "v", 2, tuple(g))
    labeled = {s.path_labels(w) for w in words}
    assert labeled == {(), ("1",), ("2",), ("1", "1"), ("2", "1"), ("2", "2")}


def test_letter_count_nondecreasing_in_length():
    s, g = gauss_star()
    counts = [len(build_induced_alphabet(s, g, L)) for L in (2, 4, 6)]
    assert counts == sorted(counts)
    assert counts[0] == 6


def test_letters_are_positive_matrices():
    s, g = gauss_star()
    for letter in build_induced_alphabet(s, g, 4):
        assert all(x > 0 for row in letter.matrix for x in row)


def test_partition_sum_at_zero_counts_tuples():
    s, g = gauss_star()
    letters = build_induced_alphabet(s, g, 2)
    for n in (1, 2):
        assert math.isclose(
            partition_sum(letters, n, 0.0), math.log(len(letters) ** n) / n
        )


def test_partition_sum_single_letter_oracle():
    s, g = gauss_star()
    letters = [build_induced_alphabet(s, g, 0)[0]]  # just gamma_star
    assert letters[0].word_labels == ()
    lam = perron_value(letters[0].matrix)
    assert math.isclose(partition_sum(letters, 1, 1.0), -lam, rel_tol=1e-9)


def test_partition_sum_decreasing_in_kappa():
    s, g = gauss_star()
    letters = build_induced_alphabet(s, g, 4)
    vals = [partition_sum(letters, 1, k) for k in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_solve_kappa_root_property_and_bad_bracket():
    s, g = gauss_star()
    letters = build_induced_alphabet(s, g, 8)
    radii = tuple_log_radii(letters, 2)
    kappa, residual = solve_kappa(letters, 2, log_radii=radii)
    assert abs(residual) < 1e-6
    assert 1.5 < kappa < 2.0
    with pytest.raises(GraphError):
        solve_kappa(letters, 2, bracket=(8.0, 16.0), log_radii=radii)


def test_pressure_monotone_in_truncation_length():
    s = gauss()
    ks = [pressure_analysis(s, L, 1).kappa for L in (4, 8, 12)]
    assert ks == sorted(ks)
    assert ks[-1] < 2.0  # truncation always underestimates the letter count


def test_restricted_mode_lowers_kappa():
    named = build("arnoux-rauzy", 3)
    s = named.system
    exits = set(named.meta["exit_edges"])
    allowed = [i for i in range(len(s.edges)) if i not in exits]
    g = find_positive_path(s, allowed_edges=allowed)
    full = build("arp", 3).system
    k_sub = pressure_analysis(s, 12, 2, gamma_star=g, allowed_edges=allowed).kappa
    k_full = pressure_analysis(full, 12, 2, gamma_star=g).kappa
    assert k_sub < k_full


def test_hausdorff_bound_values():
    assert hausdorff_bound(3, 3) == 2
    assert math.isclose(hausdorff_bound(3 * 0.825, 3), 1.825, abs_tol=1e-9)
    assert math.isclose(hausdorff_bound(2.8, 4), 2.7)


def test_asymptotic_gasket_bound_values():
    assert math.isclose(asymptotic_gasket_bound(2), 4 / 3)
    assert math.isclose(asymptotic_gasket_bound(4), 3.4)
    gaps = [asymptotic_gasket_bound(d) - (d - 1) for d in (4, 8, 16, 32)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
