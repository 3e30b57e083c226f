import math

import pytest

from induniv.errors import ArgumentError, ExhaustedSearchError
from induniv.graphs import Graph, circulant_graph, complete_graph, cycle_graph, disjoint_union
from induniv.lps import (
    LpsParams,
    build_lps_graph,
    certify_expander,
    find_lps_params,
    integer_cbrt,
    is_prime,
    legendre_symbol,
    quaternion_norm_solutions,
    second_eigenvalue,
    sqrt_minus_one,
)
from oracles import oracle_second_eigenvalue


def test_primality_and_legendre():
    primes = [2, 3, 5, 13, 29, 733, 104729]
    assert all(is_prime(p) for p in primes)
    assert not any(is_prime(n) for n in (0, 1, 4, 15, 733 * 5))
    # Euler criterion against explicit squares mod 29
    squares = {x * x % 29 for x in range(1, 29)}
    for a in range(1, 29):
        assert (legendre_symbol(a, 29) == 1) == (a in squares)


def test_sqrt_minus_one():
    for q in (5, 13, 17, 29, 41):
        x = sqrt_minus_one(q)
        assert x * x % q == q - 1


def test_integer_cbrt():
    for n in (0, 1, 7, 8, 26, 27, 10**12, 8 * 160 * 734**5):
        c = integer_cbrt(n)
        assert c**3 <= n < (c + 1) ** 3


@pytest.mark.parametrize("p", [5, 13, 17, 29])
def test_quaternion_solution_count(p):
    assert len(quaternion_norm_solutions(p)) == p + 1


def test_find_lps_params_examples():
    # q = 13 and 17 fail the residue test for p = 5; 29 is the first hit
    assert legendre_symbol(5, 13) == -1
    assert legendre_symbol(5, 17) == -1
    params = find_lps_params(5, 1)
    assert params.q == 29
    assert params.vertex_count == 29 * 840 // 2 == 12180
    # next admissible prime once 20000 vertices are required
    assert find_lps_params(5, 20000).q == 41


def test_find_lps_params_arithmetic_progression():
    params = find_lps_params(5, 1, residue_class_modulus=16)
    assert params.q % 16 == 1
    assert legendre_symbol(5, params.q) == 1


def test_find_lps_params_exhaustion():
    with pytest.raises(ExhaustedSearchError):
        find_lps_params(5, 10**9, search_ceiling=100)


def test_lps_params_validation():
    with pytest.raises(ArgumentError):
        LpsParams(5, 13)  # 5 is not a residue mod 13
    with pytest.raises(ArgumentError):
        LpsParams(7, 29)  # 7 = 3 mod 4
    with pytest.raises(ArgumentError):
        LpsParams(5, 5)
    with pytest.raises(ArgumentError):
        LpsParams(13, 5)  # q too small against 2 sqrt(p)


def test_build_small_lps_graph():
    import networkx as nx

    from oracles import to_networkx

    g = build_lps_graph(13, 17)
    assert g.vertex_count == 17 * (17 * 17 - 1) // 2 == 2448
    assert g.is_regular() and g.degree(0) == 14
    assert g.is_connected()
    assert not g.is_bipartite()
    assert g.girth() == 6  # golden value
    # independent structural oracles
    gn = to_networkx(g)
    assert nx.is_connected(gn)
    assert not nx.is_bipartite(gn)
    assert nx.girth(gn) == 6


def test_build_lps_deterministic():
    a = build_lps_graph(13, 17)
    b = build_lps_graph(LpsParams(13, 17))
    assert a == b


@pytest.mark.parametrize("p,q", [(5, 29), (13, 17)])
def test_generator_set_closed_under_inverses(p, q):
    # undirectedness of the Cayley graph rests on this closure
    from induniv.lps import _canonical, quaternion_norm_solutions

    ii = sqrt_minus_one(q)
    gens = set()
    for a, b, c, d in quaternion_norm_solutions(p):
        mat = ((a + b * ii) % q, (c + d * ii) % q,
               (-c + d * ii) % q, (a - b * ii) % q)
        gens.add(_canonical(mat, q))
    assert len(gens) == p + 1
    for (a, b, c, d) in gens:
        det = (a * d - b * c) % q
        inv_det = pow(det, q - 2, q)
        inv = (d * inv_det % q, -b * inv_det % q, -c * inv_det % q, a * inv_det % q)
        assert _canonical(inv, q) in gens


def test_second_eigenvalue_k4():
    assert second_eigenvalue(complete_graph(4)) == pytest.approx(1.0, abs=1e-9)


def test_second_eigenvalue_c6():
    # spectrum 2cos(pi k / 3); the +-2 pair is trivial for a bipartite cycle
    assert second_eigenvalue(cycle_graph(6)) == pytest.approx(
        oracle_second_eigenvalue(cycle_graph(6)), abs=1e-9)
    assert second_eigenvalue(cycle_graph(6)) == pytest.approx(1.0, abs=1e-9)


def test_second_eigenvalue_matches_dense_oracle_midsize():
    g = circulant_graph(120, (1, 3, 9))
    assert second_eigenvalue(g) == pytest.approx(oracle_second_eigenvalue(g), abs=1e-5)


def test_second_eigenvalue_rejects_bad_input():
    with pytest.raises(ArgumentError):
        second_eigenvalue(Graph(3, [(0, 1)]))  # not regular
    with pytest.raises(ArgumentError):
        second_eigenvalue(disjoint_union(cycle_graph(3), cycle_graph(3)))
    with pytest.raises(ArgumentError):
        second_eigenvalue(complete_graph(4), tolerance=0)


def test_certify_small_lps():
    params = LpsParams(13, 17)
    cert = certify_expander(build_lps_graph(params), params)
    assert cert.all_ok
    assert cert.vertex_count_ok and cert.non_bipartite and cert.connected
    assert cert.second_eigenvalue_bound <= 2 * math.sqrt(13) + 1e-4
    assert cert.girth_found == 6
    payload = cert.to_json()
    assert payload["ramanujan_ok"] and payload["all_ok"]


def test_certify_c4_reports_bipartite():
    cert = certify_expander(cycle_graph(4))
    assert not cert.non_bipartite
    assert not cert.ramanujan_ok and not cert.all_ok
    assert cert.connected


def test_certify_disconnected():
    cert = certify_expander(disjoint_union(cycle_graph(3), cycle_graph(3)))
    assert not cert.connected
    assert not cert.all_ok


def test_certify_eigen_slack_is_recorded():
    cert = certify_expander(cycle_graph(5), eigen_slack=0.5)
    assert any("relaxed" in note for note in cert.notes)
