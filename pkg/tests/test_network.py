import itertools
import random

import pytest
from hypothesis import given, strategies as st

from clocknet.constructions import circuit_to_matrix, paper_matrix, riis_counterexample_circuit, validate_circuit_matrix
from clocknet.network import (
    BudgetExceeded,
    ClockSpec,
    GcdKind,
    LinearCircuit,
    TableCircuit,
    bounds_report,
    build_clock_digraph,
    build_clock_network,
    check_solves,
    cycles,
    digraph_to_dot,
    evaluate,
    gcd_reduce,
    identify_network_digraph,
    multiplier_map,
    network_to_dot,
    permutation_order,
    relay_circuit,
    verify_digraph_isomorphism,
)
from conftest import SEED
from oracles import linear_valuation

offset_sets = st.sets(st.integers(1, 5), min_size=1, max_size=3).map(lambda s: tuple(sorted(s)))


class TestClockNetwork:
    def test_small_example(self):
        net = build_clock_network(ClockSpec(5, (1, 3)))
        assert net.size == 8
        assert net.in_neighbours(4) == (1, 3)
        assert net.in_neighbours(5) == (2, 4)
        assert net.in_neighbours(8) == (5, 7)
        assert [net.role(k) for k in range(1, 9)] == ["input"] * 3 + ["intermediate"] * 2 + ["output"] * 3

    def test_full_clock_n8(self):
        net = build_clock_network(ClockSpec(8, (1, 2)))
        assert net.size == 10
        for k in range(3, 11):
            assert net.in_neighbours(k) == (k - 2, k - 1)

    @pytest.mark.parametrize("r", [1, 2, 4])
    def test_boundary_relay_paths(self, r):
        spec = ClockSpec(r, (r,))
        assert spec.boundary
        net = build_clock_network(spec)
        for k in net.non_input_nodes():
            assert net.in_neighbours(k) == (k - r,)

    def test_n_below_r(self):
        with pytest.raises(ValueError):
            ClockSpec(2, (1, 3))

    def test_bad_offsets(self):
        with pytest.raises(ValueError):
            ClockSpec(5, (0, 2))
        with pytest.raises(ValueError):
            ClockSpec(5, ())

    @given(offset_sets, st.integers(0, 12))
    def test_in_degree(self, R, extra):
        r = max(R)
        net = build_clock_network(ClockSpec(r + extra, R))
        for k in net.non_input_nodes():
            expected = [j for j in R if k - j >= 1]
            assert len(net.in_neighbours(k)) == len(expected)
            if k > 2 * r:
                assert len(net.in_neighbours(k)) == len(R)
            assert all(k - i in R for i in net.in_neighbours(k))
        assert all(i < k for i, k in net.edges())
        assert all(net.in_neighbours(i) == () for i in range(1, r + 1))


class TestEvaluate:
    def test_counterexample_valuation(self):
        net = build_clock_network(ClockSpec(7, (1, 2)))
        x = evaluate(net, riis_counterexample_circuit(7, 2, 2), (1, 0))
        assert x.X == (1, 0, 1, 1, 0, 1, 1, 0, 1)
        assert x[8] == 0 != x[1]

    def test_zero_input(self):
        net = build_clock_network(ClockSpec(7, (1, 3)))
        c = validate_circuit_matrix(paper_matrix("A7"), (1, 3), 2)
        assert set(evaluate(net, c, (0, 0, 0)).X) == {0}

    def test_matrix_a_outputs(self):
        net = build_clock_network(ClockSpec(7, (1, 3)))
        c = validate_circuit_matrix(paper_matrix("A7"), (1, 3), 2)
        assert evaluate(net, c, (1, 1, 0)).outputs == (1, 1, 0)

    def test_modulus_mismatch(self):
        net = build_clock_network(ClockSpec(7, (1, 2)))
        with pytest.raises(ValueError):
            evaluate(net, riis_counterexample_circuit(7, 2, 3), (1, 0), s=2)

    def test_shape_mismatch(self):
        net = build_clock_network(ClockSpec(6, (1, 2)))
        with pytest.raises(ValueError):
            evaluate(net, riis_counterexample_circuit(7, 2, 3), (1, 0))

    def test_table_circuit(self):
        # XOR-based circuit on N_2(2) over Z_2: X_3 = X_1 + X_2, X_4 = X_3 + X_2
        net = build_clock_network(ClockSpec(2, (1, 2)))
        xor = (0, 1, 1, 0)
        c = TableCircuit(2, (xor, xor))
        for a, b in itertools.product((0, 1), repeat=2):
            assert evaluate(net, c, (a, b)).X == (a, b, a ^ b, a)

    @given(offset_sets, st.integers(0, 6), st.integers(2, 5), st.data())
    def test_linear_matches_reference(self, R, extra, s, data):
        r = max(R)
        n = r + extra
        net = build_clock_network(ClockSpec(n, R))
        coeffs = [[data.draw(st.integers(0, s - 1)) if k - j >= 1 else 0 for j in R] for k in net.non_input_nodes()]
        circuit = LinearCircuit(n, R, coeffs, s)
        c = data.draw(st.lists(st.integers(0, s - 1), min_size=r, max_size=r))
        table = {k: dict(zip(R, row)) for k, row in zip(net.non_input_nodes(), coeffs)}
        assert list(evaluate(net, circuit, c).X) == linear_valuation(n, R, table, c, s)


class TestCheckSolves:
    def test_matrix_a(self):
        net = build_clock_network(ClockSpec(7, (1, 3)))
        assert check_solves(net, validate_circuit_matrix(paper_matrix("A7"), (1, 3), 2))

    def test_counterexample(self):
        net = build_clock_network(ClockSpec(7, (1, 2)))
        assert not check_solves(net, riis_counterexample_circuit(7, 2, 2))

    @pytest.mark.parametrize("r,s", [(1, 2), (2, 3), (3, 5)])
    def test_relay(self, r, s):
        spec = ClockSpec(r, (r,))
        assert check_solves(build_clock_network(spec), relay_circuit(spec), s)

    def test_budget(self):
        spec = ClockSpec(4, (4,))
        with pytest.raises(BudgetExceeded):
            check_solves(build_clock_network(spec), relay_circuit(spec), 7, budget=100)

    def test_matches_circuit_matrix_tail(self):
        rng = random.Random(SEED)
        R = (1, 3)
        net = build_clock_network(ClockSpec(6, R))
        for _ in range(200):
            coeffs = [[rng.randrange(2) for _ in R] for _ in range(6)]
            c = LinearCircuit(6, R, coeffs, 2)
            m = circuit_to_matrix(c)
            assert check_solves(net, c) == m.ends_in_identity(2)
            again = validate_circuit_matrix(m, R, 2)
            assert check_solves(net, again) == m.ends_in_identity(2)


class TestGcd:
    def test_unsolvable(self):
        assert gcd_reduce(5, (2, 4)).kind is GcdKind.UNSOLVABLE

    def test_reduced(self):
        g = gcd_reduce(6, (2, 4))
        assert (g.kind, g.d, g.n, g.R) == (GcdKind.REDUCED, 2, 3, (1, 2))

    def test_unchanged(self):
        assert gcd_reduce(7, (1, 3)).kind is GcdKind.UNCHANGED

    def test_copies_agree(self):
        # circuits on N_3({1,2}) copied onto the two residue classes of N_6({2,4})
        small = build_clock_network(ClockSpec(3, (1, 2)))
        big = build_clock_network(ClockSpec(6, (2, 4)))
        for coeffs in itertools.product(itertools.product(range(2), repeat=2), repeat=3):
            c = LinearCircuit(3, (1, 2), coeffs, 2)
            lifted = LinearCircuit(6, (2, 4), [coeffs[(k - 1) // 2 - 2] for k in range(5, 11)], 2)
            assert check_solves(small, c) == check_solves(big, lifted)


class TestDigraphs:
    def test_regular(self):
        d = build_clock_digraph(5, (1, 3))
        assert len(d.edges) == 10
        assert all(d.out_degree(v) == 2 for v in range(5))

    def test_identification_matches(self):
        for n, R in [(5, (1, 3)), (7, (1, 2)), (11, (1, 4)), (9, (2, 3, 5))]:
            net = build_clock_network(ClockSpec(n, R))
            assert identify_network_digraph(net).edges == build_clock_digraph(n, R).edges

    def test_cycle(self):
        assert build_clock_digraph(6, (1,)).sorted_edges() == [(i, (i + 1) % 6) for i in range(6)]

    def test_boundary_flags(self):
        d = identify_network_digraph(build_clock_network(ClockSpec(2, (1, 2))))
        assert d.flagged
        assert d.self_loops()
        assert "self-loop" in digraph_to_dot(d)

    def test_small_n_collapses(self):
        d = build_clock_digraph(3, (1, 4))
        assert d.collapsed == 3 and len(d.edges) == 3

    def test_isomorphism_examples(self):
        assert verify_digraph_isomorphism(build_clock_digraph(5, (1, 3)), build_clock_digraph(5, (1, 2)), multiplier_map(5, 2))
        assert verify_digraph_isomorphism(build_clock_digraph(11, (1, 4)), build_clock_digraph(11, (1, 3)), multiplier_map(11, 3))
        assert not verify_digraph_isomorphism(build_clock_digraph(5, (1, 3)), build_clock_digraph(5, (1, 2)), multiplier_map(5, 3))

    def test_not_a_permutation(self):
        d = build_clock_digraph(4, (1,))
        with pytest.raises(ValueError):
            verify_digraph_isomorphism(d, d, (0, 0, 1, 2))

    @given(st.integers(1, 15), offset_sets)
    def test_identity_map(self, n, R):
        d = build_clock_digraph(n, R)
        assert verify_digraph_isomorphism(d, d, tuple(range(n)))

    def test_multiplier_map(self):
        assert cycles(multiplier_map(5, 2)) == [(0,), (1, 2, 4, 3)]
        assert multiplier_map(9, 1) == tuple(range(9))
        assert permutation_order(multiplier_map(11, 3)) == 5
        with pytest.raises(ValueError):
            multiplier_map(6, 2)

    def test_dot(self):
        net = build_clock_network(ClockSpec(5, (1, 3)))
        dot = network_to_dot(net)
        assert dot.count("->") == len(net.edges())
        assert "// input" in dot and "// output" in dot


class TestBounds:
    def test_solvable(self):
        rep = bounds_report(ClockSpec(7, (1, 3)), solvable=True, linearly=True, s=2)
        assert rep.gn_upper == 3 and rep.defect_lower == 4
        assert rep.gn_exact and rep.defect_exact
        assert rep.lines()[:2] == ["gn(G_N,2) = 3", "b(G_N,2) = 4"]

    def test_unknown(self):
        rep = bounds_report(ClockSpec(7, (1, 3)))
        assert not (rep.gn_exact or rep.gn_strict or rep.defect_exact)

    def test_unsolvable(self):
        rep = bounds_report(ClockSpec(11, (1, 3)), solvable=False, s=2)
        assert rep.gn_strict
        assert rep.lines()[0] == "gn(G_N,2) < 3"

    def test_contradiction(self):
        with pytest.raises(ValueError):
            bounds_report(ClockSpec(7, (1, 3)), solvable=False, linearly=True)

    def test_boundary_note(self):
        assert bounds_report(ClockSpec(3, (1, 3))).notes
