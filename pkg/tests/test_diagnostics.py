import pytest

from moclab.circuits import CircuitConfig, run_trajectory
from moclab.diagnostics import (DiagnosticValues, bmi, evaluate, mi_vs_distance,
                                tee, wilson_abs)
from moclab.lattice import (bmi_regions, build_lieb_lattice, tee_regions,
                            wilson_line)
from moclab.stabilizer import PauliString, entanglement_entropy, group_contains


def random_trajectory(lat, seed, p_j=0.45, p_k=0.55, n_t=3):
    cfg = CircuitConfig(p_j=p_j, p_k=p_k, n_t=n_t, master_seed=seed)
    return run_trajectory(lat, cfg, 0)


class TestTee:
    def test_seven_term_combination_matches_entropy_formula(self):
        # the cumulative-rank fast path must equal the literal combination
        lat = build_lieb_lattice(6, 4)
        a, b, c = tee_regions(lat)
        for seed in range(8):
            t = random_trajectory(lat, seed)
            s = entanglement_entropy
            literal = (s(t, a) + s(t, b) + s(t, c)
                       - s(t, a.union(b)) - s(t, b.union(c)) - s(t, a.union(c))
                       + s(t, a.union(b, c)))
            assert tee(t, a, b, c) == literal

    def test_rejects_overlapping_regions(self):
        lat = build_lieb_lattice(6, 4)
        a, b, c = tee_regions(lat)
        with pytest.raises(ValueError):
            tee(random_trajectory(lat, 0), a, a, c)

    def test_limits(self):
        lat = build_lieb_lattice(8, 5)
        regs = tee_regions(lat)
        toric = run_trajectory(lat, CircuitConfig(p_j=0.0, p_k=1.0, n_t=1), 0)
        cluster = run_trajectory(lat, CircuitConfig(p_j=1.0, p_k=1.0, n_t=1), 0)
        product = run_trajectory(lat, CircuitConfig(p_j=0.0, p_k=0.0, n_t=1), 0)
        assert tee(toric, *regs) == -1
        assert tee(cluster, *regs) == 0
        assert tee(product, *regs) == 0


class TestBmi:
    def test_matches_entropy_formula_and_symmetry(self):
        lat = build_lieb_lattice(6, 4)
        a, b = bmi_regions(lat)
        for seed in range(8):
            t = random_trajectory(lat, seed, p_j=0.8, p_k=0.8)
            s = entanglement_entropy
            literal = s(t, a) + s(t, b) - s(t, a.union(b))
            assert bmi(t, a, b) == literal
            assert bmi(t, a, b) == bmi(t, b, a)
            assert bmi(t, a, b) >= 0

    def test_cluster_point_carries_one_bit(self):
        lat = build_lieb_lattice(8, 5)
        t = run_trajectory(lat, CircuitConfig(p_j=1.0, p_k=1.0, n_t=1), 0)
        assert bmi(t, *bmi_regions(lat)) == 1

    def test_toric_point_carries_none(self):
        lat = build_lieb_lattice(8, 5)
        t = run_trajectory(lat, CircuitConfig(p_j=0.0, p_k=1.0, n_t=2), 0)
        assert bmi(t, *bmi_regions(lat)) == 0

    def test_rejects_overlap(self):
        lat = build_lieb_lattice(6, 4)
        a, _ = bmi_regions(lat)
        with pytest.raises(ValueError):
            bmi(random_trajectory(lat, 0), a, a)


class TestWilson:
    def test_contract_against_group_membership(self):
        lat = build_lieb_lattice(6, 4)
        wop = wilson_line(lat, 3).as_pauli(lat.nq)
        for seed in range(10):
            t = random_trajectory(lat, seed, p_j=0.7, p_k=0.4)
            expect = 0 if group_contains(t, wop) is None else 1
            assert wilson_abs(t, wop) == expect

    def test_cluster_state_any_length(self):
        lat = build_lieb_lattice(10, 5)
        t = run_trajectory(lat, CircuitConfig(p_j=1.0, p_k=1.0, n_t=1), 0)
        for length in (1, 3, 5, 7):
            assert wilson_abs(t, wilson_line(lat, length)) == 1

    def test_product_state_vanishes(self):
        lat = build_lieb_lattice(8, 5)
        t = run_trajectory(lat, CircuitConfig(p_j=0.0, p_k=0.0, n_t=1), 0)
        assert wilson_abs(t, wilson_line(lat, 5)) == 0

    def test_rejects_x_type(self):
        lat = build_lieb_lattice(6, 4)
        t = random_trajectory(lat, 0)
        with pytest.raises(ValueError):
            wilson_abs(t, PauliString.from_supports(lat.nq, x_support=(0,)))


class TestGroupMembershipOnLimits:
    def test_contractible_loop_in_toric_group(self):
        # Z loop around a 2x2 plaquette block equals the product of the four
        # plaquette operators, so it sits in the group with sign +1
        lat = build_lieb_lattice(8, 5)
        t = run_trajectory(lat, CircuitConfig(p_j=0.0, p_k=1.0, n_t=1), 0)
        acc = 0
        for (x0, y0) in ((3, 2), (4, 2), (3, 3), (4, 3)):
            for p in lat.plaquettes:
                if p.kind == "bulk" and p.edges == (lat.hedge(x0, y0),
                                                    lat.hedge(x0, y0 + 1),
                                                    lat.vedge(x0, y0),
                                                    lat.vedge(x0 + 1, y0)):
                    for e in p.edges:
                        acc ^= 1 << e
        loop = PauliString(lat.nq, 0, acc, 0)
        assert group_contains(t, loop) == +1

    def test_single_z_absent_in_plus_state(self):
        lat = build_lieb_lattice(6, 4)
        t = run_trajectory(lat, CircuitConfig(p_j=0.0, p_k=0.0, n_t=1), 0)
        assert group_contains(t, PauliString.from_supports(lat.nq,
                                                           z_support=(0,))) is None

    def test_cluster_tee_vanishes_at_6x4(self):
        lat = build_lieb_lattice(6, 4)
        t = run_trajectory(lat, CircuitConfig(p_j=1.0, p_k=1.0, n_t=1), 0)
        assert tee(t, *tee_regions(lat)) == 0


class TestMiVsDistance:
    def test_default_distance_matches_default_regions(self):
        lat = build_lieb_lattice(10, 5)
        t = random_trajectory(lat, 1, p_j=0.9, p_k=0.7)
        pairs = mi_vs_distance(t, lat, [lat.lx - 3])
        assert pairs[0] == (lat.lx - 3, bmi(t, *bmi_regions(lat)))

    def test_distance_out_of_range(self):
        lat = build_lieb_lattice(8, 5)
        with pytest.raises(ValueError):
            mi_vs_distance(random_trajectory(lat, 0), lat, [7])

    def test_evaluate_bundles_everything(self):
        lat = build_lieb_lattice(8, 5)
        t = random_trajectory(lat, 2)
        vals = evaluate(t, lat, tee_regions(lat), bmi_regions(lat),
                        wilson_line(lat, 5).as_pauli(lat.nq), distances=(2, 3))
        assert isinstance(vals, DiagnosticValues)
        assert vals.wilson_abs in (0, 1)
        assert len(vals.mi_by_distance) == 2
