"""Lattice closures, determination sets, critical points, families and taus."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from eikonal_canon import (
    build_partition,
    critical_points,
    determination_set,
    lattice_closure,
    propagate,
    tau_eval,
    wave_eval,
)
from conftest import bump, random_admissible_graph

F = Fraction


@pytest.fixture
def star_hydra(star3):
    return propagate(star3, "g1", F(3, 2))


class TestLatticeClosure:
    def test_single_point_interval(self, interval):
        h = propagate(interval, "a", F(1, 2))
        x = interval.position("e0", F(1, 4))
        closure = lattice_closure([h], [(x, F(1, 4))])
        assert closure == {(x, F(1, 4))}

    def test_star_four_points(self, star3, star_hydra):
        x = star3.position("e1", F(3, 4))
        closure = lattice_closure([star_hydra], [(x, F(3, 4))])
        assert closure == {
            (x, F(3, 4)),
            (x, F(5, 4)),
            (star3.position("e2", F(1, 4)), F(5, 4)),
            (star3.position("e3", F(1, 4)), F(5, 4)),
        }

    def test_idempotent(self, star3, star_hydra):
        x = star3.position("e1", F(3, 4))
        once = lattice_closure([star_hydra], [(x, F(3, 4))])
        again = lattice_closure([star_hydra], once)
        assert once == again

    def test_contains_seeds_and_distributes_over_union(self, star3, star_hydra):
        a = (star3.position("e1", F(3, 4)), F(3, 4))
        b = (star3.position("e1", F(1, 4)), F(1, 4))
        ca = lattice_closure([star_hydra], [a])
        cb = lattice_closure([star_hydra], [b])
        assert a in ca and b in cb
        assert lattice_closure([star_hydra], [a, b]) == ca | cb

    def test_rejects_off_hydra_seed(self, star3, star_hydra):
        with pytest.raises(ValueError):
            lattice_closure([star_hydra], [(star3.position("e2", F(3, 4)), F(1, 4))])


class TestDeterminationSet:
    def test_interval(self, interval):
        h = propagate(interval, "a", F(1, 2))
        x = interval.position("e0", F(1, 4))
        ds = determination_set([h], x)
        assert ds.lam == (x,)
        assert ds.xi == (F(1, 4),)

    def test_star(self, star3, star_hydra):
        x = star3.position("e1", F(3, 4))
        ds = determination_set([star_hydra], x)
        assert ds.lam == tuple(
            sorted(
                [x, star3.position("e2", F(1, 4)), star3.position("e3", F(1, 4))],
                key=lambda p: p.sort_key(),
            )
        )
        assert ds.xi == (F(3, 4), F(5, 4))

    def test_xi_disjoint_same_size_in_cell(self, star3, star_hydra):
        a = determination_set([star_hydra], star3.position("e1", F(2, 3)))
        b = determination_set([star_hydra], star3.position("e1", F(4, 5)))
        assert len(a.xi) == len(b.xi)
        assert not set(a.xi) & set(b.xi)


class TestCriticalPoints:
    def test_interval_half(self, interval):
        h = propagate(interval, "a", F(1, 2))
        assert critical_points([h]) == tuple(
            sorted(
                [interval.vertex_position("a"), interval.position("e0", F(1, 2))],
                key=lambda p: p.sort_key(),
            )
        )

    def test_star(self, star3, star_hydra):
        crit = set(critical_points([star_hydra]))
        assert crit == {
            star3.vertex_position("g1"),
            star3.vertex_position("c"),
            star3.position("e1", F(1, 2)),
            star3.position("e2", F(1, 2)),
            star3.position("e3", F(1, 2)),
        }

    def test_source_always_critical(self, star123):
        h = propagate(star123, "g1", F(1, 8))
        assert star123.vertex_position("g1") in critical_points([h])


class TestBuildPartition:
    def test_interval_one_family(self, interval):
        h = propagate(interval, "a", F(1, 2))
        part = build_partition([h])
        assert len(part.families) == 1
        fam = part.families[0]
        assert [(c.edge, c.lo, c.hi, c.forward) for c in fam.cells] == [
            ("e0", F(0), F(1, 2), True)
        ]
        assert fam.epsilon == F(1, 2)
        assert [(tc.start, tc.end) for tc in fam.time_cells] == [(F(0), F(1, 2))]
        assert fam.tau_slopes == (1,)
        assert tau_eval(fam, 0, F(1, 4)) == F(1, 4)

    def test_star_two_families(self, star3, star_hydra):
        part = build_partition([star_hydra])
        assert len(part.families) == 2
        f1enums = {
            tuple((c.edge, c.lo, c.hi) for c in fam.cells): fam
            for fam in part.families
        }
        fam1 = f1enums[(("e1", F(0), F(1, 2)),)]
        fam2 = f1enums[
            (("e1", F(1, 2), F(1)), ("e2", F(0), F(1, 2)), ("e3", F(0), F(1, 2)))
        ]
        assert fam1.epsilon == fam2.epsilon == F(1, 2)
        assert [(tc.start, tc.end) for tc in fam2.time_cells] == [
            (F(1, 2), F(1)),
            (F(1), F(3, 2)),
        ]
        # first cell is parameterized away from g1's side; the first passage
        # moves with r, the returning one against it
        assert fam2.tau_slopes == (1, -1)
        assert tau_eval(fam2, 0, F(1, 8)) == F(5, 8)
        assert tau_eval(fam2, 1, F(1, 8)) == F(11, 8)
        # mirror cells on e2/e3 sweep toward the center as r grows
        assert [c.forward for c in fam2.cells] == [True, False, False]

    def test_tau_endpoints_and_distinctness(self, star3, star_hydra):
        part = build_partition([star_hydra])
        for fam in part.families:
            for i, tc in enumerate(fam.time_cells):
                ends = {tau_eval(fam, i, 0), tau_eval(fam, i, fam.epsilon)}
                assert ends == {tc.start, tc.end}
            vals = fam.times_at(F(1, 7) * fam.epsilon)
            assert len(set(vals)) == len(vals)

    def test_tau_constant_on_determination_sets(self, star3, star_hydra):
        part = build_partition([star_hydra])
        fam = part.families[1]
        r = F(1, 3) * fam.epsilon
        lam = fam.lambda_at(star3, r)
        times = set(fam.times_at(r))
        for p in lam:
            ds = determination_set([star_hydra], p)
            assert set(ds.xi) == times

    def test_time_cells_cover_horizon_when_subcritical(self):
        rng = random.Random(41)
        from eikonal_canon import eccentricity

        for _ in range(10):
            g = random_admissible_graph(rng)
            gamma = sorted(g.boundary)[0]
            tg = eccentricity(g, gamma)
            T = tg * F(rng.randint(1, 7), 8)
            h = propagate(g, gamma, T)
            part = build_partition([h])
            ivs = sorted(
                (tc.start, tc.end) for fam in part.families for tc in fam.time_cells
            )
            # merged closure of all time cells must be exactly [0, T]
            merged = [list(ivs[0])]
            for lo, hi in ivs[1:]:
                if lo <= merged[-1][1]:
                    merged[-1][1] = max(merged[-1][1], hi)
                else:
                    merged.append([lo, hi])
            assert merged == [[F(0), T]]

    def test_two_sources_share_times_one_family(self, interval):
        # the waves never meet in space, but their points share times, so the
        # joint lattice couples the two cells into a single two-cell family;
        # the per-source frames stay supported on opposite cells
        ha = propagate(interval, "a", F(1, 4))
        hb = propagate(interval, "b", F(1, 4))
        part = build_partition([ha, hb])
        assert len(part.families) == 1
        fam = part.families[0]
        spans = sorted((c.lo, c.hi) for c in fam.cells)
        assert spans == [(F(0), F(1, 4)), (F(3, 4), F(1))]
        assert fam.epsilon == F(1, 4)
        assert [(tc.start, tc.end) for tc in fam.time_cells] == [(F(0), F(1, 4))]

    def test_locality_of_waves(self, star3, star_hydra):
        # a control supported in one family's time cells produces a wave
        # supported in that family
        part = build_partition([star_hydra])
        fam2 = part.families[1]
        tc = fam2.time_cells[1]  # (1, 3/2)
        T = F(3, 2)
        # control phi(T - t) nonzero only for t in tc
        phi = bump(float(T - tc.end), float(T - tc.start))
        controls = {"g1": phi}
        inside = fam2.lambda_at(star3, fam2.epsilon / 3)
        outside = part.families[0].lambda_at(star3, part.families[0].epsilon / 3)
        assert any(
            abs(wave_eval([star_hydra], controls, x, T)) > 1e-12 for x in inside
        )
        assert all(
            abs(wave_eval([star_hydra], controls, x, T)) < 1e-15 for x in outside
        )

    def test_incommensurate_cycle_hits_closure_cap(self):
        # mixed-denominator cycle lengths make reflections compose into
        # translations on an lcm-fine grid; the closure is finite but huge,
        # and the cap turns it into a diagnosable error
        from eikonal_canon import MetricGraph
        from eikonal_canon.errors import ClosureCapExceeded
        from eikonal_canon.partition import corner_points

        g = MetricGraph(
            [
                ("e0", ("v0", "v1"), F(6, 5)),
                ("e1", ("v1", "v2"), F(17, 7)),
                ("e2", ("v2", "v0"), F(9, 8)),
                ("e3", ("v0", "b0"), F(1, 2)),
                ("e4", ("v1", "b1"), F(5, 2)),
                ("e5", ("v2", "b2"), F(3)),
            ],
            boundary=["b0", "b1", "b2"],
        )
        h = propagate(g, "b0", F(111, 32))
        with pytest.raises(ClosureCapExceeded):
            lattice_closure([h], corner_points([h]), cap=2000)

    def test_randomized_partitions_are_consistent(self):
        rng = random.Random(97)
        from eikonal_canon import eccentricity

        for _ in range(8):
            g = random_admissible_graph(rng)
            gammas = sorted(g.boundary)[:2]
            T = F(rng.randint(2, 5), 2)
            hydras = [propagate(g, gam, T) for gam in gammas]
            part = build_partition(hydras)
            for fam in part.families:
                assert len({c.length for c in fam.cells}) == 1
                assert all(c.length == fam.epsilon for c in fam.cells)
                for a, b in zip(fam.time_cells, fam.time_cells[1:]):
                    assert a.end <= b.start
                # lattice consistency at a sample parameter
                r = fam.epsilon * F(2, 7)
                lam = set(fam.lambda_at(g, r))
                ds = determination_set(hydras, next(iter(lam)))
                assert set(ds.lam) == lam
                assert set(ds.xi) == set(fam.times_at(r))
