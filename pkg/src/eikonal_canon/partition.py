"""Partition of the wave-filled part of a graph induced by hydra structure.

The lattice closure of a hydra point set is its equivalence class under the
same-position / same-time neighbor relation.  Projecting closures of corner
points yields the finite critical set; the rest of the filled region splits
into families of equal-length cells swept together, each family carrying
time cells and slope +-1 passage-time functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ClosureCapExceeded, PartitionDefect
from .impulse import Hydra, check_same_stage, self_intersections, union_positions_at, union_times_at
from .metric_graph import MetricGraph, Position, covered_intervals

CLOSURE_CAP = 10 ** 5

SpaceTimePoint = tuple[Position, Fraction]


@dataclass(frozen=True)
class DeterminationSet:
    base: Position
    lam: tuple[Position, ...]
    xi: tuple[Fraction, ...]


@dataclass(frozen=True)
class Cell:
    """Open interval of regular points on one edge, oriented by the family parameter."""

    edge: str
    lo: Fraction
    hi: Fraction
    forward: bool  # True when the family parameter r increases with the offset

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def offset_at(self, r: Fraction) -> Fraction:
        return self.lo + r if self.forward else self.hi - r

    def param_of(self, offset: Fraction) -> Fraction:
        return offset - self.lo if self.forward else self.hi - offset

    def contains_offset(self, offset: Fraction) -> bool:
        return self.lo < offset < self.hi


@dataclass(frozen=True)
class TimeCell:
    start: Fraction
    end: Fraction

    @property
    def length(self) -> Fraction:
        return self.end - self.start


@dataclass(frozen=True)
class Family:
    """Cells swept together, their time cells, and per-cell tau descriptors.

    tau_slopes[i] == +1 realizes tau_i(r) = start_i + r, slope -1 realizes
    tau_i(r) = end_i - r; both agree with the stored time cell.
    """

    index: int
    cells: tuple[Cell, ...]
    epsilon: Fraction
    time_cells: tuple[TimeCell, ...]
    tau_slopes: tuple[int, ...]

    @property
    def n_times(self) -> int:
        return len(self.time_cells)

    @property
    def dim(self) -> int:
        return len(self.cells)

    def tau_value(self, i: int, r) -> Fraction:
        r = Fraction(r)
        if not 0 <= r <= self.epsilon:
            raise ValueError(f"parameter {r} outside [0, {self.epsilon}]")
        if not 0 <= i < self.n_times:
            raise IndexError(f"tau index {i} out of range")
        cell = self.time_cells[i]
        return cell.start + r if self.tau_slopes[i] == 1 else cell.end - r

    def lambda_at(self, g: MetricGraph, r) -> list[Position]:
        r = Fraction(r)
        return [g.position(c.edge, c.offset_at(r)) for c in self.cells]

    def times_at(self, r) -> list[Fraction]:
        return [self.tau_value(i, r) for i in range(self.n_times)]

    def locate(self, g: MetricGraph, pos: Position) -> tuple[int, Fraction] | None:
        """(cell index, parameter) for a regular position inside this family."""
        if pos.vertex is not None:
            return None
        for k, c in enumerate(self.cells):
            if c.edge == pos.edge and c.contains_offset(pos.offset):
                return k, c.param_of(pos.offset)
        return None


@dataclass(frozen=True)
class Partition:
    graph: MetricGraph
    sigma: tuple[str, ...]
    horizon: Fraction
    critical: tuple[Position, ...]
    families: tuple[Family, ...]

    def family_of(self, pos: Position) -> tuple[Family, int, Fraction] | None:
        for fam in self.families:
            hit = fam.locate(self.graph, pos)
            if hit is not None:
                return fam, hit[0], hit[1]
        return None


def tau_eval(family: Family, i: int, r, gamma: str | None = None) -> Fraction:
    """Passage time tau_i at cell parameter r; identical for every gamma."""
    return family.tau_value(i, r)


def lattice_closure(hydras: Sequence[Hydra], seeds: Iterable[SpaceTimePoint],
                    cap: int = CLOSURE_CAP) -> frozenset[SpaceTimePoint]:
    """Smallest hydra subset containing seeds, closed under shared position / time."""
    check_same_stage(hydras)
    seeds = {(p, Fraction(t)) for p, t in seeds}
    for p, t in seeds:
        if t not in union_times_at(hydras, p):
            raise ValueError(f"seed ({p}, {t}) does not lie on the hydra union")
    current: set[SpaceTimePoint] = set(seeds)
    frontier = set(seeds)
    pos_done: set[Position] = set()
    time_done: set[Fraction] = set()
    while frontier:
        new: set[SpaceTimePoint] = set()
        for p, t in frontier:
            if p not in pos_done:
                pos_done.add(p)
                for tt in union_times_at(hydras, p):
                    new.add((p, tt))
            if t not in time_done:
                time_done.add(t)
                for pp in union_positions_at(hydras, t):
                    new.add((pp, t))
        frontier = new - current
        current |= frontier
        if len(current) > cap:
            raise ClosureCapExceeded(f"lattice closure exceeded {cap} points")
    return frozenset(current)


def determination_set(hydras: Sequence[Hydra], x: Position) -> DeterminationSet:
    times = union_times_at(hydras, x)
    if not times:
        raise PartitionDefect(f"{x} is not reached by the hydras")
    closure = lattice_closure(hydras, [(x, t) for t in times])
    lam = sorted({p for p, _ in closure}, key=Position.sort_key)
    xi = sorted({t for _, t in closure})
    return DeterminationSet(x, tuple(lam), tuple(xi))


def corner_points(hydras: Sequence[Hydra]) -> set[SpaceTimePoint]:
    """Vertex-projecting hydra points, horizon-slice points and crossings."""
    check_same_stage(hydras)
    g, T = hydras[0].graph, hydras[0].horizon
    corners: set[SpaceTimePoint] = set()
    for h in hydras:
        for s in h.segments:
            for t, off in ((s.t0, s.off0), (s.t1, s.off1)):
                p = g.position(s.edge, off)
                if p.vertex is not None or t == T:
                    corners.add((p, t))
    corners |= self_intersections(hydras)
    return corners


def critical_points(hydras: Sequence[Hydra]) -> tuple[Position, ...]:
    closure = lattice_closure(hydras, corner_points(hydras))
    return tuple(sorted({p for p, _ in closure}, key=Position.sort_key))


def _sample_times(hydras: Sequence[Hydra], x: Position) -> list[Fraction]:
    return union_times_at(hydras, x)


def build_partition(hydras: Sequence[Hydra]) -> Partition:
    """Decompose the closed filled region into critical points and families."""
    check_same_stage(hydras)
    g, T = hydras[0].graph, hydras[0].horizon
    sigma = tuple(sorted(h.source for h in hydras))
    sources = [g.vertex_position(h.source) for h in hydras]

    critical = critical_points(hydras)
    crit_offsets: dict[str, set[Fraction]] = {e.id: set() for e in g.edges}
    for p in critical:
        if p.vertex is None:
            crit_offsets[p.edge].add(p.offset)
        else:
            for ei, end in g.incidence(p.vertex):
                e = g.edges[ei]
                crit_offsets[e.id].add(g.end_offset(e, end))

    # raw cells: maximal open intervals of covered-minus-critical, per edge
    covered = covered_intervals(g, sources, T)
    raw: list[tuple[str, Fraction, Fraction]] = []
    for e in g.edges:
        for lo, hi in covered.get(e.id, []):
            if lo == hi:
                if g.position(e.id, lo) not in critical:
                    raise PartitionDefect(
                        f"isolated covered point {e.id}@{lo} is not critical")
                continue
            cuts = sorted({lo, hi} | {o for o in crit_offsets[e.id] if lo <= o <= hi})
            if cuts[0] != lo or cuts[-1] != hi:
                raise PartitionDefect(f"covered interval ends on {e.id} not critical")
            for a, b in zip(cuts, cuts[1:]):
                raw.append((e.id, a, b))
    raw.sort(key=lambda c: (g.edge_pos(c[0]), c[1]))

    def cell_of(pos: Position) -> int:
        if pos.vertex is not None:
            raise PartitionDefect(f"determination set hit critical point {pos}")
        for idx, (eid, lo, hi) in enumerate(raw):
            if eid == pos.edge and lo < pos.offset < hi:
                return idx
        raise PartitionDefect(f"position {pos} not inside any cell")

    assigned: dict[int, int] = {}  # raw cell index -> family index
    families: list[Family] = []
    for start_idx in range(len(raw)):
        if start_idx in assigned:
            continue
        eid, lo, hi = raw[start_idx]
        eps = hi - lo
        mid = determination_set(hydras, g.position(eid, lo + eps / 2))
        member_idx = []
        for p in mid.lam:
            k = cell_of(p)
            if k in assigned:
                raise PartitionDefect("cell already assigned to another family")
            member_idx.append(k)
        if len(set(member_idx)) != len(mid.lam):
            raise PartitionDefect("determination set has two points in one cell")
        member_idx.sort()
        members = [raw[k] for k in member_idx]
        if any(b - a != eps for _, a, b in members):
            raise PartitionDefect("cells of unequal length within a family")

        # time cells: midpoint xi values are exactly the time-cell midpoints
        tcells = [TimeCell(t - eps / 2, t + eps / 2) for t in mid.xi]
        if tcells and (tcells[0].start < 0 or tcells[-1].end > T):
            raise PartitionDefect("time cell outside [0, horizon]")
        for a, b in zip(tcells, tcells[1:]):
            if a.end > b.start:
                raise PartitionDefect("overlapping time cells in one family")

        # orientations from a second, off-center sample at r* = eps/4
        rstar = eps / 4
        first_lo = members[0][1]
        probe = determination_set(hydras, g.position(members[0][0], first_lo + rstar))
        if len(probe.lam) != len(members) or len(probe.xi) != len(tcells):
            raise PartitionDefect("determination set size varies inside a cell")
        cells: list[Cell] = []
        for (ceid, clo, chi) in members:
            hits = [p for p in probe.lam if p.vertex is None and p.edge == ceid
                    and clo < p.offset < chi]
            if len(hits) != 1:
                raise PartitionDefect("probe point missing in a member cell")
            off = hits[0].offset
            if off == clo + rstar:
                cells.append(Cell(ceid, clo, chi, True))
            elif off == chi - rstar:
                cells.append(Cell(ceid, clo, chi, False))
            else:
                raise PartitionDefect("probe point is not at parameter r* in its cell")
        slopes: list[int] = []
        for i, tc in enumerate(tcells):
            hits = [t for t in probe.xi if tc.start <= t <= tc.end]
            if len(hits) != 1:
                raise PartitionDefect("probe time missing in a time cell")
            if hits[0] == tc.start + rstar:
                slopes.append(1)
            elif hits[0] == tc.end - rstar:
                slopes.append(-1)
            else:
                raise PartitionDefect("probe time is not at parameter r* in its cell")

        fam = Family(len(families), tuple(cells), eps, tuple(tcells), tuple(slopes))
        families.append(fam)
        for k in member_idx:
            assigned[k] = fam.index

    if len(assigned) != len(raw):
        raise PartitionDefect("partition does not cover all cells")
    return Partition(g, sigma, T, critical, tuple(families))
