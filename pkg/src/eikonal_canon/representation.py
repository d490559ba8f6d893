"""Matrix-function form of projectors and (shifted) eikonals over a partition.

Per family and source, the restriction of the eikonal acts on cell-vector
functions of the cell parameter r as sum_i tau_i(r) P_i with one-dimensional
pairwise-orthogonal projectors P_i = beta_i beta_i^T.  Shifting by +1 turns
the reachable-set projector into a unit and moves the spectrum to [1, T+1].
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EikonalError, MissingSampleError
from .frames import BetaFrame, DEFAULT_TOL
from .metric_graph import Position
from .partition import Family, Partition


@dataclass(frozen=True)
class LinearTimeFn:
    """t(r) = intercept + slope * r on [0, length], slope in {+1, -1}."""

    intercept: Fraction
    slope: int
    length: Fraction

    def __post_init__(self):
        if self.slope not in (1, -1):
            raise EikonalError(f"slope must be +-1, got {self.slope}")

    def __call__(self, r) -> Fraction:
        r = Fraction(r)
        if not 0 <= r <= self.length:
            raise EikonalError(f"parameter {r} outside [0, {self.length}]")
        return self.intercept + self.slope * r

    def end_value(self, end: int) -> Fraction:
        return self(self.length) if end else self.intercept

    def range_interval(self) -> tuple[Fraction, Fraction]:
        a, b = self.intercept, self(self.length)
        return (a, b) if a <= b else (b, a)

    def shifted(self, delta=1) -> "LinearTimeFn":
        return replace(self, intercept=self.intercept + Fraction(delta))

    def transposed(self) -> "LinearTimeFn":
        """Reverse the parameter direction: t'(r) = t(length - r)."""
        return LinearTimeFn(self(self.length), -self.slope, self.length)

    def extended(self, new_length: Fraction) -> "LinearTimeFn":
        return replace(self, length=Fraction(new_length))


@dataclass(frozen=True)
class ProjTerm:
    """One (passage time, rank-one projector) pair of a block."""

    k: int  # time-cell index within the family
    tau: LinearTimeFn
    beta: np.ndarray

    def projector(self) -> np.ndarray:
        return np.outer(self.beta, self.beta)


@dataclass(frozen=True)
class ProjBlock:
    family: int
    gamma: str
    dim: int
    terms: tuple[ProjTerm, ...]

    def matrix_at(self, r) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for term in self.terms:
            out += float(term.tau(r)) * term.projector()
        return out


@dataclass(frozen=True)
class ParametricRepr:
    """Block-diagonal parametric form of all shifted (or raw) eikonals."""

    sigma: tuple[str, ...]
    horizon: Fraction
    shifted: bool
    partition: Partition
    blocks: Mapping[tuple[int, str], ProjBlock]

    @property
    def families(self) -> tuple[Family, ...]:
        return self.partition.families

    def block(self, family_index: int, gamma: str) -> ProjBlock:
        return self.blocks[(family_index, gamma)]


def projector_block(frame: BetaFrame | np.ndarray,
                    tol: float = DEFAULT_TOL) -> np.ndarray:
    """B* B for an orthonormal frame: the matrix of the projector onto span."""
    B = frame.nonzero_matrix() if isinstance(frame, BetaFrame) else np.asarray(frame, float)
    if B.size:
        gram = B @ B.T
        if float(np.max(np.abs(gram - np.eye(B.shape[0])))) > 10 * tol:
            raise EikonalError("frame rows are not orthonormal")
        return B.T @ B
    m = frame.dim if isinstance(frame, BetaFrame) else 0
    return np.zeros((m, m))


def eikonal_block(pb: ProjBlock, r) -> np.ndarray:
    """sum_i tau_i(r) P_i as a dim x dim matrix."""
    return pb.matrix_at(r)


def build_parametric(partition: Partition,
                     frames: Mapping[tuple[int, str], BetaFrame],
                     shifted: bool = True) -> ParametricRepr:
    """Assemble per-(family, source) projector blocks from beta frames."""
    blocks: dict[tuple[int, str], ProjBlock] = {}
    for fam in partition.families:
        for gamma in partition.sigma:
            frame = frames.get((fam.index, gamma))
            if frame is None:
                raise EikonalError(
                    f"missing frame for family {fam.index}, source {gamma}")
            if frame.n != fam.n_times or frame.dim != fam.dim:
                raise EikonalError("frame and family shapes disagree")
            terms = []
            for i in frame.nonzero:
                tc = fam.time_cells[i]
                slope = fam.tau_slopes[i]
                intercept = tc.start if slope == 1 else tc.end
                tau = LinearTimeFn(intercept, slope, fam.epsilon)
                if shifted:
                    tau = tau.shifted(1)
                terms.append(ProjTerm(i, tau, frame.vectors[i].copy()))
            blocks[(fam.index, gamma)] = ProjBlock(
                fam.index, gamma, fam.dim, tuple(terms))
    return ParametricRepr(partition.sigma, partition.horizon, shifted,
                          partition, blocks)


def evaluate_at(repr_: ParametricRepr,
                rs: Sequence) -> dict[str, list[np.ndarray]]:
    """Per-source family-block matrices at one parameter tuple (one r per family)."""
    fams = repr_.families
    if len(rs) != len(fams):
        raise EikonalError(f"expected {len(fams)} coordinates, got {len(rs)}")
    rs = [Fraction(r) for r in rs]
    for fam, r in zip(fams, rs):
        if not 0 <= r <= fam.epsilon:
            raise EikonalError(f"coordinate {r} outside [0, {fam.epsilon}]")
    return {
        gamma: [repr_.block(fam.index, gamma).matrix_at(r)
                for fam, r in zip(fams, rs)]
        for gamma in repr_.sigma
    }


def merge_intervals(intervals: Iterable[tuple[Fraction, Fraction]]
                    ) -> list[tuple[Fraction, Fraction]]:
    ivs = sorted(intervals)
    if not ivs:
        return []
    merged = [list(ivs[0])]
    for lo, hi in ivs[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def sigma_ac(repr_: ParametricRepr, gamma: str) -> list[tuple[Fraction, Fraction]]:
    """Spectrum of the (shifted) eikonal on its reachable set: merged cell closures."""
    cells = []
    for fam in repr_.families:
        for term in repr_.block(fam.index, gamma).terms:
            cells.append(term.tau.range_interval())
    return merge_intervals(cells)


def apply_projector(repr_: ParametricRepr, gamma: str,
                    samples: Mapping[Position, float],
                    xs: Iterable[Position]) -> dict[Position, float]:
    """Action of the reachable-set projector on a sampled function.

    samples must cover the joint determination set of every queried position;
    queries at critical points or outside the filled region map to 0.
    """
    graph = repr_.partition.graph
    out: dict[Position, float] = {}
    for x in xs:
        hit = repr_.partition.family_of(x)
        if hit is None:
            out[x] = 0.0
            continue
        fam, cell_idx, r = hit
        lam = fam.lambda_at(graph, r)
        try:
            values = np.array([samples[p] for p in lam], dtype=float)
        except KeyError as exc:
            raise MissingSampleError(
                f"no sample at determination point {exc.args[0]}") from None
        acc = 0.0
        for term in repr_.block(fam.index, gamma).terms:
            acc += float(values @ term.beta) * float(term.beta[cell_idx])
        out[x] = acc
    return out
