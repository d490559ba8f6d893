"""Amplitude vectors over determination sets and their orthonormal frames.

An alpha-set collects the exact hydra amplitudes of one source at the passage
times of a determination set; Gram-Schmidt with an explicit zero branch turns
it into a beta-set.  For several sources the frames live over the joint
determination set, supported only where that source's waves have arrived.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import FrameError, InvariantViolation
from .impulse import Hydra
from .metric_graph import Position, eccentricity
from .partition import Partition

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class AlphaSet:
    """Rows = passage times (ascending), columns = determination-set points."""

    positions: tuple[Position, ...]
    times: tuple[Fraction, ...]
    matrix: tuple[tuple[Fraction, ...], ...]

    def as_float(self) -> np.ndarray:
        return np.array([[float(a) for a in row] for row in self.matrix], dtype=float)


@dataclass(frozen=True)
class BetaFrame:
    """Orthonormalized amplitude vectors with their transition matrix.

    vectors is n x m; zero rows mark amplitude vectors dependent on their
    predecessors (or sources whose waves have not arrived).  transition is the
    lower-triangular rho with beta = rho @ alpha.  support masks the columns
    inside the source's filled region (Sigma case), all-True otherwise.
    """

    vectors: np.ndarray
    transition: np.ndarray
    support: np.ndarray
    nonzero: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def nonzero_matrix(self) -> np.ndarray:
        return self.vectors[list(self.nonzero), :] if self.nonzero else \
            np.zeros((0, self.dim))


def alpha_set(hydra: Hydra, positions: Sequence[Position],
              times: Sequence[Fraction]) -> AlphaSet:
    """Exact amplitudes of one hydra at the grid positions x times."""
    times = tuple(sorted(Fraction(t) for t in times))
    positions = tuple(positions)
    matrix = tuple(
        tuple(hydra.amplitude_at(x, t) for x in positions) for t in times
    )
    return AlphaSet(positions, times, matrix)


def gram_schmidt(alpha: AlphaSet | np.ndarray, tol: float = DEFAULT_TOL,
                 strict_first: bool = True,
                 support: np.ndarray | None = None) -> BetaFrame:
    """Three-branch Gram-Schmidt: normalize, orthonormalize, or zero out.

    A row whose residual norm is <= tol lies in the span of its predecessors
    and produces a zero beta.  With strict_first, a zero first row is an
    error; lenient mode sends it to the zero branch as well.
    """
    a = alpha.as_float() if isinstance(alpha, AlphaSet) else np.asarray(alpha, float)
    n, m = a.shape
    betas = np.zeros((n, m))
    rho = np.zeros((n, n))
    nonzero: list[int] = []
    for i in range(n):
        coeff = np.zeros(n)
        coeff[i] = 1.0
        resid = a[i].copy()
        for j in nonzero:
            c = float(resid @ betas[j])
            resid -= c * betas[j]
            coeff -= c * rho[j]
        norm = float(np.linalg.norm(resid))
        if norm <= tol:
            if i == 0 and strict_first:
                raise FrameError("first amplitude vector is zero")
            continue
        betas[i] = resid / norm
        rho[i] = coeff / norm
        nonzero.append(i)
    if support is None:
        support = np.ones(m, dtype=bool)
    return BetaFrame(betas, rho, np.asarray(support, bool), tuple(nonzero))


def family_frames(partition: Partition, hydras: Sequence[Hydra],
                  tol: float = DEFAULT_TOL) -> dict[tuple[int, str], BetaFrame]:
    """Per (family, source) beta-frames over the joint determination sets.

    The alpha rows use the family's joint passage times; entries at points a
    source has not reached are exactly zero, which realizes the zero
    extension of the per-source beta-set to the joint determination set.
    Constancy of the entries across each cell is verified at a second
    parameter sample.
    """
    g = hydras[0].graph
    by_source = {h.source: h for h in hydras}
    if tuple(sorted(by_source)) != partition.sigma:
        raise FrameError("hydras do not match the partition's source set")
    T = partition.horizon
    single = len(partition.sigma) == 1
    if single:
        t_fill = eccentricity(g, partition.sigma[0])

    frames: dict[tuple[int, str], BetaFrame] = {}
    for fam in partition.families:
        r1 = fam.epsilon * Fraction(1, 3)
        r2 = fam.epsilon * Fraction(2, 5)
        lam1, lam2 = fam.lambda_at(g, r1), fam.lambda_at(g, r2)
        xi1, xi2 = fam.times_at(r1), fam.times_at(r2)
        for gamma in partition.sigma:
            h = by_source[gamma]
            a1 = alpha_set(h, lam1, xi1)
            a2 = alpha_set(h, lam2, xi2)
            if a1.matrix != a2.matrix:
                raise FrameError(
                    f"amplitudes not constant across cells of family {fam.index}")
            gp = g.vertex_position(gamma)
            support = np.array([g.distance(x, gp) <= T for x in lam1], dtype=bool)
            frame = gram_schmidt(a1, tol, strict_first=False, support=support)
            if single and len(frame.nonzero) != frame.n and T < t_fill:
                raise InvariantViolation(
                    "zero beta row for a single subcritical source; amplitude "
                    "vectors should be linearly independent")
            nz = frame.nonzero_matrix()
            gram = nz @ nz.T
            if nz.size and float(np.max(np.abs(gram - np.eye(len(frame.nonzero))))) > 10 * tol:
                raise InvariantViolation("beta frame is not orthonormal")
            frames[(fam.index, gamma)] = frame
    return frames
