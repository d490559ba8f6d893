"""Reduction of the parametric representation to independent canonical blocks.

Families split into irreducible blocks along projector equivalence classes.
End values of the passage-time functions induce, per source vertex, an exact
pairing of block ends; ends whose tag sets pair bijectively are junction
candidates, and candidates passing the Gram/angle connection test are glued
into a single longer block through an orthogonal witness.  When no junction
remains, each block is rewritten on an orthonormal basis of its span, giving
kappa x kappa blocks whose slope +-1 generators span the full matrix algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import EikonalError, SeamMismatch, StructuralFault
from .projalg import (
    DEFAULT_TOL,
    TaggedProjector,
    _angle_cosines,
    connection_test,
    equivalence_classes,
    gram_matrix,
    irreducible_reduction,
    word_span_dim,
)
from .representation import LinearTimeFn, ParametricRepr


@dataclass(frozen=True)
class BlockTerm:
    gamma: str
    k: int  # per-source index within the block
    tau: LinearTimeFn
    beta: np.ndarray

    def projector(self) -> np.ndarray:
        return np.outer(self.beta, self.beta)


@dataclass(frozen=True)
class Piece:
    """Provenance of a parameter stretch: which original block it came from.

    The original parameter is offset + q for q in [0, length] when not
    flipped, and offset + (length - q) when flipped.
    """

    source: int
    offset: Fraction
    length: Fraction
    flipped: bool


@dataclass(frozen=True)
class BlockRepr:
    """One irreducible block: interval length, ambient dim, per-source terms."""

    index: int
    length: Fraction
    dim: int
    terms: tuple[BlockTerm, ...]
    pieces: tuple[Piece, ...] = ()

    def terms_of(self, gamma: str) -> list[BlockTerm]:
        return [t for t in self.terms if t.gamma == gamma]

    def gammas(self) -> list[str]:
        return sorted({t.gamma for t in self.terms})

    def generator_at(self, gamma: str, r) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for t in self.terms_of(gamma):
            out += float(t.tau(r)) * t.projector()
        return out

    def tagged(self) -> list[TaggedProjector]:
        return [TaggedProjector(t.gamma, (t.gamma, t.k), t.beta) for t in self.terms]


@dataclass(frozen=True)
class BoundaryTag:
    gamma: str
    k: int
    block: int
    end: int  # 0 or 1 (r = 0 / r = length)
    value: Fraction


@dataclass(frozen=True)
class BoundaryMap:
    """Involution pairing equal end values, with the 1/2/3 type trichotomy."""

    tags: tuple[BoundaryTag, ...]
    partner: Mapping[BoundaryTag, BoundaryTag]
    types: Mapping[BoundaryTag, int]


@dataclass(frozen=True)
class CanonicalBlock:
    length: Fraction
    kappa: int
    terms: tuple[BlockTerm, ...]  # betas live in R^kappa
    pieces: tuple[Piece, ...] = ()

    def terms_of(self, gamma: str) -> list[BlockTerm]:
        return [t for t in self.terms if t.gamma == gamma]

    def generator_at(self, gamma: str, r) -> np.ndarray:
        out = np.zeros((self.kappa, self.kappa))
        for t in self.terms_of(gamma):
            out += float(t.tau(r)) * t.projector()
        return out


@dataclass(frozen=True)
class CanonicalForm:
    sigma: tuple[str, ...]
    horizon: Fraction
    shifted: bool
    blocks: tuple[CanonicalBlock, ...]
    junctions: int
    notes: tuple[str, ...] = ()


def split_blocks(repr_: ParametricRepr, tol: float = DEFAULT_TOL) -> list[BlockRepr]:
    """Partition each family's projectors into equivalence classes -> blocks."""
    blocks: list[BlockRepr] = []
    for fam in repr_.families:
        entries: list[tuple[str, int, LinearTimeFn, np.ndarray]] = []
        for gamma in repr_.sigma:
            for term in repr_.block(fam.index, gamma).terms:
                entries.append((gamma, term.k, term.tau, term.beta))
        if not entries:
            continue
        tagged = [TaggedProjector(gamma, (gamma, k), beta)
                  for gamma, k, _, beta in entries]
        for cls in equivalence_classes(tagged, tol):
            per_gamma_count: dict[str, int] = {}
            terms = []
            for idx in cls.members:
                gamma, _, tau, beta = entries[idx]
                k = per_gamma_count.get(gamma, 0)
                per_gamma_count[gamma] = k + 1
                terms.append(BlockTerm(gamma, k, tau, beta))
            terms.sort(key=lambda t: (t.gamma, t.k))
            idx = len(blocks)
            blocks.append(BlockRepr(
                idx, fam.epsilon, fam.dim, tuple(terms),
                (Piece(idx, Fraction(0), fam.epsilon, False),)))
    return blocks


def boundary_map(blocks: Sequence[BlockRepr]) -> BoundaryMap:
    """Pair end tags with equal tau values, independently per source vertex."""
    tags: list[BoundaryTag] = []
    for b in blocks:
        for t in b.terms:
            for end in (0, 1):
                tags.append(BoundaryTag(t.gamma, t.k, b.index, end,
                                        t.tau.end_value(end)))
    partner: dict[BoundaryTag, BoundaryTag] = {}
    types: dict[BoundaryTag, int] = {}
    by_gamma: dict[str, dict[Fraction, list[BoundaryTag]]] = {}
    for tag in tags:
        by_gamma.setdefault(tag.gamma, {}).setdefault(tag.value, []).append(tag)
    for gamma, groups in by_gamma.items():
        for value, group in groups.items():
            if len(group) == 1:
                tag = group[0]
                partner[tag] = tag
                types[tag] = 1
            elif len(group) == 2:
                a, b = group
                partner[a], partner[b] = b, a
                kind = 2 if a.block == b.block else 3
                types[a] = types[b] = kind
            else:
                raise StructuralFault(
                    f"value {value} of source {gamma} is shared by "
                    f"{len(group)} end tags; expected at most 2")
    return BoundaryMap(tuple(tags), partner, types)


@dataclass(frozen=True)
class JunctionCandidate:
    block_a: int
    end_a: int
    block_b: int
    end_b: int
    pairing: tuple[tuple[tuple[str, int], tuple[str, int]], ...]


def junction_candidates(blocks: Sequence[BlockRepr],
                        bm: BoundaryMap) -> list[JunctionCandidate]:
    """Block-end pairs whose tag sets map onto each other bijectively (type 3)."""
    end_tags: dict[tuple[int, int], list[BoundaryTag]] = {}
    for tag in bm.tags:
        end_tags.setdefault((tag.block, tag.end), []).append(tag)
    out = []
    seen = set()
    for (bl, end), tags in sorted(end_tags.items()):
        if ((bl, end)) in seen:
            continue
        partners = [bm.partner[t] for t in tags]
        if any(bm.types[t] != 3 for t in tags):
            continue
        targets = {(p.block, p.end) for p in partners}
        if len(targets) != 1:
            continue
        tb, te = next(iter(targets))
        back = end_tags[(tb, te)]
        if len(back) != len(tags):
            continue
        if any(bm.types[t] != 3 or
               (bm.partner[t].block, bm.partner[t].end) != (bl, end)
               for t in back):
            continue
        seen.add((bl, end))
        seen.add((tb, te))
        pairs = [((t.gamma, t.k), (bm.partner[t].gamma, bm.partner[t].k))
                 for t in tags]
        a_side, b_side = (bl, end), (tb, te)
        if b_side < a_side:
            a_side, b_side = b_side, a_side
            pairs = [(kb, ka) for ka, kb in pairs]
        out.append(JunctionCandidate(a_side[0], a_side[1], b_side[0], b_side[1],
                                     tuple(sorted(pairs))))
    out.sort(key=lambda c: (c.block_a, c.end_a, c.block_b, c.end_b))
    return out


def transpose_block(b: BlockRepr) -> BlockRepr:
    terms = tuple(replace(t, tau=t.tau.transposed()) for t in b.terms)
    pieces = tuple(
        Piece(p.source, b.length - p.offset - p.length, p.length, not p.flipped)
        for p in reversed(b.pieces))
    return replace(b, terms=terms, pieces=pieces)


def junction(a: BlockRepr, end_a: int, b: BlockRepr, end_b: int,
             pairing: Mapping[tuple[str, int], tuple[str, int]],
             witness: np.ndarray, tol: float = DEFAULT_TOL) -> BlockRepr:
    """Glue b onto a through the given ends; the result runs a-first.

    The witness must carry each b projector onto its a partner; b's taus are
    continued past the seam, which requires exact value and slope agreement
    there (checked).
    """
    if end_a == 0:
        a = transpose_block(a)
    if end_b == 1:
        b = transpose_block(b)
    total = a.length + b.length
    b_terms = {(t.gamma, t.k): t for t in b.terms}
    new_terms = []
    for t in a.terms:
        tb = b_terms[pairing[(t.gamma, t.k)]]
        if t.tau(a.length) != tb.tau.intercept:
            raise SeamMismatch(
                f"seam values differ for {t.gamma}: {t.tau(a.length)} vs "
                f"{tb.tau.intercept}")
        if t.tau.slope != tb.tau.slope:
            raise SeamMismatch(f"seam slopes differ for {t.gamma}")
        mapped = witness @ tb.projector() @ witness.T
        if float(np.max(np.abs(mapped - t.projector()))) > 1e-7:
            raise SeamMismatch("witness does not carry the paired projector")
        new_terms.append(replace(t, tau=t.tau.extended(total)))
    pieces = a.pieces + tuple(
        Piece(p.source, a.length + p.offset, p.length, p.flipped)
        for p in b.pieces)
    return BlockRepr(min(a.index, b.index), total, a.dim,
                     tuple(new_terms), pieces)


def _renumber(blocks: list[BlockRepr]) -> list[BlockRepr]:
    return [replace(b, index=i) for i, b in enumerate(blocks)]


def canonicalize_blocks(blocks: Sequence[BlockRepr], tol: float = DEFAULT_TOL
                        ) -> tuple[list[BlockRepr], int, list[str]]:
    """Junction connected blocks until none remain; lowest-index-first order."""
    blocks = _renumber(list(blocks))
    notes: list[str] = []
    n_junctions = 0
    while True:
        bm = boundary_map(blocks)
        applied = False
        for cand in junction_candidates(blocks, bm):
            if cand.block_a == cand.block_b:
                note = (f"self-junction candidate rejected on block "
                        f"{cand.block_a} (both ends pair with each other)")
                if note not in notes:
                    notes.append(note)
                continue
            a, b = blocks[cand.block_a], blocks[cand.block_b]
            pairing_ab = dict(cand.pairing)
            idx_a = {(t.gamma, t.k): i for i, t in enumerate(a.terms)}
            idx_b = {(t.gamma, t.k): i for i, t in enumerate(b.terms)}
            index_pairing = {idx_a[ka]: idx_b[kb] for ka, kb in pairing_ab.items()}
            verdict = connection_test(a.tagged(), b.tagged(), index_pairing, tol)
            if not verdict.connected:
                continue
            joined = junction(a, cand.end_a, b, cand.end_b, pairing_ab,
                              verdict.witness, tol)
            keep = [blk for blk in blocks
                    if blk.index not in (cand.block_a, cand.block_b)]
            keep.insert(min(cand.block_a, cand.block_b), joined)
            blocks = _renumber(keep)
            n_junctions += 1
            applied = True
            break
        if not applied:
            break
    return list(blocks), n_junctions, notes


def reduce_block(b: BlockRepr, tol: float = DEFAULT_TOL) -> CanonicalBlock:
    """Rewrite a block on an orthonormal basis of its projector span."""
    q, _ = irreducible_reduction(b.tagged(), tol)
    kappa = q.shape[1]
    terms = []
    for t in b.terms:
        beta = q.T @ t.beta
        terms.append(BlockTerm(t.gamma, t.k, t.tau, beta))
    return CanonicalBlock(b.length, kappa, tuple(terms), b.pieces)


def canonicalize(repr_: ParametricRepr, tol: float = DEFAULT_TOL) -> CanonicalForm:
    """Full reduction: split, junction to exhaustion, orthonormal rewrite."""
    if not repr_.shifted:
        raise EikonalError("canonicalize expects the shifted representation")
    blocks = split_blocks(repr_, tol)
    done, n_junctions, notes = canonicalize_blocks(blocks, tol)
    canonical = tuple(reduce_block(b, tol) for b in done)
    for cb in canonical:
        _check_canonical_invariants(cb, tol)
    return CanonicalForm(repr_.sigma, repr_.horizon, repr_.shifted, canonical,
                         n_junctions, tuple(notes))


def recanonicalize(cf: CanonicalForm, tol: float = DEFAULT_TOL) -> CanonicalForm:
    """Run the junction loop again on a canonical form (idempotence check)."""
    done, n_junctions, notes = canonicalize_blocks(blocks_from_form(cf), tol)
    canonical = tuple(reduce_block(b, tol) for b in done)
    for cb in canonical:
        _check_canonical_invariants(cb, tol)
    return CanonicalForm(cf.sigma, cf.horizon, cf.shifted, canonical,
                         n_junctions, tuple(notes))


def blocks_from_form(cf: CanonicalForm) -> list[BlockRepr]:
    """View canonical blocks as plain blocks (for idempotence checks)."""
    out = []
    for i, cb in enumerate(cf.blocks):
        out.append(BlockRepr(i, cb.length, cb.kappa, cb.terms,
                             (Piece(i, Fraction(0), cb.length, False),)))
    return out


def _check_canonical_invariants(cb: CanonicalBlock, tol: float) -> None:
    for gamma in sorted({t.gamma for t in cb.terms}):
        terms = cb.terms_of(gamma)
        for i, t in enumerate(terms):
            for s in terms[i + 1:]:
                if abs(float(t.beta @ s.beta)) > 10 * tol:
                    raise EikonalError(
                        f"per-source projectors not orthogonal in a canonical "
                        f"block (source {gamma})")
        ranges = [t.tau.range_interval() for t in terms]
        ranges.sort()
        for (a1, b1), (a2, b2) in zip(ranges, ranges[1:]):
            if a2 < b1:
                raise EikonalError(
                    f"tau ranges of source {gamma} overlap inside a block")
    mats = [t.projector() for t in cb.terms]
    if word_span_dim(mats, tol) != cb.kappa ** 2:
        raise EikonalError("canonical block does not generate the full algebra")


def equivalent_forms(cf1: CanonicalForm, cf2: CanonicalForm,
                     tol: float = DEFAULT_TOL) -> bool:
    """Equality up to block order, per-block transposition and isomorphism."""
    if len(cf1.blocks) != len(cf2.blocks):
        return False

    def signature(cb: CanonicalBlock):
        ranges: dict[str, list] = {}
        for t in cb.terms:
            ranges.setdefault(t.gamma, []).append(t.tau.range_interval())
        return (cb.length, cb.kappa,
                tuple(sorted((g, tuple(sorted(r))) for g, r in ranges.items())))

    def blocks_match(a: CanonicalBlock, b: CanonicalBlock) -> bool:
        if signature(a) != signature(b):
            return False
        for flip in (False, True):
            bb_terms = [replace(t, tau=t.tau.transposed()) if flip else t
                        for t in b.terms]
            key_a = sorted(range(len(a.terms)), key=lambda i: (
                a.terms[i].gamma, a.terms[i].tau.intercept, a.terms[i].tau.slope))
            key_b = sorted(range(len(bb_terms)), key=lambda i: (
                bb_terms[i].gamma, bb_terms[i].tau.intercept,
                bb_terms[i].tau.slope))
            tags_a = [a.terms[i] for i in key_a]
            tags_b = [bb_terms[i] for i in key_b]
            if [( t.gamma, t.tau) for t in tags_a] != [(t.gamma, t.tau) for t in tags_b]:
                continue
            fam_a = [TaggedProjector(t.gamma, (t.gamma, t.k), t.beta) for t in tags_a]
            fam_b = [TaggedProjector(t.gamma, (t.gamma, t.k), t.beta) for t in tags_b]
            g1, g2 = gram_matrix(fam_a), gram_matrix(fam_b)
            if float(np.max(np.abs(g1 - g2))) > tol:
                continue
            c1, c2 = _angle_cosines(fam_a, tol), _angle_cosines(fam_b, tol)
            if c1 and max(abs(x - y) for x, y in zip(c1, c2)) > tol:
                continue
            return True
        return False

    remaining = list(range(len(cf2.blocks)))

    def assign(i: int) -> bool:
        if i == len(cf1.blocks):
            return True
        for j in list(remaining):
            if blocks_match(cf1.blocks[i], cf2.blocks[j]):
                remaining.remove(j)
                if assign(i + 1):
                    return True
                remaining.append(j)
        return False

    return assign(0)
