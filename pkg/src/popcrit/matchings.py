"""Matchings, deficiency, blocking pairs and vote-based comparison.

A matching assigns each vertex at most its upper quota of partners; lower
quotas are soft and their shortfall is the vertex deficiency.  Two matchings
are compared by votes: each vertex conceptually fills its unused capacity
with a bottom symbol (``None``) in both matchings, ignores positions that
agree (a shared partner, or bottom on both sides), fixes a bijection
between the remaining positions (a correspondence), and casts one vote per
bijection pair, +1 for a preferred partner, -1 for a worse one, where any
real partner beats bottom.  Bottom therefore shows up only on the side
where the vertex holds fewer real partners, exactly as many times as the
shortfall.  ``delta`` totals the votes for a given correspondence and
``max_delta`` maximizes over all correspondences, which decomposes into one
small assignment problem per vertex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import Instance, Side, VertexId

Edge = tuple[VertexId, VertexId]
CorrPair = tuple[Optional[VertexId], Optional[VertexId]]

# Largest per-vertex assignment solved by trying every permutation; bigger
# tables go to the Hungarian routine.  Tests exercise both routes on sizes
# where they overlap.
_PERMUTATION_LIMIT = 5


class MatchingError(ValueError):
    """Raised for malformed matching text or pairs violating the instance."""


@dataclass(frozen=True)
class Matching:
    """An immutable set of (a, b) edges."""

    pairs: frozenset[Edge]

    @staticmethod
    def from_pairs(pairs: Iterable[Edge]) -> "Matching":
        return Matching(frozenset(pairs))

    @cached_property
    def _partners(self) -> dict[VertexId, frozenset[VertexId]]:
        byv: dict[VertexId, set[VertexId]] = {}
        for a, b in self.pairs:
            byv.setdefault(a, set()).add(b)
            byv.setdefault(b, set()).add(a)
        return {v: frozenset(s) for v, s in byv.items()}

    def partners(self, v: VertexId) -> frozenset[VertexId]:
        return self._partners.get(v, frozenset())

    @property
    def size(self) -> int:
        return len(self.pairs)


def check_matching(inst: Instance, m: Matching) -> None:
    """Raise MatchingError unless every pair is an edge and no upper quota
    is exceeded."""
    for a, b in m.pairs:
        if a.side is not Side.A or b.side is not Side.B:
            raise MatchingError("matching pairs must be (A-vertex, B-vertex)")
        if (a, b) not in inst.edges:
            raise MatchingError(
                f"({inst.name(a)}, {inst.name(b)}) is not an edge of the instance"
            )
    for v in inst.all_vertices():
        if len(m.partners(v)) > inst.upper(v):
            raise MatchingError(
                f"{inst.name(v)} is matched above its upper quota {inst.upper(v)}"
            )


@dataclass(frozen=True)
class DeficiencyReport:
    per_vertex: Mapping[VertexId, int]
    total_a: int
    total_b: int

    @property
    def total(self) -> int:
        return self.total_a + self.total_b


def deficiency(inst: Instance, m: Matching) -> DeficiencyReport:
    """Per-vertex shortfall below the lower quotas, with per-side totals."""
    check_matching(inst, m)
    per_vertex = {}
    totals = {Side.A: 0, Side.B: 0}
    for v in inst.all_vertices():
        short = max(0, inst.lower(v) - len(m.partners(v)))
        per_vertex[v] = short
        totals[v.side] += short
    return DeficiencyReport(per_vertex, totals[Side.A], totals[Side.B])


def is_feasible(inst: Instance, m: Matching) -> bool:
    return deficiency(inst, m).total == 0


def blocking_pairs(inst: Instance, m: Matching) -> list[Edge]:
    """Edges outside m whose both endpoints would rather use them.

    A vertex wants the new edge when it has spare upper-quota room or
    prefers the other endpoint to one of its current partners.
    """
    check_matching(inst, m)
    out = []
    for a, b in sorted(inst.edges):
        if (a, b) in m.pairs:
            continue
        if _prefers_new(inst, m, a, b) and _prefers_new(inst, m, b, a):
            out.append((a, b))
    return out


def _prefers_new(inst: Instance, m: Matching, v: VertexId, u: VertexId) -> bool:
    mine = m.partners(v)
    if len(mine) < inst.upper(v):
        return True
    r = inst.rank(v, u)
    return any(inst.rank(v, w) > r for w in mine)


def vote(
    inst: Instance, v: VertexId, x: Optional[VertexId], y: Optional[VertexId]
) -> int:
    """How v compares partner x against partner y: +1, 0 or -1.

    ``None`` stands for the bottom symbol; every real partner beats it.
    Raises ValueError when a real argument is not acceptable to v.
    """
    if x is not None:
        rx = inst.rank(v, x)
    if y is not None:
        ry = inst.rank(v, y)
    if x == y:
        return 0
    if x is None:
        return -1
    if y is None:
        return 1
    return 1 if rx < ry else -1


@dataclass(frozen=True, eq=True)
class Correspondence:
    """Per-vertex bijection pairs between two padded partner-set differences.

    ``pairs[v]`` lists (x, y) with x drawn from M(v) minus N(v) plus bottom
    and y from N(v) minus M(v) plus bottom, for the matching pair (M, N) the
    correspondence was built for.  Every real difference member appears
    exactly once, and only the smaller difference is padded: bottoms on the
    x side number max(0, |N(v)| - |M(v)|) exactly, and symmetrically on the
    y side, so no pair is bottom on both sides.  Vertices with identical
    partner sets may be omitted.
    """

    pairs: Mapping[VertexId, tuple[CorrPair, ...]]


def validate_correspondence(
    inst: Instance, m: Matching, n: Matching, corr: Correspondence
) -> None:
    """Raise ValueError unless corr is a correspondence for (m, n)."""
    unknown = set(corr.pairs) - set(inst.all_vertices())
    if unknown:
        raise ValueError(f"correspondence mentions unknown vertices: {unknown}")
    for v in inst.all_vertices():
        mine, theirs = m.partners(v), n.partners(v)
        left_real = mine - theirs
        right_real = theirs - mine
        listed = corr.pairs.get(v, ())
        xs = [x for x, _ in listed if x is not None]
        ys = [y for _, y in listed if y is not None]
        if sorted(xs) != sorted(left_real) or sorted(ys) != sorted(right_real):
            raise ValueError(
                f"correspondence at {inst.name(v)} does not cover the "
                f"partner-set difference exactly once"
            )
        left_bottoms = sum(1 for x, _ in listed if x is None)
        right_bottoms = sum(1 for _, y in listed if y is None)
        if left_bottoms != max(0, len(right_real) - len(left_real)):
            raise ValueError(
                f"wrong number of left bottoms at {inst.name(v)}: the x side "
                f"pads with exactly its shortfall in differing partners"
            )
        if right_bottoms != max(0, len(left_real) - len(right_real)):
            raise ValueError(
                f"wrong number of right bottoms at {inst.name(v)}: the y side "
                f"pads with exactly its shortfall in differing partners"
            )


def delta(inst: Instance, m: Matching, n: Matching, corr: Correspondence) -> int:
    """Total vote for m over n under the given correspondence."""
    check_matching(inst, m)
    check_matching(inst, n)
    validate_correspondence(inst, m, n, corr)
    total = 0
    for v, listed in corr.pairs.items():
        for x, y in listed:
            total += vote(inst, v, x, y)
    return total


def max_delta(inst: Instance, m: Matching, n: Matching) -> int:
    """Maximum of delta(n, m, corr) over every correspondence.

    m is popular against n exactly when the result is at most zero.  The
    maximum decomposes per vertex because a correspondence is a disjoint
    union of per-vertex bijections.
    """
    check_matching(inst, m)
    check_matching(inst, n)
    total = 0
    for v in inst.all_vertices():
        total += vertex_gain(inst, v, n.partners(v), m.partners(v))
    return total


def vertex_gain(
    inst: Instance,
    v: VertexId,
    new_side: frozenset[VertexId],
    old_side: frozenset[VertexId],
) -> int:
    """Best vote total v can cast for partner set new_side over old_side.

    The smaller partner-set difference is padded with bottoms up to the
    larger one before maximizing over bijections: a vertex gaining
    positions plays the surplus new partners against bottom, a vertex
    losing positions plays bottom against the departed ones, and no
    bottom-versus-bottom pairs exist.
    """
    gained = sorted(new_side - old_side)
    lost = sorted(old_side - new_side)
    if not gained and not lost:
        return 0
    size = max(len(gained), len(lost))
    rows: list[Optional[VertexId]] = list(gained) + [None] * (size - len(gained))
    cols: list[Optional[VertexId]] = list(lost) + [None] * (size - len(lost))
    table = [[vote(inst, v, x, y) for y in cols] for x in rows]
    if size <= _PERMUTATION_LIMIT:
        return max(
            sum(table[i][j] for i, j in enumerate(perm))
            for perm in itertools.permutations(range(size))
        )
    weights = np.array(table)
    rows_idx, cols_idx = linear_sum_assignment(weights, maximize=True)
    return int(weights[rows_idx, cols_idx].sum())


def random_correspondence(
    inst: Instance, m: Matching, n: Matching, rng
) -> Correspondence:
    """A uniformly shuffled correspondence for (m, n), driven by rng."""
    out: dict[VertexId, tuple[CorrPair, ...]] = {}
    for v in inst.all_vertices():
        mine, theirs = m.partners(v), n.partners(v)
        if mine == theirs:
            continue
        rows: list[Optional[VertexId]] = sorted(mine - theirs)
        cols: list[Optional[VertexId]] = sorted(theirs - mine)
        size = max(len(rows), len(cols))
        rows += [None] * (size - len(rows))
        cols += [None] * (size - len(cols))
        rng.shuffle(cols)
        out[v] = tuple(zip(rows, cols))
    return Correspondence(out)


def parse_matching(inst: Instance, text: str) -> Matching:
    """Parse lines of ``<a-name> <b-name>`` into a matching.

    ``#`` starts a comment.  Raises MatchingError for unknown names, pairs
    in the wrong side order, duplicates, non-edges, or upper-quota
    violations.
    """
    pairs: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise MatchingError(f"line {lineno}: expected '<a-name> <b-name>'")
        try:
            a, b = inst.name_to_id[tokens[0]], inst.name_to_id[tokens[1]]
        except KeyError as missing:
            raise MatchingError(f"line {lineno}: unknown vertex {missing}") from None
        if a.side is not Side.A or b.side is not Side.B:
            raise MatchingError(
                f"line {lineno}: expected an A-vertex then a B-vertex"
            )
        if (a, b) in pairs:
            raise MatchingError(f"line {lineno}: duplicate pair")
        pairs.add((a, b))
    m = Matching(frozenset(pairs))
    try:
        check_matching(inst, m)
    except MatchingError as exc:
        raise MatchingError(str(exc)) from None
    return m


def serialize_matching(inst: Instance, m: Matching) -> str:
    """Render a matching in the format accepted by parse_matching."""
    lines = [
        f"{inst.name(a)} {inst.name(b)}" for a, b in sorted(m.pairs)
    ]
    return "\n".join(lines) + ("\n" if lines else "")
