"""Generation, conditional histories, and structural independence.

A subset J of factor indices *generates* a variable x on a block C when two
conditions hold:

* determination: outcomes in C with equal J-coordinates agree on x, and
* rectangle: C equals the recombination of its J-projections with its
  complementary projections, i.e. |C| = |proj_J(C)| * |proj_Jbar(C)|.

The counting form of the rectangle test is exact, not a heuristic: distinct
outcomes of C have distinct (proj_J, proj_Jbar) pairs, and those pairs always
lie inside the projection product, so equality of counts says every cross
pair is attained.

Generating sets are closed under intersection, so there is a unique
subset-minimal one, the *history* of x given C.  Enumerating subsets by
increasing cardinality and returning the first generating set therefore
returns the history: the history is contained in every generating set, so
any generating set of minimum cardinality is the history itself.

The *conditional history* maps every attained value of a conditioning
variable z to the history on that block.  Two variables are *structurally
independent* given z when their histories are disjoint on every block; this
is exactly conditional independence under every product distribution over
the factors (soundness and completeness are exercised end to end by the
verification suites and the acceptance tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .errors import InvariantViolationError
from .space import (
    Block,
    FactoredSpace,
    IndexSet,
    RandomVariable,
    blocks_of,
    ensure_block,
    ensure_on_space,
    factor_var,
    trivial_var,
)

__all__ = [
    "ConditionalHistory",
    "IndependenceVerdict",
    "DisintegrationAtoms",
    "is_rectangle",
    "determines",
    "generates",
    "history",
    "history_via_atoms",
    "conditional_history",
    "structurally_independent",
    "disintegration_atoms",
    "structural_time_leq",
]


@dataclass(frozen=True)
class ConditionalHistory:
    """History of one variable on every block of a conditioning variable."""

    variable: str
    given: str
    per_block: Mapping[str, IndexSet]


@dataclass(frozen=True)
class IndependenceVerdict:
    """Structural independence verdict with the per-block history overlaps.

    ``overlaps`` holds only the blocks whose histories intersect, so the
    verdict is affirmative exactly when the mapping is empty.
    """

    independent: bool
    overlaps: Mapping[str, IndexSet]


@dataclass(frozen=True)
class DisintegrationAtoms:
    """Finest splitting of a block: atoms partition the non-constant factors."""

    atoms: tuple[IndexSet, ...]
    trivial_part: IndexSet


def _scan_rectangle(space: FactoredSpace, ranks: Sequence[int], ids: Sequence[int]) -> bool:
    cols = [space.scaled_digits(i) for i in ids]
    left: set[int] = set()
    right: set[int] = set()
    for r in ranks:
        a = 0
        for col in cols:
            a += col[r]
        left.add(a)
        right.add(r - a)
    return len(ranks) == len(left) * len(right)


def _scan_determines(
    space: FactoredSpace, ranks: Sequence[int], ids: Sequence[int], table: Sequence[int]
) -> bool:
    cols = [space.scaled_digits(i) for i in ids]
    seen: dict[int, int] = {}
    for r in ranks:
        a = 0
        for col in cols:
            a += col[r]
        v = table[r]
        prev = seen.setdefault(a, v)
        if prev != v:
            return False
    return True


def _scan_generates(
    space: FactoredSpace, ranks: Sequence[int], ids: Sequence[int], table: Sequence[int]
) -> bool:
    # One pass for both conditions; a determination conflict exits early.
    cols = [space.scaled_digits(i) for i in ids]
    left: set[int] = set()
    right: set[int] = set()
    seen: dict[int, int] = {}
    for r in ranks:
        a = 0
        for col in cols:
            a += col[r]
        v = table[r]
        prev = seen.setdefault(a, v)
        if prev != v:
            return False
        left.add(a)
        right.add(r - a)
    return len(ranks) == len(left) * len(right)


def is_rectangle(space: FactoredSpace, c: Block, j: IndexSet) -> bool:
    """Does C recombine as proj_J(C) x proj_Jbar(C)?"""
    ensure_block(space, c)
    if j.size != space.factor_count:
        raise ValueError("index set universe does not match the space")
    return _scan_rectangle(space, c.ranks, j.members())


def determines(space: FactoredSpace, c: Block, j: IndexSet, x: RandomVariable) -> bool:
    """Do equal J-coordinates force equal x-values on C?"""
    ensure_block(space, c)
    ensure_on_space(space, x)
    if j.size != space.factor_count:
        raise ValueError("index set universe does not match the space")
    return _scan_determines(space, c.ranks, j.members(), x.table)


def generates(space: FactoredSpace, c: Block, j: IndexSet, x: RandomVariable) -> bool:
    """determines and is_rectangle in one pass."""
    ensure_block(space, c)
    ensure_on_space(space, x)
    if j.size != space.factor_count:
        raise ValueError("index set universe does not match the space")
    return _scan_generates(space, c.ranks, j.members(), x.table)


def history(space: FactoredSpace, c: Block, x: RandomVariable) -> IndexSet:
    """The unique subset-minimal generating set of x on C."""
    ensure_block(space, c)
    ensure_on_space(space, x)
    n = space.factor_count
    ranks = c.ranks
    table = x.table
    for k in range(n + 1):
        for ids in combinations(range(n), k):
            if _scan_generates(space, ranks, ids, table):
                return IndexSet.of(ids, n)
    raise InvariantViolationError(
        f"no generating set found for {x.name!r}; the full index set must generate"
    )


def conditional_history(
    space: FactoredSpace, x: RandomVariable, z: RandomVariable | None = None
) -> ConditionalHistory:
    """history(x | block) for every attained value of z (trivial z by default)."""
    if z is None:
        z = trivial_var(space)
    per_block = {
        label: history(space, block, x) for label, block in blocks_of(space, z).items()
    }
    return ConditionalHistory(variable=x.name, given=z.name, per_block=per_block)


def structurally_independent(
    space: FactoredSpace,
    x: RandomVariable,
    y: RandomVariable,
    z: RandomVariable | None = None,
) -> IndependenceVerdict:
    """Are the histories of x and y disjoint on every block of z?"""
    if z is None:
        z = trivial_var(space)
    overlaps: dict[str, IndexSet] = {}
    for label, block in blocks_of(space, z).items():
        inter = history(space, block, x) & history(space, block, y)
        if inter:
            overlaps[label] = inter
    return IndependenceVerdict(independent=not overlaps, overlaps=overlaps)


def disintegration_atoms(space: FactoredSpace, c: Block) -> DisintegrationAtoms:
    """Constant factors of C plus the finest partition of the rest.

    The atom containing a non-constant factor i is history(U_i | C); the
    rectangle sets of C are exactly the unions of atoms together with any
    subset of the constant part.  A failure of the partition property would
    mean the closure laws are broken, so it raises InvariantViolationError.
    """
    ensure_block(space, c)
    n = space.factor_count
    trivial_ids = []
    for i in range(n):
        col = space.digits(i)
        first = col[c.ranks[0]]
        if all(col[r] == first for r in c.ranks):
            trivial_ids.append(i)
    trivial_part = IndexSet.of(trivial_ids, n)
    atoms: dict[int, IndexSet] = {}
    for i in range(n):
        if i in trivial_part:
            continue
        atom = history(space, c, factor_var(space, i))
        if i not in atom:
            raise InvariantViolationError(
                f"factor {i} missing from its own atom on block {c.label!r}"
            )
        atoms[atom.mask] = atom
    ordered = tuple(atoms[m] for m in sorted(atoms))
    covered = 0
    for atom in ordered:
        if covered & atom.mask:
            raise InvariantViolationError(
                f"atoms overlap on block {c.label!r}"
            )
        covered |= atom.mask
    if covered != trivial_part.complement().mask:
        raise InvariantViolationError(
            f"atoms do not cover the non-constant factors on block {c.label!r}"
        )
    return DisintegrationAtoms(atoms=ordered, trivial_part=trivial_part)


def history_via_atoms(space: FactoredSpace, c: Block, x: RandomVariable) -> IndexSet:
    """Atom-based history: drop every atom whose removal keeps x determined.

    Agrees with history() by construction (the history is a union of atoms,
    and an atom lies inside it exactly when the complementary factors fail
    to determine x); the test suite checks the agreement property.
    """
    ensure_on_space(space, x)
    parts = disintegration_atoms(space, c)
    mask = 0
    for atom in parts.atoms:
        if not determines(space, c, atom.complement(), x):
            mask |= atom.mask
    return IndexSet(mask, space.factor_count)


def structural_time_leq(
    space: FactoredSpace,
    x: RandomVariable,
    y: RandomVariable,
    z: RandomVariable | None = None,
) -> bool:
    """Is history(x) contained in history(y) on every block of z?"""
    if z is None:
        z = trivial_var(space)
    for block in blocks_of(space, z).values():
        if not history(space, block, x).issubset(history(space, block, y)):
            return False
    return True
