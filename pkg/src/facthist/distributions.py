"""Product distributions with exact rational arithmetic.

A product distribution assigns an independent probability vector to each
factor; the probability of an outcome is the product of its coordinate
probabilities.  All verdicts below are exact equalities over rationals,
never tolerance comparisons, except for the optional float mode of
is_cond_independent meant for spaces too large to enumerate exactly.

Internally the checks run on integer weights: scaling each factor's vector
to a common denominator leaves every conditional-probability identity
unchanged after cross multiplication, so the hot paths never build Fraction
objects.  Reported probabilities are still exact Fractions.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    DegenerateBlockError,
    FormatError,
    InvalidOutcomeError,
    PerturbationError,
    PreconditionError,
    UnknownFactorError,
)
from .history import conditional_history, structurally_independent
from .space import Block, FactoredSpace, RandomVariable, blocks_of, trivial_var

__all__ = [
    "ProductDistribution",
    "PerturbationPair",
    "CiReport",
    "SoundnessReport",
    "InvarianceReport",
    "IdentityReport",
    "uniform_product",
    "sample_product",
    "sample_vector",
    "spawn_seed",
    "outcome_prob",
    "cond_table",
    "block_conditional",
    "is_cond_independent",
    "verify_soundness",
    "find_witness",
    "perturb_factor",
    "irrelevance_invariance",
    "product_difference_identity",
    "distribution_to_doc",
    "distribution_from_doc",
]

SAMPLE_GRID_MAX = 101


@dataclass(frozen=True)
class ProductDistribution:
    """One exact probability vector per factor, in factor order."""

    per_factor: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if not self.per_factor:
            raise ValueError("a product distribution needs at least one factor vector")
        for k, vec in enumerate(self.per_factor):
            if not vec:
                raise ValueError(f"factor {k} has an empty probability vector")
            if any(p < 0 for p in vec):
                raise ValueError(f"factor {k} has a negative probability")
            if sum(vec) != 1:
                raise ValueError(f"factor {k} probabilities sum to {sum(vec)}, not 1")

    @property
    def is_positive(self) -> bool:
        return all(p > 0 for vec in self.per_factor for p in vec)


@dataclass(frozen=True)
class PerturbationPair:
    """Two positive product distributions differing only in one factor's vector."""

    base: ProductDistribution
    perturbed: ProductDistribution
    factor: int

    def __post_init__(self) -> None:
        b, q = self.base.per_factor, self.perturbed.per_factor
        if len(b) != len(q):
            raise PerturbationError("base and perturbed have different factor counts")
        if not 0 <= self.factor < len(b):
            raise PerturbationError(f"factor index {self.factor} out of range")
        for k, (vb, vq) in enumerate(zip(b, q)):
            if len(vb) != len(vq):
                raise PerturbationError(f"factor {k} vectors have different lengths")
            if k != self.factor and vb != vq:
                raise PerturbationError(
                    f"vectors differ at factor {k}, expected differences only at "
                    f"factor {self.factor}"
                )
        if not (self.base.is_positive and self.perturbed.is_positive):
            raise PerturbationError("perturbation pairs must be strictly positive")


@dataclass(frozen=True)
class CiReport:
    """Outcome of one conditional-independence check."""

    holds: bool
    first_violation: tuple[str, str, str, Fraction, Fraction] | None = None


@dataclass(frozen=True)
class SoundnessReport:
    """Exact CI results for a batch of sampled product distributions."""

    samples: int
    violations: tuple[tuple[int, CiReport], ...]

    @property
    def all_hold(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class InvarianceReport:
    """Per-block comparison of conditionals under a perturbation pair.

    Blocks whose history contains the perturbed factor are skipped; on every
    other block the base and perturbed conditionals must agree exactly.
    """

    factor: int
    checked: tuple[str, ...]
    skipped: tuple[str, ...]
    violations: tuple[tuple[str, str, Fraction, Fraction], ...]

    @property
    def holds(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class IdentityReport:
    """Whether (P(x|z) - Q(x|z)) * (P(y|z) - Q(y|z)) vanished everywhere."""

    holds: bool
    first_violation: tuple[str, str, str, Fraction, Fraction] | None = None


def _check_arity(space: FactoredSpace, p: ProductDistribution) -> None:
    if len(p.per_factor) != space.factor_count:
        raise ValueError(
            f"distribution has {len(p.per_factor)} factor vectors, "
            f"space has {space.factor_count} factors"
        )
    for f, vec in zip(space.factors, p.per_factor):
        if len(vec) != f.size:
            raise ValueError(
                f"vector for factor {f.name!r} has {len(vec)} entries, "
                f"domain has {f.size}"
            )


def uniform_product(space: FactoredSpace) -> ProductDistribution:
    """The uniform vector on every factor."""
    return ProductDistribution(
        per_factor=tuple(
            (Fraction(1, f.size),) * f.size for f in space.factors
        )
    )


def sample_vector(rng: random.Random, size: int) -> tuple[Fraction, ...]:
    """A positive rational vector: numerators uniform on 1..101, normalized."""
    nums = [rng.randint(1, SAMPLE_GRID_MAX) for _ in range(size)]
    total = sum(nums)
    return tuple(Fraction(n, total) for n in nums)


def sample_product(space: FactoredSpace, seed: int) -> ProductDistribution:
    """A strictly positive rational product distribution, deterministic per seed.

    Every entry is at least 1/(101*d) for a d-valued factor, so sampled
    distributions never have degenerate blocks.
    """
    rng = random.Random(seed)
    return ProductDistribution(
        per_factor=tuple(sample_vector(rng, f.size) for f in space.factors)
    )


def outcome_prob(p: ProductDistribution, o: Sequence[int]) -> Fraction:
    """Probability of one outcome: the product of its coordinate entries."""
    if len(o) != len(p.per_factor):
        raise InvalidOutcomeError(
            f"outcome has {len(o)} coordinates, distribution has {len(p.per_factor)}"
        )
    acc = Fraction(1)
    for v, vec in zip(o, p.per_factor):
        if not 0 <= v < len(vec):
            raise InvalidOutcomeError(f"coordinate {v} outside a domain of {len(vec)}")
        acc *= vec[v]
    return acc


def _int_vectors(p: ProductDistribution) -> list[list[int]]:
    # Scale each factor vector to integers; proportionality per factor is all
    # the conditional identities need.
    out = []
    for vec in p.per_factor:
        scale = math.lcm(*(f.denominator for f in vec))
        out.append([int(f * scale) for f in vec])
    return out


def _weights(space: FactoredSpace, p: ProductDistribution) -> list[int]:
    """Integer weight per outcome, proportional to its probability."""
    _check_arity(space, p)
    vecs = _int_vectors(p)
    w = [1] * space.outcome_count
    for i in range(space.factor_count):
        col = space.digits(i)
        vec = vecs[i]
        for r in range(space.outcome_count):
            w[r] *= vec[col[r]]
    return w


def _block_marginal(
    weights: Sequence[int], c: Block, table: Sequence[int], k: int
) -> tuple[int, list[int]]:
    """Total block weight plus the weight of each of the k values on it."""
    per_value = [0] * k
    total = 0
    for r in c.ranks:
        w = weights[r]
        total += w
        per_value[table[r]] += w
    return total, per_value


def block_conditional(
    space: FactoredSpace, p: ProductDistribution, x: RandomVariable, c: Block
) -> dict[str, Fraction]:
    """P(x = value | C) for every codomain value, as exact Fractions."""
    weights = _weights(space, p)
    total, per_value = _block_marginal(weights, c, x.table, len(x.codomain))
    if total == 0:
        raise DegenerateBlockError(f"block {c.label!r} has zero probability mass")
    return {
        label: Fraction(per_value[k], total) for k, label in enumerate(x.codomain)
    }


def cond_table(
    space: FactoredSpace,
    p: ProductDistribution,
    x: RandomVariable,
    z: RandomVariable | None = None,
) -> dict[tuple[str, str], Fraction]:
    """P(x = xv | z = zv) for every attained zv and every xv.

    Rows sum to 1; a zero-mass block (possible only for non-positive p)
    raises DegenerateBlockError.
    """
    if z is None:
        z = trivial_var(space)
    weights = _weights(space, p)
    out: dict[tuple[str, str], Fraction] = {}
    for zlabel, c in blocks_of(space, z).items():
        total, per_value = _block_marginal(weights, c, x.table, len(x.codomain))
        if total == 0:
            raise DegenerateBlockError(f"block {zlabel!r} has zero probability mass")
        for k, xlabel in enumerate(x.codomain):
            out[(zlabel, xlabel)] = Fraction(per_value[k], total)
    return out


def is_cond_independent(
    space: FactoredSpace,
    p: ProductDistribution,
    x: RandomVariable,
    y: RandomVariable,
    z: RandomVariable | None = None,
    *,
    tolerance: float | None = None,
) -> CiReport:
    """Exact check of P(x,y|z) = P(x|z) * P(y|z) on every block of z.

    With ``tolerance`` set, comparisons switch to floats with that absolute
    tolerance; the default mode admits no error at all.
    """
    if z is None:
        z = trivial_var(space)
    weights = _weights(space, p)
    kx, ky = len(x.codomain), len(y.codomain)
    for zlabel, c in blocks_of(space, z).items():
        total = 0
        wx = [0] * kx
        wy = [0] * ky
        joint: dict[tuple[int, int], int] = {}
        xt, yt = x.table, y.table
        for r in c.ranks:
            w = weights[r]
            total += w
            a, b = xt[r], yt[r]
            wx[a] += w
            wy[b] += w
            key = (a, b)
            joint[key] = joint.get(key, 0) + w
        if total == 0:
            raise DegenerateBlockError(f"block {zlabel!r} has zero probability mass")
        for a in range(kx):
            for b in range(ky):
                lhs_num = joint.get((a, b), 0) * total
                rhs_num = wx[a] * wy[b]
                if tolerance is None:
                    ok = lhs_num == rhs_num
                else:
                    ok = abs(lhs_num - rhs_num) <= tolerance * total * total
                if not ok:
                    return CiReport(
                        holds=False,
                        first_violation=(
                            zlabel,
                            x.codomain[a],
                            y.codomain[b],
                            Fraction(joint.get((a, b), 0), total),
                            Fraction(wx[a] * wy[b], total * total),
                        ),
                    )
    return CiReport(holds=True)


def spawn_seed(seed: int, index: int) -> int:
    """Deterministic child seed for sample number ``index`` of a batch."""
    return seed * 1_000_003 + index + 1


def verify_soundness(
    space: FactoredSpace,
    x: RandomVariable,
    y: RandomVariable,
    z: RandomVariable | None,
    n: int,
    seed: int,
) -> SoundnessReport:
    """Exact CI under n sampled positive distributions; requires a structural pair."""
    if not structurally_independent(space, x, y, z).independent:
        raise PreconditionError(
            f"{x.name!r} and {y.name!r} are not structurally independent given the "
            "conditioner; soundness checks only apply to structural pairs"
        )
    violations = []
    for i in range(n):
        p = sample_product(space, spawn_seed(seed, i))
        report = is_cond_independent(space, p, x, y, z)
        if not report.holds:
            violations.append((i, report))
    return SoundnessReport(samples=n, violations=tuple(violations))


def find_witness(
    space: FactoredSpace,
    x: RandomVariable,
    y: RandomVariable,
    z: RandomVariable | None = None,
    max_tries: int = 64,
    seed: int = 0,
) -> ProductDistribution | None:
    """First sampled distribution violating CI, or None after max_tries.

    Only defined for non-structural pairs; a miss flags the instance for
    review rather than counting as evidence either way.
    """
    if structurally_independent(space, x, y, z).independent:
        raise PreconditionError(
            f"{x.name!r} and {y.name!r} are structurally independent given the "
            "conditioner; no witness can exist"
        )
    for i in range(max_tries):
        p = sample_product(space, spawn_seed(seed, i))
        if not is_cond_independent(space, p, x, y, z).holds:
            return p
    return None


def perturb_factor(
    p: ProductDistribution, i: int, v: Sequence[Fraction]
) -> PerturbationPair:
    """Replace factor i's vector by v, keeping everything else fixed."""
    if not 0 <= i < len(p.per_factor):
        raise UnknownFactorError(f"factor id {i} outside distribution arity")
    vec = tuple(Fraction(e) for e in v)
    if len(vec) != len(p.per_factor[i]):
        raise PerturbationError(
            f"replacement vector has {len(vec)} entries, factor {i} has "
            f"{len(p.per_factor[i])}"
        )
    if any(e <= 0 for e in vec):
        raise PerturbationError("replacement vector must be strictly positive")
    if sum(vec) != 1:
        raise PerturbationError(f"replacement vector sums to {sum(vec)}, not 1")
    per_factor = list(p.per_factor)
    per_factor[i] = vec
    return PerturbationPair(
        base=p, perturbed=ProductDistribution(tuple(per_factor)), factor=i
    )


def irrelevance_invariance(
    space: FactoredSpace,
    pair: PerturbationPair,
    x: RandomVariable,
    z: RandomVariable | None = None,
) -> InvarianceReport:
    """Conditionals of x must match on every block whose history omits the factor."""
    if z is None:
        z = trivial_var(space)
    ch = conditional_history(space, x, z)
    wb = _weights(space, pair.base)
    wq = _weights(space, pair.perturbed)
    checked: list[str] = []
    skipped: list[str] = []
    violations: list[tuple[str, str, Fraction, Fraction]] = []
    k = len(x.codomain)
    for zlabel, c in blocks_of(space, z).items():
        if pair.factor in ch.per_block[zlabel]:
            skipped.append(zlabel)
            continue
        checked.append(zlabel)
        tb, pb = _block_marginal(wb, c, x.table, k)
        tq, pq = _block_marginal(wq, c, x.table, k)
        if tb == 0 or tq == 0:
            raise DegenerateBlockError(f"block {zlabel!r} has zero probability mass")
        for a in range(k):
            if pb[a] * tq != pq[a] * tb:
                violations.append(
                    (
                        zlabel,
                        x.codomain[a],
                        Fraction(pb[a], tb),
                        Fraction(pq[a], tq),
                    )
                )
    return InvarianceReport(
        factor=pair.factor,
        checked=tuple(checked),
        skipped=tuple(skipped),
        violations=tuple(violations),
    )


def product_difference_identity(
    space: FactoredSpace,
    pair: PerturbationPair,
    x: RandomVariable,
    y: RandomVariable,
    z: RandomVariable | None = None,
) -> IdentityReport:
    """For structural pairs, the two conditional differences can never both move.

    Checks (P(x=a|z) - Q(x=a|z)) * (P(y=b|z) - Q(y=b|z)) == 0 exactly for
    every block and every value pair; value events suffice because within a
    block either every x-difference or every y-difference vanishes.
    """
    if z is None:
        z = trivial_var(space)
    if not structurally_independent(space, x, y, z).independent:
        raise PreconditionError(
            f"{x.name!r} and {y.name!r} are not structurally independent given the "
            "conditioner; the product-difference identity only applies to "
            "structural pairs"
        )
    wb = _weights(space, pair.base)
    wq = _weights(space, pair.perturbed)
    kx, ky = len(x.codomain), len(y.codomain)
    for zlabel, c in blocks_of(space, z).items():
        tb, pbx = _block_marginal(wb, c, x.table, kx)
        tq, pqx = _block_marginal(wq, c, x.table, kx)
        _, pby = _block_marginal(wb, c, y.table, ky)
        _, pqy = _block_marginal(wq, c, y.table, ky)
        if tb == 0 or tq == 0:
            raise DegenerateBlockError(f"block {zlabel!r} has zero probability mass")
        for a in range(kx):
            dx = pbx[a] * tq - pqx[a] * tb
            if dx == 0:
                continue
            for b in range(ky):
                dy = pby[b] * tq - pqy[b] * tb
                if dy != 0:
                    return IdentityReport(
                        holds=False,
                        first_violation=(
                            zlabel,
                            x.codomain[a],
                            y.codomain[b],
                            Fraction(dx, tb * tq),
                            Fraction(dy, tb * tq),
                        ),
                    )
    return IdentityReport(holds=True)


def distribution_to_doc(p: ProductDistribution) -> dict:
    """Serialize to the JSON shape: one list of "num/den" strings per factor."""
    return {
        "per_factor": [
            [f"{e.numerator}/{e.denominator}" for e in vec] for vec in p.per_factor
        ]
    }


def distribution_from_doc(doc: object) -> ProductDistribution:
    """Parse the JSON document shape back into a product distribution."""
    if not isinstance(doc, dict):
        raise FormatError("distribution document must be a JSON object")
    per_factor_raw = doc.get("per_factor")
    if not isinstance(per_factor_raw, list) or not per_factor_raw:
        raise FormatError("distribution document needs a non-empty 'per_factor' list")
    vectors = []
    for k, vec in enumerate(per_factor_raw):
        if not isinstance(vec, list) or not vec:
            raise FormatError(f"per_factor[{k}] must be a non-empty list")
        entries = []
        for e in vec:
            if not isinstance(e, str):
                raise FormatError(f"per_factor[{k}] entries must be 'num/den' strings")
            try:
                entries.append(Fraction(e))
            except (ValueError, ZeroDivisionError):
                raise FormatError(f"per_factor[{k}] entry {e!r} is not a rational") from None
        vectors.append(tuple(entries))
    try:
        return ProductDistribution(per_factor=tuple(vectors))
    except ValueError as exc:
        raise FormatError(str(exc)) from None
