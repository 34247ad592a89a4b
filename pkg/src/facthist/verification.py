"""Randomized, seeded verification suites for the package's laws.

Every suite draws instances deterministically from a master seed: structure
generation uses string-keyed RNG streams, distribution sampling uses integer
subseeds derived by hashing, so results are identical regardless of
execution order and reports are byte-for-byte reproducible.

Asserted laws (semigraphoid axioms, history laws, closure properties,
soundness, the perturbation identities) must hold on every instance; a
failure is a defect and makes the suite report as failed.  Two outcomes are
deliberately weaker: a completeness witness miss is retried once with a
fresh stream and only a reproducible miss counts as a failure, and the
maximality direction of the history/irrelevance duality is budgeted search,
so a miss is recorded as inconclusive, never as a pass.  The separation
characterization is exploratory only; agreements and disagreements are
recorded without affecting the verdict.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

from .distributions import (
    ProductDistribution,
    _block_marginal,
    _weights,
    irrelevance_invariance,
    perturb_factor,
    product_difference_identity,
    sample_product,
    sample_vector,
    find_witness,
    verify_soundness,
)
from .history import (
    conditional_history,
    disintegration_atoms,
    generates,
    history,
    history_via_atoms,
    is_rectangle,
    structurally_independent,
)
from .space import (
    DEFAULT_MAX_FACTORS,
    Block,
    Factor,
    FactoredSpace,
    IndexSet,
    RandomVariable,
    blocks_of,
    factor_var,
    fold_pair,
    pair_var,
    space_to_doc,
)

__all__ = [
    "SEMIGRAPHOID_AXIOMS",
    "HISTORY_LAWS",
    "SuiteConfig",
    "LawTally",
    "SuiteReport",
    "DualityOutcome",
    "SeparationOutcome",
    "gen_random_space",
    "gen_random_variable",
    "check_semigraphoid",
    "check_history_laws",
    "check_duality",
    "check_separation_characterization",
    "run_suite",
]

IRRELEVANCE_TRIALS = 3

SEMIGRAPHOID_AXIOMS = (
    "symmetry",
    "decomposition",
    "weak_union",
    "contraction",
    "composition",
)

HISTORY_LAWS = (
    "self_emptiness",
    "emptiness",
    "compositionality",
    "monotonicity",
    "removal",
    "null",
    "atom_law",
    "generating_intersection",
    "minimality",
    "rectangle_field",
    "rectangle_symmetry",
    "atoms_rectangle",
    "atoms_fast_path",
)


@dataclass(frozen=True)
class SuiteConfig:
    """Generation bounds and budgets for one suite run."""

    seed: int = 0
    iterations: int = 20
    max_factors: int = 4
    max_domain: int = 3
    sample_count: int = 50
    witness_budget: int = 64
    perturbation_budget: int = 16

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if not 2 <= self.max_factors <= DEFAULT_MAX_FACTORS:
            raise ValueError(f"max_factors must lie in 2..{DEFAULT_MAX_FACTORS}")
        if self.max_domain < 2:
            raise ValueError("max_domain must be at least 2")
        if min(self.sample_count, self.witness_budget, self.perturbation_budget) < 0:
            raise ValueError("budgets must be non-negative")


def _int_seed(seed: int, tag: str, k: int = 0) -> int:
    digest = hashlib.sha256(f"{seed}:{tag}:{k}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _stream(seed: int, tag: str, k: int = 0) -> random.Random:
    return random.Random(f"{seed}:{tag}:{k}")


def gen_random_space(cfg: SuiteConfig, index: int) -> FactoredSpace:
    """Instance space number ``index``: 2..max_factors factors, small domains."""
    rng = _stream(cfg.seed, "space", index)
    n = rng.randint(2, cfg.max_factors)
    factors = []
    for i in range(n):
        d = rng.randint(2, cfg.max_domain)
        factors.append(Factor(name=f"u{i}", domain=tuple(str(v) for v in range(d))))
    return FactoredSpace(factors)


def gen_random_variable(
    space: FactoredSpace, cfg: SuiteConfig, index: int, *, name: str | None = None
) -> RandomVariable:
    """A uniformly random table with a codomain of 1 to 4 values."""
    rng = _stream(cfg.seed, "var", index)
    k = rng.randint(1, 4)
    return RandomVariable(
        name=name if name is not None else f"v{index}",
        codomain=tuple(str(v) for v in range(k)),
        table=tuple(rng.randrange(k) for _ in range(space.outcome_count)),
    )


def check_semigraphoid(
    space: FactoredSpace,
    x: RandomVariable,
    y: RandomVariable,
    z: RandomVariable,
    w: RandomVariable,
) -> dict[str, bool]:
    """Evaluate the five compositional-semigraphoid axioms on one instance.

    Each axiom is an implication between structural verdicts; a vacuously
    true antecedent counts as holding.
    """

    def ind(a: RandomVariable, b: RandomVariable, c: RandomVariable) -> bool:
        return structurally_independent(space, a, b, c).independent

    yw = pair_var(space, y, w)
    zw = pair_var(space, z, w)
    zy = pair_var(space, z, y)
    x_yw_z = ind(x, yw, z)
    x_y_z = ind(x, y, z)
    return {
        "symmetry": x_y_z == ind(y, x, z),
        "decomposition": (not x_yw_z) or x_y_z,
        "weak_union": (not x_yw_z) or ind(x, y, zw),
        "contraction": (not (x_y_z and ind(x, w, zy))) or x_yw_z,
        "composition": (not (x_y_z and ind(x, w, z))) or x_yw_z,
    }


def _constant_on(table: Sequence[int], c: Block) -> bool:
    first = table[c.ranks[0]]
    return all(table[r] == first for r in c.ranks)


def check_history_laws(
    space: FactoredSpace,
    x: RandomVariable,
    y: RandomVariable,
    z: RandomVariable,
    *,
    rng: random.Random,
) -> dict[str, bool]:
    """Exact per-block history laws and closure properties on one instance.

    Covers: the conditioner's own history is empty; empty history means
    constant on the block; pair histories are unions; post-composition can
    only shrink a history; dropping the history of a coordinate bundle
    leaves nothing; a bundle with empty history is disjoint from every
    history; rectangle bundles have history equal to their non-constant
    part; generating sets are intersection-closed with the history as least
    element; rectangle sets form a field symmetric under complement; the
    rectangle sets are exactly unions of atoms plus constant factors; and
    the atom-based history fast path agrees with subset enumeration.
    """
    n = space.factor_count
    results = {law: True for law in HISTORY_LAWS}

    def uj(mask: int) -> RandomVariable:
        return fold_pair(space, [factor_var(space, i) for i in range(n) if mask >> i & 1])

    xy = pair_var(space, x, y)
    f_size = rng.randint(1, len(y.codomain))
    f_map = [rng.randrange(f_size) for _ in range(len(y.codomain))]
    post_y = RandomVariable(
        name="f(y)",
        codomain=tuple(str(v) for v in range(f_size)),
        table=tuple(f_map[v] for v in y.table),
    )
    j_removal = rng.randrange(1 << n)
    j_null = rng.randrange(1 << n)
    full = (1 << n) - 1

    for label, c in blocks_of(space, z).items():
        hx = history(space, c, x)
        hy = history(space, c, y)
        if history(space, c, z):
            results["self_emptiness"] = False
        if bool(hx) == _constant_on(x.table, c):
            results["emptiness"] = False
        if history(space, c, xy) != hx | hy:
            results["compositionality"] = False
        if not history(space, c, post_y).issubset(hy):
            results["monotonicity"] = False
        h_rem = history(space, c, uj(j_removal))
        if history(space, c, uj(j_removal & ~h_rem.mask)):
            results["removal"] = False
        if not history(space, c, uj(j_null)) and hx.mask & j_null:
            results["null"] = False

        parts = disintegration_atoms(space, c)
        trivial_mask = parts.trivial_part.mask
        rect_masks = set()
        gen_masks = []
        for mask in range(1 << n):
            j = IndexSet(mask, n)
            if is_rectangle(space, c, j):
                rect_masks.add(mask)
                if history(space, c, uj(mask)).mask != mask & ~trivial_mask:
                    results["atom_law"] = False
            if generates(space, c, j, x):
                gen_masks.append(mask)
        gen_set = set(gen_masks)
        inter_all = full
        for a in gen_masks:
            inter_all &= a
            for b in gen_masks:
                if a & b not in gen_set:
                    results["generating_intersection"] = False
        min_card = min(m.bit_count() for m in gen_masks)
        if inter_all != hx.mask or any(
            m != hx.mask for m in gen_masks if m.bit_count() == min_card
        ):
            results["minimality"] = False
        for a in rect_masks:
            if (a ^ full) not in rect_masks:
                results["rectangle_symmetry"] = False
            for b in rect_masks:
                if a & b not in rect_masks or a | b not in rect_masks:
                    results["rectangle_field"] = False
        for mask in range(1 << n):
            union_of_atoms = all(
                mask & atom.mask in (0, atom.mask) for atom in parts.atoms
            )
            if (mask in rect_masks) != union_of_atoms:
                results["atoms_rectangle"] = False
        if history_via_atoms(space, c, x) != hx:
            results["atoms_fast_path"] = False
    return results


@dataclass(frozen=True)
class DualityOutcome:
    """Duality between histories and perturbation sensitivity on one instance."""

    irrelevance_violations: int
    maximality_witnessed: int
    maximality_inconclusive: int


def check_duality(
    space: FactoredSpace,
    x: RandomVariable,
    z: RandomVariable,
    cfg: SuiteConfig,
    index: int = 0,
) -> DualityOutcome:
    """Both directions of the duality between histories and irrelevance.

    Out-of-history factors must leave conditionals untouched on the block,
    exactly, for every sampled perturbation pair.  In-history factors must
    move some conditional for at least one of perturbation_budget sampled
    vectors; a budget exhausted without a hit is inconclusive, not a pass.
    """
    base = sample_product(space, _int_seed(cfg.seed, "dual-base", index))
    ch = conditional_history(space, x, z)
    blocks = blocks_of(space, z)
    base_w = _weights(space, base)
    k = len(x.codomain)
    base_rows = {
        label: _block_marginal(base_w, c, x.table, k) for label, c in blocks.items()
    }
    violations = 0
    witnessed = 0
    inconclusive = 0
    for i in range(space.factor_count):
        size = space.factors[i].size
        for t in range(IRRELEVANCE_TRIALS):
            vec = sample_vector(_stream(cfg.seed, f"dual-vec:{index}:{i}", t), size)
            pair = perturb_factor(base, i, vec)
            violations += len(irrelevance_invariance(space, pair, x, z).violations)
        for label, c in blocks.items():
            if i not in ch.per_block[label]:
                continue
            tb, pb = base_rows[label]
            hit = False
            for t in range(cfg.perturbation_budget):
                vec = sample_vector(
                    _stream(cfg.seed, f"dual-max:{index}:{i}:{label}", t), size
                )
                pair = perturb_factor(base, i, vec)
                pert_w = _weights(space, pair.perturbed)
                tq, pq = _block_marginal(pert_w, c, x.table, k)
                if any(pb[a] * tq != pq[a] * tb for a in range(k)):
                    hit = True
                    break
            if hit:
                witnessed += 1
            else:
                inconclusive += 1
    return DualityOutcome(
        irrelevance_violations=violations,
        maximality_witnessed=witnessed,
        maximality_inconclusive=inconclusive,
    )


@dataclass(frozen=True)
class SeparationOutcome:
    """Rectangle condition versus separator condition, block by block."""

    agreements: int
    disagreements: tuple[tuple[tuple[int, ...], str, bool, bool], ...]


def _separated_classes(
    space: FactoredSpace, c: Block, ids: Sequence[int]
) -> list[set[int]]:
    cols = [space.scaled_digits(i) for i in ids]
    groups: dict[int, set[int]] = {}
    for r in c.ranks:
        a = 0
        for col in cols:
            a += col[r]
        groups.setdefault(a, set()).add(r)
    return list(groups.values())


def check_separation_characterization(
    space: FactoredSpace, z: RandomVariable, cfg: SuiteConfig | None = None
) -> SeparationOutcome:
    """Exploratory: per block, compare is_rectangle with the separator condition.

    The separator condition asks that disjoint events from the two sides
    always admit a conditioner-measurable separator; with separators being
    unions of blocks, that reduces to every pair of projection classes
    inside one block having a common outcome.  Disagreements are recorded,
    never asserted.
    """
    n = space.factor_count
    agreements = 0
    disagreements = []
    for label, c in blocks_of(space, z).items():
        for mask in range(1 << n):
            j = IndexSet(mask, n)
            rect = is_rectangle(space, c, j)
            left = _separated_classes(space, c, j.members())
            right = _separated_classes(space, c, j.complement().members())
            sep = all(a & b for a in left for b in right)
            if rect == sep:
                agreements += 1
            else:
                disagreements.append((j.members(), label, rect, sep))
    return SeparationOutcome(
        agreements=agreements, disagreements=tuple(disagreements)
    )


def _joint_factorizes(
    space: FactoredSpace,
    p: ProductDistribution,
    xs: Sequence[RandomVariable],
    z: RandomVariable,
) -> bool:
    """Does P(x1,..,xk | z) factor into marginals on every block, exactly?"""
    weights = _weights(space, p)
    sizes = [len(v.codomain) for v in xs]
    for c in blocks_of(space, z).values():
        total = 0
        per_var = [[0] * s for s in sizes]
        joint: dict[tuple[int, ...], int] = {}
        for r in c.ranks:
            w = weights[r]
            total += w
            key = tuple(v.table[r] for v in xs)
            for slot, val in enumerate(key):
                per_var[slot][val] += w
            joint[key] = joint.get(key, 0) + w
        power = total ** (len(xs) - 1)
        for key_vals in _value_grid(sizes):
            lhs = joint.get(key_vals, 0) * power
            rhs = 1
            for slot, val in enumerate(key_vals):
                rhs *= per_var[slot][val]
            if lhs != rhs:
                return False
    return True


def _value_grid(sizes: Sequence[int]):
    grid = [()]
    for s in sizes:
        grid = [key + (v,) for key in grid for v in range(s)]
    return grid


@dataclass
class LawTally:
    passed: int = 0
    failed: int = 0
    inconclusive: int = 0


@dataclass
class SuiteReport:
    """Aggregated tallies plus replayable counterexamples for one suite run."""

    config: SuiteConfig
    tallies: dict[str, LawTally] = field(default_factory=dict)
    counterexamples: list[dict] = field(default_factory=list)
    exploratory: dict = field(default_factory=dict)

    def tally(self, law: str) -> LawTally:
        return self.tallies.setdefault(law, LawTally())

    @property
    def any_asserted_failure(self) -> bool:
        return any(t.failed for t in self.tallies.values())

    def to_doc(self) -> dict:
        return {
            "config": asdict(self.config),
            "laws": {
                name: asdict(t) for name, t in sorted(self.tallies.items())
            },
            "counterexamples": self.counterexamples,
            "exploratory": self.exploratory,
            "failed": self.any_asserted_failure,
        }

    def to_json(self, *, pretty: bool = False) -> str:
        doc = self.to_doc()
        if pretty:
            return json.dumps(doc, sort_keys=True, indent=2)
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    """Generate cfg.iterations instances and run every law family on each."""
    report = SuiteReport(config=cfg)
    sep_agree = 0
    sep_records: list = []
    for i in range(cfg.iterations):
        space = gen_random_space(cfg, i)
        x = gen_random_variable(space, cfg, 4 * i, name="x")
        y = gen_random_variable(space, cfg, 4 * i + 1, name="y")
        z = gen_random_variable(space, cfg, 4 * i + 2, name="z")
        w = gen_random_variable(space, cfg, 4 * i + 3, name="w")

        def record(law: str, detail: dict) -> None:
            report.counterexamples.append(
                {
                    "instance": i,
                    "law": law,
                    "space": space_to_doc(space, {"x": x, "y": y, "z": z, "w": w}),
                    "detail": detail,
                }
            )

        verdict = structurally_independent(space, x, y, z)
        if verdict.independent:
            sound = verify_soundness(
                space, x, y, z, cfg.sample_count, _int_seed(cfg.seed, "ft", i)
            )
            if sound.all_hold:
                report.tally("soundness_ci").passed += 1
            else:
                report.tally("soundness_ci").failed += 1
                idx, ci = sound.violations[0]
                record(
                    "soundness_ci",
                    {"sample": idx, "violation": [str(v) for v in ci.first_violation]},
                )
        else:
            witness = find_witness(
                space, x, y, z, cfg.witness_budget, _int_seed(cfg.seed, "wit", i)
            )
            if witness is None:
                witness = find_witness(
                    space, x, y, z, cfg.witness_budget,
                    _int_seed(cfg.seed, "wit-retry", i),
                )
            if witness is not None:
                report.tally("completeness_witness").passed += 1
            else:
                # A miss that survives a fresh stream is treated as a defect.
                report.tally("completeness_witness").failed += 1
                record("completeness_witness", {"budget": cfg.witness_budget})

        for axiom, ok in check_semigraphoid(space, x, y, z, w).items():
            law = f"semigraphoid_{axiom}"
            if ok:
                report.tally(law).passed += 1
            else:
                report.tally(law).failed += 1
                record(law, {})

        laws = check_history_laws(space, x, y, z, rng=_stream(cfg.seed, "laws", i))
        for law, ok in laws.items():
            name = f"history_{law}"
            if ok:
                report.tally(name).passed += 1
            else:
                report.tally(name).failed += 1
                record(name, {})

        duality = check_duality(space, x, z, cfg, index=i)
        if duality.irrelevance_violations == 0:
            report.tally("duality_irrelevance").passed += 1
        else:
            report.tally("duality_irrelevance").failed += 1
            record(
                "duality_irrelevance",
                {"violations": duality.irrelevance_violations},
            )
        report.tally("duality_maximality").passed += duality.maximality_witnessed
        report.tally("duality_maximality").inconclusive += (
            duality.maximality_inconclusive
        )

        if verdict.independent:
            rng = _stream(cfg.seed, "identity", i)
            factor = rng.randrange(space.factor_count)
            vec = sample_vector(rng, space.factors[factor].size)
            base = sample_product(space, _int_seed(cfg.seed, "id-base", i))
            pair = perturb_factor(base, factor, vec)
            ident = product_difference_identity(space, pair, x, y, z)
            if ident.holds:
                report.tally("identity_product_difference").passed += 1
            else:
                report.tally("identity_product_difference").failed += 1
                record(
                    "identity_product_difference",
                    {
                        "factor": factor,
                        "violation": [str(v) for v in ident.first_violation],
                    },
                )

        pairwise = (
            verdict.independent
            and structurally_independent(space, x, w, z).independent
            and structurally_independent(space, y, w, z).independent
        )
        if pairwise:
            p = sample_product(space, _int_seed(cfg.seed, "vec", i))
            if _joint_factorizes(space, p, (x, y, w), z):
                report.tally("vector_factorization").passed += 1
            else:
                report.tally("vector_factorization").failed += 1
                record("vector_factorization", {})

        sep = check_separation_characterization(space, z, cfg)
        sep_agree += sep.agreements
        for members, label, rect, s in sep.disagreements:
            sep_records.append(
                {
                    "instance": i,
                    "factors": list(members),
                    "block": label,
                    "rectangle": rect,
                    "separator": s,
                }
            )
    report.exploratory["separation_characterization"] = {
        "agree": sep_agree,
        "disagree": len(sep_records),
        "records": sep_records,
    }
    return report
