"""Scenario model: criteria, base designs, a costed improvement menu, and the
budget-feasible package set.

A *package* is a base design plus a duplicate-free set of funded improvements.
Scores are real-valued rubric points; improvement deltas are nonnegative and
the per-criterion total is capped at the top of the scale, so adding an
improvement can never lower a score.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import InfeasibleError, UnknownIdError, ValidationError

SCENARIO_KEYS = {"criteria", "scale", "bases", "improvements", "budget"}


@dataclass(frozen=True)
class Criterion:
    id: str
    label: str = ""


@dataclass(frozen=True)
class Scale:
    min: float
    max: float


@dataclass(frozen=True)
class BaseDesign:
    id: str
    label: str
    scores: Mapping[str, float]


@dataclass(frozen=True)
class Improvement:
    id: str
    label: str
    cost: float
    deltas: Mapping[str, float]


@dataclass(frozen=True)
class Package:
    """A base design plus a set of improvements, with derived scores and cost.

    ``improvements`` is stored sorted; ``key`` is the canonical identity used
    for ordering, tie-breaking, and audit references.
    """

    base: str
    improvements: tuple[str, ...]
    scores: Mapping[str, float]
    cost: float

    @property
    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.base, self.improvements)

    def to_record(self) -> dict:
        return {
            "base": self.base,
            "improvements": list(self.improvements),
            "scores": dict(self.scores),
            "cost": self.cost,
        }


@dataclass(frozen=True)
class Constraints:
    """Search constraints honored by :func:`enumerate_feasible`.

    ``required`` improvements must appear in every package; ``forbidden`` may
    appear in none; ``max_improvements`` bounds the set size when given.
    """

    required: frozenset[str] = frozenset()
    forbidden: frozenset[str] = frozenset()
    max_improvements: Optional[int] = None

    def __post_init__(self):
        overlap = self.required & self.forbidden
        if overlap:
            raise ValidationError(
                [f"improvement {i!r} is both required and forbidden" for i in sorted(overlap)]
            )


@dataclass(frozen=True)
class Scenario:
    criteria: tuple[Criterion, ...]
    scale: Scale
    bases: tuple[BaseDesign, ...]
    improvements: tuple[Improvement, ...]
    budget: float
    _base_index: Mapping[str, BaseDesign] = field(repr=False, default=None)
    _improvement_index: Mapping[str, Improvement] = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_base_index", {b.id: b for b in self.bases})
        object.__setattr__(self, "_improvement_index", {m.id: m for m in self.improvements})

    @property
    def criterion_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.criteria)

    def base(self, base_id: str) -> BaseDesign:
        try:
            return self._base_index[base_id]
        except KeyError:
            raise UnknownIdError(f"unknown base design {base_id!r}") from None

    def improvement(self, imp_id: str) -> Improvement:
        try:
            return self._improvement_index[imp_id]
        except KeyError:
            raise UnknownIdError(f"unknown improvement {imp_id!r}") from None

    def package(self, base_id: str, improvement_ids: Iterable[str] = ()) -> Package:
        """Build the package for ``base_id`` plus ``improvement_ids``.

        Raises :class:`UnknownIdError` for undeclared ids. Duplicate ids
        collapse (set semantics).
        """
        ids = tuple(sorted(set(improvement_ids)))
        chosen = [self.improvement(i) for i in ids]
        scores = apply_improvements(self.base(base_id), chosen, self.scale)
        return Package(base_id, ids, scores, package_cost(chosen))

    def to_document(self) -> dict:
        return {
            "criteria": [{"id": c.id, "label": c.label} for c in self.criteria],
            "scale": {"min": self.scale.min, "max": self.scale.max},
            "bases": [
                {"id": b.id, "label": b.label, "scores": dict(b.scores)} for b in self.bases
            ],
            "improvements": [
                {"id": m.id, "label": m.label, "cost": m.cost, "deltas": dict(m.deltas)}
                for m in self.improvements
            ],
            "budget": self.budget,
        }


def apply_improvements(
    base: BaseDesign, chosen: Iterable[Improvement], scale: Scale
) -> dict[str, float]:
    """Sum improvement deltas onto the base scores, then cap at ``scale.max``.

    The cap applies once per criterion after all deltas are summed; with
    nonnegative deltas the result is pointwise >= the base scores.
    """
    scores = dict(base.scores)
    for imp in chosen:
        for crit, delta in imp.deltas.items():
            scores[crit] = scores[crit] + delta
    return {crit: min(scale.max, value) for crit, value in scores.items()}


def package_cost(chosen: Iterable[Improvement]) -> float:
    """Total cost of a set of improvements; 0 for the empty set."""
    return sum(imp.cost for imp in chosen)


def enumerate_feasible(
    scenario: Scenario, constraints: Constraints | None = None
) -> list[Package]:
    """Enumerate every package satisfying the budget and ``constraints``.

    Output order is deterministic: by base id, then by the canonical order of
    the improvement subset (lexicographic on the sorted id tuple). Each
    (base, subset) pair appears at most once.
    """
    constraints = constraints or Constraints()
    for imp_id in sorted(constraints.required | constraints.forbidden):
        scenario.improvement(imp_id)  # raise on undeclared ids

    required = tuple(sorted(constraints.required))
    required_cost = package_cost(scenario.improvement(i) for i in required)
    if required_cost > scenario.budget:
        raise InfeasibleError(
            f"required improvements {list(required)} cost {required_cost}, "
            f"exceeding the budget {scenario.budget}"
        )

    optional = [
        m.id
        for m in scenario.improvements
        if m.id not in constraints.required and m.id not in constraints.forbidden
    ]
    optional.sort()

    subsets: list[tuple[str, ...]] = []
    for size in range(len(optional) + 1):
        for combo in itertools.combinations(optional, size):
            subset = tuple(sorted(required + combo))
            if constraints.max_improvements is not None and len(subset) > constraints.max_improvements:
                continue
            cost = package_cost(scenario.improvement(i) for i in subset)
            if cost <= scenario.budget:
                subsets.append(subset)
    subsets.sort()

    packages = []
    for base in sorted(scenario.bases, key=lambda b: b.id):
        for subset in subsets:
            packages.append(scenario.package(base.id, subset))
    return packages


def _check_scores(
    problems: list[str], owner: str, scores: Mapping, criterion_ids: set[str], scale: Scale | None
):
    if not isinstance(scores, Mapping):
        problems.append(f"{owner}: scores must be a mapping")
        return
    for crit, value in scores.items():
        if crit not in criterion_ids:
            problems.append(f"{owner}: score references undeclared criterion {crit!r}")
        elif not isinstance(value, (int, float)) or isinstance(value, bool):
            problems.append(f"{owner}: score for {crit!r} is not a number")
        elif scale is not None and not scale.min <= value <= scale.max:
            problems.append(
                f"{owner}: score for {crit!r} = {value} outside scale "
                f"[{scale.min}, {scale.max}]"
            )
    for crit in criterion_ids - set(scores):
        problems.append(f"{owner}: missing score for criterion {crit!r}")


def validate_scenario(document: Mapping) -> Scenario:
    """Validate a scenario document and build a :class:`Scenario`.

    Collects every violation and raises a single :class:`ValidationError`
    listing all of them; never silently repairs. Unknown keys are rejected.
    """
    problems: list[str] = []
    if not isinstance(document, Mapping):
        raise ValidationError(["scenario document must be a JSON object"])

    unknown = set(document) - SCENARIO_KEYS
    for key in sorted(unknown):
        problems.append(f"unknown top-level key {key!r}")
    missing = SCENARIO_KEYS - set(document)
    for key in sorted(missing):
        problems.append(f"missing top-level key {key!r}")
    if problems and missing:
        raise ValidationError(problems)

    criteria = []
    seen = set()
    for i, entry in enumerate(document.get("criteria", [])):
        if not isinstance(entry, Mapping) or "id" not in entry:
            problems.append(f"criteria[{i}]: expected an object with an 'id'")
            continue
        cid = entry["id"]
        if set(entry) - {"id", "label"}:
            problems.append(f"criterion {cid!r}: unknown keys {sorted(set(entry) - {'id', 'label'})}")
        if cid in seen:
            problems.append(f"duplicate criterion id {cid!r}")
        seen.add(cid)
        criteria.append(Criterion(cid, entry.get("label", "")))
    if not criteria:
        problems.append("at least one criterion is required")
    criterion_ids = {c.id for c in criteria}

    scale = None
    raw_scale = document.get("scale")
    if not isinstance(raw_scale, Mapping) or set(raw_scale) != {"min", "max"}:
        problems.append("scale must be an object with exactly 'min' and 'max'")
    elif raw_scale["min"] >= raw_scale["max"]:
        problems.append(f"scale.min {raw_scale['min']} must be < scale.max {raw_scale['max']}")
    else:
        scale = Scale(float(raw_scale["min"]), float(raw_scale["max"]))

    bases = []
    seen = set()
    for i, entry in enumerate(document.get("bases", [])):
        if not isinstance(entry, Mapping) or "id" not in entry:
            problems.append(f"bases[{i}]: expected an object with an 'id'")
            continue
        bid = entry["id"]
        if set(entry) - {"id", "label", "scores"}:
            problems.append(f"base {bid!r}: unknown keys {sorted(set(entry) - {'id', 'label', 'scores'})}")
        if bid in seen:
            problems.append(f"duplicate base design id {bid!r}")
        seen.add(bid)
        _check_scores(problems, f"base {bid!r}", entry.get("scores", {}), criterion_ids, scale)
        bases.append(
            BaseDesign(bid, entry.get("label", ""), dict(entry.get("scores", {})))
        )
    if not bases:
        problems.append("at least one base design is required")

    improvements = []
    seen = set()
    for i, entry in enumerate(document.get("improvements", [])):
        if not isinstance(entry, Mapping) or "id" not in entry:
            problems.append(f"improvements[{i}]: expected an object with an 'id'")
            continue
        mid = entry["id"]
        if set(entry) - {"id", "label", "cost", "deltas"}:
            problems.append(
                f"improvement {mid!r}: unknown keys {sorted(set(entry) - {'id', 'label', 'cost', 'deltas'})}"
            )
        if mid in seen:
            problems.append(f"duplicate improvement id {mid!r}")
        seen.add(mid)
        cost = entry.get("cost", 0)
        if not isinstance(cost, (int, float)) or isinstance(cost, bool) or cost < 0:
            problems.append(f"improvement {mid!r}: cost {cost!r} must be a nonnegative number")
            cost = 0.0
        deltas = entry.get("deltas", {})
        if not isinstance(deltas, Mapping):
            problems.append(f"improvement {mid!r}: deltas must be a mapping")
            deltas = {}
        for crit, delta in deltas.items():
            if crit not in criterion_ids:
                problems.append(f"improvement {mid!r}: delta references undeclared criterion {crit!r}")
            elif not isinstance(delta, (int, float)) or isinstance(delta, bool) or delta < 0:
                problems.append(f"improvement {mid!r}: delta for {crit!r} = {delta!r} must be >= 0")
        improvements.append(Improvement(mid, entry.get("label", ""), float(cost), dict(deltas)))

    budget = document.get("budget")
    if not isinstance(budget, (int, float)) or isinstance(budget, bool) or budget < 0:
        problems.append(f"budget {budget!r} must be a nonnegative number")
        budget = 0.0

    if problems:
        raise ValidationError(problems)
    return Scenario(tuple(criteria), scale, tuple(bases), tuple(improvements), float(budget))


def load_scenario(path) -> Scenario:
    """Read and validate a scenario JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return validate_scenario(json.load(fh))
