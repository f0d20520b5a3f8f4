"""Stakeholder personas: criterion weights, red lines, and group utilities.

A persona scores a package by the dot product of its weight vector with the
package's criterion scores. Weights are nonnegative and sum to one, so the
utility lives on the same rubric scale as the scores. Weight vectors that are
not published can be recovered from observed (scores, utility) pairs by an
exact linear solve; the solver is part of the public surface so recovered
vectors can be re-derived and audited.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    NoSimplexSolutionError,
    RankDeficientError,
    UnknownIdError,
    ValidationError,
)
from .scenario import Scenario, enumerate_feasible

PERSONA_KEYS = {"id", "label", "weights", "red_lines", "max_proposal_improvements"}
RED_LINE_KEYS = {"criterion", "min", "conditional"}

WEIGHT_SUM_TOL = 1e-9


class RedLineStatus(str, enum.Enum):
    SATISFIED = "satisfied"
    WAIVED = "waived"
    VIOLATED = "violated"


@dataclass(frozen=True)
class RedLine:
    """A stated minimum on one criterion.

    ``conditional`` red lines are waived when no feasible package in the
    scenario can reach the minimum; unconditional ones never waive.
    """

    criterion: str
    minimum: float
    conditional: bool = True


@dataclass(frozen=True)
class Persona:
    id: str
    label: str
    weights: Mapping[str, float]
    red_lines: tuple[RedLine, ...] = ()
    max_proposal_improvements: int = 2


def utility(persona: Persona, scores: Mapping[str, float]) -> float:
    """Weighted sum of ``scores`` under the persona's weights.

    The persona and the score vector must share the same criterion set.
    """
    if set(persona.weights) != set(scores):
        raise UnknownIdError(
            f"persona {persona.id!r} weights cover {sorted(persona.weights)}, "
            f"scores cover {sorted(scores)}"
        )
    total = 0.0
    for crit, weight in persona.weights.items():
        total += weight * scores[crit]
    return total


def utility_profile(
    personas: Sequence[Persona], scores: Mapping[str, float]
) -> dict[str, float]:
    """Utilities of every persona for one score vector, in persona order."""
    return {p.id: utility(p, scores) for p in personas}


def recover_weights(
    observations: Sequence[tuple[Mapping[str, float], float]],
    criteria: Sequence[str],
    *,
    residual_tol: float = 1e-6,
    negative_tol: float = 1e-6,
) -> tuple[dict[str, float], float]:
    """Recover a weight vector from observed (scores, utility) pairs.

    Solves the linear system ``scores . w = utility`` for each observation
    together with the sum-to-one constraint, by least squares. Returns the
    weights and the maximum equation residual.

    Raises :class:`RankDeficientError` when the system does not pin down all
    ``len(criteria)`` weights, and :class:`NoSimplexSolutionError` when the
    best fit leaves a residual above ``residual_tol`` or needs a weight below
    ``-negative_tol``. Negative weights within ``negative_tol`` of zero are
    clamped to 0 and the vector renormalized.

    ``residual_tol`` defaults to 1e-6 for exact inputs; loosen it for
    utilities transcribed from rounded published tables.
    """
    k = len(criteria)
    if len(observations) < k:
        raise DomainError(
            f"need at least {k} observations for {k} criteria, got {len(observations)}"
        )
    rows = []
    rhs = []
    for scores, value in observations:
        if set(scores) != set(criteria):
            raise UnknownIdError(
                f"observation criteria {sorted(scores)} do not match {sorted(criteria)}"
            )
        rows.append([scores[c] for c in criteria])
        rhs.append(value)
    rows.append([1.0] * k)
    rhs.append(1.0)

    matrix = np.asarray(rows, dtype=float)
    target = np.asarray(rhs, dtype=float)
    solution, _, rank, _ = np.linalg.lstsq(matrix, target, rcond=None)
    if rank < k:
        raise RankDeficientError(rank=int(rank), needed=k)

    residual = float(np.max(np.abs(matrix @ solution - target)))
    if residual > residual_tol:
        raise NoSimplexSolutionError(
            f"max residual {residual:.3e} exceeds tolerance {residual_tol:.1e}; "
            "no weight vector reproduces these utilities"
        )
    if np.min(solution) < -negative_tol:
        worst = criteria[int(np.argmin(solution))]
        raise NoSimplexSolutionError(
            f"recovered weight for {worst!r} is {np.min(solution):.3e} < 0; "
            "observations are inconsistent with nonnegative weights"
        )

    clamped = np.clip(solution, 0.0, None)
    clamped = clamped / clamped.sum()
    return {c: float(w) for c, w in zip(criteria, clamped)}, residual


def max_reachable_score(scenario: Scenario, criterion: str) -> float:
    """Highest score any budget-feasible package attains on ``criterion``."""
    if criterion not in scenario.criterion_ids:
        raise UnknownIdError(f"unknown criterion {criterion!r}")
    return max(p.scores[criterion] for p in enumerate_feasible(scenario))


def check_red_line(
    persona: Persona,
    scores: Mapping[str, float],
    scenario: Scenario,
    *,
    reachable: Optional[Mapping[str, float]] = None,
) -> RedLineStatus:
    """Evaluate the persona's red lines against one package's scores.

    Returns the worst status across the persona's red lines: ``satisfied``
    when every stated minimum is met, ``waived`` when a conditional minimum is
    unmet but no feasible package in the scenario could reach it either, and
    ``violated`` otherwise. ``reachable`` may carry precomputed per-criterion
    maxima (from :func:`max_reachable_score`) to avoid re-enumeration.
    """
    worst = RedLineStatus.SATISFIED
    for line in persona.red_lines:
        if line.criterion not in scores:
            raise UnknownIdError(f"red line on unknown criterion {line.criterion!r}")
        if scores[line.criterion] >= line.minimum:
            continue
        if line.conditional:
            top = (
                reachable[line.criterion]
                if reachable is not None
                else max_reachable_score(scenario, line.criterion)
            )
            if top < line.minimum:
                worst = max(worst, RedLineStatus.WAIVED, key=_status_rank)
                continue
        return RedLineStatus.VIOLATED
    return worst


def _status_rank(status: RedLineStatus) -> int:
    return [RedLineStatus.SATISFIED, RedLineStatus.WAIVED, RedLineStatus.VIOLATED].index(status)


def validate_personas(
    document, scenario: Scenario | None = None
) -> list[Persona]:
    """Validate a persona file (a JSON list) and build :class:`Persona` objects.

    With a ``scenario``, weights and red lines are cross-checked against its
    criteria and scale. Collects all problems into one :class:`ValidationError`.
    """
    problems: list[str] = []
    if not isinstance(document, Sequence) or isinstance(document, (str, bytes)):
        raise ValidationError(["persona document must be a JSON list"])

    personas: list[Persona] = []
    seen = set()
    for i, entry in enumerate(document):
        if not isinstance(entry, Mapping) or "id" not in entry:
            problems.append(f"personas[{i}]: expected an object with an 'id'")
            continue
        pid = entry["id"]
        if set(entry) - PERSONA_KEYS:
            problems.append(f"persona {pid!r}: unknown keys {sorted(set(entry) - PERSONA_KEYS)}")
        if pid in seen:
            problems.append(f"duplicate persona id {pid!r}")
        seen.add(pid)

        weights = entry.get("weights", {})
        if not isinstance(weights, Mapping) or not weights:
            problems.append(f"persona {pid!r}: weights must be a nonempty mapping")
            weights = {}
        else:
            for crit, w in weights.items():
                if not isinstance(w, (int, float)) or isinstance(w, bool) or w < 0:
                    problems.append(f"persona {pid!r}: weight for {crit!r} = {w!r} must be >= 0")
            total = sum(w for w in weights.values() if isinstance(w, (int, float)))
            if abs(total - 1.0) > WEIGHT_SUM_TOL:
                problems.append(f"persona {pid!r}: weights sum to {total!r}, expected 1")
            if scenario is not None and set(weights) != set(scenario.criterion_ids):
                problems.append(
                    f"persona {pid!r}: weights cover {sorted(weights)}, "
                    f"scenario criteria are {sorted(scenario.criterion_ids)}"
                )

        red_lines = []
        for j, raw in enumerate(entry.get("red_lines", [])):
            if not isinstance(raw, Mapping) or not {"criterion", "min"} <= set(raw):
                problems.append(f"persona {pid!r}: red_lines[{j}] needs 'criterion' and 'min'")
                continue
            if set(raw) - RED_LINE_KEYS:
                problems.append(
                    f"persona {pid!r}: red_lines[{j}] unknown keys {sorted(set(raw) - RED_LINE_KEYS)}"
                )
            if scenario is not None:
                if raw["criterion"] not in scenario.criterion_ids:
                    problems.append(
                        f"persona {pid!r}: red line on undeclared criterion {raw['criterion']!r}"
                    )
                elif not scenario.scale.min <= raw["min"] <= scenario.scale.max:
                    problems.append(
                        f"persona {pid!r}: red line minimum {raw['min']} outside the scale"
                    )
            red_lines.append(RedLine(raw["criterion"], float(raw["min"]), bool(raw.get("conditional", True))))

        limit = entry.get("max_proposal_improvements", 2)
        if not isinstance(limit, int) or isinstance(limit, bool) or limit < 0:
            problems.append(f"persona {pid!r}: max_proposal_improvements {limit!r} must be an int >= 0")
            limit = 2
        personas.append(Persona(pid, entry.get("label", ""), dict(weights), tuple(red_lines), limit))

    if not personas and not problems:
        problems.append("at least one persona is required")
    if problems:
        raise ValidationError(problems)
    return personas


def load_personas(path, scenario: Scenario | None = None) -> list[Persona]:
    """Read and validate a persona JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return validate_personas(json.load(fh), scenario)


def personas_to_document(personas: Iterable[Persona]) -> list[dict]:
    return [
        {
            "id": p.id,
            "label": p.label,
            "weights": dict(p.weights),
            "red_lines": [
                {"criterion": r.criterion, "min": r.minimum, "conditional": r.conditional}
                for r in p.red_lines
            ],
            "max_proposal_improvements": p.max_proposal_improvements,
        }
        for p in personas
    ]
