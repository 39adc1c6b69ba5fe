"""Guidance: goal consensus, route planning over the discretized state space,
rule-based intervention recommendation, and predicted-vs-observed feedback.

Planning discretizes states to a G-cells-per-dimension grid; each catalog
intervention shifts the cell by round(effect * G) per active week.  A
uniform-cost search over (cell, active-intervention-set) finds the cheapest
schedule that reaches the goal region without ever stepping into a
disorder-labeled region (the starting cell is exempt: people plan their way
OUT of those regions), with at most two concurrent interventions, at most one
high-risk, and high-risk steps only under provider approval.
"""

from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

from .config import NavigatorConfig
from .estimator import Region, StateSpace, StateVector

WEEK_MS = 7 * 86_400_000

GOAL_STATUSES = ("proposed", "diverged", "revised", "consensus", "achieved", "abandoned")

#: (status, action) -> next status
_GOAL_MACHINE = {
    ("proposed", "provider_agree"): "consensus",
    ("proposed", "provider_diverge"): "diverged",
    ("diverged", "revise"): "revised",
    ("revised", "provider_agree"): "consensus",
    ("revised", "provider_diverge"): "diverged",
    ("consensus", "revise"): "revised",
    ("consensus", "mark_achieved"): "achieved",
    ("consensus", "abandon"): "abandoned",
}

GOAL_ACTIONS = sorted({a for _, a in _GOAL_MACHINE})


class IllegalTransition(ValueError):
    pass


class NoConsensusGoal(ValueError):
    pass


class NoRoute(ValueError):
    def __init__(self, message: str, blocking: str):
        super().__init__(f"{message} (blocking constraint: {blocking})")
        self.blocking = blocking


class NoActivePlan(ValueError):
    pass


class InsufficientData(ValueError):
    pass


@dataclass
class Goal:
    subject: str
    target: str | dict                  # region label or explicit bounds
    proposed_by: str = "individual"     # individual | provider
    status: str = "proposed"
    history: list[tuple[int, str, str]] = field(default_factory=list)
    version: int = 1

    def to_json(self) -> dict:
        return {"subject": self.subject, "target": self.target,
                "proposed_by": self.proposed_by, "status": self.status,
                "history": [list(h) for h in self.history], "version": self.version}

    @classmethod
    def from_json(cls, obj: dict) -> "Goal":
        return cls(subject=obj["subject"], target=obj["target"],
                   proposed_by=obj.get("proposed_by", "individual"),
                   status=obj.get("status", "proposed"),
                   history=[tuple(h) for h in obj.get("history", [])],
                   version=int(obj.get("version", 1)))


def update_goal(goal: Goal, action: str, note: str = "", now_ms: int = 0,
                new_target: str | dict | None = None) -> Goal:
    """Advance the consensus state machine; history is append-only."""
    key = (goal.status, action)
    if key not in _GOAL_MACHINE:
        raise IllegalTransition(f"{action!r} not legal from status {goal.status!r}")
    goal.status = _GOAL_MACHINE[key]
    if action == "revise" and new_target is not None:
        goal.target = new_target
    goal.history.append((now_ms, goal.status, note))
    goal.version += 1
    return goal


@dataclass(frozen=True)
class InterventionSpec:
    id: str
    name: str
    effect: dict[str, float]
    cost: float
    risk: str = "low"                  # low | medium | high
    requires_provider: bool = False
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.cost <= 0:
            raise ValueError(f"{self.id}: cost must be positive")
        if self.risk not in ("low", "medium", "high"):
            raise ValueError(f"{self.id}: bad risk {self.risk!r}")
        for dim, delta in self.effect.items():
            if not -0.3 <= delta <= 0.3:
                raise ValueError(f"{self.id}: weekly delta for {dim} outside [-0.3,0.3]")
        if self.risk == "high" and not self.requires_provider:
            raise ValueError(f"{self.id}: high risk implies requires_provider")

    def to_json(self) -> dict:
        return {"id": self.id, "name": self.name, "effect": self.effect,
                "cost": self.cost, "risk": self.risk,
                "requires_provider": self.requires_provider, "tags": list(self.tags)}

    @classmethod
    def from_json(cls, obj: dict) -> "InterventionSpec":
        return cls(id=obj["id"], name=obj["name"], effect=dict(obj["effect"]),
                   cost=float(obj["cost"]), risk=obj.get("risk", "low"),
                   requires_provider=bool(obj.get("requires_provider", False)),
                   tags=tuple(obj.get("tags", ())))


RULE_A_NAMES = ["Therapy focused on enhancing social skills",
                "Reengagement with available social support"]
RULE_B_NAMES = ["Mindfulness-based Stress-reduction",
                "Progressive muscle relaxation",
                "Unified protocol for emotional disorders",
                "Dialectical Behavior Therapy",
                "Attachment-based Family Therapy"]
MAINTENANCE_NAMES = ["Physical activity", "Social interaction"]


def default_catalog() -> list[InterventionSpec]:
    mk = InterventionSpec
    return [
        mk("social_skills_therapy", RULE_A_NAMES[0],
           {"social_engagement": 0.10, "emotional_valence": 0.05}, 3.0, "medium",
           True, ("individual_a",)),
        mk("social_support_reengagement", RULE_A_NAMES[1],
           {"social_engagement": 0.10}, 1.0, "low", False, ("individual_a",)),
        mk("mbsr", RULE_B_NAMES[0],
           {"biological_stress": -0.10, "emotional_arousal": -0.05}, 2.0, "low",
           False, ("individual_b",)),
        mk("pmr", RULE_B_NAMES[1], {"biological_stress": -0.10}, 1.0, "low",
           False, ("individual_b",)),
        mk("unified_protocol", RULE_B_NAMES[2],
           {"emotional_valence": 0.10, "emotional_arousal": -0.10}, 4.0, "medium",
           True, ("individual_b",)),
        mk("dbt", RULE_B_NAMES[3],
           {"emotional_arousal": -0.10, "emotional_valence": 0.05}, 5.0, "high",
           True, ("individual_b",)),
        mk("abft", RULE_B_NAMES[4],
           {"social_engagement": 0.05, "emotional_valence": 0.05}, 5.0, "high",
           True, ("individual_b",)),
        mk("physical_activity", MAINTENANCE_NAMES[0],
           {"behavioral_activity": 0.10, "biological_stress": -0.05}, 0.5, "low",
           False, ("maintenance",)),
        mk("social_interaction", MAINTENANCE_NAMES[1],
           {"social_engagement": 0.10, "emotional_valence": 0.05}, 0.5, "low",
           False, ("maintenance",)),
    ]


def save_catalog(catalog: list[InterventionSpec], path: str | Path) -> None:
    Path(path).write_text(json.dumps([s.to_json() for s in catalog], indent=1))


def load_catalog(path: str | Path) -> list[InterventionSpec]:
    return [InterventionSpec.from_json(o) for o in json.loads(Path(path).read_text())]


@dataclass
class PlanConstraints:
    provider_approved: bool = False
    max_concurrent: int = 2
    max_high_risk: int = 1
    max_weeks: int = 52


@dataclass
class GuidancePlan:
    subject: str
    goal_target: str | dict
    steps: list[dict]                  # {intervention_id, start_week, weeks}
    trajectory: list[tuple[int, ...]]  # cell per week, starting cell first
    total_cost: float
    created_by: str = "navigator"
    created_at: int = 0
    active: bool = True
    version: int = 1

    @property
    def weeks(self) -> int:
        return len(self.trajectory) - 1

    def weekly_sets(self) -> list[tuple[str, ...]]:
        out: list[set] = [set() for _ in range(self.weeks)]
        for step in self.steps:
            for w in range(step["start_week"], step["start_week"] + step["weeks"]):
                out[w].add(step["intervention_id"])
        return [tuple(sorted(s)) for s in out]

    def to_json(self) -> dict:
        return {"subject": self.subject, "goal_target": self.goal_target,
                "steps": self.steps, "trajectory": [list(c) for c in self.trajectory],
                "total_cost": self.total_cost, "created_by": self.created_by,
                "created_at": self.created_at, "active": self.active,
                "version": self.version}

    @classmethod
    def from_json(cls, obj: dict) -> "GuidancePlan":
        return cls(subject=obj["subject"], goal_target=obj["goal_target"],
                   steps=list(obj["steps"]),
                   trajectory=[tuple(c) for c in obj["trajectory"]],
                   total_cost=float(obj["total_cost"]),
                   created_by=obj.get("created_by", "navigator"),
                   created_at=int(obj.get("created_at", 0)),
                   active=bool(obj.get("active", True)),
                   version=int(obj.get("version", 1)))


def cell_of(state: StateVector, space: StateSpace) -> tuple[int, ...]:
    g = space.grid_resolution
    cell = []
    for dim in space.dimensions:
        if dim not in state.dims:
            raise ValueError(f"state missing dimension {dim}")
        cell.append(min(g - 1, int(state.dims[dim] * g)))
    return tuple(cell)


def cell_center(cell: tuple[int, ...], space: StateSpace) -> dict[str, float]:
    g = space.grid_resolution
    return {dim: (cell[i] + 0.5) / g for i, dim in enumerate(space.dimensions)}


def _cell_in_region(cell: tuple[int, ...], region: Region, space: StateSpace) -> bool:
    return region.contains(cell_center(cell, space))


def _target_region(goal: Goal, space: StateSpace) -> Region:
    if isinstance(goal.target, str):
        return space.region(goal.target)
    return Region("goal", {d: tuple(b) for d, b in goal.target.items()}, "neutral")


def _actions(catalog: list[InterventionSpec], space: StateSpace,
             constraints: PlanConstraints):
    """Feasible weekly intervention sets with their cell deltas and costs."""
    g = space.grid_resolution
    by_id = {s.id: s for s in catalog}
    usable = [s for s in sorted(catalog, key=lambda s: s.id)
              if not (s.risk == "high" and not constraints.provider_approved)]
    actions = []
    for r in range(1, constraints.max_concurrent + 1):
        for combo in itertools.combinations(usable, r):
            if sum(1 for s in combo if s.risk == "high") > constraints.max_high_risk:
                continue
            ids = tuple(sorted(s.id for s in combo))
            delta = tuple(
                sum(int(round(by_id[i].effect.get(dim, 0.0) * g)) for i in ids)
                for dim in space.dimensions)
            cost = sum(s.cost for s in combo)
            if any(delta):
                actions.append((ids, delta, cost))
    return actions


def _search(start: tuple[int, ...], target: Region, space: StateSpace,
            actions, forbidden_regions: list[Region], max_weeks: int):
    """Dijkstra over (cell, active set); ties broken by the action-id sequence."""
    g = space.grid_resolution

    def in_target(cell):
        return _cell_in_region(cell, target, space)

    def forbidden(cell):
        return any(_cell_in_region(cell, r, space) for r in forbidden_regions)

    if in_target(start):
        return 0.0, []
    counter = itertools.count()
    heap = [(0.0, (), next(counter), start, ())]
    best: dict[tuple, tuple] = {}
    while heap:
        cost, path_key, _, cell, path = heapq.heappop(heap)
        state_key = cell
        if state_key in best and best[state_key] <= (cost, path_key):
            continue
        best[state_key] = (cost, path_key)
        if in_target(cell):
            return cost, list(path)
        if len(path) >= max_weeks:
            continue
        for ids, delta, act_cost in actions:
            nxt = tuple(min(g - 1, max(0, c + d)) for c, d in zip(cell, delta))
            if nxt == cell:
                continue
            if forbidden(nxt) and not in_target(nxt):
                continue
            new_key = path_key + (ids,)
            if nxt in best and best[nxt] <= (cost + act_cost, new_key):
                continue
            heapq.heappush(heap, (cost + act_cost, new_key, next(counter), nxt,
                                  path + ((ids, nxt),)))
    return None


def plan_route(current: StateVector, goal: Goal, catalog: list[InterventionSpec],
               space: StateSpace, constraints: PlanConstraints | None = None,
               now_ms: int = 0) -> GuidancePlan:
    constraints = constraints or PlanConstraints()
    if goal.status != "consensus":
        raise NoConsensusGoal(f"goal status is {goal.status!r}, need consensus")
    start = cell_of(current, space)
    target = _target_region(goal, space)
    # routes never ENTER a disorder region; regions the journey starts inside
    # are exempt, since leaving one necessarily crosses its interior
    forbidden = [r for r in space.regions if r.kind == "disorder"
                 and r.label != target.label
                 and not _cell_in_region(start, r, space)]
    actions = _actions(catalog, space, constraints)

    result = _search(start, target, space, actions, forbidden, constraints.max_weeks)
    if result is None:
        blocking = _diagnose_blocking(start, target, space, catalog, constraints,
                                      forbidden)
        raise NoRoute(f"no route from {start} to {target.label!r}", blocking)
    cost, path = result
    weekly = [ids for ids, _ in path]
    trajectory = [start] + [cell for _, cell in path]
    steps = _compress_steps(weekly)
    return GuidancePlan(subject=goal.subject, goal_target=goal.target, steps=steps,
                        trajectory=trajectory, total_cost=cost, created_at=now_ms)


def _diagnose_blocking(start, target, space, catalog, constraints, forbidden) -> str:
    relaxed = PlanConstraints(True, constraints.max_concurrent,
                              constraints.max_high_risk, constraints.max_weeks)
    if not constraints.provider_approved and _search(
            start, target, space, _actions(catalog, space, relaxed), forbidden,
            constraints.max_weeks):
        return "high-risk interventions need provider approval"
    actions = _actions(catalog, space, constraints)
    if _search(start, target, space, actions, [], constraints.max_weeks):
        return "disorder-region avoidance"
    if _search(start, target, space, actions, forbidden, constraints.max_weeks * 4):
        return f"max_weeks={constraints.max_weeks}"
    return "catalog effects cannot reach the target"


def _compress_steps(weekly: list[tuple[str, ...]]) -> list[dict]:
    steps = []
    open_runs: dict[str, dict] = {}
    for w, ids in enumerate(weekly):
        active = set(ids)
        for iid in list(open_runs):
            if iid not in active:
                steps.append(open_runs.pop(iid))
        for iid in sorted(active):
            if iid in open_runs:
                open_runs[iid]["weeks"] += 1
            else:
                open_runs[iid] = {"intervention_id": iid, "start_week": w, "weeks": 1}
    steps.extend(open_runs.values())
    steps.sort(key=lambda s: (s["start_week"], s["intervention_id"]))
    return steps


@dataclass
class RecommendationProfile:
    days_observed: int
    social_engagement: float = 0.5
    home_time_z: float = 0.0
    social_media_arousal_events: int = 0
    arousal_volatility: float = 0.0
    conflict_events: int = 0


def recommend(profile: RecommendationProfile, catalog: list[InterventionSpec] | None = None,
              cfg: NavigatorConfig | None = None) -> list[tuple[InterventionSpec, str]]:
    """Evaluate the pattern rules; within each matched rule the output keeps
    catalog order.  Falls back to the habit-maintenance list."""
    cfg = cfg or NavigatorConfig()
    catalog = catalog if catalog is not None else default_catalog()
    if profile.days_observed < 7:
        raise InsufficientData(f"{profile.days_observed} days observed, need >= 7")
    out: list[tuple[InterventionSpec, str]] = []
    if (profile.social_engagement < cfg.low_engagement_cut
            and profile.home_time_z > cfg.home_z_cut
            and profile.social_media_arousal_events > 0):
        rationale = ("sustained social withdrawal: low engagement "
                     f"({profile.social_engagement:.2f}), home-time z "
                     f"{profile.home_time_z:+.1f}, arousal around social media")
        out += [(s, rationale) for s in catalog if "individual_a" in s.tags]
    if (profile.arousal_volatility > cfg.arousal_volatility_cut
            and profile.conflict_events > 0):
        rationale = ("emotional dysregulation: arousal volatility "
                     f"{profile.arousal_volatility:.2f} with "
                     f"{profile.conflict_events} conflict-tagged events")
        out += [(s, rationale) for s in catalog if "individual_b" in s.tags]
    if not out:
        rationale = "no acute pattern: encourage and maintain supportive habits"
        out = [(s, rationale) for s in catalog if "maintenance" in s.tags]
    return out


@dataclass
class FeedbackResult:
    status: str                       # on_track | drifted | achieved
    drift_weeks: list[int] = field(default_factory=list)
    replan: GuidancePlan | None = None


def apply_feedback(plan: GuidancePlan, observed: list[tuple[int, StateVector]],
                   goal: Goal, catalog: list[InterventionSpec], space: StateSpace,
                   constraints: PlanConstraints | None = None,
                   cfg: NavigatorConfig | None = None) -> FeedbackResult:
    """Compare observed cells to the plan's predicted weekly cells.

    Chebyshev distance >= drift_cells for drift_weeks consecutive observed
    weeks triggers a replan from the latest observed cell; an observation
    inside the target region means achieved.
    """
    cfg = cfg or NavigatorConfig()
    if plan is None or not plan.active:
        raise NoActivePlan("no active plan")
    if not observed:
        raise ValueError("need at least one observed state")

    target = _target_region(goal, space)
    by_week: dict[int, StateVector] = {}
    for ts, state in sorted(observed):
        week = max(0, (ts - plan.created_at) // WEEK_MS)
        by_week[week] = state

    # achieved is judged on the actual state values, so an achieved verdict
    # always agrees with region classification of the last observation
    last_state = by_week[max(by_week)]
    if target.contains(last_state.dims):
        return FeedbackResult(status="achieved")

    drift_run: list[int] = []
    for week in sorted(by_week):
        predicted = plan.trajectory[min(int(week), len(plan.trajectory) - 1)]
        cell = cell_of(by_week[week], space)
        chebyshev = max(abs(a - b) for a, b in zip(cell, predicted))
        if chebyshev >= cfg.drift_cells:
            drift_run.append(int(week))
            if len(drift_run) >= cfg.drift_weeks and \
                    drift_run[-cfg.drift_weeks:] == list(
                        range(drift_run[-1] - cfg.drift_weeks + 1, drift_run[-1] + 1)):
                try:
                    replan = plan_route(last_state, goal, catalog, space, constraints)
                except NoRoute:
                    replan = None
                return FeedbackResult(status="drifted", drift_weeks=drift_run,
                                      replan=replan)
        else:
            drift_run = []
    return FeedbackResult(status="on_track")
