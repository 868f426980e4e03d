"""Extensive-form trees and strategy-level payoff structure.

The analysis here asks, for one player at a time, whether the payoff of
each pure strategy is driven one-to-one by play at a dedicated set of
opponent information sets, with no set shared between two strategies.
When that holds, playing a strategy reveals exactly the opponent play
that matters for it and nothing about any other strategy, which is what
lets the bandit-learning layer treat strategies as independent arms.

Trees are immutable; every routine reduces to the induced strategic form
(pure plans over own information sets, chance integrated out exactly)
and works with exact rationals throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .games import StrategicGame
from .numerics import solve_linear_system_exact


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# -------------------------------------------------------------------- nodes


@dataclass(frozen=True)
class Terminal:
    """Leaf with one exact payoff per player, aligned with the game's
    player order once the tree is validated."""

    payoffs: tuple

    @classmethod
    def of(cls, payoffs) -> "Terminal":
        return cls(payoffs if isinstance(payoffs, Mapping) else tuple(payoffs))


@dataclass(frozen=True)
class Decision:
    owner: str
    info_set: str
    moves: tuple  # ordered (action, subtree) pairs


@dataclass(frozen=True)
class Chance:
    moves: tuple  # ordered (label, probability, subtree) triples


Node = Union[Terminal, Decision, Chance]


def terminal(payoffs) -> Terminal:
    """``payoffs``: map player -> value, or a player-ordered sequence."""
    return Terminal.of(payoffs)


def decision(owner: str, info_set: str, moves: Mapping[str, Node]) -> Decision:
    return Decision(owner, info_set, tuple(moves.items()))


def chance(moves: Mapping[str, tuple]) -> Chance:
    """``moves``: map branch label -> (probability, subtree)."""
    return Chance(tuple((label, p, node) for label, (p, node) in moves.items()))


# --------------------------------------------------------------------- game


@dataclass(frozen=True)
class InfoSet:
    label: str
    owner: str
    actions: tuple[str, ...]


@dataclass(frozen=True)
class ExtensiveGame:
    """A finite tree with chance moves and player information sets.

    Validated invariants: information-set labels are unique to one owner
    and carry one action list; chance probabilities are positive and sum
    to one; and every player moves at most once along any path, which
    also gives perfect recall since no information set can then span or
    follow the same player's earlier move.
    """

    players: tuple[str, ...]
    root: Node
    info_sets: tuple[InfoSet, ...]

    @classmethod
    def of(cls, players, root) -> "ExtensiveGame":
        players = tuple(players)
        if len(set(players)) != len(players):
            raise ValueError("duplicate player names")
        seen: dict[str, InfoSet] = {}
        order: list[str] = []

        def normalize(node, on_path: frozenset) -> Node:
            if isinstance(node, Terminal):
                raw = node.payoffs
                if isinstance(raw, Mapping):
                    missing = set(players) - set(raw)
                    if missing:
                        raise ValueError(f"terminal omits payoffs for {sorted(missing)}")
                    vec = tuple(_frac(raw[p]) for p in players)
                else:
                    vec = tuple(_frac(v) for v in raw)
                    if len(vec) != len(players):
                        raise ValueError("terminal payoff vector has wrong arity")
                return Terminal(vec)
            if isinstance(node, Chance):
                total = Fraction(0)
                moves = []
                for label, p, sub in node.moves:
                    p = _frac(p)
                    if p <= 0:
                        raise ValueError(f"chance branch {label!r} needs positive probability")
                    total += p
                    moves.append((label, p, normalize(sub, on_path)))
                if total != 1:
                    raise ValueError(f"chance probabilities sum to {total}")
                return Chance(tuple(moves))
            if isinstance(node, Decision):
                if node.owner not in players:
                    raise ValueError(f"unknown player {node.owner!r}")
                if node.owner in on_path:
                    raise ValueError(
                        f"player {node.owner!r} moves twice along one path"
                    )
                actions = tuple(a for a, _ in node.moves)
                if len(actions) != len(set(actions)) or not actions:
                    raise ValueError(f"bad action labels at {node.info_set!r}")
                known = seen.get(node.info_set)
                if known is None:
                    seen[node.info_set] = InfoSet(node.info_set, node.owner, actions)
                    order.append(node.info_set)
                elif known.owner != node.owner or known.actions != actions:
                    raise ValueError(
                        f"information set {node.info_set!r} is inconsistent across nodes"
                    )
                deeper = on_path | {node.owner}
                return Decision(
                    node.owner,
                    node.info_set,
                    tuple((a, normalize(sub, deeper)) for a, sub in node.moves),
                )
            raise TypeError(f"not a tree node: {node!r}")

        normalized = normalize(root, frozenset())
        return cls(players, normalized, tuple(seen[label] for label in order))

    def info_set(self, label: str) -> InfoSet:
        for h in self.info_sets:
            if h.label == label:
                return h
        raise KeyError(label)

    def player_info_sets(self, player: str) -> tuple[str, ...]:
        if player not in self.players:
            raise KeyError(player)
        return tuple(h.label for h in self.info_sets if h.owner == player)

    def outcome(self, assignment: Mapping[str, str]) -> tuple[Fraction, ...]:
        """Expected payoffs when every information set plays as assigned."""

        def walk(node) -> tuple[Fraction, ...]:
            if isinstance(node, Terminal):
                return node.payoffs
            if isinstance(node, Chance):
                acc = (Fraction(0),) * len(self.players)
                for _, p, sub in node.moves:
                    vec = walk(sub)
                    acc = tuple(a + p * v for a, v in zip(acc, vec))
                return acc
            picked = assignment[node.info_set]
            for a, sub in node.moves:
                if a == picked:
                    return walk(sub)
            raise KeyError(f"action {picked!r} not available at {node.info_set!r}")

        return walk(self.root)

    def on_path_sets(self, assignment: Mapping[str, str]) -> frozenset:
        """Information sets reached with positive probability under the
        assignment (chance explores every branch)."""
        hit = set()

        def walk(node):
            if isinstance(node, Terminal):
                return
            if isinstance(node, Chance):
                for _, _, sub in node.moves:
                    walk(sub)
                return
            hit.add(node.info_set)
            picked = assignment[node.info_set]
            for a, sub in node.moves:
                if a == picked:
                    walk(sub)
                    return
            raise KeyError(f"action {picked!r} not available at {node.info_set!r}")

        walk(self.root)
        return frozenset(hit)

    def paths(self, assignment: Mapping[str, str]):
        """Every root-to-terminal path consistent with the assignment,
        one per chance realization, as (visited info sets, payoffs)."""

        def walk(node, visited):
            if isinstance(node, Terminal):
                yield frozenset(visited), node.payoffs
                return
            if isinstance(node, Chance):
                for _, _, sub in node.moves:
                    yield from walk(sub, visited)
                return
            picked = assignment[node.info_set]
            for a, sub in node.moves:
                if a == picked:
                    yield from walk(sub, visited | {node.info_set})
                    return
            raise KeyError(f"action {picked!r} not available at {node.info_set!r}")

        yield from walk(self.root, frozenset())


# ----------------------------------------------------------- strategic form


def _plans(ext: ExtensiveGame, player: str):
    """Pure plans as (label, info_set -> action) pairs. A single
    information set keeps bare action labels; otherwise labels read
    "set=action,set=action" in tree order."""
    sets = ext.player_info_sets(player)
    if not sets:
        return (("", {}),)
    options = [ext.info_set(h).actions for h in sets]
    plans = []
    for combo in itertools.product(*options):
        plan = dict(zip(sets, combo))
        if len(sets) == 1:
            label = combo[0]
        else:
            label = ",".join(f"{h}={a}" for h, a in zip(sets, combo))
        plans.append((label, plan))
    return tuple(plans)


def reduce_to_strategic(ext: ExtensiveGame) -> StrategicGame:
    """Strategic form over pure plans, chance integrated out exactly."""
    plan_table = {p: _plans(ext, p) for p in ext.players}
    for p, plans in plan_table.items():
        if plans == (("", {}),):
            raise ValueError(f"player {p!r} never moves")
    strategies = tuple(tuple(label for label, _ in plan_table[p]) for p in ext.players)
    lookup = {
        p: {label: plan for label, plan in plan_table[p]} for p in ext.players
    }

    def pay(profile):
        assignment: dict[str, str] = {}
        for p, label in zip(ext.players, profile):
            assignment.update(lookup[p][label])
        return ext.outcome(assignment)

    return StrategicGame.of(ext.players, strategies, pay)


def _opponent_sets(ext, player) -> tuple[str, ...]:
    return tuple(h.label for h in ext.info_sets if h.owner != player)


def _dependent_sets(ext, reduced, player, strategy) -> frozenset:
    """Opponent information sets whose action can move this strategy's
    payoff, holding everything else fixed."""
    plans = {q: dict(_plans(ext, q)) for q in ext.players if q != player}
    opp_order = reduced.opponents(player)
    values = {}
    for prof in reduced.opponent_profiles(player):
        combo = {}
        for q, label in zip(opp_order, prof):
            combo.update(plans[q][label])
        values[tuple(sorted(combo.items()))] = reduced.u(player, strategy, prof)
    sets = _opponent_sets(ext, player)
    out = set()
    for h in sets:
        groups: dict = {}
        for combo, v in values.items():
            rest = tuple(kv for kv in combo if kv[0] != h)
            groups.setdefault(rest, set()).add(v)
        if any(len(vs) > 1 for vs in groups.values()):
            out.add(h)
    return frozenset(out)


# --------------------------------------------------------- payoff partition


@dataclass(frozen=True)
class PayoffPartition:
    """Level sets of one strategy's payoff over pure opponent profiles."""

    player: str
    strategy: str
    opponents: tuple[str, ...]
    blocks: tuple[frozenset, ...]
    values: tuple[Fraction, ...]


def payoff_partition(ext: ExtensiveGame, player: str, strategy: str) -> PayoffPartition:
    reduced = reduce_to_strategic(ext)
    if strategy not in reduced.strategy_set(player):
        raise KeyError(strategy)
    grouped: dict[Fraction, set] = {}
    for prof in reduced.opponent_profiles(player):
        grouped.setdefault(reduced.u(player, strategy, prof), set()).add(prof)
    values = sorted(grouped)
    return PayoffPartition(
        player,
        strategy,
        reduced.opponents(player),
        tuple(frozenset(grouped[v]) for v in values),
        tuple(values),
    )


# ------------------------------------------------------- one-step screening


@dataclass(frozen=True)
class OneStepViolation:
    info_set: str
    profile: tuple[str, ...]


@dataclass(frozen=True)
class OneStepReport:
    player: str
    passed: bool
    violations: tuple[OneStepViolation, ...]


def check_one_step_property(ext: ExtensiveGame, player: str) -> OneStepReport:
    """Screen: every opponent information set that can move the player's
    payoff must, from any pure profile, be on the path already or enter
    it after the player changes her action at a single information set.
    This is necessary for the per-strategy payoff structure below, so it
    runs first and gives the cheapest refutations.
    """
    reduced = reduce_to_strategic(ext)
    plans = {q: dict(_plans(ext, q)) for q in ext.players}
    touchy = set()
    for s in reduced.strategy_set(player):
        touchy |= _dependent_sets(ext, reduced, player, s)

    own_sets = ext.player_info_sets(player)
    own_plans = plans[player]
    violations = []
    for prof in reduced.profiles():
        assignment: dict[str, str] = {}
        for q, label in zip(ext.players, prof):
            assignment.update(plans[q][label])
        base = ext.on_path_sets(assignment)
        missing = [h for h in sorted(touchy) if h not in base]
        if not missing:
            continue
        reachable = set()
        for h_own in own_sets:
            for a in ext.info_set(h_own).actions:
                if a == assignment[h_own]:
                    continue
                trial = dict(assignment)
                trial[h_own] = a
                reachable |= ext.on_path_sets(trial)
        for h in missing:
            if h not in reachable:
                violations.append(OneStepViolation(h, prof))
    return OneStepReport(player, not violations, tuple(violations))


# -------------------------------------------------------------- factoring


@dataclass(frozen=True)
class Factoring:
    """Per-strategy relevant opponent information sets, pairwise disjoint,
    each driving its strategy's payoff one-to-one."""

    player: str
    relevant: tuple  # ordered (strategy, frozenset of info-set labels)

    def relevant_of(self, strategy: str) -> frozenset:
        for s, sets in self.relevant:
            if s == strategy:
                return sets
        raise KeyError(strategy)

    def as_dict(self) -> dict:
        return {s: sets for s, sets in self.relevant}


@dataclass(frozen=True)
class Overlap:
    first: str
    second: str
    shared: frozenset


@dataclass(frozen=True)
class MergedOutcomes:
    strategy: str
    combo_a: tuple
    combo_b: tuple


@dataclass(frozen=True)
class NotFactorable:
    player: str
    reason: str
    unreachable: tuple[OneStepViolation, ...] = ()
    overlaps: tuple[Overlap, ...] = ()
    merged: tuple[MergedOutcomes, ...] = ()


def _injectivity_failure(ext, reduced, player, strategy, sets):
    """Two action combos on ``sets`` with the same payoff, or None.

    Every combo on opponent information sets is realized by some pure
    opponent profile (plans are unrestricted products), so injectivity
    over combos is exactly the one-to-one condition.
    """
    plans = {q: dict(_plans(ext, q)) for q in ext.players if q != player}
    opp_order = reduced.opponents(player)
    by_combo: dict = {}
    for prof in reduced.opponent_profiles(player):
        assignment: dict[str, str] = {}
        for q, label in zip(opp_order, prof):
            assignment.update(plans[q][label])
        combo = tuple(sorted((h, assignment[h]) for h in sets))
        v = reduced.u(player, strategy, prof)
        if combo in by_combo and by_combo[combo][0] != v:
            raise AssertionError("dependence set does not determine the payoff")
        by_combo.setdefault(combo, (v, combo))
    seen_values: dict = {}
    for combo, (v, _) in sorted(by_combo.items()):
        if v in seen_values:
            return MergedOutcomes(strategy, seen_values[v], combo)
        seen_values[v] = combo
    return None


def factor(ext: ExtensiveGame, player: str):
    """The per-strategy relevant-set map, or a structured refusal.

    The relevant set of a strategy is forced: it must contain every
    opponent information set the strategy's payoff depends on, and any
    additional set (all carry at least two actions) would break the
    one-to-one requirement. So the decision reduces to three checks, run
    cheapest-refutation first: the one-step reachability screen, pairwise
    disjointness of the dependence sets, and injectivity of each
    strategy's payoff over play at its own dependence set. A strategy
    whose distinct relevant-set combos share a payoff is refused rather
    than merged; collapsing payoff-equivalent actions is unsupported.
    """
    if player not in ext.players:
        raise KeyError(player)
    screen = check_one_step_property(ext, player)
    if not screen.passed:
        h = screen.violations[0].info_set
        return NotFactorable(
            player,
            f"information set {h!r} affects the payoff but cannot be put on "
            "the path by any single-set deviation",
            unreachable=screen.violations,
        )
    reduced = reduce_to_strategic(ext)
    dep = {
        s: _dependent_sets(ext, reduced, player, s)
        for s in reduced.strategy_set(player)
    }
    overlaps = []
    strategies = reduced.strategy_set(player)
    for a, b in itertools.combinations(strategies, 2):
        shared = dep[a] & dep[b]
        if shared:
            overlaps.append(Overlap(a, b, shared))
    if overlaps:
        worst = overlaps[0]
        return NotFactorable(
            player,
            f"strategies {worst.first!r} and {worst.second!r} both need "
            f"information sets {sorted(worst.shared)}",
            overlaps=tuple(overlaps),
        )
    merged = []
    for s in strategies:
        failure = _injectivity_failure(ext, reduced, player, s, dep[s])
        if failure is not None:
            merged.append(failure)
    if merged:
        s = merged[0].strategy
        return NotFactorable(
            player,
            f"distinct play at the relevant sets of {s!r} yields identical "
            "payoffs; payoff-equivalent actions are not supported",
            merged=tuple(merged),
        )
    return Factoring(player, tuple((s, dep[s]) for s in strategies))


def validate_factoring(ext: ExtensiveGame, factoring: Factoring) -> None:
    """Raise unless the map is exactly the valid factoring for its player."""
    result = factor(ext, factoring.player)
    if not isinstance(result, Factoring):
        raise ValueError(f"game is not factorable for {factoring.player!r}: {result.reason}")
    if result.as_dict() != factoring.as_dict():
        raise ValueError("relevant-set map does not match the game's structure")


# --------------------------------------------------- isomorphic factorings


def isomorphic_factoring(
    ext: ExtensiveGame, i: str, j: str, fi: Factoring, fj: Factoring
):
    """A strategy bijection matching third-party relevant sets, or None."""
    if i == j:
        raise ValueError("the two players must differ")
    if fi.player != i or fj.player != j:
        raise ValueError("factorings must belong to the named players")
    validate_factoring(ext, fi)
    validate_factoring(ext, fj)
    third_party = {
        h.label for h in ext.info_sets if h.owner not in (i, j)
    }
    si = [s for s, _ in fi.relevant]
    sj = [s for s, _ in fj.relevant]
    if len(si) != len(sj):
        return None
    allowed = {
        a: [
            b
            for b in sj
            if fi.relevant_of(a) & third_party == fj.relevant_of(b) & third_party
        ]
        for a in si
    }

    def extend(done: dict, used: set):
        if len(done) == len(si):
            return dict(done)
        a = min(set(si) - set(done), key=lambda s: (len(allowed[s]), s))
        for b in allowed[a]:
            if b in used:
                continue
            done[a] = b
            hit = extend(done, used | {b})
            if hit is not None:
                return hit
            del done[a]
        return None

    return extend({}, set())


# --------------------------------------------------- additive separability


def additive_separability(ext: ExtensiveGame, player: str, factoring: Factoring):
    """Per-set reward functions summing to each strategy's payoff, or None.

    Strategies with an empty relevant set have a known constant payoff
    and contribute no equations; with one relevant set the rewards are
    the payoffs themselves, so only strategies whose payoff couples two
    or more sets can fail.
    """
    if factoring.player != player:
        raise ValueError("factoring must belong to the named player")
    validate_factoring(ext, factoring)
    reduced = reduce_to_strategic(ext)
    plans = {q: dict(_plans(ext, q)) for q in ext.players if q != player}
    opp_order = reduced.opponents(player)

    unknowns: list = []
    for _, sets in factoring.relevant:
        for h in sorted(sets):
            for a in ext.info_set(h).actions:
                unknowns.append((h, a))
    index = {key: k for k, key in enumerate(unknowns)}

    rows, rhs = [], []
    for s, sets in factoring.relevant:
        if not sets:
            continue
        seen_combos = set()
        for prof in reduced.opponent_profiles(player):
            assignment: dict[str, str] = {}
            for q, label in zip(opp_order, prof):
                assignment.update(plans[q][label])
            combo = tuple(sorted((h, assignment[h]) for h in sets))
            if combo in seen_combos:
                continue
            seen_combos.add(combo)
            row = [Fraction(0)] * len(unknowns)
            for h, a in combo:
                row[index[(h, a)]] += 1
            rows.append(row)
            rhs.append(reduced.u(player, s, prof))
    if not rows:
        return {}
    sol = solve_linear_system_exact(rows, rhs)
    if sol.status == "inconsistent":
        return None
    rewards: dict = {}
    for (h, a), k in index.items():
        rewards.setdefault(h, {})[a] = sol.solution[k]
    return rewards


# ------------------------------------------------------ binary participation


def is_binary_participation(ext: ExtensiveGame, player: str) -> bool:
    """One binary choice crossed by every path; an opt-out side with one
    terminal payoff; an opt-in side whose paths all visit the same set
    collection and whose payoff responds injectively to play there.

    Path conditions quantify over individual chance realizations, not
    positive-probability reachability.
    """
    sets = ext.player_info_sets(player)
    if len(sets) != 1:
        return False
    h = ext.info_set(sets[0])
    if len(h.actions) != 2:
        return False

    reduced = reduce_to_strategic(ext)
    k = ext.players.index(player)
    plans = {q: dict(_plans(ext, q)) for q in ext.players}

    profiles = list(reduced.profiles())
    assignments = []
    for prof in profiles:
        assignment: dict[str, str] = {}
        for q, label in zip(ext.players, prof):
            assignment.update(plans[q][label])
        assignments.append(assignment)

    for asg in assignments:
        if any(h.label not in visited for visited, _ in ext.paths(asg)):
            return False

    def qualifies(in_action: str, out_action: str) -> bool:
        out_payoffs = set()
        in_collections = set()
        for prof, asg in zip(profiles, assignments):
            if prof[k] == out_action:
                out_payoffs.update(vec[k] for _, vec in ext.paths(asg))
            else:
                in_collections.update(visited for visited, _ in ext.paths(asg))
        if len(out_payoffs) != 1 or len(in_collections) != 1:
            return False
        dep = _dependent_sets(ext, reduced, player, in_action)
        return (
            _injectivity_failure(ext, reduced, player, in_action, dep) is None
        )

    a, b = h.actions
    return qualifies(a, b) or qualifies(b, a)
