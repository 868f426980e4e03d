"""Cross-player strategy compatibility.

Decides, for an ordered pair of (player, strategy) claims, whether every
totally mixed correlated profile that keeps the second strategy weakly
optimal for its player forces the first strategy to be strictly optimal
for its player, uniformly over profiles that agree on everyone else's
play. The universally quantified statement is decided by sign: each
candidate deviation defines a counterexample polytope, and the relation
fails exactly when one of those polytopes contains a point whose
probability coordinates are all strictly positive.

Also builds the all-pairs digraph of the relation and checks the
belief-restriction refinement for signaling games that the relation
induces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .games import (
    CorrelatedProfile,
    SignalingGame,
    StrategicGame,
    signaling_to_strategic,
    validate_no_strict_dominance,
)
from .numerics import (
    Constraint,
    LinearProgram,
    lp_solve_exact,
    max_min_coordinate,
    max_min_coordinate_point,
)

_METHODS = ("reduced", "joint")


@dataclass(frozen=True)
class CompatibilityVerdict:
    """Outcome of one ordered comparison of (i, s_i*) against (j, s_j*).

    ``vacuous`` marks relations that hold only because no totally mixed
    profile keeps s_j* weakly optimal for j. When the relation fails,
    ``witness`` holds a pair (sigma, sigma_tilde) of totally mixed
    correlated profiles over the full game with equal marginals away
    from {i, j}: sigma keeps s_j* weakly optimal for j while sigma_tilde
    makes some deviation of i at least as good as s_i*.
    """

    holds: bool
    vacuous: bool = False
    witness: tuple[CorrelatedProfile, CorrelatedProfile] | None = None


@dataclass(frozen=True)
class CompatibilityEdge:
    source: tuple[str, str]
    target: tuple[str, str]
    vacuous: bool


@dataclass(frozen=True)
class CompatibilityDigraph:
    """All-pairs view of the relation: edge s_i* -> s_j* iff it holds."""

    nodes: tuple[tuple[str, str], ...]
    edges: tuple[CompatibilityEdge, ...]

    def edge_set(self) -> frozenset[tuple[tuple[str, str], tuple[str, str]]]:
        return frozenset((e.source, e.target) for e in self.edges)

    def has_edge(self, source, target) -> bool:
        return (tuple(source), tuple(target)) in self.edge_set()

    def successors(self, node) -> tuple[tuple[str, str], ...]:
        node = tuple(node)
        return tuple(e.target for e in self.edges if e.source == node)


# ------------------------------------------------------------- the relation


def _uniform_blowup(
    game: StrategicGame, absent: str, weights: Mapping[tuple[str, ...], Fraction]
) -> CorrelatedProfile:
    """Extend a distribution over opponent profiles of ``absent`` to the
    full profile space by mixing ``absent`` uniformly and independently."""
    pos = game.player_index(absent)
    own = game.strategy_set(absent)
    share = Fraction(1, len(own))
    full: dict[tuple[str, ...], Fraction] = {}
    for rest, w in weights.items():
        for s in own:
            full[rest[:pos] + (s,) + rest[pos:]] = w * share
    return CorrelatedProfile.of(game.players, game.strategies, full)


def is_more_compatible(
    game: StrategicGame,
    i: str,
    s_i_star: str,
    j: str,
    s_j_star: str,
    method: str = "reduced",
) -> CompatibilityVerdict:
    """Decide whether i is more compatible with s_i_star than j is with
    s_j_star.

    ``method`` selects the polytope encoding. "reduced" (default) works
    with the two opponent-facing marginals, which carry all payoff
    information; "joint" poses the same question literally over pairs of
    full-profile distributions. The verdicts agree; "reduced" is far
    smaller.

    The relation is meaningful on games free of strictly dominated
    strategies. This check is left to the caller (see
    ``compatibility_digraph``) because the screen costs more than the
    decision itself.
    """
    if i == j:
        raise ValueError("the relation compares strategies of two distinct players")
    own_i = game.strategy_set(i)
    own_j = game.strategy_set(j)
    if s_i_star not in own_i:
        raise KeyError(f"{s_i_star!r} is not a strategy of {i!r}")
    if s_j_star not in own_j:
        raise KeyError(f"{s_j_star!r} is not a strategy of {j!r}")
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}")
    if method == "reduced":
        return _decide_reduced(game, i, s_i_star, j, s_j_star)
    return _decide_joint(game, i, s_i_star, j, s_j_star)


def _region(rows: list[Constraint], n: int) -> LinearProgram:
    return LinearProgram.of([0] * n, rows)


def _decide_reduced(game, i, s_i_star, j, s_j_star) -> CompatibilityVerdict:
    # mu ranges over profiles of everyone but j (it prices j's options);
    # nu over profiles of everyone but i. Tying their marginals off
    # {i, j} is exactly the agreement the definition demands, and any
    # totally mixed such pair extends to full-profile distributions by
    # blowing up the missing player uniformly.
    mu_profiles = tuple(game.opponent_profiles(j))
    nu_profiles = tuple(game.opponent_profiles(i))
    n_mu, n_nu = len(mu_profiles), len(nu_profiles)
    n = n_mu + n_nu
    pos_i = game.opponents(j).index(i)
    pos_j = game.opponents(i).index(j)
    zero = Fraction(0)

    weak_rows = []
    for alt in game.strategy_set(j):
        if alt == s_j_star:
            continue
        gap = [game.u(j, s_j_star, p) - game.u(j, alt, p) for p in mu_profiles]
        weak_rows.append(gap)

    head = [Constraint.of([1] * n_mu, "=", 1)]
    head += [Constraint.of(gap, ">=", 0) for gap in weak_rows]
    interior = max_min_coordinate(_region(head, n_mu), range(n_mu))
    if interior is None or interior <= 0:
        return CompatibilityVerdict(holds=True, vacuous=True)

    shared = [
        Constraint.of([1] * n_mu + [0] * n_nu, "=", 1),
        Constraint.of([0] * n_mu + [1] * n_nu, "=", 1),
    ]
    shared += [Constraint.of(gap + [0] * n_nu, ">=", 0) for gap in weak_rows]
    groups: dict[tuple[str, ...], list[tuple[int, int]]] = {}
    for k, prof in enumerate(mu_profiles):
        key = prof[:pos_i] + prof[pos_i + 1 :]
        groups.setdefault(key, []).append((k, 1))
    for k, prof in enumerate(nu_profiles):
        key = prof[:pos_j] + prof[pos_j + 1 :]
        groups.setdefault(key, []).append((n_mu + k, -1))
    for key in sorted(groups):
        coeffs = [zero] * n
        for idx, sign in groups[key]:
            coeffs[idx] += sign
        shared.append(Constraint.of(coeffs, "=", 0))

    for dev in game.strategy_set(i):
        if dev == s_i_star:
            continue
        gap = [game.u(i, dev, p) - game.u(i, s_i_star, p) for p in nu_profiles]
        rows = shared + [Constraint.of([0] * n_mu + gap, ">=", 0)]
        found = max_min_coordinate_point(_region(rows, n), range(n))
        if found is None or found[0] <= 0:
            continue
        _, point = found
        sigma = _uniform_blowup(
            game, j, {p: w for p, w in zip(mu_profiles, point[:n_mu])}
        )
        sigma_tilde = _uniform_blowup(
            game, i, {p: w for p, w in zip(nu_profiles, point[n_mu:])}
        )
        return CompatibilityVerdict(holds=False, witness=(sigma, sigma_tilde))
    return CompatibilityVerdict(holds=True, vacuous=False)


def _decide_joint(game, i, s_i_star, j, s_j_star) -> CompatibilityVerdict:
    profs = tuple(game.profiles())
    n = len(profs)
    pi, pj = game.player_index(i), game.player_index(j)
    zero = Fraction(0)

    weak_rows = []
    for alt in game.strategy_set(j):
        if alt == s_j_star:
            continue
        gap = []
        for prof in profs:
            rest = prof[:pj] + prof[pj + 1 :]
            gap.append(game.u(j, s_j_star, rest) - game.u(j, alt, rest))
        weak_rows.append(gap)

    head = [Constraint.of([1] * n, "=", 1)]
    head += [Constraint.of(gap, ">=", 0) for gap in weak_rows]
    interior = max_min_coordinate(_region(head, n), range(n))
    if interior is None or interior <= 0:
        return CompatibilityVerdict(holds=True, vacuous=True)

    shared = [
        Constraint.of([1] * n + [0] * n, "=", 1),
        Constraint.of([0] * n + [1] * n, "=", 1),
    ]
    shared += [Constraint.of(gap + [0] * n, ">=", 0) for gap in weak_rows]
    groups: dict[tuple[str, ...], list[tuple[int, int]]] = {}
    lo, hi = sorted((pi, pj))
    for k, prof in enumerate(profs):
        key = prof[:lo] + prof[lo + 1 : hi] + prof[hi + 1 :]
        groups.setdefault(key, []).append(k)
    for key in sorted(groups):
        coeffs = [zero] * (2 * n)
        for idx in groups[key]:
            coeffs[idx] += 1
            coeffs[n + idx] -= 1
        shared.append(Constraint.of(coeffs, "=", 0))

    for dev in game.strategy_set(i):
        if dev == s_i_star:
            continue
        gap = []
        for prof in profs:
            rest = prof[:pi] + prof[pi + 1 :]
            gap.append(game.u(i, dev, rest) - game.u(i, s_i_star, rest))
        rows = shared + [Constraint.of([0] * n + gap, ">=", 0)]
        found = max_min_coordinate_point(_region(rows, 2 * n), range(2 * n))
        if found is None or found[0] <= 0:
            continue
        _, point = found
        sigma = CorrelatedProfile.of(
            game.players, game.strategies, dict(zip(profs, point[:n]))
        )
        sigma_tilde = CorrelatedProfile.of(
            game.players, game.strategies, dict(zip(profs, point[n:]))
        )
        return CompatibilityVerdict(holds=False, witness=(sigma, sigma_tilde))
    return CompatibilityVerdict(holds=True, vacuous=False)


# --------------------------------------------------------------- the digraph


def compatibility_digraph(game: StrategicGame, method: str = "reduced") -> CompatibilityDigraph:
    """Run the relation over every ordered cross-player strategy pair.

    Games with a strictly dominated strategy are rejected up front: the
    tremble ordering the digraph feeds is defined on games where every
    strategy is sometimes worth playing.
    """
    offender = validate_no_strict_dominance(game)
    if offender is not None:
        raise ValueError(
            f"strictly dominated strategy {offender[1]!r} of player {offender[0]!r}"
        )
    nodes = tuple(
        (p, s) for p in game.players for s in game.strategy_set(p)
    )
    edges = []
    for i, s_i in nodes:
        for j, s_j in nodes:
            if i == j:
                continue
            verdict = is_more_compatible(game, i, s_i, j, s_j, method=method)
            if verdict.holds:
                edges.append(CompatibilityEdge((i, s_i), (j, s_j), verdict.vacuous))
    return CompatibilityDigraph(nodes, tuple(edges))


# ------------------------------------------- signaling-game belief criterion


@dataclass(frozen=True)
class CriterionCheck:
    """One (signal, action) cell of the criterion report."""

    signal: str
    action: str
    ok: bool
    reason: str
    belief: tuple[Fraction, ...] | None = None


@dataclass(frozen=True)
class CriterionReport:
    passed: bool
    checks: tuple[CriterionCheck, ...]

    @property
    def failures(self) -> tuple[CriterionCheck, ...]:
        return tuple(c for c in self.checks if not c.ok)


def _as_rule(table: Mapping, keys: Iterable[str], options: Iterable[str], what: str):
    """Normalize a behavioral rule into exact per-key distributions."""
    options = tuple(options)
    out = {}
    for key in keys:
        try:
            row = table[key]
        except KeyError:
            raise ValueError(f"{what} rule is missing an entry for {key!r}") from None
        dist = {o: Fraction(row.get(o, 0)) for o in options}
        if any(v < 0 for v in dist.values()) or sum(dist.values()) != 1:
            raise ValueError(f"{what} rule at {key!r} is not a probability distribution")
        out[key] = dist
    return out


def check_compatibility_criterion(sg: SignalingGame, eq) -> CriterionReport:
    """Check whether a Nash equilibrium survives the compatibility-based
    belief restriction.

    ``eq`` is a pair (sender rule, receiver rule): per-type signal
    distributions and per-signal action distributions. The pair must be
    a Nash equilibrium (verified exactly; ValueError otherwise). Each
    action supported at an unsent signal must then be a best response to
    some belief p over types satisfying p(t') * prior(t) <= prior(t') *
    p(t) whenever the signal is more compatible with t than with t'
    (decided on the strategic form, types as players) and the signal is
    not equilibrium dominated for t. Signals that are sent in
    equilibrium pin the belief by conditioning, so only unsent signals
    are searched.
    """
    sender_rule, receiver_rule = eq
    sigma1 = _as_rule(sender_rule, sg.types, sg.signals, "sender")
    sigma2 = _as_rule(receiver_rule, sg.signals, sg.actions, "receiver")

    # Behavioral values; Nash of the strategic form is equivalent to
    # per-type signal optimality plus receiver optimality at sent signals.
    value = {
        (t, s): sum(sigma2[s][a] * sg.sender_payoff[(s, a, t)] for a in sg.actions)
        for t in sg.types
        for s in sg.signals
    }
    eq_payoff = {}
    for t in sg.types:
        best = max(value[(t, s)] for s in sg.signals)
        for s in sg.signals:
            if sigma1[t][s] > 0 and value[(t, s)] < best:
                raise ValueError(
                    f"not a Nash equilibrium: type {t!r} prefers deviating from {s!r}"
                )
        eq_payoff[t] = best

    sent = {
        s: sum(sg.prior_of(t) * sigma1[t][s] for t in sg.types) for s in sg.signals
    }
    for s in sg.signals:
        if sent[s] == 0:
            continue
        score = {
            a: sum(
                sg.prior_of(t) * sigma1[t][s] * sg.receiver_payoff[(s, a, t)]
                for t in sg.types
            )
            for a in sg.actions
        }
        best = max(score.values())
        for a in sg.actions:
            if sigma2[s][a] > 0 and score[a] < best:
                raise ValueError(
                    f"not a Nash equilibrium: receiver plays {a!r} at sent signal {s!r}"
                )

    strategic = signaling_to_strategic(sg)
    relation_cache: dict[tuple[str, str, str], bool] = {}

    def more_compatible(signal, t, t_prime):
        key = (signal, t, t_prime)
        if key not in relation_cache:
            relation_cache[key] = is_more_compatible(
                strategic, t, signal, t_prime, signal
            ).holds
        return relation_cache[key]

    checks = []
    for s in sg.signals:
        supported = [a for a in sg.actions if sigma2[s][a] > 0]
        if sent[s] > 0:
            checks += [
                CriterionCheck(s, a, True, "sent in equilibrium; belief is Bayesian")
                for a in supported
            ]
            continue
        contenders = [
            t
            for t in sg.types
            if max(sg.sender_payoff[(s, a, t)] for a in sg.actions) > eq_payoff[t]
        ]
        ratio_rows = []
        for t in contenders:
            for t_prime in sg.types:
                if t_prime != t and more_compatible(s, t, t_prime):
                    # p(t') / p(t) <= prior(t') / prior(t), cross-multiplied
                    coeffs = [Fraction(0)] * len(sg.types)
                    coeffs[sg.types.index(t_prime)] = sg.prior_of(t)
                    coeffs[sg.types.index(t)] = -sg.prior_of(t_prime)
                    ratio_rows.append(Constraint.of(coeffs, "<=", 0))
        for a in supported:
            rows = [Constraint.of([1] * len(sg.types), "=", 1)]
            for other in sg.actions:
                if other == a:
                    continue
                gap = [
                    sg.receiver_payoff[(s, a, t)] - sg.receiver_payoff[(s, other, t)]
                    for t in sg.types
                ]
                rows.append(Constraint.of(gap, ">=", 0))
            res = lp_solve_exact(_region(rows + ratio_rows, len(sg.types)))
            if res.is_optimal:
                checks.append(
                    CriterionCheck(s, a, True, "supported by a restricted belief", res.point)
                )
            else:
                checks.append(
                    CriterionCheck(
                        s,
                        a,
                        False,
                        "no belief satisfying the compatibility restriction "
                        "makes this action a best response",
                    )
                )
    return CriterionReport(all(c.ok for c in checks), tuple(checks))
