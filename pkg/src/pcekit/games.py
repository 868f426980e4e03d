"""Finite strategic-form games with exact rational payoffs.

Payoffs are stored densely as Fractions so that every strict/weak
comparison downstream (dominance, best responses, compatibility) is an
exact decision rather than a tolerance call. Decimal payoffs from input
files are converted to exact rationals before they reach this layer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .numerics import Constraint, LinearProgram, lp_solve_exact


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class StrategicGame:
    players: tuple[str, ...]
    strategies: tuple[tuple[str, ...], ...]
    payoffs: Mapping[tuple[str, ...], tuple[Fraction, ...]] = field(repr=False)

    @classmethod
    def of(cls, players, strategies, payoffs) -> "StrategicGame":
        """Build and validate a game.

        ``strategies`` maps player -> ordered strategy labels (or is a
        sequence aligned with ``players``); ``payoffs`` maps each full
        profile (tuple of labels, player order) to the per-player payoff
        vector, or is a callable profile -> vector.
        """
        players = tuple(players)
        if len(set(players)) != len(players):
            raise ValueError("duplicate player names")
        if isinstance(strategies, Mapping):
            strategies = tuple(tuple(strategies[p]) for p in players)
        else:
            strategies = tuple(tuple(s) for s in strategies)
        if len(strategies) != len(players):
            raise ValueError("one strategy list per player required")
        for p, s in zip(players, strategies):
            if len(s) < 2:
                raise ValueError(f"player {p!r} needs at least two strategies")
            if len(set(s)) != len(s):
                raise ValueError(f"duplicate strategy labels for player {p!r}")
        table = {}
        for profile in itertools.product(*strategies):
            if callable(payoffs):
                vec = payoffs(profile)
            else:
                try:
                    vec = payoffs[profile]
                except KeyError:
                    raise ValueError(f"payoff missing for profile {profile}") from None
            vec = tuple(_frac(v) for v in vec)
            if len(vec) != len(players):
                raise ValueError(f"payoff vector for {profile} has wrong length")
            table[profile] = vec
        return cls(players, strategies, table)

    # -- indexing helpers -------------------------------------------------

    def player_index(self, player: str) -> int:
        try:
            return self.players.index(player)
        except ValueError:
            raise KeyError(f"unknown player {player!r}") from None

    def strategy_set(self, player: str) -> tuple[str, ...]:
        return self.strategies[self.player_index(player)]

    def opponents(self, player: str) -> tuple[str, ...]:
        return tuple(p for p in self.players if p != player)

    def profiles(self):
        return itertools.product(*self.strategies)

    def opponent_profiles(self, player: str):
        """Pure profiles of everyone but ``player``, in player order."""
        idx = self.player_index(player)
        rest = [s for k, s in enumerate(self.strategies) if k != idx]
        return itertools.product(*rest)

    def payoff(self, profile: tuple[str, ...], player: str) -> Fraction:
        return self.payoffs[profile][self.player_index(player)]

    def u(self, player: str, own: str, opp_profile: tuple[str, ...]) -> Fraction:
        """Payoff to ``player`` of pure ``own`` against an opponent profile
        given in opponent order (player order minus the player)."""
        idx = self.player_index(player)
        full = opp_profile[:idx] + (own,) + opp_profile[idx:]
        return self.payoffs[full][idx]


@dataclass(frozen=True)
class CorrelatedProfile:
    """A distribution over pure profiles of a player subset."""

    players: tuple[str, ...]
    strategy_sets: tuple[tuple[str, ...], ...]
    weights: Mapping[tuple[str, ...], Fraction] = field(repr=False)

    @classmethod
    def of(cls, players, strategy_sets, weights) -> "CorrelatedProfile":
        players = tuple(players)
        strategy_sets = tuple(tuple(s) for s in strategy_sets)
        clean = {}
        total = Fraction(0)
        for profile, w in weights.items():
            w = _frac(w)
            if w < 0:
                raise ValueError(f"negative weight at {profile}")
            if w == 0:
                continue
            profile = tuple(profile)
            for label, options in zip(profile, strategy_sets):
                if label not in options:
                    raise ValueError(f"unknown strategy {label!r} in profile {profile}")
            clean[profile] = clean.get(profile, Fraction(0)) + w
            total += w
        if total != 1:
            raise ValueError(f"weights sum to {total}, expected 1")
        return cls(players, strategy_sets, clean)

    @classmethod
    def uniform(cls, players, strategy_sets) -> "CorrelatedProfile":
        strategy_sets = tuple(tuple(s) for s in strategy_sets)
        cells = list(itertools.product(*strategy_sets))
        w = Fraction(1, len(cells))
        return cls(tuple(players), strategy_sets, {c: w for c in cells})

    def weight(self, profile: tuple[str, ...]) -> Fraction:
        return self.weights.get(tuple(profile), Fraction(0))

    @property
    def support(self):
        return tuple(sorted(self.weights))

    @property
    def is_totally_mixed(self) -> bool:
        full = 1
        for s in self.strategy_sets:
            full *= len(s)
        return len(self.weights) == full and all(w > 0 for w in self.weights.values())

    def marginal(self, sub_players: Iterable[str]) -> "CorrelatedProfile":
        keep = tuple(sub_players)
        indices = []
        for p in keep:
            if p not in self.players:
                raise ValueError(f"{p!r} is not part of this profile")
            indices.append(self.players.index(p))
        out: dict[tuple[str, ...], Fraction] = {}
        for profile, w in self.weights.items():
            key = tuple(profile[i] for i in indices)
            out[key] = out.get(key, Fraction(0)) + w
        sets = tuple(self.strategy_sets[i] for i in indices)
        return CorrelatedProfile(keep, sets, out)


@dataclass(frozen=True)
class MixedProfile:
    """One probability vector per player, exact entries."""

    players: tuple[str, ...]
    strategy_sets: tuple[tuple[str, ...], ...]
    probs: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def of(cls, game: StrategicGame, probs) -> "MixedProfile":
        """``probs``: map player -> (map strategy -> weight) or aligned rows."""
        rows = []
        for k, p in enumerate(game.players):
            options = game.strategies[k]
            if isinstance(probs, Mapping):
                row_map = probs[p]
                row = tuple(_frac(row_map.get(s, 0)) for s in options)
            else:
                row = tuple(_frac(v) for v in probs[k])
            if len(row) != len(options):
                raise ValueError(f"wrong arity for player {p!r}")
            if any(v < 0 for v in row):
                raise ValueError(f"negative probability for player {p!r}")
            if sum(row) != 1:
                raise ValueError(f"probabilities of player {p!r} sum to {sum(row)}")
            rows.append(row)
        return cls(game.players, game.strategies, tuple(rows))

    def row(self, player: str) -> tuple[Fraction, ...]:
        return self.probs[self.players.index(player)]

    def prob(self, player: str, strategy: str) -> Fraction:
        k = self.players.index(player)
        return self.probs[k][self.strategy_sets[k].index(strategy)]

    @property
    def is_totally_mixed(self) -> bool:
        return all(v > 0 for row in self.probs for v in row)

    def to_correlated(self) -> CorrelatedProfile:
        weights = {}
        for cell in itertools.product(*self.strategy_sets):
            w = Fraction(1)
            for k, label in enumerate(cell):
                w *= self.probs[k][self.strategy_sets[k].index(label)]
            if w > 0:
                weights[cell] = w
        return CorrelatedProfile(self.players, self.strategy_sets, weights)

    def without(self, player: str) -> CorrelatedProfile:
        """Product distribution of everyone but ``player``."""
        keep = [k for k, p in enumerate(self.players) if p != player]
        if len(keep) == len(self.players):
            raise ValueError(f"unknown player {player!r}")
        sets = tuple(self.strategy_sets[k] for k in keep)
        weights = {}
        for cell in itertools.product(*sets):
            w = Fraction(1)
            for pos, k in enumerate(keep):
                w *= self.probs[k][self.strategy_sets[k].index(cell[pos])]
            if w > 0:
                weights[cell] = w
        return CorrelatedProfile(
            tuple(self.players[k] for k in keep), sets, weights
        )


# ---------------------------------------------------------------- operations


def expected_utility(
    game: StrategicGame, player: str, own: str, opp: CorrelatedProfile
) -> Fraction:
    """Exact expectation of U_player(own, .) under the opponent distribution."""
    if opp.players != game.opponents(player):
        raise ValueError("opponent profile must cover exactly the other players, in game order")
    total = Fraction(0)
    for profile, w in opp.weights.items():
        total += w * game.u(player, own, profile)
    return total


def best_responses(game: StrategicGame, player: str, opp: CorrelatedProfile) -> tuple[str, ...]:
    """Exact argmax set, in the player's strategy order."""
    values = [(s, expected_utility(game, player, s, opp)) for s in game.strategy_set(player)]
    best = max(v for _, v in values)
    return tuple(s for s, v in values if v == best)


def marginal(profile: CorrelatedProfile, sub_players: Iterable[str]) -> CorrelatedProfile:
    return profile.marginal(sub_players)


def _dominance_lp(game: StrategicGame, player: str, strategy: str, strict: bool):
    """LP deciding dominance of ``strategy`` by a mixed strategy.

    Weak variant: maximize total slack of the pointwise payoff advantage;
    dominated iff the optimum is positive. Strict variant: maximize the
    uniform advantage; dominated iff the optimum is positive.
    """
    own = game.strategy_set(player)
    opp_profiles = list(game.opponent_profiles(player))
    n_own = len(own)
    zero = Fraction(0)
    if strict:
        n = n_own + 1  # mixture weights + uniform advantage delta
        objective = [zero] * n_own + [Fraction(1)]
    else:
        n = n_own + len(opp_profiles)  # mixture weights + per-profile slack
        objective = [zero] * n_own + [Fraction(1)] * len(opp_profiles)
    rows = [Constraint.of([1] * n_own + [0] * (n - n_own), "=", 1)]
    for k, prof in enumerate(opp_profiles):
        coeffs = [game.u(player, s, prof) - game.u(player, strategy, prof) for s in own]
        extra = [zero] * (n - n_own)
        if strict:
            extra[0] = Fraction(-1)
        else:
            extra[k] = Fraction(-1)
        rows.append(Constraint.of(coeffs + extra, ">=", 0))
    lower = [zero] * n_own + ([None] if strict else [zero] * len(opp_profiles))
    res = lp_solve_exact(LinearProgram.of(objective, rows, lower))
    assert res.status == "optimal"  # feasible (mixture = strategy itself) and bounded
    if res.value <= 0:
        return None
    return {s: w for s, w in zip(own, res.point) if w > 0}


def weakly_dominating_mixture(game: StrategicGame, player: str, strategy: str):
    """A mixed strategy weakly dominating ``strategy``, or None."""
    if strategy not in game.strategy_set(player):
        raise KeyError(f"unknown strategy {strategy!r}")
    return _dominance_lp(game, player, strategy, strict=False)


def strictly_dominating_mixture(game: StrategicGame, player: str, strategy: str):
    """A mixed strategy strictly dominating ``strategy``, or None."""
    if strategy not in game.strategy_set(player):
        raise KeyError(f"unknown strategy {strategy!r}")
    return _dominance_lp(game, player, strategy, strict=True)


def is_weakly_dominated(game: StrategicGame, player: str, strategy: str) -> bool:
    return weakly_dominating_mixture(game, player, strategy) is not None


def is_strictly_dominated(game: StrategicGame, player: str, strategy: str) -> bool:
    return strictly_dominating_mixture(game, player, strategy) is not None


def validate_no_strict_dominance(game: StrategicGame):
    """None when clean; otherwise the first (player, strategy) violation.

    Refinement analysis refuses to run on games with strictly dominated
    strategies, so callers should treat a non-None result as a hard stop.
    """
    for p in game.players:
        for s in game.strategy_set(p):
            if is_strictly_dominated(game, p, s):
                return (p, s)
    return None


def without_strictly_dominated(game: StrategicGame) -> StrategicGame:
    """Iterated removal of strictly dominated strategies.

    Dominance by mixtures; each round drops every currently dominated
    strategy at once, which is safe because strict dominance survives
    the removal of other dominated strategies and the surviving set is
    order-independent. Returns the game unchanged when nothing is
    dominated, so the result always satisfies
    :func:`validate_no_strict_dominance`.
    """
    current = game
    while True:
        doomed = {
            (p, s)
            for p in current.players
            for s in current.strategy_set(p)
            if is_strictly_dominated(current, p, s)
        }
        if not doomed:
            return current
        strategies = tuple(
            tuple(s for s in row if (p, s) not in doomed)
            for p, row in zip(current.players, current.strategies)
        )
        payoffs = {
            prof: current.payoffs[prof] for prof in itertools.product(*strategies)
        }
        current = StrategicGame.of(current.players, strategies, payoffs)


# ------------------------------------------------------------ signaling games


@dataclass(frozen=True)
class SignalingGame:
    """Sender types signal; the receiver replies with an action."""

    types: tuple[str, ...]
    prior: tuple[Fraction, ...]
    signals: tuple[str, ...]
    actions: tuple[str, ...]
    sender_payoff: Mapping[tuple[str, str, str], Fraction] = field(repr=False)
    receiver_payoff: Mapping[tuple[str, str, str], Fraction] = field(repr=False)

    @classmethod
    def of(cls, types, prior, signals, actions, sender_payoff, receiver_payoff):
        """Payoff tables are keyed by (signal, action, type)."""
        types = tuple(types)
        signals = tuple(signals)
        actions = tuple(actions)
        if isinstance(prior, Mapping):
            prior = tuple(_frac(prior[t]) for t in types)
        else:
            prior = tuple(_frac(v) for v in prior)
        if len(prior) != len(types) or sum(prior) != 1 or any(v <= 0 for v in prior):
            raise ValueError("prior must be a totally mixed distribution over types")
        if not types or not signals or not actions:
            raise ValueError("types, signals and actions must be nonempty")

        def clean(table):
            out = {}
            for s in signals:
                for a in actions:
                    for t in types:
                        try:
                            out[(s, a, t)] = _frac(table[(s, a, t)])
                        except KeyError:
                            raise ValueError(f"payoff missing for {(s, a, t)}") from None
            return out

        return cls(types, prior, signals, actions, clean(sender_payoff), clean(receiver_payoff))

    def prior_of(self, t: str) -> Fraction:
        return self.prior[self.types.index(t)]


RECEIVER = "receiver"


def receiver_plans(sg: SignalingGame) -> tuple[str, ...]:
    """All signal-contingent plans, labelled in lexicographic signal order."""
    labels = []
    for combo in itertools.product(sg.actions, repeat=len(sg.signals)):
        labels.append(",".join(f"{s}={a}" for s, a in zip(sg.signals, combo)))
    return tuple(labels)


def plan_action(plan: str, signal: str) -> str:
    for part in plan.split(","):
        s, a = part.split("=")
        if s == signal:
            return a
    raise KeyError(f"plan {plan!r} has no entry for signal {signal!r}")


def signaling_to_strategic(sg: SignalingGame) -> StrategicGame:
    """Strategic form with one player per type plus the receiver.

    Each type's payoff depends only on its own signal and the receiver's
    plan; the receiver's payoff is the prior-weighted sum over types.
    """
    if RECEIVER in sg.types:
        raise ValueError(f"type name {RECEIVER!r} collides with the receiver player")
    players = sg.types + (RECEIVER,)
    strategies = tuple(sg.signals for _ in sg.types) + (receiver_plans(sg),)

    def pay(profile):
        plan = profile[-1]
        vec = []
        for k, t in enumerate(sg.types):
            s = profile[k]
            vec.append(sg.sender_payoff[(s, plan_action(plan, s), t)])
        total = Fraction(0)
        for k, t in enumerate(sg.types):
            s = profile[k]
            total += sg.prior[k] * sg.receiver_payoff[(s, plan_action(plan, s), t)]
        vec.append(total)
        return vec

    return StrategicGame.of(players, strategies, pay)
