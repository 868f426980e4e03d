"""Bandit learners over factored games and their lifetime play statistics.

A player whose game factors cleanly faces a combinatorial bandit: each
strategy reveals opponent play exactly at its own relevant information
sets. This module provides the two index policies studied here (a
truncated Gittins calibration for discounted Bayesian optimality and a
per-set quantile variant of Bayes-UCB) plus the machinery around them:
Dirichlet beliefs, observation histories, pre-drawn response paths that
couple different agents' runs, induced lifetime response distributions,
and the coupled comparison that counts per-path experimentation
dominance between two isomorphic roles.

Indices are floats (they only steer argmax decisions); play sequencing,
probabilities and frequency accounting stay exact wherever the inputs
are rational.
"""

from __future__ import annotations

import itertools
import random
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Optional

import numpy as np

from .extensive import ExtensiveGame, Factoring, NotFactorable, _plans, factor
from .extensive import additive_separability, reduce_to_strategic
from .numerics import beta_quantile, dirichlet_sample


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _stable_seed(*parts) -> int:
    return zlib.crc32(repr(parts).encode())


# ------------------------------------------------------------ factored games


@dataclass(frozen=True, eq=False)
class FactoredProblem:
    """One player's bandit view of a factorable extensive game.

    ``relevant`` orders each strategy's information sets; observation
    combos are action tuples aligned with that order. ``rewards`` holds
    per-set additive reward functions when the game separates, else
    None. ``belief_sets`` lists every opponent information set, whether
    or not any strategy reads it.
    """

    ext: ExtensiveGame
    player: str
    strategies: tuple[str, ...]
    relevant: Mapping[str, tuple[str, ...]] = field(repr=False)
    set_actions: Mapping[str, tuple[str, ...]] = field(repr=False)
    payoffs: Mapping[tuple, Fraction] = field(repr=False)
    rewards: Optional[Mapping[str, Mapping[str, Fraction]]] = field(repr=False)
    belief_sets: tuple[str, ...] = ()
    plans: Mapping[str, Mapping[str, Mapping[str, str]]] = field(
        default=None, repr=False
    )

    def relevant_of(self, strategy: str) -> tuple[str, ...]:
        try:
            return self.relevant[strategy]
        except KeyError:
            raise KeyError(f"unknown strategy {strategy!r}") from None

    def actions_of(self, h: str) -> tuple[str, ...]:
        return self.set_actions[h]

    def combo_space(self, strategy: str):
        return itertools.product(
            *(self.set_actions[h] for h in self.relevant_of(strategy))
        )

    def payoff(self, strategy: str, combo: tuple[str, ...]) -> Fraction:
        return self.payoffs[(strategy, tuple(combo))]

    def clean_environment(self, sigma) -> dict:
        """Validate a mixed opponent profile keyed by player then strategy."""
        out = {}
        for q in self.ext.players:
            if q == self.player:
                continue
            try:
                row = sigma[q]
            except KeyError:
                raise ValueError(f"environment misses player {q!r}") from None
            labels = tuple(self.plans[q])
            clean = {label: _frac(row.get(label, 0)) for label in labels}
            if any(v < 0 for v in clean.values()) or sum(clean.values()) != 1:
                raise ValueError(f"environment row for {q!r} is not a distribution")
            out[q] = clean
        return out

    def observation_law(self, sigma, strategy: str):
        """Exact distribution of the observed combo when opponents draw
        independently from ``sigma``; within-owner correlation kept."""
        sigma = self.clean_environment(sigma)
        sets = self.relevant_of(strategy)
        if not sets:
            return [((), Fraction(1))]
        owners = {}
        for h in sets:
            owners.setdefault(self.ext.info_set(h).owner, []).append(h)
        per_owner = []
        for q, hs in owners.items():
            table: dict = {}
            for label, p in sigma[q].items():
                if p == 0:
                    continue
                plan = self.plans[q][label]
                key = tuple(plan[h] for h in hs)
                table[key] = table.get(key, Fraction(0)) + p
            per_owner.append((hs, table))
        law = []
        for cells in itertools.product(*(t.items() for _, t in per_owner)):
            assignment = {}
            p = Fraction(1)
            for (hs, _), (key, q_p) in zip(per_owner, cells):
                p *= q_p
                assignment.update(zip(hs, key))
            law.append((tuple(assignment[h] for h in sets), p))
        return law


def factored_problem(ext: ExtensiveGame, player: str) -> FactoredProblem:
    """Build the bandit view, or raise if the game does not factor."""
    result = factor(ext, player)
    if isinstance(result, NotFactorable):
        raise ValueError(
            f"game is not factorable for {player!r}: {result.reason}"
        )
    assert isinstance(result, Factoring)
    reduced = reduce_to_strategic(ext)
    plans = {q: dict(_plans(ext, q)) for q in ext.players}
    relevant = {s: tuple(sorted(sets)) for s, sets in result.relevant}
    set_actions = {
        h.label: h.actions for h in ext.info_sets if h.owner != player
    }
    opp_order = reduced.opponents(player)
    payoffs: dict = {}
    for s in reduced.strategy_set(player):
        sets = relevant[s]
        for prof in reduced.opponent_profiles(player):
            assignment: dict = {}
            for q, label in zip(opp_order, prof):
                assignment.update(plans[q][label])
            combo = tuple(assignment[h] for h in sets)
            payoffs[(s, combo)] = reduced.u(player, s, prof)
    rewards = additive_separability(ext, player, result)
    belief_sets = tuple(h.label for h in ext.info_sets if h.owner != player)
    return FactoredProblem(
        ext,
        player,
        reduced.strategy_set(player),
        relevant,
        set_actions,
        payoffs,
        rewards,
        belief_sets,
        plans,
    )


# ------------------------------------------------------------------- beliefs


@dataclass(frozen=True)
class BeliefState:
    """Independent Dirichlet counts over actions at opponent sets."""

    sets: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    counts: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def of(cls, problem: FactoredProblem, counts) -> "BeliefState":
        """``counts``: scalar, or map set -> (map action -> count)."""
        sets = problem.belief_sets
        actions = tuple(problem.actions_of(h) for h in sets)
        rows = []
        for h, acts in zip(sets, actions):
            if isinstance(counts, Mapping):
                row_spec = counts[h]
                row = tuple(_frac(row_spec[a]) for a in acts)
            else:
                row = tuple(_frac(counts) for _ in acts)
            if any(v <= 0 for v in row):
                raise ValueError(f"prior counts at {h!r} must be positive")
            rows.append(row)
        return cls(sets, actions, tuple(rows))

    @classmethod
    def uniform(cls, problem: FactoredProblem, weight=1) -> "BeliefState":
        return cls.of(problem, weight)

    def row(self, h: str) -> dict:
        k = self.sets.index(h)
        return dict(zip(self.actions[k], self.counts[k]))

    def observe(self, h: str, a: str) -> "BeliefState":
        k = self.sets.index(h)
        j = self.actions[k].index(a)
        row = tuple(
            v + 1 if i == j else v for i, v in enumerate(self.counts[k])
        )
        counts = tuple(
            row if i == k else r for i, r in enumerate(self.counts)
        )
        return BeliefState(self.sets, self.actions, counts)


# ------------------------------------------------------------------ histories


@dataclass(frozen=True)
class History:
    """Per-period (strategy, observed actions at its relevant sets)."""

    entries: tuple = ()

    @classmethod
    def empty(cls) -> "History":
        return cls(())

    def record(self, strategy: str, observed: Mapping[str, str]) -> "History":
        return History(
            self.entries + ((strategy, tuple(sorted(observed.items()))),)
        )

    def count(self, strategy: str) -> int:
        return sum(1 for s, _ in self.entries if s == strategy)

    def subhistory(self, strategy: str) -> tuple:
        return tuple(obs for s, obs in self.entries if s == strategy)

    def action_counts(self, h: str) -> dict:
        out: dict = {}
        for _, obs in self.entries:
            for hh, a in obs:
                if hh == h:
                    out[a] = out.get(a, 0) + 1
        return out

    def check_against(self, problem: FactoredProblem) -> None:
        for s, obs in self.entries:
            want = tuple(sorted(problem.relevant_of(s)))
            got = tuple(h for h, _ in obs)
            if got != want:
                raise ValueError(
                    f"entry for {s!r} observes {got}, expected {want}"
                )


# -------------------------------------------------------------- response paths


class ResponsePath:
    """Pre-drawn opponent play: one full action assignment per visit
    count, sampled from a mixed profile with within-player correlation
    kept. Lazily generated and cached; deterministic given the seed."""

    def __init__(self, ext: ExtensiveGame, sigma, seed):
        self.ext = ext
        self.seed = seed
        self._plans = {q: dict(_plans(ext, q)) for q in ext.players}
        self._rows = []
        for q in ext.players:
            row = sigma[q]
            labels = tuple(self._plans[q])
            probs = [float(row.get(label, 0)) for label in labels]
            total = sum(probs)
            if total <= 0:
                raise ValueError(f"environment row for {q!r} is empty")
            cum, acc = [], 0.0
            for label, p in zip(labels, probs):
                acc += p / total
                cum.append((acc, label))
            cum[-1] = (1.0, cum[-1][1])
            self._rows.append((q, cum))
        self._cache: dict = {}

    def assignment(self, t: int) -> Mapping[str, str]:
        asg = self._cache.get(t)
        if asg is None:
            rng = random.Random(f"rp:{self.seed}:{t}")
            asg = {}
            for q, cum in self._rows:
                u = rng.random()
                label = next(label for edge, label in cum if u <= edge)
                asg.update(self._plans[q][label])
            self._cache[t] = asg
        return asg

    def entry(self, t: int, h: str) -> str:
        if t < 1:
            raise ValueError("visit counts start at 1")
        return self.assignment(t)[h]


def uniform_environment(ext: ExtensiveGame) -> dict:
    """Every player mixes uniformly over their reduced pure strategies."""
    out = {}
    for q in ext.players:
        labels = tuple(label for label, _ in _plans(ext, q))
        w = Fraction(1, len(labels))
        out[q] = {label: w for label in labels}
    return out


# ------------------------------------------------------------------- indices


def default_quantile_choice(n: int) -> Fraction:
    """The optimism schedule used by the stock experiments."""
    return 1 - Fraction(1, n + 1)


@lru_cache(maxsize=None)
def _cached_beta_quantile(a: float, b: float, q: float) -> float:
    return beta_quantile(a, b, q)


def _mean_value_quantile(counts, values, q, mc_draws, seed) -> float:
    """q-quantile of sum_a alpha(a)*values[a] with alpha ~ Dirichlet(counts).

    Boundary q = 0 or 1 means the essential infimum or supremum. Two
    support points invert the Beta CDF; larger supports fall back to a
    seeded Dirichlet Monte Carlo quantile.
    """
    values = [float(v) for v in values]
    if max(values) == min(values):
        return values[0]
    q = float(q)
    if q <= 0.0:
        return min(values)
    if q >= 1.0:
        return max(values)
    if len(values) == 2:
        a, b = float(counts[0]), float(counts[1])
        v0, v1 = values
        if v0 > v1:
            p = _cached_beta_quantile(a, b, q)
        else:
            p = _cached_beta_quantile(a, b, 1.0 - q)
        return v1 + (v0 - v1) * p
    rng = np.random.default_rng(_stable_seed("quantile", seed, tuple(counts), q))
    draws = np.empty(mc_draws)
    for k in range(mc_draws):
        draws[k] = float(
            np.dot(dirichlet_sample([float(c) for c in counts], rng), values)
        )
    return float(np.quantile(draws, q))


def bayes_ucb_index(
    belief: BeliefState,
    relevant: Mapping[str, tuple],
    aux,
    strategy: str,
    history: History,
    q: Callable[[int], object],
    *,
    mc_draws: int = 4096,
    seed: int = 0,
) -> float:
    """Sum over the strategy's relevant sets of the q(#plays)-quantile of
    the posterior expected per-set reward. The empty-set opt-out case is
    the empty sum, 0."""
    if aux is None:
        raise ValueError("Bayes-UCB needs per-set rewards: game not additively separable")
    sets = relevant[strategy] if not isinstance(relevant, Factoring) else tuple(
        sorted(relevant.relevant_of(strategy))
    )
    if not sets:
        return 0.0
    level = q(history.count(strategy))
    total = 0.0
    for h in sets:
        prior = belief.row(h)
        observed = history.action_counts(h)
        actions = tuple(prior)
        counts = tuple(prior[a] + observed.get(a, 0) for a in actions)
        values = tuple(aux[h][a] for a in actions)
        total += _mean_value_quantile(counts, values, level, mc_draws, seed)
    return total


# truncated Gittins calibration ------------------------------------------------


class _ArmModel:
    """Shared per-(payoff, sets) transition structure for the stopping DP."""

    def __init__(self, action_counts: tuple[int, ...], payoff_vec):
        self.shape = action_counts
        self.combos = list(itertools.product(*(range(n) for n in action_counts)))
        self.payoff = [float(v) for v in payoff_vec]
        self._info: dict = {}

    def info(self, state):
        """(mean payoff, [(prob, child state), ...]) at a count state."""
        hit = self._info.get(state)
        if hit is not None:
            return hit
        totals = [sum(row) for row in state]
        mean = 0.0
        branches = []
        for combo, pay in zip(self.combos, self.payoff):
            p = 1.0
            for k, a in enumerate(combo):
                p *= state[k][a] / totals[k]
            mean += p * pay
            child = tuple(
                tuple(v + 1 if i == a else v for i, v in enumerate(row))
                for row, a in zip(state, combo)
            )
            branches.append((p, child))
        out = (mean, branches)
        self._info[state] = out
        return out


def _calibrate(model: _ArmModel, root, beta: float, horizon: int) -> float:
    """Largest per-period charge the first pull still supports: the
    ratio-maximizing bounded stopping rule found by Dinkelbach steps."""
    if max(model.payoff) == min(model.payoff):
        return model.payoff[0]
    mean0, _ = model.info(root)
    if beta == 0.0 or horizon <= 1:
        return mean0
    m = mean0
    for _ in range(80):
        memo: dict = {}

        def value(state, rem):
            if rem == 0:
                return (0.0, 0.0, 0.0)
            key = state
            hit = memo.get(key)
            if hit is not None:
                return hit
            mean, branches = model.info(state)
            v = r = w = 0.0
            for p, child in branches:
                cv, cr, cw = value(child, rem - 1)
                v += p * cv
                r += p * cr
                w += p * cw
            cont = mean - m + beta * v
            out = (
                (cont, mean + beta * r, 1.0 + beta * w)
                if cont > 0.0
                else (0.0, 0.0, 0.0)
            )
            memo[key] = out
            return out

        mean, branches = model.info(root)
        v = r = w = 0.0
        for p, child in branches:
            cv, cr, cw = value(child, horizon - 1)
            v += p * cv
            r += p * cr
            w += p * cw
        total_r = mean + beta * r
        total_w = 1.0 + beta * w
        m_next = total_r / total_w
        if m_next - m <= 1e-12:
            return m_next
        m = m_next
    return m


def gittins_truncation_bound(payoff_span: float, beta, horizon: int) -> float:
    """Worst-case index error from cutting the stopping problem at the
    horizon: span * beta^T / (1 - beta)."""
    beta = float(beta)
    if beta == 0.0:
        return 0.0
    return float(payoff_span) * beta**horizon / (1.0 - beta)


def gittins_index(belief: BeliefState, sets, payoff, beta, horizon: int = 25) -> float:
    """Truncated calibration index of one strategy-arm.

    ``sets`` orders the arm's information sets; ``payoff`` is either a
    per-set reward table (summed) or a callable on action combos aligned
    with ``sets``. With no sets the arm's payoff is a known constant and
    the index equals it at any discount.
    """
    beta = float(beta)
    if not (0.0 <= beta < 1.0):
        raise ValueError("effective discount must lie in [0, 1)")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    sets = tuple(sets)
    if not sets:
        return float(payoff(())) if callable(payoff) else 0.0
    actions = [tuple(belief.row(h)) for h in sets]
    if callable(payoff):
        u = payoff
    else:
        tables = [payoff[h] for h in sets]

        def u(combo):
            return sum(t[a] for t, a in zip(tables, combo))

    payoff_vec = [
        float(u(combo)) for combo in itertools.product(*actions)
    ]
    model = _ArmModel(tuple(len(a) for a in actions), payoff_vec)
    root = tuple(
        tuple(float(belief.row(h)[a]) for a in acts)
        for h, acts in zip(sets, actions)
    )
    return _calibrate(model, root, beta, horizon)


# ------------------------------------------------------------------- policies


@dataclass(frozen=True)
class UcbPolicy:
    """Bayes-UCB with a common quantile-choice function."""

    q: Callable[[int], object] = default_quantile_choice
    mc_draws: int = 4096
    seed: int = 0

    @property
    def label(self) -> str:
        return "bayes-ucb"

    def _engine(self, problem: FactoredProblem, gamma):
        return _UcbEngine(self, problem)


@dataclass(frozen=True)
class GittinsPolicy:
    """Discounted-optimal play approximated by truncated Gittins indices."""

    delta: Fraction = Fraction(9, 10)
    horizon: int = 25

    @property
    def label(self) -> str:
        return f"truncated-gittins(delta={self.delta},T={self.horizon})"

    def _engine(self, problem: FactoredProblem, gamma):
        return _GittinsEngine(self, problem, gamma)


class _UcbEngine:
    def __init__(self, policy: UcbPolicy, problem: FactoredProblem):
        if problem.rewards is None:
            raise ValueError(
                "Bayes-UCB needs per-set rewards: game not additively separable"
            )
        self.policy = policy
        self.problem = problem
        self._cache: dict = {}

    def index(self, strategy, counts_key, n_plays) -> float:
        sets = self.problem.relevant_of(strategy)
        if not sets:
            return 0.0
        key = (strategy, counts_key, n_plays)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        level = self.policy.q(n_plays)
        total = 0.0
        for h, counts in zip(sets, counts_key):
            values = tuple(
                self.problem.rewards[h][a] for a in self.problem.actions_of(h)
            )
            total += _mean_value_quantile(
                counts, values, level, self.policy.mc_draws, self.policy.seed
            )
        self._cache[key] = total
        return total


class _GittinsEngine:
    def __init__(self, policy: GittinsPolicy, problem: FactoredProblem, gamma):
        self.policy = policy
        self.problem = problem
        self.beta = float(policy.delta) * float(gamma)
        if not (0.0 <= self.beta < 1.0):
            raise ValueError("effective discount must lie in [0, 1)")
        self._models: dict = {}
        self._cache: dict = {}

    def _model(self, strategy) -> _ArmModel:
        model = self._models.get(strategy)
        if model is None:
            sets = self.problem.relevant_of(strategy)
            actions = [self.problem.actions_of(h) for h in sets]
            payoff_vec = [
                self.problem.payoff(strategy, combo)
                for combo in itertools.product(*actions)
            ]
            model = _ArmModel(tuple(len(a) for a in actions), payoff_vec)
            self._models[strategy] = model
        return model

    def index(self, strategy, counts_key, n_plays) -> float:
        sets = self.problem.relevant_of(strategy)
        if not sets:
            return float(self.problem.payoff(strategy, ()))
        key = (strategy, counts_key)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        root = tuple(tuple(float(v) for v in row) for row in counts_key)
        out = _calibrate(self._model(strategy), root, self.beta, self.policy.horizon)
        self._cache[key] = out
        return out


# ------------------------------------------------------------------ policy runs


class _AgentState:
    """Mutable per-run state: per-strategy play counts and per-set counts."""

    __slots__ = ("problem", "engine", "plays", "counts")

    def __init__(self, problem: FactoredProblem, engine, prior: BeliefState):
        self.problem = problem
        self.engine = engine
        self.plays = {s: 0 for s in problem.strategies}
        self.counts = {}
        for s in problem.strategies:
            for h in problem.relevant_of(s):
                row = prior.row(h)
                self.counts[h] = tuple(row[a] for a in problem.actions_of(h))

    def counts_key(self, strategy):
        return tuple(self.counts[h] for h in self.problem.relevant_of(strategy))

    def choose(self) -> str:
        best, best_index = None, None
        for s in self.problem.strategies:
            ix = self.engine.index(s, self.counts_key(s), self.plays[s])
            if best_index is None or ix > best_index:
                best, best_index = s, ix
        return best

    def observe(self, strategy, combo) -> None:
        self.plays[strategy] += 1
        problem = self.problem
        for h, a in zip(problem.relevant_of(strategy), combo):
            j = problem.actions_of(h).index(a)
            row = self.counts[h]
            self.counts[h] = tuple(
                v + 1 if i == j else v for i, v in enumerate(row)
            )

    def step_on_path(self, path: ResponsePath) -> str:
        s = self.choose()
        k = self.plays[s] + 1
        combo = tuple(path.entry(k, h) for h in self.problem.relevant_of(s))
        self.observe(s, combo)
        return s


def run_policy(
    policy,
    problem: FactoredProblem,
    prior: BeliefState,
    path: ResponsePath,
    horizon: int,
    *,
    gamma=Fraction(0),
) -> tuple[str, ...]:
    """Deterministic strategy sequence of an index policy against a
    response path: each period plays the highest-index strategy (ties to
    the earlier strategy in the game's order) and reads the path at the
    strategy's own visit count. ``policy`` may be any object exposing the
    ``_engine(problem, gamma)`` hook."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    agent = _AgentState(problem, policy._engine(problem, gamma), prior)
    return tuple(agent.step_on_path(path) for _ in range(horizon))


# ------------------------------------------------------------ induced response


@dataclass(frozen=True)
class InducedResponse:
    """Lifetime play distribution: strategy weights (1-gamma)gamma^(t-1)
    summed over the horizon, so the total is 1 - gamma^T."""

    distribution: Mapping[str, object]
    policy: str
    gamma: Fraction
    method: str
    horizon: int
    error_bound: Fraction
    standard_error: Optional[Mapping[str, float]] = None
    n_paths: Optional[int] = None

    @property
    def total(self):
        return sum(self.distribution.values())

    def of(self, strategy: str):
        return self.distribution.get(strategy, Fraction(0))


def induced_response(
    policy,
    problem: FactoredProblem,
    prior: BeliefState,
    sigma,
    gamma,
    *,
    method: str = "exact-horizon",
    horizon: int = 40,
    n_paths: int = 1000,
    seed: int = 0,
) -> InducedResponse:
    """Lifetime-weighted play distribution against an i.i.d. environment.

    exact-horizon enumerates the policy's deterministic observation tree
    with exact probabilities (states that settle on a no-observation
    strategy are closed out analytically); monte-carlo averages runs over
    seeded response paths and reports per-strategy standard errors. Both
    truncate at the horizon and record the lost tail weight gamma^T.
    """
    gamma = _frac(gamma)
    if not (0 <= gamma < 1):
        raise ValueError("gamma must lie in [0, 1)")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    engine = policy._engine(problem, gamma)
    tail = gamma**horizon

    if method == "exact-horizon":
        law = {s: problem.observation_law(sigma, s) for s in problem.strategies}
        freq = {s: Fraction(0) for s in problem.strategies}
        agent = _AgentState(problem, engine, prior)
        start = (
            tuple(sorted(agent.plays.items())),
            tuple(sorted(agent.counts.items())),
        )
        dist = {start: Fraction(1)}
        for t in range(1, horizon + 1):
            weight = (1 - gamma) * gamma ** (t - 1)
            nxt: dict = {}
            for (plays_t, counts_t), pr in dist.items():
                plays = dict(plays_t)
                counts = dict(counts_t)
                agent.plays, agent.counts = plays, counts
                s = agent.choose()
                if not problem.relevant_of(s):
                    # belief frozen: the choice repeats to the horizon
                    freq[s] += pr * (gamma ** (t - 1) - tail)
                    continue
                freq[s] += pr * weight
                k0 = plays[s]
                for combo, p in law[s]:
                    if p == 0:
                        continue
                    agent.plays = dict(plays)
                    agent.counts = dict(counts)
                    agent.plays[s] = k0
                    agent.observe(s, combo)
                    key = (
                        tuple(sorted(agent.plays.items())),
                        tuple(sorted(agent.counts.items())),
                    )
                    nxt[key] = nxt.get(key, Fraction(0)) + pr * p
            dist = nxt
        return InducedResponse(
            freq, getattr(policy, "label", repr(policy)), gamma,
            "exact-horizon", horizon, tail,
        )

    if method == "monte-carlo":
        if n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        sigma = {
            **problem.clean_environment(sigma),
            problem.player: {problem.strategies[0]: Fraction(1)},
        }
        weights = [
            float((1 - gamma) * gamma ** (t - 1)) for t in range(1, horizon + 1)
        ]
        sums = {s: 0.0 for s in problem.strategies}
        sq_sums = {s: 0.0 for s in problem.strategies}
        for k in range(n_paths):
            path = ResponsePath(problem.ext, sigma, f"{seed}:{k}")
            agent = _AgentState(problem, engine, prior)
            per = {s: 0.0 for s in problem.strategies}
            for t in range(horizon):
                per[agent.step_on_path(path)] += weights[t]
            for s, v in per.items():
                sums[s] += v
                sq_sums[s] += v * v
        freq = {s: sums[s] / n_paths for s in problem.strategies}
        se = {}
        for s in problem.strategies:
            var = max(sq_sums[s] / n_paths - freq[s] ** 2, 0.0)
            se[s] = (var / n_paths) ** 0.5
        return InducedResponse(
            freq, getattr(policy, "label", repr(policy)), gamma,
            "monte-carlo", horizon, tail, se, n_paths,
        )

    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------- coupled comparison


@dataclass(frozen=True)
class CoupledComparison:
    """Two agents run on shared response paths: lifetime frequencies of
    the targeted strategies and the count of paths where every k-th play
    of the first agent's target precedes the second's."""

    player_i: str
    player_j: str
    target_i: str
    target_j: str
    freq_i: float
    freq_j: float
    se_i: float
    se_j: float
    dominant_paths: int
    n_paths: int
    horizon: int
    gamma: Fraction

    @property
    def dominance_rate(self) -> float:
        return self.dominant_paths / self.n_paths

    @property
    def violations(self) -> int:
        return self.n_paths - self.dominant_paths


def _check_isomorphic(problem_i: FactoredProblem, problem_j: FactoredProblem, phi):
    ext = problem_i.ext
    if ext is not problem_j.ext and ext != problem_j.ext:
        raise ValueError("the two problems must come from one game")
    i, j = problem_i.player, problem_j.player
    if i == j:
        raise ValueError("the two players must differ")
    third = {
        h.label for h in ext.info_sets if h.owner not in (i, j)
    }
    if set(phi) != set(problem_i.strategies) or set(phi.values()) != set(
        problem_j.strategies
    ):
        raise ValueError("phi must biject the two strategy sets")
    for s, sj in phi.items():
        if set(problem_i.relevant_of(s)) & third != set(
            problem_j.relevant_of(sj)
        ) & third:
            raise ValueError(
                "not isomorphically factorable: third-party sets of "
                f"{s!r} and {sj!r} differ"
            )


def coupled_compare(
    problem_i: FactoredProblem,
    problem_j: FactoredProblem,
    policy_i,
    policy_j,
    phi: Mapping[str, str],
    target: str,
    sigma,
    gamma,
    *,
    prior_i: BeliefState,
    prior_j: BeliefState,
    n_paths: int = 1000,
    horizon: int = 40,
    seed: int = 0,
) -> CoupledComparison:
    """Run both agents on every shared path and score the comparison."""
    _check_isomorphic(problem_i, problem_j, phi)
    gamma = _frac(gamma)
    if not (0 <= gamma < 1):
        raise ValueError("gamma must lie in [0, 1)")
    if n_paths < 1 or horizon < 1:
        raise ValueError("n_paths and horizon must be positive")
    target_j = phi[target]
    ext = problem_i.ext
    full_sigma = {}
    for q in ext.players:
        try:
            full_sigma[q] = sigma[q]
        except (KeyError, TypeError):
            raise ValueError(f"environment misses player {q!r}") from None
    engine_i = policy_i._engine(problem_i, gamma)
    engine_j = policy_j._engine(problem_j, gamma)
    weights = [
        float((1 - gamma) * gamma ** (t - 1)) for t in range(1, horizon + 1)
    ]
    sum_i = sq_i = sum_j = sq_j = 0.0
    dominant = 0
    for k in range(n_paths):
        path = ResponsePath(ext, full_sigma, f"{seed}:{k}")
        agent_i = _AgentState(problem_i, engine_i, prior_i)
        agent_j = _AgentState(problem_j, engine_j, prior_j)
        times_i, times_j = [], []
        f_i = f_j = 0.0
        for t in range(horizon):
            s = agent_i.step_on_path(path)
            if s == target:
                times_i.append(t)
                f_i += weights[t]
            s = agent_j.step_on_path(path)
            if s == target_j:
                times_j.append(t)
                f_j += weights[t]
        ok = all(
            k_th < len(times_i) and times_i[k_th] <= times_j[k_th]
            for k_th in range(len(times_j))
        )
        dominant += ok
        sum_i += f_i
        sq_i += f_i * f_i
        sum_j += f_j
        sq_j += f_j * f_j
    freq_i, freq_j = sum_i / n_paths, sum_j / n_paths
    se_i = (max(sq_i / n_paths - freq_i**2, 0.0) / n_paths) ** 0.5
    se_j = (max(sq_j / n_paths - freq_j**2, 0.0) / n_paths) ** 0.5
    return CoupledComparison(
        problem_i.player,
        problem_j.player,
        target,
        target_j,
        freq_i,
        freq_j,
        se_i,
        se_j,
        dominant,
        n_paths,
        horizon,
        gamma,
    )
