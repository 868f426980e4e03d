"""Tremble profiles, constrained equilibria, and their vanishing limits.

A tremble profile assigns every pure strategy a positive probability
floor; each player then optimizes over the floored simplex. This module
builds floor profiles whose levels respect the compatibility digraph,
solves for constrained equilibria by damped best response with exact
rational polishing, follows shrinking floors down to candidate limit
profiles, and searches for the nearby-compatible-play witnesses whose
absence refutes a profile as a candidate limit.

Every equilibrium this module reports is exact: floats are used only to
steer the search, and a reported point is reconstructed in rational
arithmetic and re-verified before it leaves the solver.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .compat import CompatibilityDigraph
from .games import MixedProfile, StrategicGame, expected_utility
from .numerics import solve_linear_system_exact

log = logging.getLogger(__name__)

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ------------------------------------------------------------------ trembles


@dataclass(frozen=True)
class TrembleProfile:
    """Positive probability floors, one per (player, strategy)."""

    players: tuple[str, ...]
    strategy_sets: tuple[tuple[str, ...], ...]
    floor: Mapping[tuple[str, str], Fraction]

    @classmethod
    def of(cls, game: StrategicGame, floor) -> "TrembleProfile":
        """``floor``: map (player, strategy) -> level, or a single level."""
        table = {}
        for p, options in zip(game.players, game.strategies):
            for s in options:
                level = _frac(floor if not isinstance(floor, Mapping) else floor[(p, s)])
                table[(p, s)] = level
        return cls._build(game.players, game.strategies, table)

    @classmethod
    def uniform(cls, game: StrategicGame, level) -> "TrembleProfile":
        return cls.of(game, _frac(level))

    @classmethod
    def _build(cls, players, strategy_sets, table) -> "TrembleProfile":
        for (p, s), level in table.items():
            if level <= 0:
                raise ValueError(f"floor for {(p, s)} must be positive")
        for p, options in zip(players, strategy_sets):
            total = sum(table[(p, s)] for s in options)
            if total >= 1:
                raise ValueError(
                    f"floors of player {p!r} sum to {total}; the floored simplex is empty"
                )
        return cls(tuple(players), tuple(tuple(s) for s in strategy_sets), table)

    def floor_of(self, player: str, strategy: str) -> Fraction:
        return self.floor[(player, strategy)]

    def row(self, player: str) -> tuple[Fraction, ...]:
        k = self.players.index(player)
        return tuple(self.floor[(player, s)] for s in self.strategy_sets[k])

    def surplus(self, player: str) -> Fraction:
        return _ONE - sum(self.row(player))

    def scaled(self, factor) -> "TrembleProfile":
        factor = _frac(factor)
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return TrembleProfile._build(
            self.players,
            self.strategy_sets,
            {key: level * factor for key, level in self.floor.items()},
        )

    def is_player_compatible(self, digraph: CompatibilityDigraph) -> bool:
        """Floors respect every edge: source level >= target level."""
        return all(
            self.floor[edge.source] >= self.floor[edge.target]
            for edge in digraph.edges
        )

    def max_level(self) -> Fraction:
        return max(self.floor.values())


def _condensation_ranks(digraph: CompatibilityDigraph) -> dict[tuple[str, str], int]:
    """Longest edge-distance to a sink, collapsed over strongly connected
    components so that mutually comparable strategies share a level."""
    nodes = list(digraph.nodes)
    succ: dict = {n: [] for n in nodes}
    pred: dict = {n: [] for n in nodes}
    for e in digraph.edges:
        succ[e.source].append(e.target)
        pred[e.target].append(e.source)

    order, seen = [], set()
    for root in nodes:
        if root in seen:
            continue
        seen.add(root)
        stack = [(root, iter(succ[root]))]
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, iter(succ[nxt])))
                    break
            else:
                order.append(node)
                stack.pop()

    comp: dict = {}
    n_comp = 0
    for root in reversed(order):
        if root in comp:
            continue
        comp[root] = n_comp
        stack = [root]
        while stack:
            for nxt in pred[stack.pop()]:
                if nxt not in comp:
                    comp[nxt] = n_comp
                    stack.append(nxt)
        n_comp += 1

    comp_succ: dict[int, set[int]] = {}
    for e in digraph.edges:
        a, b = comp[e.source], comp[e.target]
        if a != b:
            comp_succ.setdefault(a, set()).add(b)

    rank: dict[int, int] = {}

    def rank_of(c: int) -> int:
        if c not in rank:
            outs = comp_succ.get(c, ())
            rank[c] = 0 if not outs else 1 + max(rank_of(b) for b in outs)
        return rank[c]

    return {n: rank_of(comp[n]) for n in nodes}


def player_compatible_trembles(
    digraph: CompatibilityDigraph, base, ratio
) -> TrembleProfile:
    """Floor profile base * ratio**rank over the digraph's condensation.

    Sinks get rank 0, so every edge's source floor is at least its
    target floor; ratio 1 reproduces uniform trembles, which are
    compatible with any digraph.
    """
    base, ratio = _frac(base), _frac(ratio)
    if base <= 0:
        raise ValueError("base must be positive")
    if ratio < 1:
        raise ValueError("ratio must be at least 1")
    ranks = _condensation_ranks(digraph)
    players: list[str] = []
    strategy_sets: dict[str, list[str]] = {}
    for p, s in digraph.nodes:
        if p not in strategy_sets:
            players.append(p)
            strategy_sets[p] = []
        strategy_sets[p].append(s)
    table = {node: base * ratio ** ranks[node] for node in digraph.nodes}
    return TrembleProfile._build(
        players, tuple(tuple(strategy_sets[p]) for p in players), table
    )


# ------------------------------------------------------- solver scaffolding


@dataclass(frozen=True)
class ConstrainedEquilibrium:
    """An exact optimizer-within-floors profile for a tremble profile."""

    profile: MixedProfile
    tremble: TrembleProfile
    residual: Fraction

    @property
    def above_floor(self) -> tuple[tuple[str, ...], ...]:
        return tuple(
            tuple(
                s
                for s in options
                if self.profile.prob(p, s) > self.tremble.floor_of(p, s)
            )
            for p, options in zip(self.profile.players, self.profile.strategy_sets)
        )


def _check_membership(game, profile, tremble):
    if profile.players != game.players or tremble.players != game.players:
        raise ValueError("profile, tremble, and game must share the player list")
    for p, options in zip(game.players, game.strategies):
        for s in options:
            if profile.prob(p, s) < tremble.floor_of(p, s):
                raise ValueError(
                    f"profile puts {profile.prob(p, s)} on {(p, s)}, below the floor"
                )


def _payoff_rows(game, profile, player) -> dict[str, Fraction]:
    opp = profile.without(player)
    return {s: expected_utility(game, player, s, opp) for s in game.strategy_set(player)}


def optimality_gap(
    game: StrategicGame, profile: MixedProfile, tremble: TrembleProfile, player: str
) -> Fraction:
    """Exact shortfall of the player's payoff versus the best floored reply."""
    vals = _payoff_rows(game, profile, player)
    best = max(vals.values())
    ceiling = tremble.surplus(player) * best + sum(
        tremble.floor_of(player, s) * v for s, v in vals.items()
    )
    current = sum(profile.prob(player, s) * v for s, v in vals.items())
    return ceiling - current


def verify_epsilon_equilibrium(
    game: StrategicGame,
    profile: MixedProfile,
    tremble: TrembleProfile,
    tol=Fraction(0),
) -> bool:
    """True iff every above-floor strategy is within tol of the best reply.

    Raises when the profile is not inside the floored polytope; that is
    a malformed query, not a failed verification.
    """
    _check_membership(game, profile, tremble)
    tol = _frac(tol)
    for p in game.players:
        vals = _payoff_rows(game, profile, p)
        best = max(vals.values())
        for s in game.strategy_set(p):
            if profile.prob(p, s) > tremble.floor_of(p, s) and vals[s] < best - tol:
                return False
    return True


def _exact_profile(game, rows: Sequence[Sequence[Fraction]]) -> MixedProfile:
    return MixedProfile(game.players, game.strategies, tuple(tuple(r) for r in rows))


def _pure_pattern(game, tremble, picks: Sequence[str]) -> MixedProfile:
    rows = []
    for p, options, pick in zip(game.players, game.strategies, picks):
        row = [tremble.floor_of(p, s) for s in options]
        row[options.index(pick)] = _ONE - (
            sum(row) - tremble.floor_of(p, pick)
        )
        rows.append(row)
    return _exact_profile(game, rows)


def _support_solve_two_player(game, tremble, supports, floors=True):
    """Exact profile with the given above-floor supports in a 2-player game.

    Each side's mixture is pinned by the other side's indifference over
    its support, a pair of decoupled linear systems. Returns None when a
    system is not uniquely solvable or the solution leaves the floored
    simplex. With ``floors=False`` solves the unfloored analogue (used
    for limit extraction), requiring plain nonnegativity instead.
    """
    if len(game.players) != 2:
        raise ValueError("support solving applies to 2-player games only")
    rows_out = []
    for me_idx, (me, other) in enumerate(((0, 1), (1, 0))):
        me_p, other_p = game.players[me], game.players[other]
        own = game.strategies[other]  # unknowns: the *other* player's mixture
        support_me = supports[me]
        support_other = supports[other]
        n = len(own)
        a_rows, b_vals = [], []
        for s in own:
            if s not in support_other:
                row = [_ZERO] * n
                row[own.index(s)] = _ONE
                a_rows.append(row)
                b_vals.append(
                    tremble.floor_of(other_p, s) if floors else _ZERO
                )
        a_rows.append([_ONE] * n)
        b_vals.append(_ONE)
        anchor = support_me[0]
        for s in support_me[1:]:
            # U_me(s, x) - U_me(anchor, x) = 0 over the other's mixture x
            row = [
                game.u(me_p, s, (t,)) - game.u(me_p, anchor, (t,)) for t in own
            ]
            a_rows.append(row)
            b_vals.append(_ZERO)
        sol = solve_linear_system_exact(a_rows, b_vals)
        if sol.status != "unique":
            return None
        x = sol.solution
        for k, s in enumerate(own):
            lo = tremble.floor_of(other_p, s) if floors else _ZERO
            if x[k] < lo:
                return None
        rows_out.append(x)
    sigma2, sigma1 = rows_out  # first pass solved player 2's mixture
    return _exact_profile(game, (sigma1, sigma2))


def _polish(game, tremble, float_rows) -> MixedProfile | None:
    """Rationalize a numerically converged point and verify it exactly."""
    supports = []
    for p, options, row in zip(game.players, game.strategies, float_rows):
        above = [
            s
            for k, s in enumerate(options)
            if row[k] > float(tremble.floor_of(p, s)) * (1 + 1e-6) + 1e-9
        ]
        if not above:
            above = [options[int(np.argmax(row))]]
        supports.append(tuple(above))
    candidate = None
    if all(len(a) == 1 for a in supports):
        candidate = _pure_pattern(game, tremble, [a[0] for a in supports])
    elif len(game.players) == 2:
        candidate = _support_solve_two_player(game, tremble, supports)
    if candidate is not None and verify_epsilon_equilibrium(game, candidate, tremble):
        return candidate
    return None


def _all_support_pairs(game, tremble):
    """Exhaustive exact sweep of above-floor support patterns, 2 players."""
    found = []
    s1, s2 = game.strategies
    for a1 in _nonempty_subsets(s1):
        for a2 in _nonempty_subsets(s2):
            if len(a1) == 1 and len(a2) == 1:
                cand = _pure_pattern(game, tremble, (a1[0], a2[0]))
            elif len(a1) == len(a2):
                cand = _support_solve_two_player(game, tremble, (a1, a2))
            else:
                cand = None
            if cand is not None and verify_epsilon_equilibrium(game, cand, tremble):
                found.append(cand)
    return found


def _nonempty_subsets(options):
    for r in range(1, len(options) + 1):
        yield from itertools.combinations(options, r)


def _dedup_profiles(profiles: Iterable[MixedProfile]) -> list[MixedProfile]:
    seen = {}
    for prof in profiles:
        key = tuple(tuple(row) for row in prof.probs)
        seen.setdefault(key, prof)
    return [seen[k] for k in sorted(seen)]


def epsilon_equilibrium(
    game: StrategicGame,
    tremble: TrembleProfile,
    *,
    starts: int = 64,
    max_iters: int = 2000,
    step: float = 0.2,
    tol: float = 1e-10,
    seed: int = 0,
    initial_points: Sequence[MixedProfile] | None = None,
) -> list[ConstrainedEquilibrium]:
    """All distinct exactly verified floored equilibria found by damped
    best response from multiple starts.

    Iteration runs in floats, batched over starts: each player drifts
    toward floors-plus-surplus-on-best-replies, surplus split equally
    over the exact argmax set. Converged rows are rationalized (pure
    floor patterns for any player count, support solving for 2-player
    mixed patterns) and re-verified in exact arithmetic; rows that fail
    either stage are logged and dropped. On 2-player games where no row
    survives, an exhaustive exact support sweep runs as a fallback, so
    small games cannot be lost to oscillation.
    """
    if tremble.players != game.players:
        raise ValueError("tremble must be built for this game's players")
    n = len(game.players)
    shapes = [len(s) for s in game.strategies]
    floors = [
        np.array([float(tremble.floor_of(p, s)) for s in options])
        for p, options in zip(game.players, game.strategies)
    ]
    surplus = [float(tremble.surplus(p)) for p in game.players]

    rows0 = []
    if initial_points is not None:
        for prof in initial_points:
            rows0.append([[float(v) for v in row] for row in prof.probs])
    if starts > 0 or not rows0:
        rows0.append([(fl + s / len(fl)).tolist() for fl, s in zip(floors, surplus)])
    rng = np.random.default_rng(seed)
    for _ in range(max(0, starts - 1)):
        rows0.append(
            [
                (fl + s * rng.dirichlet(np.ones(len(fl)))).tolist()
                for fl, s in zip(floors, surplus)
            ]
        )

    batch = len(rows0)
    sigma = [
        np.array([rows0[b][i] for b in range(batch)], dtype=float) for i in range(n)
    ]
    tensors = _payoff_tensors(game)
    specs = _einsum_specs(n)
    scale = max(1.0, max(float(abs(v)) for vec in game.payoffs.values() for v in vec))
    tie = 1e-10 * scale

    def targets():
        out = []
        for i in range(n):
            operands = [tensors[i]] + [sigma[j] for j in range(n) if j != i]
            u = np.einsum(specs[i], *operands)
            mask = u >= u.max(axis=1, keepdims=True) - tie
            share = mask / mask.sum(axis=1, keepdims=True)
            out.append(floors[i][None, :] + surplus[i] * share)
        return out

    for it in range(max_iters):
        tgt = targets()
        diff = 0.0
        for i in range(n):
            new = (1 - step) * sigma[i] + step * tgt[i]
            diff = max(diff, float(np.abs(new - sigma[i]).max()))
            sigma[i] = new
        if diff < tol:
            break

    tgt = targets()
    settled = np.ones(batch, dtype=bool)
    for i in range(n):
        settled &= np.abs(tgt[i] - sigma[i]).max(axis=1) < max(tol, 1e-9) / step

    exact: list[MixedProfile] = []
    dropped = 0
    for b in range(batch):
        if not settled[b]:
            dropped += 1
            continue
        polished = _polish(game, tremble, [sigma[i][b] for i in range(n)])
        if polished is None:
            dropped += 1
        else:
            exact.append(polished)
    if dropped:
        log.info("epsilon_equilibrium: %d of %d starts did not verify", dropped, batch)

    if not exact and n == 2:
        exact = _all_support_pairs(game, tremble)

    return [
        ConstrainedEquilibrium(prof, tremble, Fraction(0))
        for prof in _dedup_profiles(exact)
    ]


def _payoff_tensors(game):
    shape = tuple(len(s) for s in game.strategies)
    tensors = []
    for k in range(len(game.players)):
        arr = np.empty(shape, dtype=float)
        for idx, prof in zip(itertools.product(*map(range, shape)), game.profiles()):
            arr[idx] = float(game.payoffs[prof][k])
        tensors.append(arr)
    return tensors


def _einsum_specs(n):
    letters = "abcdefghijklmnopqrstuvwxy"[:n]
    specs = []
    for i in range(n):
        inputs = [letters] + [f"z{letters[j]}" for j in range(n) if j != i]
        specs.append(",".join(inputs) + f"->z{letters[i]}")
    return specs


# ------------------------------------------------------------------- traces


@dataclass(frozen=True)
class PceTrace:
    """One branch of floored equilibria followed down a vanishing schedule."""

    schedule: tuple[TrembleProfile, ...]
    points: tuple[MixedProfile, ...]
    limit: MixedProfile | None
    residual: Fraction | None
    converged: bool


_NASH_TOL = Fraction(1, 10**9)


def nash_residual(game: StrategicGame, profile: MixedProfile) -> Fraction:
    worst = Fraction(0)
    for p in game.players:
        vals = _payoff_rows(game, profile, p)
        best = max(vals.values())
        current = sum(profile.prob(p, s) * v for s, v in vals.items())
        worst = max(worst, best - current)
    return worst


def _extrapolate_limit(game, tremble, point: MixedProfile) -> MixedProfile:
    """Send the floors to zero while keeping the above-floor supports."""
    supports = []
    for p, options in zip(game.players, game.strategies):
        above = [s for s in options if point.prob(p, s) > tremble.floor_of(p, s)]
        supports.append(tuple(above) or (options[0],))
    if all(len(a) == 1 for a in supports):
        rows = []
        for options, (pick,) in zip(game.strategies, supports):
            row = [_ZERO] * len(options)
            row[options.index(pick)] = _ONE
            rows.append(row)
        return _exact_profile(game, rows)
    if len(game.players) == 2:
        solved = _support_solve_two_player(game, tremble, supports, floors=False)
        if solved is not None and nash_residual(game, solved) == 0:
            return solved
    rows = []
    for p, options in zip(game.players, game.strategies):
        total = _ONE - sum(tremble.floor_of(p, s) for s in options)
        row = []
        for s in options:
            excess = point.prob(p, s) - tremble.floor_of(p, s)
            row.append(excess / total if excess > 0 else _ZERO)
        rows.append(row)
    return _exact_profile(game, rows)


def pce_approximate(
    game: StrategicGame,
    digraph: CompatibilityDigraph,
    *,
    base=Fraction(1, 16),
    ratio=Fraction(2),
    decay=Fraction(1, 2),
    steps: int = 20,
    starts: int = 64,
    seed: int = 0,
) -> tuple[PceTrace, ...]:
    """Follow floored equilibria along a geometric tremble schedule.

    Every schedule step runs a fresh multi-start solve. Live branches
    continue to the nearest equilibrium found (warm-started from their
    previous point, which the shrinking floors keep feasible), and any
    equilibrium no branch claims seeds a new branch at that step, so
    equilibria that only appear once the floors are small enough are
    still traced. Each surviving branch ends with an extrapolated limit
    profile whose exact best-reply residual decides convergence; ratio 1
    gives the uniform-tremble schedule under which a convergent branch
    always exists in principle.
    """
    decay = _frac(decay)
    if not 0 < decay < 1:
        raise ValueError("decay must be strictly between 0 and 1")
    if steps < 1:
        raise ValueError("steps must be positive")
    schedule = tuple(
        player_compatible_trembles(digraph, _frac(base) * decay**t, ratio)
        for t in range(steps)
    )

    def key_of(prof):
        return tuple(tuple(r) for r in prof.probs)

    def distance(a, b):
        return max(
            abs(float(x - y))
            for ra, rb in zip(a.probs, b.probs)
            for x, y in zip(ra, rb)
        )

    branches: list[dict] = []  # points, start step, status
    for t, tremble in enumerate(schedule):
        pool = {
            key_of(eq.profile): eq.profile
            for eq in epsilon_equilibrium(game, tremble, starts=starts, seed=seed + t)
        }
        claimed: set = set()
        for branch in branches:
            if branch["status"] != "alive":
                continue
            prev = branch["points"][-1]
            warm = epsilon_equilibrium(
                game, tremble, starts=0, initial_points=[prev], seed=seed
            )
            candidates = list(pool.values()) + [eq.profile for eq in warm]
            if not candidates:
                branch["status"] = "stalled"
                log.info("trace branch stalled at floor scale %s", tremble.max_level())
                continue
            nearest = min(candidates, key=lambda prof: distance(prof, prev))
            k = key_of(nearest)
            if k in claimed:
                branch["status"] = "merged"
                continue
            claimed.add(k)
            branch["points"].append(nearest)
        for k, prof in pool.items():
            if k not in claimed:
                branches.append({"points": [prof], "start": t, "status": "alive"})

    traces = []
    for branch in branches:
        if branch["status"] == "merged":
            continue
        points = tuple(branch["points"])
        ran = schedule[branch["start"] : branch["start"] + len(points)]
        if branch["status"] == "alive":
            limit = _extrapolate_limit(game, ran[-1], points[-1])
            residual = nash_residual(game, limit)
            traces.append(
                PceTrace(ran, points, limit, residual, residual <= _NASH_TOL)
            )
        else:
            traces.append(PceTrace(ran, points, None, None, False))
    return tuple(traces)


# --------------------------------------------------------------- refutation


@dataclass(frozen=True)
class RefutationEntry:
    """Search outcome for one (player, supported strategy) pair."""

    player: str
    strategy: str
    refuted: bool
    witnesses: Mapping[Fraction, dict | None]

    def witness_at(self, eta) -> dict | None:
        return self.witnesses.get(_frac(eta))


@dataclass(frozen=True)
class RefutationReport:
    profile: MixedProfile
    entries: tuple[RefutationEntry, ...]

    @property
    def refuted(self) -> bool:
        return any(e.refuted for e in self.entries)


def _verify_nash(game, profile):
    for p in game.players:
        vals = _payoff_rows(game, profile, p)
        best = max(vals.values())
        for s in game.strategy_set(p):
            if profile.prob(p, s) > 0 and vals[s] < best:
                raise ValueError(
                    f"profile is not a Nash equilibrium: {p!r} gains by dropping {s!r}"
                )


def _product_eu(game, player, own, rows: Mapping[str, Mapping[str, Fraction]]):
    total = _ZERO
    opp = game.opponents(player)
    for prof in game.opponent_profiles(player):
        w = _ONE
        for q, s in zip(opp, prof):
            w *= rows[q][s]
            if w == 0:
                break
        if w:
            total += w * game.u(player, own, prof)
    return total


def pce_refute(
    game: StrategicGame,
    digraph: CompatibilityDigraph,
    profile: MixedProfile,
    *,
    eta_grid: Sequence = (Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)),
    floor_delta=Fraction(1, 10**6),
    samples: int = 200,
    seed: int = 0,
) -> RefutationReport:
    """Search for compatible totally mixed play near the profile that
    keeps each supported strategy a best response.

    For every player k and supported strategy, candidates within sup
    distance eta of the opponents' play are screened against: all
    coordinates at least floor_delta, source weight at least target
    weight for every digraph edge not involving k, and exact best-reply
    status of the strategy. Deterministic geometric mixtures toward
    uniform are tried first, then seeded random perturbations; all
    checks run in exact arithmetic. A pair with no witness at any eta
    level fails the necessary condition for being a vanishing-tremble
    limit, refuting the profile at this search resolution.
    """
    _verify_nash(game, profile)
    eta_grid = tuple(_frac(e) for e in eta_grid)
    floor_delta = _frac(floor_delta)
    if any(e <= 0 for e in eta_grid) or floor_delta <= 0:
        raise ValueError("eta levels and floor_delta must be positive")
    rng = random.Random(seed)

    entries = []
    for k in game.players:
        opp = game.opponents(k)
        edges = [
            (e.source, e.target)
            for e in digraph.edges
            if e.source[0] != k and e.target[0] != k
        ]
        star_rows = {q: dict(zip(game.strategy_set(q), profile.row(q))) for q in opp}

        def admissible(rows, eta):
            for q in opp:
                for s in game.strategy_set(q):
                    v = rows[q][s]
                    if v < floor_delta or abs(v - star_rows[q][s]) > eta:
                        return False
            return all(rows[i][si] >= rows[j][sj] for (i, si), (j, sj) in edges)

        def candidates(eta):
            lam_levels = [eta, eta / 2, eta / 4, eta / 8]
            for combo in itertools.product(lam_levels, repeat=len(opp)):
                yield {
                    q: {
                        s: (1 - lam) * star_rows[q][s]
                        + lam * Fraction(1, len(game.strategy_set(q)))
                        for s in game.strategy_set(q)
                    }
                    for q, lam in zip(opp, combo)
                }
            for _ in range(samples):
                rows = {}
                for q in opp:
                    raw = []
                    for s in game.strategy_set(q):
                        jitter = Fraction(rng.random()) * 2 - 1
                        raw.append(max(floor_delta, star_rows[q][s] + eta * jitter))
                    total = sum(raw)
                    rows[q] = {
                        s: v / total for s, v in zip(game.strategy_set(q), raw)
                    }
                yield rows

        for bar_s in game.strategy_set(k):
            if profile.prob(k, bar_s) == 0:
                continue
            witnesses: dict[Fraction, dict | None] = {}
            for eta in eta_grid:
                hit = None
                for rows in candidates(eta):
                    if not admissible(rows, eta):
                        continue
                    vals = {
                        s: _product_eu(game, k, s, rows)
                        for s in game.strategy_set(k)
                    }
                    if vals[bar_s] == max(vals.values()):
                        hit = {q: dict(r) for q, r in rows.items()}
                        break
                witnesses[eta] = hit
            entries.append(
                RefutationEntry(
                    k,
                    bar_s,
                    refuted=all(w is None for w in witnesses.values()),
                    witnesses=witnesses,
                )
            )
    return RefutationReport(profile, tuple(entries))
