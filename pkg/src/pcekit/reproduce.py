"""Scripted reruns of the toolkit's headline analyses.

Each row below drives the public API end to end on the shipped fixture
files with pinned seeds and configurations and reports structured
pass/fail checks: the compatibility verdicts and refutations on the
stock games, the tremble-trace limits, the factorability analyses with
their refusal witnesses, the coupled learning comparisons, and the
randomized property and numerics batteries. The CLI prints these rows
as a consolidated table; the test suite asserts them one by one.

Rows read game files from disk (the packaged fixtures by default, or a
caller-supplied directory), so editing a fixture really changes the
outcome; the table doubles as a sensitivity smoke test.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from pathlib import Path
from typing import Optional

import numpy as np

from .catalog import random_strategic_game
from .compat import check_compatibility_criterion, compatibility_digraph
from .extensive import (
    Factoring,
    NotFactorable,
    check_one_step_property,
    factor,
    is_binary_participation,
)
from .gamefile import GameDocument, load_fixture, load_game
from .games import (
    MixedProfile,
    StrategicGame,
    is_weakly_dominated,
    signaling_to_strategic,
    without_strictly_dominated,
)
from .learning import (
    BeliefState,
    GittinsPolicy,
    UcbPolicy,
    coupled_compare,
    factored_problem,
    induced_response,
    uniform_environment,
)
from .numerics import LinearProgram, beta_quantile, dirichlet_sample, lp_solve_exact
from .trembles import (
    epsilon_equilibrium,
    pce_approximate,
    pce_refute,
    player_compatible_trembles,
)

F = Fraction
_TOL = F(1, 10**6)


@dataclass(frozen=True)
class Check:
    label: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class CriterionRow:
    name: str
    budget_seconds: float
    elapsed_seconds: float
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _fixture(name: str, fixtures_dir: Optional[str]) -> GameDocument:
    if fixtures_dir is None:
        return load_fixture(name)
    return load_game(Path(fixtures_dir, f"{name}.json").read_text())


# ------------------------------------------------------------------ criteria


def _row_restaurant(fx) -> list[Check]:
    game = _fixture("restaurant", fx).game
    digraph = compatibility_digraph(game)
    checks = [
        Check(
            "critic attendance outranks diner attendance",
            digraph.has_edge(("critic", "R"), ("diner", "R")),
        )
    ]

    rng = random.Random(20250825)
    threshold_ok = True
    for _ in range(100):
        p_c = F(rng.randint(1, 63), 64)
        p_d = F(rng.randint(1, 63), 64)
        gap = F(0)
        for cc, wc in (("R", p_c), ("Z", 1 - p_c)):
            for dd, wd in (("R", p_d), ("Z", 1 - p_d)):
                gap += wc * wd * (
                    game.payoff((cc, dd, "H"), "restaurant")
                    - game.payoff((cc, dd, "L"), "restaurant")
                )
        if gap != 4 * p_c - p_d or (gap > 0) != (4 * p_c > p_d):
            threshold_ok = False
            break
    checks.append(
        Check(
            "quality gap equals 4p_c - p_d with the 1/4 threshold "
            "(100 random attendance pairs, exact)",
            threshold_ok,
        )
    )

    stay_out = MixedProfile.of(
        game, {"critic": {"Z": 1}, "diner": {"Z": 1}, "restaurant": {"L": 1}}
    )
    checks.append(
        Check(
            "all-out low-effort profile refuted",
            pce_refute(game, digraph, stay_out).refuted,
        )
    )

    traces = pce_approximate(game, digraph)
    limits = [t.limit for t in traces if t.limit is not None]
    checks.append(
        Check(
            "every traced limit has high effort with probability 1 (1e-6)",
            bool(limits)
            and all(abs(lim.prob("restaurant", "H") - 1) <= _TOL for lim in limits),
            f"{len(limits)} limit(s)",
        )
    )
    return checks


def _all_edge(digraph, pairs) -> bool:
    return all(digraph.has_edge(src, dst) for src, dst in pairs)


def _classify_link_limit(game: StrategicGame, profile) -> str:
    if all(abs(profile.prob(p, "Active") - 1) <= _TOL for p in game.players):
        return "all-active"
    if all(abs(profile.prob(p, "Inactive") - 1) <= _TOL for p in game.players):
        return "all-inactive"
    return "other"


def _row_link(fx) -> list[Check]:
    edges = [
        (("N1", "Active"), ("N2", "Active")),
        (("S1", "Active"), ("S2", "Active")),
    ]
    checks = []

    anti = _fixture("link_anti", fx).game
    digraph = compatibility_digraph(anti)
    checks.append(
        Check("anti-monotonic: cheap nodes outrank dear nodes", _all_edge(digraph, edges))
    )
    everyone_out = MixedProfile.of(
        anti, {p: {"Inactive": 1} for p in anti.players}
    )
    checks.append(
        Check(
            "anti-monotonic: all-inactive profile refuted",
            pce_refute(anti, digraph, everyone_out).refuted,
        )
    )
    traces = pce_approximate(anti, digraph)
    kinds = {
        _classify_link_limit(anti, t.limit)
        for t in traces
        if t.limit is not None
    }
    checks.append(
        Check(
            "anti-monotonic: every trace limits to all-active",
            bool(kinds) and kinds == {"all-active"},
        )
    )

    co = _fixture("link_co", fx).game
    digraph_co = compatibility_digraph(co)
    checks.append(
        Check("co-monotonic: the same compatibility edges hold", _all_edge(digraph_co, edges))
    )
    traces = pce_approximate(co, digraph_co, base=F(1, 32), ratio=5)
    kinds = {
        _classify_link_limit(co, t.limit) for t in traces if t.limit is not None
    }
    checks.append(
        Check(
            "co-monotonic: trace limits cluster at both all-active and all-inactive",
            {"all-active", "all-inactive"} <= kinds,
            f"clusters seen: {sorted(kinds)}",
        )
    )
    return checks


def _row_signaling(fx) -> list[Check]:
    sg = _fixture("beer_quiche", fx).game
    quiche_pool = (
        {"strong": {"quiche": 1}, "weak": {"quiche": 1}},
        {"quiche": {"retreat": 1}, "beer": {"duel": 1}},
    )
    beer_pool = (
        {"strong": {"beer": 1}, "weak": {"beer": 1}},
        {"beer": {"retreat": 1}, "quiche": {"duel": 1}},
    )
    checks = [
        Check(
            "quiche pooling fails the belief-restriction check",
            not check_compatibility_criterion(sg, quiche_pool).passed,
        ),
        Check(
            "beer pooling passes the belief-restriction check",
            check_compatibility_criterion(sg, beer_pool).passed,
        ),
    ]
    # the always-duel receiver plan is strictly dominated and must go
    # before any compatibility analysis will accept the game
    strategic = without_strictly_dominated(signaling_to_strategic(sg))
    digraph = compatibility_digraph(strategic)
    pooled = MixedProfile.of(
        strategic,
        {
            "strong": {"quiche": 1},
            "weak": {"quiche": 1},
            "receiver": {"beer=duel,quiche=retreat": 1},
        },
    )
    checks.append(
        Check(
            "tremble refutation agrees on quiche pooling",
            pce_refute(strategic, digraph, pooled).refuted,
        )
    )
    return checks


_LINK_F_MAP = {
    "N1": {"Active": {"h_S1", "h_S2"}, "Inactive": set()},
    "N2": {"Active": {"h_S1", "h_S2"}, "Inactive": set()},
    "S1": {"Active": {"h_N1", "h_N2"}, "Inactive": set()},
    "S2": {"Active": {"h_N1", "h_N2"}, "Inactive": set()},
}

_EXTENSIVE_FIXTURES = (
    "restaurant_extensive",
    "link_anti_extensive",
    "link_co_extensive",
    "centipede_3p",
    "seltens_horse",
)


def _row_factorability(fx) -> list[Check]:
    games = {name: _fixture(name, fx).game for name in _EXTENSIVE_FIXTURES}
    checks = []

    ext = games["restaurant_extensive"]
    want = {
        "critic": {"R": {"h_diner", "h_restaurant"}, "Z": set()},
        "diner": {"R": {"h_critic", "h_restaurant"}, "Z": set()},
    }
    ok = all(
        isinstance(res := factor(ext, p), Factoring) and res.as_dict() == want[p]
        for p in want
    )
    checks.append(Check("restaurant customers factor with the expected map", ok))

    ok = True
    for name in ("link_anti_extensive", "link_co_extensive"):
        for p, expected in _LINK_F_MAP.items():
            res = factor(games[name], p)
            ok &= isinstance(res, Factoring) and res.as_dict() == expected
    checks.append(Check("all four link players factor with the expected maps", ok))

    cent = games["centipede_3p"]
    blocked = {"P1": "h3", "P2": "h3", "P3": "h2"}
    ok = True
    for p, h in blocked.items():
        res = factor(cent, p)
        ok &= (
            isinstance(res, NotFactorable)
            and any(v.info_set == h for v in res.unreachable)
        )
    checks.append(
        Check(
            "centipede refused: each player has a set unreachable by one-step deviations",
            ok,
        )
    )

    horse = games["seltens_horse"]
    r1, r2, r3 = (factor(horse, p) for p in ("P1", "P2", "P3"))
    ok = (
        isinstance(r1, NotFactorable)
        and any(set(o.shared) == {"h3"} for o in r1.overlaps)
        and isinstance(r2, NotFactorable)
        and any(set(o.shared) == {"h1", "h3"} for o in r2.overlaps)
        and isinstance(r3, NotFactorable)
        and any(v.info_set == "h2" for v in r3.unreachable)
    )
    checks.append(
        Check(
            "horse refused: first movers overlap on the third set, "
            "last mover is unreachable",
            ok,
        )
    )

    binary_ok = onestep_ok = True
    for name, ext in games.items():
        for p in ext.players:
            res = factor(ext, p)
            if is_binary_participation(ext, p):
                binary_ok &= isinstance(res, Factoring)
            if isinstance(res, Factoring):
                onestep_ok &= check_one_step_property(ext, p).passed
    checks.append(
        Check("binary participation implies factorable on every fixture", binary_ok)
    )
    checks.append(
        Check(
            "every factorable player passes the exhaustive on-path screen",
            onestep_ok,
        )
    )
    return checks


def _row_learning(fx) -> list[Check]:
    ext = _fixture("restaurant_extensive", fx).game
    critic = factored_problem(ext, "critic")
    diner = factored_problem(ext, "diner")
    prior_c = BeliefState.uniform(critic, 1)
    prior_d = BeliefState.uniform(diner, 1)
    sigma = uniform_environment(ext)
    phi = {"R": "R", "Z": "Z"}
    gammas = (F(1, 2), F(9, 10))
    deltas = (F(1, 2), F(9, 10))

    configs = [("ucb", UcbPolicy(), g) for g in gammas]
    configs += [
        (f"opt d={d}", GittinsPolicy(d, 8), g) for d, g in product(deltas, gammas)
    ]
    checks = []
    for label, policy, gamma in configs:
        cmp = coupled_compare(
            critic, diner, policy, policy, phi, "R", sigma, gamma,
            prior_i=prior_c, prior_j=prior_d,
            n_paths=10_000, horizon=25, seed=f"headline:{label}:{gamma}",
        )
        checks.append(
            Check(
                f"{label} g={gamma}: critic experiments first on all "
                f"{cmp.n_paths} coupled paths",
                cmp.dominant_paths == cmp.n_paths,
                f"{cmp.violations} violation(s)",
            )
        )
        checks.append(
            Check(
                f"{label} g={gamma}: critic attendance frequency is not "
                "below the diner's (2 SE)",
                cmp.freq_i >= cmp.freq_j - 2 * (cmp.se_i + cmp.se_j),
                f"critic {cmp.freq_i:.4f} diner {cmp.freq_j:.4f}",
            )
        )

    tail = F(1, 2) ** 40
    for label, policy in (
        ("ucb", UcbPolicy()),
        ("opt d=1/2", GittinsPolicy(F(1, 2), 8)),
        ("opt d=9/10", GittinsPolicy(F(9, 10), 8)),
    ):
        resp_c = induced_response(
            policy, critic, prior_c, sigma, F(1, 2),
            method="exact-horizon", horizon=40,
        )
        resp_d = induced_response(
            policy, diner, prior_d, sigma, F(1, 2),
            method="exact-horizon", horizon=40,
        )
        checks.append(
            Check(
                f"{label} g=1/2 exact to horizon 40: frequency inequality "
                "holds within the truncation bound",
                resp_c.of("R") >= resp_d.of("R") - tail,
                f"critic {float(resp_c.of('R')):.6f} "
                f"diner {float(resp_d.of('R')):.6f}",
            )
        )
    return checks


def _affine_image(game: StrategicGame, rng) -> StrategicGame:
    scale = [F(rng.randint(1, 6), rng.randint(1, 3)) for _ in game.players]
    shift = [F(rng.randint(-4, 4)) for _ in game.players]
    return StrategicGame.of(
        game.players,
        game.strategies,
        {
            prof: tuple(
                a * v + b
                for v, a, b in zip(game.payoffs[prof], scale, shift)
            )
            for prof in game.profiles()
        },
    )


def _row_properties(fx) -> list[Check]:
    del fx  # randomized batteries need no fixtures
    checks = []

    rng = random.Random(1861)
    transitive = asymmetric = True
    for _ in range(200):
        game = random_strategic_game(rng)
        digraph = compatibility_digraph(game)
        holds = {
            (src, dst) for src, dst in (
                (e.source, e.target) for e in digraph.edges
            )
        }
        for i, j, k in permutations(game.players, 3):
            for si, sj, sk in product(
                game.strategy_set(i), game.strategy_set(j), game.strategy_set(k)
            ):
                if ((i, si), (j, sj)) in holds and ((j, sj), (k, sk)) in holds:
                    transitive &= ((i, si), (k, sk)) in holds
        for (i, si), (j, sj) in holds:
            if ((j, sj), (i, si)) in holds:
                asymmetric &= is_weakly_dominated(game, i, si)
                asymmetric &= is_weakly_dominated(game, j, sj)
    checks.append(
        Check("relation transitive on 200 random validated games (exact)", transitive)
    )
    checks.append(
        Check(
            "mutual edges only between weakly dominated strategies "
            "on the same 200 games (exact)",
            asymmetric,
        )
    )

    rng = random.Random(777)
    invariant = True
    for _ in range(100):
        game = random_strategic_game(rng, strategy_range=(2, 2))
        image = _affine_image(game, rng)
        invariant &= (
            compatibility_digraph(game).edge_set()
            == compatibility_digraph(image).edge_set()
        )
    checks.append(
        Check(
            "digraph invariant under 100 random positive affine payoff maps",
            invariant,
        )
    )

    rng = random.Random(424)
    bound_ok = True
    n_eq = 0
    for _ in range(12):
        game = random_strategic_game(rng, n_players=2)
        digraph = compatibility_digraph(game)
        tremble = player_compatible_trembles(digraph, F(1, 64), 2)
        for eq in epsilon_equilibrium(game, tremble, starts=24):
            n_eq += 1
            for e in digraph.edges:
                (i, si), (j, sj) = e.source, e.target
                cap = 1 - sum(tremble.row(i)) + tremble.floor_of(i, si)
                bound_ok &= eq.profile.prob(i, si) >= min(
                    eq.profile.prob(j, sj), cap
                )
    checks.append(
        Check(
            "every floored equilibrium honors the edge weight bound exactly",
            bound_ok and n_eq > 0,
            f"{n_eq} equilibria checked",
        )
    )

    rng = random.Random(99)
    converged = 0
    for _ in range(50):
        game = random_strategic_game(rng, n_players=2)
        digraph = compatibility_digraph(game)
        traces = pce_approximate(
            game, digraph, ratio=1, steps=8, starts=8, seed=3
        )
        converged += any(t.converged for t in traces)
    checks.append(
        Check(
            "uniform-ratio schedule converges on 50 random games",
            converged == 50,
            f"{converged}/50",
        )
    )
    return checks


def _row_numerics(fx) -> list[Check]:
    del fx
    checks = []

    rng = random.Random(7301)
    lp_ok = True
    feasible = 0
    for _ in range(40):
        n = rng.randint(2, 4)
        rows = []
        for _ in range(rng.randint(1, 6)):
            rows.append(
                (
                    [F(rng.randint(-3, 3)) for _ in range(n)],
                    rng.choice(["<=", ">=", "="]),
                    F(rng.randint(-3, 3)),
                )
            )
        rows.append(([F(1)] * n, "<=", F(5)))
        objective = [F(rng.randint(-3, 3)) for _ in range(n)]
        res = lp_solve_exact(LinearProgram.of(objective, rows, [F(0)] * n))
        verts = _lp_vertices(n, rows)
        if not verts:
            lp_ok &= res.status == "infeasible"
            continue
        feasible += 1
        best = max(sum(c * x for c, x in zip(objective, v)) for v in verts)
        lp_ok &= res.status == "optimal" and res.value == best
    checks.append(
        Check(
            "exact solver agrees with vertex enumeration on 40 random programs",
            lp_ok and feasible >= 10,
            f"{feasible} feasible",
        )
    )

    beta_ok = abs(beta_quantile(1, 1, 0.5) - 0.5) < 1e-12
    beta_ok &= abs(beta_quantile(2, 1, 0.25) - 0.25**0.5) < 1e-10
    for a, b, q in product((0.5, 1, 2, 7), (0.5, 1, 3), (0.1, 0.5, 0.9)):
        beta_ok &= abs(beta_quantile(a, b, q) + beta_quantile(b, a, 1 - q) - 1) < 1e-10
    for a, b in ((1, 1), (2, 5), (0.5, 0.5)):
        vals = [beta_quantile(a, b, 0.02 * k) for k in range(1, 50)]
        beta_ok &= all(x <= y for x, y in zip(vals, vals[1:]))
    checks.append(
        Check("beta quantile closed forms, symmetry, and monotonicity", beta_ok)
    )

    gen = np.random.default_rng(12)
    draws = np.array([dirichlet_sample([2, 1, 1], gen) for _ in range(40_000)])
    mean = draws.mean(axis=0)
    diri_ok = (
        abs(mean[0] - 0.5) < 0.01
        and abs(mean[1] - 0.25) < 0.01
        and float(np.abs(draws.sum(axis=1) - 1).max()) < 1e-9
        and np.array_equal(
            dirichlet_sample([3, 4], np.random.default_rng(5)),
            dirichlet_sample([3, 4], np.random.default_rng(5)),
        )
    )
    checks.append(
        Check("dirichlet sampler moments, normalization, reproducibility", diri_ok)
    )
    return checks


def _lp_vertices(n, rows):
    """Brute-force vertex list of a pointed region (all variables >= 0)."""
    from itertools import combinations

    planes = [(list(coeffs), rhs) for coeffs, _rel, rhs in rows]
    for k in range(n):
        row = [F(0)] * n
        row[k] = F(1)
        planes.append((row, F(0)))
    verts = []
    for combo in combinations(range(len(planes)), n):
        a = [planes[i][0] for i in combo]
        b = [planes[i][1] for i in combo]
        point = _cramer(a, b)
        if point is None:
            continue
        good = all(x >= 0 for x in point)
        for coeffs, rel, rhs in rows:
            lhs = sum(c * x for c, x in zip(coeffs, point))
            good &= (
                lhs <= rhs if rel == "<=" else lhs >= rhs if rel == ">=" else lhs == rhs
            )
        if good and point not in verts:
            verts.append(point)
    return verts


def _det(m):
    if len(m) == 1:
        return m[0][0]
    total, sign = F(0), 1
    for j in range(len(m)):
        if m[0][j] != 0:
            minor = [row[:j] + row[j + 1 :] for row in m[1:]]
            total += sign * m[0][j] * _det(minor)
        sign = -sign
    return total


def _cramer(a, b):
    d = _det(a)
    if d == 0:
        return None
    out = []
    for k in range(len(a)):
        col = [row[:k] + [bv] + row[k + 1 :] for row, bv in zip(a, b)]
        out.append(_det(col) / d)
    return out


ROWS = {
    "restaurant": (_row_restaurant, 30.0),
    "link": (_row_link, 60.0),
    "signaling": (_row_signaling, 30.0),
    "factorability": (_row_factorability, 10.0),
    "learning": (_row_learning, 600.0),
    "properties": (_row_properties, 600.0),
    "numerics": (_row_numerics, 120.0),
}


def run_row(name: str, fixtures_dir: Optional[str] = None) -> CriterionRow:
    """One criterion end to end, including its runtime budget check."""
    try:
        runner, budget = ROWS[name]
    except KeyError:
        raise ValueError(
            f"unknown criterion {name!r}; choose from {', '.join(ROWS)}"
        ) from None
    start = time.perf_counter()
    try:
        checks = list(runner(fixtures_dir))
    except Exception as exc:  # a broken fixture should FAIL the row, not crash
        checks = [Check("criterion executed", False, f"{type(exc).__name__}: {exc}")]
    elapsed = time.perf_counter() - start
    checks.append(
        Check(f"finished within the {budget:.0f}s budget", elapsed < budget, f"{elapsed:.1f}s")
    )
    return CriterionRow(name, budget, elapsed, tuple(checks))


def run_rows(names=None, fixtures_dir: Optional[str] = None) -> tuple[CriterionRow, ...]:
    names = tuple(names) if names else tuple(ROWS)
    return tuple(run_row(name, fixtures_dir) for name in names)
