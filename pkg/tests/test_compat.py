"""Compatibility relation, digraph, and signaling criterion tests.

Expected verdicts for the catalog games were derived by hand from the
scalar reductions of each game (activation probabilities for the link
game, attendance/quality marginals for the restaurant game, per-signal
duel probabilities for breakfast signaling) and are asserted exactly.
"""

import itertools
import random
from fractions import Fraction as F

import pytest

from pcekit.catalog import (
    beer_quiche_game,
    link_game,
    matching_pennies,
    restaurant_game,
)
from pcekit.compat import (
    CompatibilityVerdict,
    check_compatibility_criterion,
    compatibility_digraph,
    is_more_compatible,
)
from pcekit.games import (
    SignalingGame,
    StrategicGame,
    expected_utility,
    is_weakly_dominated,
    signaling_to_strategic,
    validate_no_strict_dominance,
)


def assert_valid_witness(game, i, si, j, sj, verdict):
    """Re-verify a failure certificate directly against the definition."""
    assert verdict.witness is not None
    sigma, tilde = verdict.witness
    assert sigma.is_totally_mixed and tilde.is_totally_mixed
    others = tuple(p for p in game.players if p not in (i, j))
    if others:
        assert sigma.marginal(others).weights == tilde.marginal(others).weights
    vals = {
        s: expected_utility(game, j, s, sigma.marginal(game.opponents(j)))
        for s in game.strategy_set(j)
    }
    assert vals[sj] == max(vals.values())
    opp_i = tilde.marginal(game.opponents(i))
    star = expected_utility(game, i, si, opp_i)
    assert any(
        expected_utility(game, i, s, opp_i) >= star
        for s in game.strategy_set(i)
        if s != si
    )


def all_verdicts(game, method="reduced"):
    out = {}
    for i in game.players:
        for j in game.players:
            if i == j:
                continue
            for si in game.strategy_set(i):
                for sj in game.strategy_set(j):
                    out[(i, si, j, sj)] = is_more_compatible(
                        game, i, si, j, sj, method=method
                    )
    return out


def random_game(rng, n_players=3, strat_range=(2, 3), span=4, validated=True):
    players = tuple(f"p{k}" for k in range(n_players))
    while True:
        strategies = tuple(
            tuple(f"s{m}" for m in range(rng.randint(*strat_range))) for _ in players
        )
        payoffs = {
            prof: tuple(F(rng.randint(-span, span)) for _ in players)
            for prof in itertools.product(*strategies)
        }
        game = StrategicGame.of(players, strategies, payoffs)
        if not validated or validate_no_strict_dominance(game) is None:
            return game


# ------------------------------------------------------- catalog relations


def test_restaurant_critic_more_compatible_with_attending():
    g = restaurant_game()
    v = is_more_compatible(g, "critic", "R", "diner", "R")
    assert v == CompatibilityVerdict(holds=True, vacuous=False)


def test_restaurant_reverse_direction_fails_with_witness():
    g = restaurant_game()
    v = is_more_compatible(g, "diner", "R", "critic", "R")
    assert not v.holds and not v.vacuous
    assert_valid_witness(g, "diner", "R", "critic", "R", v)


def test_restaurant_digraph_exact():
    # The review bonus makes attending relatively better for the critic,
    # hence staying out relatively better for the diner; no other pair
    # survives both polytope checks.
    dg = compatibility_digraph(restaurant_game())
    assert set(dg.nodes) == {
        (p, s) for p in ("critic", "diner", "restaurant") for s in ("R", "Z", "H", "L")
        if s in (("H", "L") if p == "restaurant" else ("R", "Z"))
    }
    assert dg.edge_set() == {
        (("critic", "R"), ("diner", "R")),
        (("diner", "Z"), ("critic", "Z")),
    }
    assert all(not e.vacuous for e in dg.edges)
    assert dg.has_edge(("critic", "R"), ("diner", "R"))
    assert dg.successors(("critic", "R")) == (("diner", "R"),)


@pytest.mark.parametrize("version", ["anti", "co"])
def test_link_digraph_exact(version):
    # Same-side comparisons reduce to two linear thresholds in the other
    # side's activation probabilities; e.g. for N1 vs N2 in the co
    # version, premise -9 s1 + 11 s2 >= 0 contradicts negated conclusion
    # 4 s2 <= s1. Cross-side pairs decouple and always fail.
    dg = compatibility_digraph(link_game(version))
    assert dg.edge_set() == {
        (("N1", "Active"), ("N2", "Active")),
        (("S1", "Active"), ("S2", "Active")),
        (("N2", "Inactive"), ("N1", "Inactive")),
        (("S2", "Inactive"), ("S1", "Inactive")),
    }
    assert all(not e.vacuous for e in dg.edges)


def test_breakfast_type_compatibility():
    g = signaling_to_strategic(beer_quiche_game())
    assert is_more_compatible(g, "strong", "beer", "weak", "beer").holds
    assert is_more_compatible(g, "weak", "quiche", "strong", "quiche").holds
    v = is_more_compatible(g, "weak", "beer", "strong", "beer")
    assert not v.holds
    assert_valid_witness(g, "weak", "beer", "strong", "beer", v)
    assert not is_more_compatible(g, "strong", "quiche", "weak", "quiche").holds


def test_strictly_dominant_strategy_beats_everything():
    g = StrategicGame.of(
        ("a", "b"),
        (("top", "bottom"), ("l", "r")),
        {
            ("top", "l"): (5, 1),
            ("top", "r"): (5, 0),
            ("bottom", "l"): (0, 0),
            ("bottom", "r"): (0, 1),
        },
    )
    for sb in ("l", "r"):
        for method in ("reduced", "joint"):
            v = is_more_compatible(g, "a", "top", "b", sb, method=method)
            assert v.holds and not v.vacuous


def test_two_player_digraph_with_weak_dominance_edges():
    # Player a is payoff-indifferent; b's 'meh' ties 'good' at (x, .)
    # and loses at (y, .), so 'meh' is weakly but not strictly dominated.
    # Against interior play 'good' is strictly better, which yields two
    # non-vacuous edges out of ('b', 'good'), and 'meh' is never weakly
    # optimal interior, which yields two vacuous edges into it.
    g = StrategicGame.of(
        ("a", "b"),
        (("x", "y"), ("good", "meh")),
        {
            ("x", "good"): (0, 1),
            ("x", "meh"): (0, 1),
            ("y", "good"): (0, 1),
            ("y", "meh"): (0, 0),
        },
    )
    assert validate_no_strict_dominance(g) is None
    dg = compatibility_digraph(g)
    flagged = {(e.source, e.target): e.vacuous for e in dg.edges}
    assert flagged == {
        (("b", "good"), ("a", "x")): False,
        (("b", "good"), ("a", "y")): False,
        (("a", "x"), ("b", "meh")): True,
        (("a", "y"), ("b", "meh")): True,
    }


def test_matching_pennies_digraph_empty():
    assert compatibility_digraph(matching_pennies()).edges == ()


def test_constant_noninteracting_game_has_no_edges():
    g = StrategicGame.of(
        ("a", "b"),
        (("s0", "s1"), ("s0", "s1")),
        {prof: (1, 1) for prof in itertools.product(("s0", "s1"), repeat=2)},
    )
    for p in g.players:
        for s in g.strategy_set(p):
            assert not is_weakly_dominated(g, p, s)
    assert compatibility_digraph(g).edges == ()


def test_identical_roles_not_both_directions():
    g = StrategicGame.of(
        ("a", "b"),
        (("A", "B"), ("A", "B")),
        {
            ("A", "A"): (2, 2),
            ("A", "B"): (0, 0),
            ("B", "A"): (0, 0),
            ("B", "B"): (1, 1),
        },
    )
    assert not is_weakly_dominated(g, "a", "A") and not is_weakly_dominated(g, "b", "A")
    forward = is_more_compatible(g, "a", "A", "b", "A").holds
    backward = is_more_compatible(g, "b", "A", "a", "A").holds
    assert not (forward and backward)


# ----------------------------------------------------------- error handling


def test_same_player_rejected():
    with pytest.raises(ValueError):
        is_more_compatible(restaurant_game(), "critic", "R", "critic", "Z")


def test_unknown_strategy_rejected():
    with pytest.raises(KeyError):
        is_more_compatible(restaurant_game(), "critic", "H", "diner", "R")


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        is_more_compatible(restaurant_game(), "critic", "R", "diner", "R", method="grid")


def test_digraph_rejects_strict_dominance():
    pd = StrategicGame.of(
        ("a", "b"),
        (("cooperate", "defect"), ("cooperate", "defect")),
        {
            ("cooperate", "cooperate"): (2, 2),
            ("cooperate", "defect"): (0, 3),
            ("defect", "cooperate"): (3, 0),
            ("defect", "defect"): (1, 1),
        },
    )
    with pytest.raises(ValueError, match="strictly dominated"):
        compatibility_digraph(pd)


# ------------------------------------------------------------- dual routing


def test_reduced_and_joint_agree_on_catalog():
    g = restaurant_game()
    reduced = all_verdicts(g, method="reduced")
    joint = all_verdicts(g, method="joint")
    for key, v in reduced.items():
        w = joint[key]
        assert (v.holds, v.vacuous) == (w.holds, w.vacuous), key
        if not v.holds:
            assert_valid_witness(g, *key, v)
            assert_valid_witness(g, *key, w)


def test_reduced_and_joint_agree_on_random_games():
    rng = random.Random(90210)
    for _ in range(10):
        g = random_game(rng, strat_range=(2, 2), validated=False)
        i, j = rng.sample(list(g.players), 2)
        for si in g.strategy_set(i):
            for sj in g.strategy_set(j):
                v = is_more_compatible(g, i, si, j, sj, method="reduced")
                w = is_more_compatible(g, i, si, j, sj, method="joint")
                assert (v.holds, v.vacuous) == (w.holds, w.vacuous)
                if not v.holds:
                    assert_valid_witness(g, i, si, j, sj, v)
                    assert_valid_witness(g, i, si, j, sj, w)


# ------------------------------------------------------ relation properties


_SUITE = {}


def suite_games(count=18, seed=7710):
    key = (count, seed)
    if key not in _SUITE:
        rng = random.Random(seed)
        games = [random_game(rng) for _ in range(count)]
        _SUITE[key] = [(g, all_verdicts(g)) for g in games]
    return _SUITE[key]


def test_transitivity_on_random_games():
    for game, verdicts in suite_games():
        for i, j, k in itertools.permutations(game.players, 3):
            for si in game.strategy_set(i):
                for sj in game.strategy_set(j):
                    if not verdicts[(i, si, j, sj)].holds:
                        continue
                    for sk in game.strategy_set(k):
                        if verdicts[(j, sj, k, sk)].holds:
                            assert verdicts[(i, si, k, sk)].holds


def test_asymmetry_on_random_games():
    for game, verdicts in suite_games():
        for (i, si, j, sj), v in verdicts.items():
            if v.holds and verdicts[(j, sj, i, si)].holds:
                assert is_weakly_dominated(game, i, si)
                assert is_weakly_dominated(game, j, sj)


def test_witnesses_on_random_games():
    for game, verdicts in suite_games():
        for (i, si, j, sj), v in verdicts.items():
            if not v.holds:
                assert_valid_witness(game, i, si, j, sj, v)


def test_affine_invariance():
    rng = random.Random(5151)
    for _ in range(6):
        g = random_game(rng, strat_range=(2, 2))
        scale = [F(rng.randint(1, 6), rng.randint(1, 3)) for _ in g.players]
        shift = [F(rng.randint(-3, 3)) for _ in g.players]
        h = StrategicGame.of(
            g.players,
            g.strategies,
            {
                prof: tuple(
                    scale[k] * v + shift[k] for k, v in enumerate(g.payoffs[prof])
                )
                for prof in g.profiles()
            },
        )
        for key, v in all_verdicts(g).items():
            w = is_more_compatible(h, *key)
            assert (v.holds, v.vacuous) == (w.holds, w.vacuous)


# ------------------------------------------------------ signaling criterion


QUICHE_POOLING = (
    {"strong": {"quiche": 1}, "weak": {"quiche": 1}},
    {"quiche": {"retreat": 1}, "beer": {"duel": 1}},
)
BEER_POOLING = (
    {"strong": {"beer": 1}, "weak": {"beer": 1}},
    {"beer": {"retreat": 1}, "quiche": {"duel": 1}},
)


def test_quiche_pooling_fails_criterion():
    report = check_compatibility_criterion(beer_quiche_game(), QUICHE_POOLING)
    assert not report.passed
    assert [(c.signal, c.action) for c in report.failures] == [("beer", "duel")]


def test_beer_pooling_passes_criterion():
    sg = beer_quiche_game()
    report = check_compatibility_criterion(sg, BEER_POOLING)
    assert report.passed
    (check,) = [c for c in report.checks if c.signal == "quiche"]
    assert check.action == "duel" and check.belief is not None
    p = dict(zip(sg.types, check.belief))
    # duel best response: p(weak) >= p(strong); restriction from quiche
    # being more compatible with weak: p(strong)/10 <= 9 p(weak)/10.
    assert sum(p.values()) == 1 and all(v >= 0 for v in p.values())
    assert p["weak"] >= p["strong"]
    assert p["strong"] * F(1, 10) <= p["weak"] * F(9, 10)


def test_all_signals_sent_passes_vacuously():
    types, signals, actions = ("t1", "t2"), ("s1", "s2"), ("a1", "a2")
    sender, receiver = {}, {}
    for s in signals:
        for a in actions:
            for t in types:
                sender[(s, a, t)] = F(1) if s[1] == t[1] else F(0)
                receiver[(s, a, t)] = F(1) if a[1] == t[1] else F(0)
    sg = SignalingGame.of(types, (F(1, 2), F(1, 2)), signals, actions, sender, receiver)
    report = check_compatibility_criterion(
        sg,
        (
            {"t1": {"s1": 1}, "t2": {"s2": 1}},
            {"s1": {"a1": 1}, "s2": {"a2": 1}},
        ),
    )
    assert report.passed
    assert all("sent in equilibrium" in c.reason for c in report.checks)
    assert len(report.checks) == 2


def test_criterion_rejects_sender_deviation():
    with pytest.raises(ValueError, match="not a Nash equilibrium: type"):
        check_compatibility_criterion(
            beer_quiche_game(),
            (
                {"strong": {"quiche": 1}, "weak": {"beer": 1}},
                {"beer": {"retreat": 1}, "quiche": {"retreat": 1}},
            ),
        )


def test_criterion_rejects_receiver_mistake():
    with pytest.raises(ValueError, match="receiver plays"):
        check_compatibility_criterion(
            beer_quiche_game(),
            (
                {"strong": {"beer": 1}, "weak": {"quiche": 1}},
                {"beer": {"duel": 1}, "quiche": {"duel": 1}},
            ),
        )


def test_criterion_rejects_malformed_rule():
    with pytest.raises(ValueError, match="not a probability distribution"):
        check_compatibility_criterion(
            beer_quiche_game(),
            (
                {"strong": {"beer": 2}, "weak": {"beer": 1}},
                {"beer": {"retreat": 1}, "quiche": {"duel": 1}},
            ),
        )
