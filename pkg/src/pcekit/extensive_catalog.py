"""Built-in extensive forms.

The restaurant and link trees reduce exactly to their strategic-form
counterparts in :mod:`pcekit.catalog`; the breakfast-signaling tree
reduces exactly to ``signaling_to_strategic(beer_quiche_game())``. The
two sequential fixtures are deliberately ill-structured for per-strategy
payoff analysis and carry generic payoffs with no accidental ties.
"""

from __future__ import annotations

from fractions import Fraction

from .catalog import beer_quiche_game, link_game, restaurant_game
from .extensive import ExtensiveGame, chance, decision, terminal
from .games import RECEIVER, StrategicGame


def simultaneous_tree(game: StrategicGame, labels=None) -> ExtensiveGame:
    """One information set per player, nobody observes anything: the tree
    whose reduced form is ``game`` itself. ``labels`` optionally maps
    player -> information-set label; the default is ``h_<player>``."""
    labels = dict(labels or {})
    for p in game.players:
        labels.setdefault(p, f"h_{p}")

    def sub(prefix: tuple, k: int):
        if k == len(game.players):
            return terminal(game.payoffs[prefix])
        p = game.players[k]
        return decision(
            p,
            labels[p],
            {s: sub(prefix + (s,), k + 1) for s in game.strategies[k]},
        )

    return ExtensiveGame.of(game.players, sub((), 0))


def restaurant_tree() -> ExtensiveGame:
    """The restaurant game as a simultaneous tree."""
    return simultaneous_tree(restaurant_game())


def link_tree(version: str) -> ExtensiveGame:
    """A link-formation game ('anti' or 'co') as a simultaneous tree."""
    return simultaneous_tree(link_game(version))


def beer_quiche_tree() -> ExtensiveGame:
    """Breakfast signaling with sender types as separate players.

    Chance draws the type; the drawn type picks a breakfast; the receiver
    observes only the breakfast, so her two information sets are labeled
    by the signals. Each type's terminal payoffs are scaled by the
    reciprocal of its prior, making the chance-expected reduced form
    equal the per-type conditional payoffs that the strategic-form
    construction assigns to type players. The receiver's payoffs are left
    unscaled and average over types as usual.
    """
    sg = beer_quiche_game()
    players = sg.types + (RECEIVER,)
    zero = Fraction(0)

    def leaf(t, s, a):
        vec = {q: zero for q in players}
        vec[t] = sg.sender_payoff[(s, a, t)] / sg.prior_of(t)
        vec[RECEIVER] = sg.receiver_payoff[(s, a, t)]
        return terminal(vec)

    def type_node(t):
        return decision(
            t,
            f"h_{t}",
            {
                s: decision(RECEIVER, s, {a: leaf(t, s, a) for a in sg.actions})
                for s in sg.signals
            },
        )

    root = chance(
        {t: (sg.prior_of(t), type_node(t)) for t in sg.types}
    )
    return ExtensiveGame.of(players, root)


def centipede_3p() -> ExtensiveGame:
    """Three players in a line, each choosing drop or pass in turn.

    Payoffs are generic: every player's payoff varies with choices made
    after an early drop, yet dropping ends the game, so later information
    sets sit beyond the reach of any single deviation.
    """
    players = ("P1", "P2", "P3")

    def vec(a, b, c):
        return terminal((Fraction(a), Fraction(b), Fraction(c)))

    node3 = decision("P3", "h3", {"drop": vec(4, 2, 5), "pass": vec(3, 4, 3)})
    node2 = decision("P2", "h2", {"drop": vec(1, 3, 2), "pass": node3})
    node1 = decision("P1", "h1", {"drop": vec(2, 1, 1), "pass": node2})
    return ExtensiveGame.of(players, node1)


def seltens_horse() -> ExtensiveGame:
    """Player 1 moves Across to player 2 or Down to player 3; player 2
    moves Across to a terminal or Down to player 3; player 3 cannot tell
    who sent her. Generic payoffs: both of player 1's strategies need
    player 3's information set, which player 1 therefore cannot keep to
    one strategy.
    """
    players = ("P1", "P2", "P3")

    def vec(a, b, c):
        return terminal((Fraction(a), Fraction(b), Fraction(c)))

    third_after_1 = decision("P3", "h3", {"L": vec(4, 2, 3), "R": vec(1, 5, 6)})
    third_after_2 = decision("P3", "h3", {"L": vec(5, 1, 4), "R": vec(2, 6, 1)})
    node2 = decision("P2", "h2", {"Across": vec(3, 3, 2), "Down": third_after_2})
    node1 = decision("P1", "h1", {"Across": node2, "Down": third_after_1})
    return ExtensiveGame.of(players, node1)


__all__ = [
    "simultaneous_tree",
    "restaurant_tree",
    "link_tree",
    "beer_quiche_tree",
    "centipede_3p",
    "seltens_horse",
]
