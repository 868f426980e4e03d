"""Built-in example games.

Strategic forms here are the canonical desk instances used by the test
suite and the CLI fixture library; extensive forms live in
:mod:`pcekit.extensive_catalog`.
"""

from __future__ import annotations

from fractions import Fraction

from .games import SignalingGame, StrategicGame

CRITIC, DINER, RESTAURANT = "critic", "diner", "restaurant"


def restaurant_game(x=Fraction(-2), y=Fraction(1)) -> StrategicGame:
    """Two customers decide whether to eat at a restaurant of unknown effort.

    The critic and an ordinary diner each choose R (attend) or Z (stay
    out); the restaurant chooses high (H) or low (L) quality. Attending
    yields the quality payoff (y for H, x for L) minus a 1/2 congestion
    cost when the other customer also attends; the critic enjoys an extra
    +1 from writing a review when attending. The restaurant makes +1 per
    customer under H and +2 per customer under L, and a review swings its
    payoff by +-5/2 depending on quality. Defaults x=-2, y=1 satisfy the
    intended regime x < -1 < 1/2 < y.
    """
    x, y = Fraction(x), Fraction(y)
    half, bonus, swing = Fraction(1, 2), Fraction(1), Fraction(5, 2)

    def pay(profile):
        c, d, r = profile
        quality = y if r == "H" else x
        both = c == "R" and d == "R"
        u_c = (quality + bonus - (half if both else 0)) if c == "R" else Fraction(0)
        u_d = (quality - (half if both else 0)) if d == "R" else Fraction(0)
        n = (1 if c == "R" else 0) + (1 if d == "R" else 0)
        if r == "H":
            u_r = n + (swing if c == "R" else 0)
        else:
            u_r = 2 * n - (swing if c == "R" else 0)
        return (u_c, u_d, u_r)

    return StrategicGame.of(
        (CRITIC, DINER, RESTAURANT),
        (("R", "Z"), ("R", "Z"), ("H", "L")),
        pay,
    )


LINK_PLAYERS = ("N1", "N2", "S1", "S2")
_LINK_COSTS = {"N1": Fraction(14), "N2": Fraction(19), "S1": Fraction(14), "S2": Fraction(19)}
_LINK_QUALITY = {
    "anti": {"N1": Fraction(30), "N2": Fraction(10), "S1": Fraction(30), "S2": Fraction(10)},
    "co": {"N1": Fraction(10), "N2": Fraction(30), "S1": Fraction(10), "S2": Fraction(30)},
}


def link_game(version: str) -> StrategicGame:
    """Two-sided link formation: North players N1, N2 face South players
    S1, S2. An Active player links with every Active player on the other
    side, earning that partner's quality minus their own per-link cost;
    Inactive yields 0. ``version`` selects whether quality runs against
    ("anti") or with ("co") the cost ordering.
    """
    if version not in _LINK_QUALITY:
        raise ValueError("version must be 'anti' or 'co'")
    quality = _LINK_QUALITY[version]

    def side(p):
        return "N" if p.startswith("N") else "S"

    def pay(profile):
        chosen = dict(zip(LINK_PLAYERS, profile))
        vec = []
        for p in LINK_PLAYERS:
            if chosen[p] == "Inactive":
                vec.append(Fraction(0))
                continue
            total = Fraction(0)
            for q in LINK_PLAYERS:
                if side(q) != side(p) and chosen[q] == "Active":
                    total += quality[q] - _LINK_COSTS[p]
            vec.append(total)
        return vec

    return StrategicGame.of(
        LINK_PLAYERS,
        tuple(("Active", "Inactive") for _ in LINK_PLAYERS),
        pay,
    )


def beer_quiche_game() -> SignalingGame:
    """Breakfast signaling: a strong (prob 9/10) or weak sender orders beer
    or quiche, then the receiver duels or retreats. The sender gets +1 for
    the type-preferred breakfast (strong likes beer, weak likes quiche) and
    +2 for not being dueled; the receiver gets +1 for dueling the weak type
    or retreating against the strong type.
    """
    types = ("strong", "weak")
    prior = (Fraction(9, 10), Fraction(1, 10))
    signals = ("beer", "quiche")
    actions = ("duel", "retreat")
    sender = {}
    receiver = {}
    for s in signals:
        for a in actions:
            for t in types:
                breakfast = 1 if (t == "strong") == (s == "beer") else 0
                sender[(s, a, t)] = Fraction(breakfast + (2 if a == "retreat" else 0))
                good_call = (a == "duel" and t == "weak") or (a == "retreat" and t == "strong")
                receiver[(s, a, t)] = Fraction(1 if good_call else 0)
    return SignalingGame.of(types, prior, signals, actions, sender, receiver)


def matching_pennies() -> StrategicGame:
    return StrategicGame.of(
        ("odd", "even"),
        (("heads", "tails"), ("heads", "tails")),
        {
            ("heads", "heads"): (1, -1),
            ("heads", "tails"): (-1, 1),
            ("tails", "heads"): (-1, 1),
            ("tails", "tails"): (1, -1),
        },
    )


def random_strategic_game(
    rng,
    n_players: int = 3,
    strategy_range: tuple[int, int] = (2, 3),
    span: int = 4,
    require_undominated: bool = True,
) -> StrategicGame:
    """A random integer-payoff game drawn from ``rng``.

    Strategy counts are sampled per player from ``strategy_range`` and
    payoffs uniformly from [-span, span]. With ``require_undominated``
    the draw repeats until no strategy is strictly dominated, the
    precondition of the compatibility machinery.
    """
    from itertools import product

    from .games import validate_no_strict_dominance

    players = tuple(f"p{k}" for k in range(n_players))
    while True:
        strategies = tuple(
            tuple(f"s{m}" for m in range(rng.randint(*strategy_range)))
            for _ in players
        )
        payoffs = {
            prof: tuple(Fraction(rng.randint(-span, span)) for _ in players)
            for prof in product(*strategies)
        }
        game = StrategicGame.of(players, strategies, payoffs)
        if not require_undominated or validate_no_strict_dominance(game) is None:
            return game
