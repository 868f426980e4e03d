"""Reading and writing the toolkit's JSON game files.

One document format covers the three kinds of game the toolkit works
with: strategic tables, extensive trees, and sender-receiver signaling
games. Exact rationals travel as JSON numbers or as strings ("7",
"3/2", "-0.25"); everything parses to Fractions.

Structure is checked against the versioned JSON Schema shipped inside
the package (the identical document lives under docs/schemas/ in the
source tree). Semantic requirements a schema cannot express (complete
payoff tables, probabilities summing to one, resolvable and acyclic
node references, declared information-set groupings matching the tree)
raise SchemaError with the offending JSON path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import product
from typing import Mapping, Optional

import jsonschema

from .extensive import Chance, Decision, ExtensiveGame, Terminal
from .extensive import chance, decision, terminal
from .games import SignalingGame, StrategicGame

SCHEMA_ID = "pcekit/game-file/v1"


class SchemaError(ValueError):
    """A game file that does not meet the format's contract."""

    def __init__(self, reason: str, path: str = "$"):
        self.reason = reason
        self.path = path
        super().__init__(f"{path}: {reason}")


@dataclass(frozen=True)
class GameDocument:
    """A parsed game file: the game plus its envelope metadata."""

    kind: str
    game: object
    name: Optional[str] = None
    note: Optional[str] = None


@lru_cache(maxsize=1)
def game_file_schema() -> dict:
    text = (
        resources.files("pcekit").joinpath("schemas/game-file.v1.json").read_text()
    )
    return json.loads(text)


def _json_path(error) -> str:
    return "$" + "".join(f"/{part}" for part in error.absolute_path)


def _validate_structure(doc) -> None:
    validator = jsonschema.Draft202012Validator(game_file_schema())
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise SchemaError(error.message, _json_path(error))


def parse_rational(value, path: str) -> Fraction:
    if isinstance(value, bool):
        raise SchemaError("expected a rational, got a boolean", path)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(Decimal(str(value)))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            pass
        try:
            return Fraction(Decimal(value))
        except InvalidOperation:
            raise SchemaError(f"{value!r} is not a rational", path) from None
    raise SchemaError(f"{value!r} is not a rational", path)


def unparse_rational(value: Fraction):
    value = Fraction(value)
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


# ------------------------------------------------------------------- parsing


def _parse_strategic(doc) -> StrategicGame:
    players = tuple(doc["players"])
    declared = doc["strategies"]
    if set(declared) != set(players):
        raise SchemaError(
            "strategy lists must cover exactly the players", "$/strategies"
        )
    strategies = tuple(tuple(declared[p]) for p in players)
    table: dict = {}
    for k, row in enumerate(doc["payoffs"]):
        profile = tuple(row["profile"])
        if len(profile) != len(players):
            raise SchemaError(
                f"profile has {len(profile)} entries for {len(players)} players",
                f"$/payoffs/{k}/profile",
            )
        for i, label in enumerate(profile):
            if label not in strategies[i]:
                raise SchemaError(
                    f"{label!r} is not a strategy of {players[i]!r}",
                    f"$/payoffs/{k}/profile/{i}",
                )
        if profile in table:
            raise SchemaError(
                f"duplicate entry for profile {list(profile)}",
                f"$/payoffs/{k}/profile",
            )
        values = row["values"]
        if len(values) != len(players):
            raise SchemaError(
                f"{len(values)} values for {len(players)} players",
                f"$/payoffs/{k}/values",
            )
        table[profile] = tuple(
            parse_rational(v, f"$/payoffs/{k}/values/{i}")
            for i, v in enumerate(values)
        )
    for profile in product(*strategies):
        if profile not in table:
            raise SchemaError(
                f"missing entry for profile {list(profile)}", "$/payoffs"
            )
    try:
        return StrategicGame.of(players, strategies, table)
    except ValueError as exc:
        raise SchemaError(str(exc), "$") from None


def _parse_extensive(doc) -> ExtensiveGame:
    players = tuple(doc["players"])
    by_id: dict = {}
    for k, node in enumerate(doc["nodes"]):
        if node["id"] in by_id:
            raise SchemaError(f"duplicate node id {node['id']!r}", f"$/nodes/{k}/id")
        by_id[node["id"]] = (k, node)

    def build(node_id: str, path: str, pending: frozenset):
        if node_id not in by_id:
            raise SchemaError(f"unknown node id {node_id!r}", path)
        if node_id in pending:
            raise SchemaError(f"node {node_id!r} is its own ancestor", path)
        k, node = by_id[node_id]
        here = f"$/nodes/{k}"
        pending = pending | {node_id}
        if node["type"] == "terminal":
            return terminal(
                [
                    parse_rational(v, f"{here}/payoffs/{i}")
                    for i, v in enumerate(node["payoffs"])
                ]
            )
        if node["type"] == "decision":
            moves = {
                action: build(child, f"{here}/moves/{action}", pending)
                for action, child in node["moves"].items()
            }
            return decision(node["owner"], node["info_set"], moves)
        total = sum(
            (
                parse_rational(entry["prob"], f"{here}/moves/{label}/prob")
                for label, entry in node["moves"].items()
            ),
            Fraction(0),
        )
        if total != 1:
            raise SchemaError(
                f"chance probabilities sum to {unparse_rational(total)}, "
                "expected 1",
                f"{here}/moves",
            )
        moves = {
            label: (
                parse_rational(entry["prob"], f"{here}/moves/{label}/prob"),
                build(entry["child"], f"{here}/moves/{label}/child", pending),
            )
            for label, entry in node["moves"].items()
        }
        return chance(moves)

    root = build(doc["root"], "$/root", frozenset())
    try:
        ext = ExtensiveGame.of(players, root)
    except ValueError as exc:
        raise SchemaError(str(exc), "$/nodes") from None
    declared = {
        entry["label"]: (entry["owner"], tuple(entry["actions"]))
        for entry in doc["info_sets"]
    }
    derived = {h.label: (h.owner, h.actions) for h in ext.info_sets}
    if declared != derived:
        for label in sorted(set(declared) ^ set(derived)):
            raise SchemaError(
                f"information set {label!r} is declared but never reached"
                if label in declared
                else f"information set {label!r} appears in the tree but is "
                "not declared",
                "$/info_sets",
            )
        label = sorted(
            label for label in declared if declared[label] != derived[label]
        )[0]
        raise SchemaError(
            f"information set {label!r} declaration does not match the tree",
            "$/info_sets",
        )
    return ext


def _parse_signaling(doc) -> SignalingGame:
    types = tuple(doc["types"])
    signals = tuple(doc["signals"])
    actions = tuple(doc["actions"])
    prior_doc = doc["prior"]
    if set(prior_doc) != set(types):
        raise SchemaError("prior must cover exactly the types", "$/prior")
    prior = {
        t: parse_rational(prior_doc[t], f"$/prior/{t}") for t in types
    }
    total = sum(prior.values())
    if total != 1:
        raise SchemaError(
            f"probabilities sum to {unparse_rational(total)}, expected 1",
            "$/prior",
        )
    tables = {}
    for field in ("sender_payoffs", "receiver_payoffs"):
        table: dict = {}
        for k, row in enumerate(doc[field]):
            key = (row["signal"], row["action"], row["type"])
            here = f"$/{field}/{k}"
            for part, pool, where in (
                (key[0], signals, "signal"),
                (key[1], actions, "action"),
                (key[2], types, "type"),
            ):
                if part not in pool:
                    raise SchemaError(
                        f"unknown {where} {part!r}", f"{here}/{where}"
                    )
            if key in table:
                raise SchemaError(
                    f"duplicate entry for {key}", f"{here}"
                )
            table[key] = parse_rational(row["value"], f"{here}/value")
        for key in product(signals, actions, types):
            if key not in table:
                raise SchemaError(
                    f"missing entry for {key}", f"$/{field}"
                )
        tables[field] = table
    try:
        return SignalingGame.of(
            types, prior, signals, actions,
            tables["sender_payoffs"], tables["receiver_payoffs"],
        )
    except ValueError as exc:
        raise SchemaError(str(exc), "$") from None


_PARSERS = {
    "strategic": _parse_strategic,
    "extensive": _parse_extensive,
    "signaling": _parse_signaling,
}


def parse_game(doc) -> GameDocument:
    """Validate and parse one game-file document."""
    if not isinstance(doc, Mapping):
        raise SchemaError("a game file must be a JSON object", "$")
    _validate_structure(doc)
    game = _PARSERS[doc["kind"]](doc)
    return GameDocument(doc["kind"], game, doc.get("name"), doc.get("note"))


def load_game(text: str) -> GameDocument:
    """Parse one game file from JSON text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}", "$") from None
    return parse_game(doc)


# --------------------------------------------------------------- serializing


def _strategic_doc(game: StrategicGame) -> dict:
    return {
        "players": list(game.players),
        "strategies": {
            p: list(options)
            for p, options in zip(game.players, game.strategies)
        },
        "payoffs": [
            {
                "profile": list(profile),
                "values": [unparse_rational(v) for v in game.payoffs[profile]],
            }
            for profile in game.profiles()
        ],
    }


def _extensive_doc(ext: ExtensiveGame) -> dict:
    nodes = []
    counters = {"decision": 0, "chance": 0, "terminal": 0}
    prefixes = {"decision": "n", "chance": "c", "terminal": "t"}

    def fresh(kind: str) -> str:
        out = f"{prefixes[kind]}{counters[kind]}"
        counters[kind] += 1
        return out

    def walk(node) -> str:
        if isinstance(node, Terminal):
            node_id = fresh("terminal")
            nodes.append(
                {
                    "id": node_id,
                    "type": "terminal",
                    "payoffs": [unparse_rational(v) for v in node.payoffs],
                }
            )
            return node_id
        if isinstance(node, Decision):
            moves = {action: walk(child) for action, child in node.moves}
            node_id = fresh("decision")
            nodes.append(
                {
                    "id": node_id,
                    "type": "decision",
                    "owner": node.owner,
                    "info_set": node.info_set,
                    "moves": moves,
                }
            )
            return node_id
        assert isinstance(node, Chance)
        moves = {
            label: {"prob": unparse_rational(prob), "child": walk(child)}
            for label, prob, child in node.moves
        }
        node_id = fresh("chance")
        nodes.append({"id": node_id, "type": "chance", "moves": moves})
        return node_id

    root_id = walk(ext.root)
    return {
        "players": list(ext.players),
        "info_sets": [
            {"label": h.label, "owner": h.owner, "actions": list(h.actions)}
            for h in ext.info_sets
        ],
        "nodes": nodes,
        "root": root_id,
    }


def _signaling_doc(sg: SignalingGame) -> dict:
    def rows(table):
        return [
            {
                "signal": s,
                "action": a,
                "type": t,
                "value": unparse_rational(table[(s, a, t)]),
            }
            for s, a, t in product(sg.signals, sg.actions, sg.types)
        ]

    return {
        "types": list(sg.types),
        "prior": {
            t: unparse_rational(p) for t, p in zip(sg.types, sg.prior)
        },
        "signals": list(sg.signals),
        "actions": list(sg.actions),
        "sender_payoffs": rows(sg.sender_payoff),
        "receiver_payoffs": rows(sg.receiver_payoff),
    }


def serialize_game(game, *, name: Optional[str] = None, note: Optional[str] = None) -> dict:
    """One game back to its JSON document form."""
    if isinstance(game, StrategicGame):
        kind, body = "strategic", _strategic_doc(game)
    elif isinstance(game, ExtensiveGame):
        kind, body = "extensive", _extensive_doc(game)
    elif isinstance(game, SignalingGame):
        kind, body = "signaling", _signaling_doc(game)
    else:
        raise TypeError(f"cannot serialize {type(game).__name__}")
    doc = {"schema": SCHEMA_ID, "kind": kind}
    if name is not None:
        doc["name"] = name
    if note is not None:
        doc["note"] = note
    doc.update(body)
    return doc


def fixture_names() -> tuple[str, ...]:
    """The games shipped with the package, by file stem."""
    base = resources.files("pcekit").joinpath("fixtures")
    return tuple(
        sorted(
            entry.name[: -len(".json")]
            for entry in base.iterdir()
            if entry.name.endswith(".json")
        )
    )


def load_fixture(name: str) -> GameDocument:
    """Parse one packaged fixture by stem, e.g. "restaurant"."""
    path = resources.files("pcekit").joinpath(f"fixtures/{name}.json")
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise KeyError(
            f"no fixture named {name!r}; available: {', '.join(fixture_names())}"
        ) from None
    return load_game(text)
