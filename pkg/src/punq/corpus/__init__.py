"""The bundled ``.punq`` programs and the facts the tests need about them."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

from ..syntax import Program, Sup, parse, parse_program


@dataclass(frozen=True)
class Gate:
    """A definition denoting an isometry on ``n`` input and ``k`` output qubits."""

    file: str
    name: str
    n: int
    k: int


GATES: tuple[Gate, ...] = (
    Gate("hadamard", "H", 1, 1),
    Gate("z", "Z", 1, 1),
    Gate("not", "NOT", 1, 1),
    Gate("cnot", "CNOT", 2, 2),
    Gate("h2", "H2", 2, 2),
    Gate("bell", "Bell", 2, 2),
    Gate("alice", "Alice", 2, 2),
    Gate("grover", "Phase", 2, 2),
    Gate("grover", "Oracle", 2, 2),
    Gate("grover", "Grover", 2, 2),
    Gate("phase_superposed", "Phase", 2, 2),
    Gate("bob", "Bob", 3, 3),
    Gate("telep", "telep", 3, 3),
    Gate("walk", "step", 3, 3),
)

# closed programs of ground type: (file, definition)
GROUND: tuple[tuple[str, str], ...] = (
    ("xbasis", "plus"),
    ("xbasis", "minus"),
    ("bell", "main"),
    ("two_hadamards", "main"),
    ("grover", "main"),
)


def names() -> list[str]:
    return sorted(p.name[: -len(".punq")] for p in resources.files(__name__).iterdir() if p.name.endswith(".punq"))


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.punq").read_text(encoding="utf-8")


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.punq")


def load(name: str, extra: str = "") -> Program:
    """Parse a corpus file, optionally followed by more definitions."""
    return parse_program(source(name) + ("\n" + extra if extra else ""))


def church_source(n: int) -> str:
    if n < 0:
        raise ValueError("Church numerals are non-negative")
    body = "x"
    for _ in range(n):
        body = f"f ({body})"
    return f"\\f. \\x. {body}"


def church(n: int) -> Sup:
    return parse(church_source(n))


def applied(name: str, n: int, entry: Optional[str] = None) -> Sup:
    """The entry definition of a corpus file applied to the numeral ``n``."""
    prog = load(name)
    head = entry or prog.main_name
    return load(name, f"def applied__ = {head} ({church_source(n)});").defs["applied__"].body
