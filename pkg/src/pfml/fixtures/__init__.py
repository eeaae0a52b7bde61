"""Shipped fixture models."""

from __future__ import annotations

from importlib import resources

from ..model import Model, loads_model


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.json")


def load(name: str) -> Model:
    return loads_model(path(name).read_text(encoding="utf-8"))


def m1() -> Model:
    """States a, b, c; A = (3/10, 1, 0); a -> {b: 1/2, c: 1/2}, b blocking, c -> c."""
    return load("m1")


def m2() -> Model:
    """Four states, atoms A and B; t is blocking and s loops."""
    return load("m2")


def m3() -> Model:
    """Four pairwise bisimilar states: a 2-cycle, a self-loop and a mixture."""
    return load("m3")


def all_fixtures() -> dict[str, Model]:
    return {"m1": m1(), "m2": m2(), "m3": m3()}
