"""Potential term W of the energy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import UsageError

SMOOTHNESS = ("C1Bounded", "doubleWellC2")


@dataclass(frozen=True)
class Potential:
    family: str = "doubleWell"
    smoothness: str = "doubleWellC2"
    W_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    dW_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    d2W_func: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.family not in ("doubleWell", "zero", "custom"):
            raise UsageError(f"unknown potential family {self.family!r}")
        if self.smoothness not in SMOOTHNESS:
            raise UsageError(f"unknown smoothness class {self.smoothness!r}")
        if self.family == "custom" and (self.W_func is None or self.dW_func is None):
            raise UsageError("custom potentials need W and W' callables")

    def W(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "doubleWell":
            return 0.25 * (u * u - 1.0) ** 2
        if self.family == "zero":
            return np.zeros_like(u)
        return np.asarray(self.W_func(u), dtype=float)

    def dW(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "doubleWell":
            return u * u * u - u
        if self.family == "zero":
            return np.zeros_like(u)
        return np.asarray(self.dW_func(u), dtype=float)

    def d2W(self, u):
        """Second derivative; used only for step-size heuristics."""
        u = np.asarray(u, dtype=float)
        if self.family == "doubleWell":
            return 3.0 * u * u - 1.0
        if self.family == "zero" or self.d2W_func is None:
            return np.zeros_like(u)
        return np.asarray(self.d2W_func(u), dtype=float)


def double_well() -> Potential:
    return Potential("doubleWell", "doubleWellC2")


def zero_potential() -> Potential:
    return Potential("zero", "C1Bounded")


def custom_potential(W, dW, smoothness="C1Bounded", d2W=None) -> Potential:
    return Potential("custom", smoothness, W, dW, d2W)


def make_potential(family: str) -> Potential:
    if family == "doubleWell":
        return double_well()
    if family == "zero":
        return zero_potential()
    raise UsageError(f"cannot build potential family {family!r} by name")


def eval_W(pot: Potential, u):
    v = pot.W(u)
    return float(v) if np.ndim(v) == 0 else v


def eval_dW(pot: Potential, u):
    v = pot.dW(u)
    return float(v) if np.ndim(v) == 0 else v
