"""Objective container shared by the benchmark problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..acquisition import BoxDomain


@dataclass(frozen=True)
class ObjectiveSpec:
    """A black-box ``f`` on ``m``-element sets in the box ``domain``."""

    name: str
    domain: BoxDomain
    evaluate: Callable[[np.ndarray], float]
    known_optimum: float | None = None

    @property
    def m(self) -> int:
        return self.domain.m

    @property
    def d(self) -> int:
        return self.domain.d

    def __call__(self, X) -> float:
        return float(self.evaluate(np.asarray(X, dtype=float)))
