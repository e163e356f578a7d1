"""
strategies.py
Shift strategies for sequential HG measurements. All classes implement
`shifts` (the candidate shifts to prepare models for) and `choose` (which of
them to use for the next shot, given the current posterior).
"""

from abc import ABC, abstractmethod

import numpy as np

from .hgmetrology import ModelBank, SourceGrid, choose_adaptive_shift, shift_grid
from .strategy_registry import register_strategy


class ShiftStrategy(ABC):
    """
    Abstract base class for measurement-shift strategies.
    """

    label: str

    @abstractmethod
    def shifts(self) -> np.ndarray:
        """Candidate shifts, in the order `choose` indexes them."""

    @abstractmethod
    def choose(self, posterior: SourceGrid, bank: ModelBank) -> int:
        """Index into `bank` of the shift for the next measurement."""


@register_strategy
class ConstantShiftStrategy(ShiftStrategy):
    """Measures every shot at the same shift."""

    def __init__(self, theta: float, label: str | None = None):
        self.theta = float(theta)
        self.label = label if label is not None else f"theta={self.theta:g}"

    def shifts(self) -> np.ndarray:
        return np.array([self.theta])

    def choose(self, posterior: SourceGrid, bank: ModelBank) -> int:
        return 0


@register_strategy
class AdaptiveShiftStrategy(ShiftStrategy):
    """Greedy: before each shot pick the shift in [-bound, bound] with least ensemble coherence."""

    def __init__(self, bound: float = 3.0, step: float = 0.1, label: str = "adaptive"):
        if bound <= 0 or step <= 0:
            raise ValueError(f"bound and step must be positive, got {bound} and {step}")
        self.bound = float(bound)
        self.step = float(step)
        self.label = label

    def shifts(self) -> np.ndarray:
        return shift_grid(-self.bound, self.bound, self.step)

    def choose(self, posterior: SourceGrid, bank: ModelBank) -> int:
        return choose_adaptive_shift(posterior, bank)
