"""Value normalization and the robustness-parameterized utility ``V ** (1 - R)``."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ModelError, ValueRangeError


def normalize(v: float, v_min: float, v_max: float) -> float:
    """Map a raw state value onto [0, 1].

    Values outside ``[v_min, v_max]`` raise instead of being clamped; a
    clamp would hide bounds that were declared too tight.
    """
    if not v_min < v_max:
        raise ModelError(f"vmin ({v_min:g}) must be below vmax ({v_max:g})")
    if v < v_min or v > v_max:
        raise ValueRangeError(f"value {v:g} outside declared bounds [{v_min:g}, {v_max:g}]")
    return (v - v_min) / (v_max - v_min)


def utility(V: float, R: float) -> float:
    """Risk-averse utility of a normalized value; ``R = 0`` is risk neutral."""
    if not 0.0 <= R < 1.0:
        raise ModelError(f"robustness {R:g} outside [0, 1)")
    if not 0.0 <= V <= 1.0:
        raise ValueRangeError(f"utility undefined for normalized value {V!r}")
    return V ** (1.0 - R)


@dataclass(frozen=True)
class UtilityParams:
    robustness: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if not 0.0 <= self.robustness < 1.0:
            raise ModelError(f"robustness {self.robustness:g} outside [0, 1)")
        if not self.v_min < self.v_max:
            raise ModelError(f"vmin ({self.v_min:g}) must be below vmax ({self.v_max:g})")

    def normalize(self, v: float) -> float:
        return normalize(v, self.v_min, self.v_max)

    def utility(self, V: float) -> float:
        return utility(V, self.robustness)

    def __call__(self, v: float) -> float:
        """Utility of a raw (unnormalized) value."""
        return utility(normalize(v, self.v_min, self.v_max), self.robustness)
