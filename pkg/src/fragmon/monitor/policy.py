"""Start/stop recording policies, consulted at event boundaries."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

WINDOWED = "windowed"
BERNOULLI = "bernoulli-toggle"
ALWAYS_ON = "always-on"
ALWAYS_OFF = "always-off"
KINDS = (WINDOWED, BERNOULLI, ALWAYS_ON, ALWAYS_OFF)


@dataclass(frozen=True)
class Length:
    """Window length distribution: ``fixed`` n, or ``geometric`` with the given mean (support 1, 2, ...)."""

    dist: str = "geometric"
    value: float = 20.0

    def __post_init__(self):
        if self.dist not in ("fixed", "geometric"):
            raise ValueError(f"unknown length distribution {self.dist!r}")
        if self.value < 1 or (self.dist == "fixed" and int(self.value) != self.value):
            raise ValueError("window lengths must be positive integers / means >= 1")

    def draw(self, rng: random.Random) -> int:
        if self.dist == "fixed":
            return int(self.value)
        p = 1.0 / self.value
        if p >= 1.0:
            return 1
        u = 1.0 - rng.random()  # (0, 1]
        return 1 + int(math.log(u) / math.log(1.0 - p))


@dataclass(frozen=True)
class RecordingPolicy:
    kind: str = WINDOWED
    on_length: Length = field(default_factory=lambda: Length("geometric", 20.0))
    off_length: Length = field(default_factory=lambda: Length("geometric", 80.0))
    toggle_probability: float = 0.05
    budget: float = 0.25
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not (0.0 < self.budget <= 1.0):
            raise ValueError("budget must lie in (0, 1]")
        if not (0.0 < self.toggle_probability <= 1.0):
            raise ValueError("toggle probability must lie in (0, 1]")

    @classmethod
    def always_on(cls) -> "RecordingPolicy":
        return cls(kind=ALWAYS_ON, budget=1.0)

    @classmethod
    def always_off(cls) -> "RecordingPolicy":
        return cls(kind=ALWAYS_OFF)

    @classmethod
    def windowed(cls, on: int, off: int, budget: float = 1.0, rng_seed: int = 0) -> "RecordingPolicy":
        return cls(WINDOWED, Length("fixed", on), Length("fixed", off), budget=budget, rng_seed=rng_seed)

    def start(self, run_seed: int = 0) -> "PolicyRun":
        return PolicyRun(self, random.Random(self.rng_seed * 1_000_003 + run_seed))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "on_length": {"dist": self.on_length.dist, "value": self.on_length.value},
            "off_length": {"dist": self.off_length.dist, "value": self.off_length.value},
            "toggle_probability": self.toggle_probability,
            "budget": self.budget,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RecordingPolicy":
        d = dict(d)
        for key in ("on_length", "off_length"):
            if isinstance(d.get(key), dict):
                d[key] = Length(**d[key])
        return cls(**d)


class PolicyRun:
    """Per-run policy state. ``decide`` is called once per event, in order."""

    def __init__(self, policy: RecordingPolicy, rng: random.Random):
        self.policy = policy
        self.rng = rng
        self.on: Optional[bool] = None
        self.remaining = 0

    def _may_start(self, index: int, recorded: int) -> bool:
        return recorded <= self.policy.budget * index

    def decide(self, index: int, recorded: int) -> bool:
        """Whether the event at ``index`` is recorded, given ``recorded`` events so far."""
        p = self.policy
        if p.kind == ALWAYS_ON:
            return True
        if p.kind == ALWAYS_OFF:
            return False
        if p.kind == BERNOULLI:
            if self.on is None:
                self.on = True
            elif self.rng.random() < p.toggle_probability:
                self.on = (not self.on) and self._may_start(index, recorded)
            return self.on
        if self.on is None:
            self.on = True
            self.remaining = p.on_length.draw(self.rng)
        elif self.remaining <= 0:
            if self.on:
                self.on = False
                self.remaining = p.off_length.draw(self.rng)
            elif self._may_start(index, recorded):
                self.on = True
                self.remaining = p.on_length.draw(self.rng)
            else:
                self.remaining = 1
        self.remaining -= 1
        return self.on
