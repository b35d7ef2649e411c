"""Duty-cycle power model: average draw of components that are on part of the time."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PowerComponent:
    name: str
    active_power_w: float
    duty: float = 1.0
    idle_power_w: float = 0.0

    def __post_init__(self):
        if self.active_power_w < 0 or self.idle_power_w < 0:
            raise ValueError(f"{self.name}: power must be >= 0")
        if not 0.0 <= self.duty <= 1.0:
            raise ValueError(f"{self.name}: duty must lie in [0, 1], got {self.duty}")

    @property
    def average_w(self) -> float:
        return self.active_power_w * self.duty + self.idle_power_w * (1.0 - self.duty)


def duty_cycle_power(components) -> dict:
    """Per-component average watts and their total."""
    per = {}
    for c in components:
        if c.name in per:
            raise ValueError(f"duplicate component name {c.name!r}")
        per[c.name] = c.average_w
    return {"components": per, "total_w": sum(per.values())}


def components_from_config(entries) -> list[PowerComponent]:
    """Build components from ``[{name, active_power_w, duty, idle_power_w?}, ...]``."""
    out = []
    for i, e in enumerate(entries):
        try:
            out.append(PowerComponent(
                name=str(e["name"]),
                active_power_w=float(e["active_power_w"]),
                duty=float(e.get("duty", 1.0)),
                idle_power_w=float(e.get("idle_power_w", 0.0)),
            ))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"power config entry {i} is malformed: {exc!r}") from exc
    return out
