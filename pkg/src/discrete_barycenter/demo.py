"""Seasonal population-weighted temperature discomfort across California.

Each month becomes a measure on the city locations whose mass at a city is
proportional to ``population * (average high - comfort)^2``.  The bundled
dataset holds nine cities and eight months.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ValidationError
from .measure import MeasureSet, make_measure

COMFORT_F = 72.0


@dataclass(frozen=True)
class City:
    name: str
    longitude: float
    latitude: float
    population: float


@dataclass(frozen=True)
class DemoSpec:
    """Cities, and per month the average high temperature of every city."""

    cities: tuple
    months: tuple  # (name, tuple of temperatures in city order)
    comfort: float = COMFORT_F

    def __post_init__(self):
        if not self.cities:
            raise ValidationError("demo needs at least one city")
        if any(c.population <= 0 for c in self.cities):
            raise ValidationError("populations must be positive")
        for name, temps in self.months:
            if len(temps) != len(self.cities):
                raise ValidationError(f"month {name!r} has {len(temps)} temperatures for {len(self.cities)} cities")

    @property
    def month_names(self) -> list[str]:
        return [name for name, _ in self.months]

    @property
    def points(self) -> np.ndarray:
        return np.array([[c.longitude, c.latitude] for c in self.cities], dtype=float)


def month_weights(spec: DemoSpec, temps) -> np.ndarray:
    pop = np.array([c.population for c in spec.cities], dtype=float)
    dev = np.asarray(temps, dtype=float) - spec.comfort
    return pop * dev * dev


def generate_demo(spec: DemoSpec) -> MeasureSet:
    """One measure per month on the city coordinates, normalized per month.

    Raises
    ------
    ValidationError
        If every city sits exactly at the comfort temperature in some month.
    """
    pts = spec.points
    measures = []
    for name, temps in spec.months:
        w = month_weights(spec, temps)
        total = w.sum()
        if total <= 0:
            raise ValidationError(f"month {name!r} has no deviation from {spec.comfort}")
        measures.append(make_measure(pts, w / total))
    return MeasureSet(tuple(measures))


def spec_from_dict(doc: dict) -> DemoSpec:
    months = doc["months"]
    cities = tuple(
        City(c["name"], float(c["longitude"]), float(c["latitude"]), float(c["population"])) for c in doc["cities"]
    )
    table = tuple((m, tuple(float(c["highs"][m]) for c in doc["cities"])) for m in months)
    return DemoSpec(cities, table, float(doc.get("comfort_temperature", COMFORT_F)))


def california() -> DemoSpec:
    """The bundled nine-city, eight-month dataset."""
    text = resources.files("discrete_barycenter").joinpath("data/california.json").read_text(encoding="utf-8")
    return spec_from_dict(json.loads(text))


DATASETS = {"california": california}


def load_demo(name: str) -> DemoSpec:
    try:
        return DATASETS[name]()
    except KeyError:
        raise ValidationError(f"unknown demo {name!r}; available: {', '.join(sorted(DATASETS))}") from None
