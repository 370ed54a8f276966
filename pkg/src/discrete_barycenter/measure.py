"""Finitely supported probability measures on R^d.

A :class:`DiscreteMeasure` is a list of distinct atoms with strictly
positive masses summing to one.  Two arithmetic modes exist:

* float mode: ``points`` and ``masses`` are ``float64`` arrays;
* exact mode: both are ``object`` arrays of :class:`fractions.Fraction`.

Measures are immutable once built; build them with :func:`make_measure` or
load them from JSON with :func:`load_measure`.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from ._numeric import (
    fraction_array,
    format_scalar,
    is_exact,
    merge_labels,
    to_float,
    to_fraction,
)
from .errors import ParseError, ValidationError

MASS_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atoms ``points[k]`` carrying mass ``masses[k]``."""

    points: np.ndarray
    masses: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def exact(self) -> bool:
        return is_exact(self.masses)

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        mode = "exact" if self.exact else "float"
        return f"DiscreteMeasure(size={self.size}, dim={self.dim}, {mode})"

    def to_float(self) -> "DiscreteMeasure":
        if not self.exact:
            return self
        return DiscreteMeasure(
            np.asarray(self.points, dtype=float), np.asarray(self.masses, dtype=float)
        )


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def make_measure(points, masses, *, exact: bool = False, dim: int | None = None) -> DiscreteMeasure:
    """Validate, merge duplicate atoms, drop zero masses and renormalize.

    Raises
    ------
    ValidationError
        On negative or non-finite masses, a mass total off from one by more
        than 1e-9, ragged or mismatched coordinates, or an empty support.
    """
    pts_list = [list(p) for p in points]
    mass_list = list(masses)
    if len(pts_list) != len(mass_list):
        raise ValidationError(f"{len(pts_list)} points but {len(mass_list)} masses")
    if not pts_list:
        raise ValidationError("a measure needs at least one atom")
    if dim is None:
        dim = len(pts_list[0])
    if dim < 1:
        raise ValidationError("dimension must be positive")
    for p in pts_list:
        if len(p) != dim:
            raise ValidationError(f"point {p!r} does not have {dim} coordinates")

    try:
        if exact:
            pts = fraction_array(pts_list).reshape(len(pts_list), dim)
            m = fraction_array(mass_list)
        else:
            pts = np.array([[to_float(c) for c in p] for p in pts_list], dtype=float).reshape(-1, dim)
            m = np.array([to_float(v) for v in mass_list], dtype=float)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValidationError(str(exc)) from exc

    if not exact and not (np.all(np.isfinite(pts)) and np.all(np.isfinite(m))):
        raise ValidationError("coordinates and masses must be finite")
    if any(v < 0 for v in m):
        raise ValidationError("negative mass")
    total = sum(m, Fraction(0)) if exact else math.fsum(m)
    if abs(total - 1) > MASS_SUM_TOL:
        raise ValidationError(f"masses sum to {float(total)!r}, not 1")

    keep = np.array([v > 0 for v in m], dtype=bool)
    pts, m = pts[keep], m[keep]
    labels = merge_labels(pts)
    n_groups = int(labels.max()) + 1
    first = np.full(n_groups, -1, dtype=np.int64)
    for r, g in enumerate(labels):
        if first[g] < 0:
            first[g] = r
    pts = pts[first]
    if exact:
        merged = np.array([Fraction(0)] * n_groups, dtype=object)
        for r, g in enumerate(labels):
            merged[g] += m[r]
        merged = merged / sum(merged, Fraction(0))
    else:
        merged = np.zeros(n_groups)
        np.add.at(merged, labels, m)
        merged = _normalize_float(merged)
    return DiscreteMeasure(_freeze(pts), _freeze(merged))


def _normalize_float(m: np.ndarray) -> np.ndarray:
    m = m / math.fsum(m)
    # absorb rounding into the largest atom so the stored masses sum to 1
    big = int(np.argmax(m))
    m[big] = 1.0 - math.fsum(np.delete(m, big))
    return m


def dirac(point: Sequence, *, exact: bool = False) -> DiscreteMeasure:
    return make_measure([list(point)], [1], exact=exact)


def second_moment(m: DiscreteMeasure):
    """E|X|^2 = sum_k d_k |x_k|^2 (exact in exact mode)."""
    sq = (m.points * m.points).sum(axis=1)
    if m.exact:
        return sum((w * s for w, s in zip(m.masses, sq)), Fraction(0))
    return math.fsum(m.masses * sq)


@dataclass(frozen=True, eq=False)
class MeasureSet:
    """An ordered collection P_1, ..., P_N sharing one ambient dimension."""

    measures: tuple

    def __post_init__(self):
        if len(self.measures) < 1:
            raise ValidationError("a measure set needs at least one measure")
        dims = {m.dim for m in self.measures}
        if len(dims) != 1:
            raise ValidationError(f"measures live in different dimensions {sorted(dims)}")
        modes = {m.exact for m in self.measures}
        if len(modes) != 1:
            raise ValidationError("cannot mix exact and float measures")

    @property
    def n(self) -> int:
        return len(self.measures)

    @property
    def dim(self) -> int:
        return self.measures[0].dim

    @property
    def exact(self) -> bool:
        return self.measures[0].exact

    @property
    def sizes(self) -> list[int]:
        return [m.size for m in self.measures]

    def __len__(self) -> int:
        return len(self.measures)

    def __iter__(self):
        return iter(self.measures)

    def __getitem__(self, i) -> DiscreteMeasure:
        return self.measures[i]

    def to_float(self) -> "MeasureSet":
        return MeasureSet(tuple(m.to_float() for m in self.measures))

    def translated(self, shift) -> "MeasureSet":
        shift = np.asarray(shift, dtype=object if self.exact else float)
        return MeasureSet(
            tuple(DiscreteMeasure(_freeze(m.points + shift), m.masses) for m in self.measures)
        )


def measure_set(measures) -> MeasureSet:
    return MeasureSet(tuple(measures))


# --------------------------------------------------------------------------
# JSON


def _read_document(source) -> Any:
    if isinstance(source, dict):
        return source
    if isinstance(source, (bytes, bytearray)):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    else:
        raise ParseError(f"unsupported source type {type(source).__name__}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def measure_from_dict(doc: dict, *, exact: bool = False) -> DiscreteMeasure:
    if not isinstance(doc, dict) or "points" not in doc:
        raise ParseError("measure document needs a 'points' list")
    points = doc["points"]
    masses = doc.get("masses_exact") if exact and "masses_exact" in doc else doc.get("masses")
    if not isinstance(points, list) or not isinstance(masses, list):
        raise ParseError("'points' and 'masses' must be lists")
    if not all(isinstance(p, list) for p in points):
        raise ParseError("each point must be a list of coordinates")
    dim = doc.get("dim")
    if dim is not None and (not isinstance(dim, int) or isinstance(dim, bool)):
        raise ParseError("'dim' must be an integer")
    return make_measure(points, masses, exact=exact, dim=dim)


def load_measure(source, format: str = "json", *, exact: bool = False) -> DiscreteMeasure:
    """Parse one measure document ``{"dim", "points", "masses"}``."""
    if format != "json":
        raise ParseError(f"unsupported format {format!r}")
    return measure_from_dict(_read_document(source), exact=exact)


def load_measure_set(source, *, exact: bool = False) -> MeasureSet:
    """Parse ``{"measures": [<measure>, ...]}``."""
    doc = _read_document(source)
    if not isinstance(doc, dict) or not isinstance(doc.get("measures"), list):
        raise ParseError("measure-set document needs a 'measures' list")
    return MeasureSet(tuple(measure_from_dict(m, exact=exact) for m in doc["measures"]))


def _point_json(p) -> list:
    out = []
    for c in p:
        if isinstance(c, Fraction):
            # dyadic rationals round-trip through a float literal
            f = float(c)
            out.append(f if Fraction(f) == c else str(c))
        else:
            out.append(float(c))
    return out


def measure_to_dict(m: DiscreteMeasure) -> dict:
    doc = {
        "dim": m.dim,
        "points": [_point_json(p) for p in m.points],
        "masses": [float(v) for v in m.masses],
    }
    if m.exact:
        doc["masses_exact"] = [format_scalar(v) for v in m.masses]
    return doc


def measure_set_to_dict(ms: MeasureSet) -> dict:
    return {"measures": [measure_to_dict(m) for m in ms]}


def dump_measure(m: DiscreteMeasure) -> str:
    return json.dumps(measure_to_dict(m))


def dump_measure_set(ms: MeasureSet) -> str:
    return json.dumps(measure_set_to_dict(ms))
