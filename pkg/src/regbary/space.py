"""Finite metric measure spaces and probability measures on them.

A :class:`MetricMeasureSpace` holds a dense distance table and a reference
probability measure ``m``.  Builders produce the circle, the lat-long
sphere grid, the unit interval and shortest-path metrics of weighted
graphs.  Everything here is immutable once constructed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import floyd_warshall

from .errors import InvalidArgumentError, NoFiniteMetricError, ValidationError

DEFAULT_TOL_MASS = 1e-12
DEFAULT_REL_TOL_METRIC = 1e-9


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class Measure:
    """Probability weights over the points of a finite space.

    Parameters
    ----------
    weights : array-like of shape (n,)
        Nonnegative masses summing to one within ``tol_mass``.
    tol_mass : float
        Allowed deviation of the total mass from one.
    """

    __slots__ = ("weights",)

    def __init__(self, weights, tol_mass=DEFAULT_TOL_MASS):
        w = _frozen(weights)
        if w.ndim != 1 or w.size == 0:
            raise InvalidArgumentError("measure weights must be a nonempty 1-D array")
        if not np.all(np.isfinite(w)):
            raise InvalidArgumentError("measure weights must be finite")
        if np.any(w < 0):
            i = int(np.argmin(w))
            raise InvalidArgumentError(f"negative mass {w[i]!r} at index {i}")
        total = math.fsum(w)
        if abs(total - 1.0) > tol_mass:
            raise InvalidArgumentError(
                f"measure mass {total!r} differs from 1 by more than {tol_mass}"
            )
        object.__setattr__(self, "weights", w)

    def __setattr__(self, name, value):
        raise AttributeError("Measure is immutable")

    @classmethod
    def dirac(cls, n, i):
        w = np.zeros(n)
        w[i] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, n, indices=None):
        """Uniform measure on ``indices`` (all points when omitted)."""
        w = np.zeros(n)
        idx = range(n) if indices is None else list(indices)
        if len(idx) == 0:
            raise InvalidArgumentError("uniform measure needs at least one atom")
        w[list(idx)] = 1.0 / len(idx)
        return cls(w)

    @classmethod
    def from_atoms(cls, n, atoms, tol_mass=DEFAULT_TOL_MASS):
        """Build from ``{index: mass}`` or an iterable of ``(index, mass)``."""
        items = atoms.items() if isinstance(atoms, dict) else atoms
        w = np.zeros(n)
        for i, mass in items:
            if not 0 <= int(i) < n:
                raise InvalidArgumentError(f"atom index {i} out of range for n={n}")
            w[int(i)] += float(mass)
        return cls(w, tol_mass=tol_mass)

    @property
    def n(self):
        return self.weights.size

    def support(self, tau=0.0):
        """Indices whose mass strictly exceeds ``tau``."""
        return np.flatnonzero(self.weights > tau)

    def mix(self, other, t):
        """The measure ``(1 - t) * self + t * other``."""
        return Measure((1.0 - t) * self.weights + t * other.weights)

    def to_dict(self, sparse=False):
        if sparse:
            return {
                "atoms": [
                    {"index": int(i), "mass": float(self.weights[i])}
                    for i in self.support()
                ]
            }
        return {"weights": [float(x) for x in self.weights]}

    def __repr__(self):
        atoms = ", ".join(f"{i}: {self.weights[i]:.6g}" for i in self.support()[:8])
        more = ", ..." if self.support().size > 8 else ""
        return f"Measure(n={self.n}, {{{atoms}{more}}})"


class MetricMeasureSpace:
    """A finite metric space ``(X, d)`` with reference probability ``m``.

    Only shapes and finiteness are checked at construction; the metric and
    normalization invariants are checked by :func:`validate` so that
    deliberately broken spaces can still be represented and reported on.
    File readers reject invalid spaces.
    """

    def __init__(self, dist, m=None, labels=None, coords=None):
        d = _frozen(dist)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
            raise InvalidArgumentError("dist must be a nonempty square table")
        if not np.all(np.isfinite(d)):
            raise NoFiniteMetricError("dist has non-finite entries")
        n = d.shape[0]
        mm = _frozen(np.full(n, 1.0 / n) if m is None else m)
        if mm.shape != (n,):
            raise InvalidArgumentError(f"m must have length {n}")
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != n:
                raise InvalidArgumentError(f"labels must have length {n}")
        if coords is not None:
            coords = _frozen(coords)
            if coords.ndim != 2 or coords.shape[0] != n:
                raise InvalidArgumentError("coords must be an (n, dim) table")
        self.dist = d
        self.m = mm
        self.labels = labels
        self.coords = coords

    @property
    def n(self):
        return self.dist.shape[0]

    @property
    def diameter(self):
        return float(self.dist.max())

    @property
    def tol_metric(self):
        return DEFAULT_REL_TOL_METRIC * self.diameter

    @property
    def tol_b(self):
        """Default barycenter-set tolerance, ``1e-9 * diameter**2``."""
        return 1e-9 * self.diameter**2

    @property
    def tol_tie(self):
        """Default nearest-point tie tolerance, ``1e-9 * diameter``."""
        return 1e-9 * self.diameter

    @property
    def reference(self):
        return Measure(self.m)

    def index(self, label):
        if self.labels is None:
            raise KeyError(label)
        return self.labels.index(label)

    def to_dict(self):
        out = {"n": self.n}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        if self.coords is not None:
            out["coords"] = self.coords.tolist()
        out["dist"] = self.dist.tolist()
        out["m"] = self.m.tolist()
        return out

    def __repr__(self):
        return f"MetricMeasureSpace(n={self.n}, diameter={self.diameter:.6g})"


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    indices: tuple
    magnitude: float

    def __str__(self):
        return f"{self.kind} at {self.indices}: {self.magnitude:.3e}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def kinds(self):
        return sorted({v.kind for v in self.violations})

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


def validate(space, tol_metric=None, tol_mass=DEFAULT_TOL_MASS):
    """Check every metric and normalization invariant of ``space``.

    Returns a :class:`ValidationReport`; an empty report means the space is
    valid.  Triangle-inequality failures are reported once per pair
    ``(i, j)`` with the worst intermediate ``k``.
    """
    if tol_metric is None:
        tol_metric = space.tol_metric
    d = space.dist
    n = space.n
    out = []

    for i in np.flatnonzero(np.diag(d) != 0):
        out.append(Violation("nonzero-diagonal", (int(i),), float(abs(d[i, i]))))
    for i, j in zip(*np.nonzero(d < 0)):
        out.append(Violation("negative-distance", (int(i), int(j)), float(-d[i, j])))
    for i, j in zip(*np.nonzero(np.triu(d != d.T))):
        out.append(Violation("asymmetry", (int(i), int(j)), float(abs(d[i, j] - d[j, i]))))

    # excess[i, j] = max_k d[i, j] - d[i, k] - d[k, j]
    worst = np.full((n, n), -np.inf)
    arg = np.zeros((n, n), dtype=int)
    for k in range(n):
        excess = d - d[:, k : k + 1] - d[k : k + 1, :]
        better = excess > worst
        worst[better] = excess[better]
        arg[better] = k
    for i, j in zip(*np.nonzero(worst > tol_metric)):
        out.append(
            Violation("triangle", (int(i), int(arg[i, j]), int(j)), float(worst[i, j]))
        )

    m = space.m
    for i in np.flatnonzero(m < 0):
        out.append(Violation("negative-mass", (int(i),), float(-m[i])))
    total = math.fsum(m)
    if abs(total - 1.0) > tol_mass:
        out.append(Violation("normalization", (), abs(total - 1.0)))
    return ValidationReport(out)


def check_space(space, tol_metric=None, tol_mass=DEFAULT_TOL_MASS):
    """Raise :class:`ValidationError` unless ``space`` is valid."""
    report = validate(space, tol_metric=tol_metric, tol_mass=tol_mass)
    if not report.ok:
        raise ValidationError(f"invalid space:\n{report}", report)
    return space


# -- builders -----------------------------------------------------------------


def build_circle(M):
    """``M`` equally spaced points on the unit circle with arc-length metric."""
    if not isinstance(M, (int, np.integer)) or M < 3:
        raise InvalidArgumentError(f"circle needs M >= 3, got {M!r}")
    step = 2.0 * math.pi / M
    k = np.arange(M)
    gap = np.abs(k[:, None] - k[None, :])
    dist = step * np.minimum(gap, M - gap)
    angles = step * k
    return MetricMeasureSpace(
        dist,
        np.full(M, 1.0 / M),
        labels=[f"theta={a:.12g}" for a in angles],
        coords=np.column_stack([np.cos(angles), np.sin(angles)]),
    )


def build_sphere_grid(L, K):
    """Lat-long grid on the unit sphere with both poles as explicit points.

    Points are ordered north pole, then ``L`` rings from north to south
    with ``K`` longitudes each, then the south pole.  Ring ``r`` (1-based)
    sits at polar angle ``r*pi/(L+1)``; for odd ``L`` the middle ring is the
    exact equator.  Each point carries the area of its cell (polar caps for
    the poles, bands split evenly in longitude), normalized to total one.
    The southern hemisphere is the exact mirror image of the northern one.
    """
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise InvalidArgumentError(f"sphere grid needs L >= 1, got {L!r}")
    if not isinstance(K, (int, np.integer)) or K < 3:
        raise InvalidArgumentError(f"sphere grid needs K >= 3, got {K!r}")

    h = math.pi / (2 * (L + 1))
    cos_t = np.empty(L + 2)
    sin_t = np.empty(L + 2)
    area = np.empty(L + 2)  # per point, indexed by ring 0..L+1 (poles at ends)
    cos_t[0], sin_t[0], area[0] = 1.0, 0.0, 2 * math.pi * (1 - math.cos(h))
    for r in range(1, (L + 1) // 2 + 1):
        theta = r * math.pi / (L + 1)
        cos_t[r], sin_t[r] = math.cos(theta), math.sin(theta)
        area[r] = 2 * math.pi * (math.cos(theta - h) - math.cos(theta + h)) / K
    if L % 2 == 1:
        eq = (L + 1) // 2
        cos_t[eq], sin_t[eq] = 0.0, 1.0
    for r in range((L + 1) // 2 + 1, L + 2):
        cos_t[r], sin_t[r], area[r] = -cos_t[L + 1 - r], sin_t[L + 1 - r], area[L + 1 - r]

    ring = [0] + [r for r in range(1, L + 1) for _ in range(K)] + [L + 1]
    lon = [0] + [k for _ in range(L) for k in range(K)] + [0]
    ring = np.array(ring)
    lon = np.array(lon)
    n = ring.size

    dk = np.abs(lon[:, None] - lon[None, :])
    dk = np.minimum(dk, K - dk)
    cos_dphi = np.cos(2 * math.pi * np.arange(K) / K)[dk]
    c, s = cos_t[ring], sin_t[ring]
    inner = c[:, None] * c[None, :] + (s[:, None] * s[None, :]) * cos_dphi
    dist = np.arccos(np.clip(inner, -1.0, 1.0))
    np.fill_diagonal(dist, 0.0)

    w = area[ring]
    m = w / math.fsum(w)

    phi = 2 * math.pi * lon / K
    coords = np.column_stack([s * np.cos(phi), s * np.sin(phi), c])
    labels = ["north"] + [f"ring{r}-lon{k}" for r, k in zip(ring[1:-1], lon[1:-1])] + ["south"]
    return MetricMeasureSpace(dist, m, labels=labels, coords=coords)


def sphere_ring(L, K, r):
    """Indices of ring ``r`` (1-based, north to south) in :func:`build_sphere_grid`."""
    if not 1 <= r <= L:
        raise InvalidArgumentError(f"ring {r} out of range 1..{L}")
    start = 1 + (r - 1) * K
    return list(range(start, start + K))


def build_interval(M):
    """``M`` equally spaced points on ``[0, 1]`` with the absolute-value metric."""
    if not isinstance(M, (int, np.integer)) or M < 2:
        raise InvalidArgumentError(f"interval needs M >= 2, got {M!r}")
    k = np.arange(M)
    x = k / (M - 1)
    return MetricMeasureSpace(
        np.abs(k[:, None] - k[None, :]) / (M - 1),
        np.full(M, 1.0 / M),
        labels=[f"x={v:.12g}" for v in x],
        coords=x[:, None],
    )


def build_graph(edges, n, m=None):
    """Shortest-path metric of an undirected weighted graph.

    Parameters
    ----------
    edges : iterable of (i, j, length)
        Parallel edges are allowed; the shortest one counts.
    n : int
        Number of vertices.
    m : array-like, optional
        Reference weights; uniform when omitted.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError(f"graph needs n >= 1, got {n!r}")
    adj = np.full((n, n), np.inf)
    for e in edges:
        i, j, length = int(e[0]), int(e[1]), float(e[2])
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidArgumentError(f"edge ({i}, {j}) out of range for n={n}")
        if not length > 0 or not math.isfinite(length):
            raise InvalidArgumentError(f"edge ({i}, {j}) has nonpositive length {length!r}")
        if i == j:
            continue
        if length < adj[i, j]:
            adj[i, j] = adj[j, i] = length
    np.fill_diagonal(adj, 0.0)
    dist = floyd_warshall(adj, directed=False)
    if not np.all(np.isfinite(dist)):
        i, j = np.argwhere(~np.isfinite(dist))[0]
        raise NoFiniteMetricError(f"graph is disconnected: no path from {i} to {j}")
    if m is not None:
        Measure(m)
    return MetricMeasureSpace(dist, m)


# -- serialization ------------------------------------------------------------


def space_from_dict(data):
    try:
        n = int(data["n"])
        dist = np.asarray(data["dist"], dtype=float)
        m = np.asarray(data["m"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"malformed space: {exc}") from exc
    if dist.shape != (n, n):
        raise InvalidArgumentError(f"dist shape {dist.shape} does not match n={n}")
    return MetricMeasureSpace(dist, m, labels=data.get("labels"), coords=data.get("coords"))


def write_space(space, path):
    Path(path).write_text(json.dumps(space.to_dict()), encoding="utf-8")


def read_space(path, tol_metric=None, tol_mass=DEFAULT_TOL_MASS, check=True):
    """Load a space file, rejecting it unless it validates (when ``check``)."""
    with open(path, encoding="utf-8") as fh:
        space = space_from_dict(json.load(fh))
    if check:
        check_space(space, tol_metric=tol_metric, tol_mass=tol_mass)
    return space


def measure_from_dict(data, n, tol_mass=DEFAULT_TOL_MASS):
    if "weights" in data:
        w = np.asarray(data["weights"], dtype=float)
        if w.shape != (n,):
            raise InvalidArgumentError(f"measure has {w.size} weights, space has {n} points")
        return Measure(w, tol_mass=tol_mass)
    if "atoms" in data:
        try:
            atoms = [(a["index"], a["mass"]) for a in data["atoms"]]
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"malformed atom list: {exc}") from exc
        return Measure.from_atoms(n, atoms, tol_mass=tol_mass)
    raise InvalidArgumentError("measure needs 'weights' or 'atoms'")


def write_measure(measure, path, sparse=False):
    Path(path).write_text(json.dumps(measure.to_dict(sparse=sparse)), encoding="utf-8")


def read_measure(path, n, tol_mass=DEFAULT_TOL_MASS):
    with open(path, encoding="utf-8") as fh:
        return measure_from_dict(json.load(fh), n, tol_mass=tol_mass)
