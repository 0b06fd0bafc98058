"""Multi-indices, hypercubes, domains and the lattice grids they induce.

A grid for the refinement ``n`` is a lexicographically sorted set of lattice
points ``p = i / n`` with ``i`` an integer vector.  Grids are stored through
their integer indices ``i`` so that every membership or containment question
is decided in exact integer arithmetic.

For an open set ``omega`` the grid keeps the points whose open box
``{x : max_k n_k |x_k - p_k| < 1}`` lies inside ``omega``.  Built-in domains
answer this with corner inequalities (non-strict on the closure), which is
exact for the open-box / open-set inclusion of every registered shape.
"""
from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, SizeLimitError

MultiIndex = tuple[int, ...]

DEFAULT_GRID_CAP = 20_000_000
MC_SAMPLES = 1_000_000
MC_SEED = 20240531
_CHUNK = 2_000_000


def as_multi_index(n: int | Sequence[int]) -> MultiIndex:
    """Validate and normalise a multi-index (a tuple of positive ints)."""
    if isinstance(n, (int, np.integer)):
        n = (int(n),)
    out = tuple(int(v) for v in n)
    if len(out) < 1:
        raise ConfigError("multi-index must have at least one entry")
    if any(v < 1 for v in out):
        raise ConfigError(f"multi-index entries must be >= 1, got {out}")
    return out


def n_total(n: int | Sequence[int]) -> int:
    """N(n): the product of the entries of ``n``."""
    return math.prod(as_multi_index(n))


def lex_le(a: Sequence[int], b: Sequence[int]) -> bool:
    # first index where they differ decides; tuples already compare this way
    return tuple(a) <= tuple(b)


@dataclass(frozen=True)
class Hypercube:
    """Q_{y,l} = y + l * (0, 1]^d with integer anchor ``y`` and side ``l``."""

    anchor: tuple[int, ...]
    side: int

    def __post_init__(self):
        object.__setattr__(self, "anchor", tuple(int(v) for v in self.anchor))
        if self.side < 1:
            raise ConfigError(f"hypercube side must be positive, got {self.side}")

    @property
    def d(self) -> int:
        return len(self.anchor)

    def contains(self, other: "Hypercube") -> bool:
        return all(
            ya <= yb and yb + other.side <= ya + self.side
            for ya, yb in zip(self.anchor, other.anchor)
        )

    def phi(self, x):
        """Affine map from the reference cube onto this one."""
        return np.asarray(self.anchor) + self.side * np.asarray(x)

    def phi_inv(self, z):
        return (np.asarray(z) - np.asarray(self.anchor)) / self.side


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """An open set of finite measure together with exact grid predicates.

    ``indicator(points)`` decides point membership for an ``(k, d)`` float
    array.  ``lattice_inside(index, n)`` decides, exactly, whether the open
    box of half-widths ``1/n`` around ``index / n`` lies inside the domain.
    ``index_bounds(n)`` returns a finite inclusive candidate range of lattice
    indices per axis that contains every admissible point.
    """

    name: str
    d: int
    indicator: Callable[[np.ndarray], np.ndarray]
    lattice_inside: Callable[[np.ndarray, MultiIndex], np.ndarray]
    index_bounds: Callable[[MultiIndex], list[tuple[int, int]]]
    measure: float
    measure_kind: str = "analytic"
    measure_stderr: float = 0.0
    mc_samples: int = 0
    mc_seed: int | None = None
    bounded: bool = True
    bounding_box: Hypercube | None = None
    extent: tuple[tuple[float, float], ...] | None = None
    truncated_measure: Callable[[float], float] | None = None
    hypercube: Hypercube | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.measure > 0 and math.isfinite(self.measure)):
            raise ConfigError(f"domain {self.name!r} needs finite positive measure")
        if self.bounded and self.bounding_box is None:
            raise ConfigError(f"bounded domain {self.name!r} needs a bounding box")

    def __repr__(self):
        return f"DomainSpec({self.name!r}, d={self.d}, measure={self.measure:.6g})"

    def box_inside(self, center, half) -> np.ndarray:
        """Float version of the box test (open box of half-widths ``half``).

        Routed through the exact lattice predicate whenever ``center`` sits
        on the lattice ``Z^d / (1/half)``; otherwise uses the float indicator
        on the box corners, which is adequate for the convex and
        corner-monotone shapes registered here.
        """
        center = np.atleast_2d(np.asarray(center, dtype=float))
        half = np.broadcast_to(np.asarray(half, dtype=float), (self.d,))
        inv = 1.0 / half
        n = np.rint(inv)
        idx = center * inv
        if np.allclose(n, inv, rtol=0, atol=1e-12) and np.allclose(
            idx, np.rint(idx), rtol=0, atol=1e-9
        ):
            nn = tuple(int(v) for v in n)
            return self.lattice_inside(np.rint(idx).astype(np.int64), nn)
        # shrink slightly so that boundary-touching corners count as inside
        ok = np.ones(len(center), dtype=bool)
        for signs in np.ndindex(*(2,) * self.d):
            s = 2 * np.asarray(signs) - 1
            ok &= self.indicator(center + s * half * (1 - 1e-12))
        return ok

    def measure_metadata(self) -> dict:
        meta = {"kind": self.measure_kind, "value": self.measure}
        if self.measure_kind == "monte-carlo":
            meta.update(stderr=self.measure_stderr, samples=self.mc_samples, seed=self.mc_seed)
        return meta


@dataclass(frozen=True, eq=False)
class Grid:
    """Lexicographically sorted lattice points of a domain for one ``n``."""

    n: MultiIndex
    domain: DomainSpec
    index: np.ndarray

    def __post_init__(self):
        self.index.setflags(write=False)

    @property
    def dim(self) -> int:
        return int(self.index.shape[0])

    @property
    def d(self) -> int:
        return len(self.n)

    @property
    def points(self) -> np.ndarray:
        return self.index / np.asarray(self.n, dtype=float)

    @functools.cached_property
    def _keys(self):
        if self.dim == 0:
            return np.zeros(self.d, dtype=np.int64), np.ones(self.d, dtype=np.int64), np.empty(0, np.int64)
        lo = self.index.min(axis=0)
        shape = self.index.max(axis=0) - lo + 1
        # C-order ravel keeps lexicographic order, so the keys are sorted
        keys = np.ravel_multi_index(tuple((self.index - lo).T), tuple(shape))
        return lo, shape, keys

    def locate(self, index) -> np.ndarray:
        """Positions of lattice indices in this grid, ``-1`` where absent."""
        index = np.atleast_2d(np.asarray(index, dtype=np.int64))
        lo, shape, keys = self._keys
        rel = index - lo
        inside = np.all((rel >= 0) & (rel < shape), axis=1)
        out = np.full(len(index), -1, dtype=np.int64)
        if not inside.any() or len(keys) == 0:
            return out
        q = np.ravel_multi_index(tuple(rel[inside].T), tuple(shape))
        pos = np.searchsorted(keys, q)
        pos_c = np.minimum(pos, len(keys) - 1)
        hit = keys[pos_c] == q
        sub = np.where(hit, pos_c, -1)
        out[inside] = sub
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{k + 1}" for k in range(self.d)])
            for row in self.points:
                w.writerow([repr(float(v)) for v in row])

    def __repr__(self):
        return f"Grid(n={self.n}, domain={self.domain.name!r}, dim={self.dim})"


# ---------------------------------------------------------------------------
# grid construction


def _mesh(ranges: Sequence[tuple[int, int]]) -> np.ndarray:
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in ranges]
    if any(len(a) == 0 for a in axes):
        return np.empty((0, len(ranges)), dtype=np.int64)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _scan(n: MultiIndex, domain: DomainSpec, count_only: bool):
    ranges = domain.index_bounds(n)
    if len(ranges) != len(n):
        raise ConfigError(f"domain {domain.name!r} is {domain.d}-dimensional, n={n}")
    (lo0, hi0), rest = ranges[0], ranges[1:]
    per_slab = math.prod(max(0, hi - lo + 1) for lo, hi in rest)
    step = max(1, _CHUNK // max(per_slab, 1))
    total, parts = 0, []
    for start in range(lo0, hi0 + 1, step):
        block = _mesh([(start, min(hi0, start + step - 1)), *rest])
        if block.size == 0:
            continue
        mask = domain.lattice_inside(block, n)
        if count_only:
            total += int(np.count_nonzero(mask))
        else:
            parts.append(block[mask])
    if count_only:
        return total
    if not parts:
        return np.empty((0, len(n)), dtype=np.int64)
    return np.concatenate(parts, axis=0)


def hypercube_grid(n, cube: Hypercube, cap: int = DEFAULT_GRID_CAP) -> Grid:
    """Theta_{n,y,l} = {y + i/n : 1 <= i <= l*n}, lex-sorted."""
    n = as_multi_index(n)
    if len(n) != cube.d:
        raise ConfigError(f"n={n} does not match hypercube dimension {cube.d}")
    size = cube.side ** cube.d * n_total(n)
    if size > cap:
        raise SizeLimitError(f"hypercube grid of size {size} exceeds cap {cap}")
    ranges = [(y * nk + 1, y * nk + cube.side * nk) for y, nk in zip(cube.anchor, n)]
    return Grid(n, hypercube_domain(cube), _mesh(ranges))


def enclosing_hypercube(grid: Grid) -> Hypercube:
    """Smallest anchored hypercube whose lattice grid contains every grid point."""
    if grid.dim == 0:
        return Hypercube((0,) * grid.d, 1)
    nn = np.asarray(grid.n)
    # y + 1/n <= p  and  p <= y + l
    lo = np.floor((grid.index.min(axis=0) - 1) / nn).astype(int)
    hi = np.ceil(grid.index.max(axis=0) / nn).astype(int)
    return Hypercube(tuple(int(v) for v in lo), int(max(1, (hi - lo).max())))


def _domain_grid(n: MultiIndex, domain: DomainSpec, cap: int) -> Grid:
    if domain.hypercube is not None:
        return hypercube_grid(n, domain.hypercube, cap)
    ranges = domain.index_bounds(n)
    candidates = math.prod(max(0, hi - lo + 1) for lo, hi in ranges)
    if candidates > 50 * cap:
        raise SizeLimitError(f"{candidates} candidate points for {domain.name!r} at n={n}")
    index = _scan(n, domain, count_only=False)
    if len(index) > cap:
        raise SizeLimitError(f"grid of size {len(index)} exceeds cap {cap}")
    return Grid(n, domain, index)


@functools.lru_cache(maxsize=512)
def _cached_grid(n: MultiIndex, domain: DomainSpec, cap: int) -> Grid:
    return _domain_grid(n, domain, cap)


def domain_grid(n, domain: DomainSpec, cap: int = DEFAULT_GRID_CAP) -> Grid:
    """Theta_{n,Omega}: lattice points whose open 1/n-box lies in ``domain``.

    Hypercube domains return their hypercube grid instead (those grids are
    not defined through box inclusion).
    """
    return _cached_grid(as_multi_index(n), domain, cap)


def grid_dim(n, domain: DomainSpec) -> int:
    """d_n^Omega, computed by a counting scan without storing the points."""
    n = as_multi_index(n)
    if domain.hypercube is not None:
        return domain.hypercube.side ** domain.d * n_total(n)
    return _scan(n, domain, count_only=True)


# ---------------------------------------------------------------------------
# domains


def _frac(v) -> Fraction:
    return Fraction(v) if not isinstance(v, float) else Fraction(v).limit_denominator(1 << 20)


def hypercube_domain(cube: Hypercube) -> DomainSpec:
    """The half-open hypercube Q_{y,l} viewed as a domain (point indicator)."""
    return _hypercube_domain_cached(cube)


@functools.lru_cache(maxsize=None)
def _hypercube_domain_cached(cube: Hypercube) -> DomainSpec:
    lo = np.asarray(cube.anchor, dtype=float)
    hi = lo + cube.side

    def indicator(x):
        x = np.atleast_2d(x)
        return np.all((x > lo) & (x <= hi), axis=1)

    def lattice_inside(idx, n):
        nn = np.asarray(n, dtype=np.int64)
        a = np.asarray(cube.anchor, dtype=np.int64)
        return np.all((idx - 1 >= a * nn) & (idx + 1 <= (a + cube.side) * nn), axis=1)

    def bounds(n):
        return [(y * nk, (y + cube.side) * nk) for y, nk in zip(cube.anchor, n)]

    return DomainSpec(
        name=f"Q{cube.anchor},{cube.side}",
        d=cube.d,
        indicator=indicator,
        lattice_inside=lattice_inside,
        index_bounds=bounds,
        measure=float(cube.side ** cube.d),
        bounding_box=cube,
        extent=tuple((float(a), float(a + cube.side)) for a in cube.anchor),
        hypercube=cube,
        params={"anchor": cube.anchor, "side": cube.side},
    )


def _enclosing_cube(extent) -> Hypercube:
    lo = [math.floor(a) for a, _ in extent]
    side = max(math.ceil(b) - l for (_, b), l in zip(extent, lo))
    return Hypercube(tuple(lo), max(int(side), 1))


def box_domain(lo: Sequence, hi: Sequence, name: str | None = None) -> DomainSpec:
    """Open axis-aligned box prod (lo_k, hi_k) with rational corners."""
    lo_f = [_frac(v) for v in lo]
    hi_f = [_frac(v) for v in hi]
    if len(lo_f) != len(hi_f) or any(a >= b for a, b in zip(lo_f, hi_f)):
        raise ConfigError(f"invalid box bounds {lo}, {hi}")
    d = len(lo_f)
    lo_a = np.array([float(v) for v in lo_f])
    hi_a = np.array([float(v) for v in hi_f])

    def indicator(x):
        x = np.atleast_2d(x)
        return np.all((x > lo_a) & (x < hi_a), axis=1)

    def lattice_inside(idx, n):
        ok = np.ones(len(idx), dtype=bool)
        for k in range(d):
            i = idx[:, k]
            # (i-1)/n >= lo  and  (i+1)/n <= hi, cross-multiplied
            ok &= (i - 1) * lo_f[k].denominator >= lo_f[k].numerator * n[k]
            ok &= (i + 1) * hi_f[k].denominator <= hi_f[k].numerator * n[k]
        return ok

    def bounds(n):
        return [
            (math.floor(lo_f[k] * n[k]), math.ceil(hi_f[k] * n[k])) for k in range(d)
        ]

    def truncated(t):
        return float(
            math.prod(max(0.0, min(float(h), t) - max(float(l), -t)) for l, h in zip(lo_f, hi_f))
        )

    extent = tuple((float(a), float(b)) for a, b in zip(lo_f, hi_f))
    return DomainSpec(
        name=name or f"box{tuple(map(str, lo_f))}-{tuple(map(str, hi_f))}",
        d=d,
        indicator=indicator,
        lattice_inside=lattice_inside,
        index_bounds=bounds,
        measure=float(math.prod(b - a for a, b in zip(lo_f, hi_f))),
        bounding_box=_enclosing_cube(extent),
        extent=extent,
        truncated_measure=truncated,
        params={"lo": [str(v) for v in lo_f], "hi": [str(v) for v in hi_f]},
    )


def unit_square() -> DomainSpec:
    return box_domain((0, 0), (1, 1), name="unit_square")


def disk_domain(center=(Fraction(1, 2), Fraction(1, 2)), radius=Fraction(1, 2),
                name: str = "disk") -> DomainSpec:
    """Open disk in the plane; the box test checks the farthest box corner."""
    c = [_frac(v) for v in center]
    r = _frac(radius)
    if len(c) != 2 or r <= 0:
        raise ConfigError("disk needs a 2-d center and positive radius")
    cf = np.array([float(v) for v in c])
    rf = float(r)

    def indicator(x):
        x = np.atleast_2d(x)
        return np.sum((x - cf) ** 2, axis=1) < rf * rf

    def lattice_inside(idx, n):
        # farthest-corner distance along axis k: (|i cd - cn n| + cd) / (n cd)
        nums, dens = [], []
        for k in range(2):
            cn, cd = c[k].numerator, c[k].denominator
            nums.append(np.abs(idx[:, k] * cd - cn * n[k]) + cd)
            dens.append(n[k] * cd)
        rn, rd = r.numerator, r.denominator
        # sum_k nums_k^2 / dens_k^2 <= rn^2 / rd^2, cleared of denominators
        lhs = (nums[0] ** 2 * dens[1] ** 2 + nums[1] ** 2 * dens[0] ** 2) * rd * rd
        rhs = rn * rn * dens[0] ** 2 * dens[1] ** 2
        if rhs > 2 ** 62:
            raise SizeLimitError("disk predicate would overflow int64 at this n")
        return lhs <= rhs

    def bounds(n):
        return [(math.floor((c[k] - r) * n[k]), math.ceil((c[k] + r) * n[k])) for k in range(2)]

    extent = tuple((float(ck - r), float(ck + r)) for ck in c)
    return DomainSpec(
        name=name,
        d=2,
        indicator=indicator,
        lattice_inside=lattice_inside,
        index_bounds=bounds,
        measure=math.pi * rf * rf,
        bounding_box=_enclosing_cube(extent),
        extent=extent,
        params={"center": [str(v) for v in c], "radius": str(r)},
    )


def cusp_profile(x):
    """g(x) = 1 for x < 1 and 1/x^2 for x >= 1."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x < 1, 1.0, 1.0 / np.where(x == 0, 1.0, x) ** 2)


def cusp_domain() -> DomainSpec:
    """{x > 0, y > 0, y < g(x)}: unbounded, measure 2."""

    def indicator(pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        return (x > 0) & (y > 0) & (y < cusp_profile(x))

    def lattice_inside(idx, n):
        i, j = idx[:, 0], idx[:, 1]
        n1, n2 = n
        ok = (i >= 1) & (j >= 1)
        # g is nonincreasing and continuous, so the top edge binds at x + 1/n1
        left = (i + 1) <= n1
        ok &= np.where(left, j + 1 <= n2, (j + 1) * (i + 1) ** 2 <= n1 * n1 * n2)
        return ok

    def bounds(n):
        n1, n2 = n
        # y - h >= 0 forces y + h >= 2/n2, which needs g(x + h) >= 2/n2
        x_max = math.isqrt(n1 * n1 * n2 // 2) + 1
        return [(1, x_max + 1), (1, n2)]

    def truncated(t):
        return t * t if t <= 1 else 2.0 - 1.0 / t

    return DomainSpec(
        name="cusp",
        d=2,
        indicator=indicator,
        lattice_inside=lattice_inside,
        index_bounds=bounds,
        measure=2.0,
        bounded=False,
        truncated_measure=truncated,
    )


def monte_carlo_measure(indicator, extent, samples: int = MC_SAMPLES,
                        seed: int = MC_SEED) -> tuple[float, float]:
    """Estimate a measure by uniform sampling of ``extent``; returns (value, stderr)."""
    rng = np.random.default_rng(seed)
    lo = np.array([a for a, _ in extent])
    hi = np.array([b for _, b in extent])
    vol = float(np.prod(hi - lo))
    hits = 0
    done = 0
    while done < samples:
        k = min(250_000, samples - done)
        pts = lo + (hi - lo) * rng.random((k, len(lo)))
        hits += int(np.count_nonzero(indicator(pts)))
        done += k
    p = hits / samples
    return vol * p, vol * math.sqrt(p * (1 - p) / samples)


def domain_measure(domain: DomainSpec) -> float:
    """L^d(Omega) as registered (analytic) or estimated (Monte Carlo)."""
    return domain.measure


def exhaustion_domain(domain: DomainSpec, t: float) -> DomainSpec:
    """Omega_t = {x in Omega : ||x||_inf < t}."""
    if not t > 0:
        raise ConfigError(f"exhaustion parameter must be positive, got {t}")
    if math.isinf(t):
        return domain
    if domain.extent is not None and all(max(abs(a), abs(b)) <= t for a, b in domain.extent):
        return domain
    return _exhaustion_cached(domain, float(t))


@functools.lru_cache(maxsize=256)
def _exhaustion_cached(domain: DomainSpec, t: float) -> DomainSpec:
    tf = Fraction(t)
    if tf.denominator > 1 << 20:
        tf = tf.limit_denominator(1 << 20)
    tn, td = tf.numerator, tf.denominator

    def indicator(x):
        x = np.atleast_2d(x)
        return domain.indicator(x) & np.all(np.abs(x) < t, axis=1)

    def lattice_inside(idx, n):
        cap = np.all((np.abs(idx) + 1) * td <= tn * np.asarray(n, dtype=np.int64), axis=1)
        out = np.zeros(len(idx), dtype=bool)
        if cap.any():
            out[cap] = domain.lattice_inside(idx[cap], n)
        return out

    def bounds(n):
        lim = [math.floor(tf * nk) for nk in n]
        return [
            (max(lo, -m), min(hi, m))
            for (lo, hi), m in zip(domain.index_bounds(n), lim)
        ]

    ext = [(-t, t)] * domain.d
    if domain.extent is not None:
        ext = [(max(a, -t), min(b, t)) for a, b in domain.extent]
    extent = tuple(ext)
    if domain.truncated_measure is not None:
        measure, kind, err, ns, seed = domain.truncated_measure(t), "analytic", 0.0, 0, None
    else:
        measure, err = monte_carlo_measure(indicator, extent)
        kind, ns, seed = "monte-carlo", MC_SAMPLES, MC_SEED
    return DomainSpec(
        name=f"{domain.name}_t{t:g}",
        d=domain.d,
        indicator=indicator,
        lattice_inside=lattice_inside,
        index_bounds=bounds,
        measure=measure,
        measure_kind=kind,
        measure_stderr=err,
        mc_samples=ns,
        mc_seed=seed,
        bounded=True,
        bounding_box=_enclosing_cube(extent),
        extent=extent,
        truncated_measure=(lambda s: domain.truncated_measure(min(s, t)))
        if domain.truncated_measure is not None else None,
        params={"parent": domain.name, "t": t},
    )


def intersect_domains(a: DomainSpec, b: DomainSpec, name: str | None = None) -> DomainSpec:
    """Omega_a ∩ Omega_b; box inclusion in an intersection is exact (logical and)."""
    return _combine(a, b, "and", name or f"({a.name}&{b.name})")


def union_domains(a: DomainSpec, b: DomainSpec, name: str | None = None) -> DomainSpec:
    """Omega_a ∪ Omega_b.

    The box predicate is the logical or of the member predicates.  It always
    contains both member grids; it is the exact union grid when every box
    that fits in the union fits in one member (e.g. overlaps wider than a
    cell).
    """
    return _combine(a, b, "or", name or f"({a.name}|{b.name})")


@functools.lru_cache(maxsize=256)
def _combine(a: DomainSpec, b: DomainSpec, op: str, name: str) -> DomainSpec:
    if a.d != b.d:
        raise ConfigError("cannot combine domains of different dimension")
    both = op == "and"
    join = np.logical_and if both else np.logical_or

    def indicator(x):
        return join(a.indicator(x), b.indicator(x))

    def lattice_inside(idx, n):
        return join(a.lattice_inside(idx, n), b.lattice_inside(idx, n))

    def bounds(n):
        ra, rb = a.index_bounds(n), b.index_bounds(n)
        if both:
            return [(max(x[0], y[0]), min(x[1], y[1])) for x, y in zip(ra, rb)]
        return [(min(x[0], y[0]), max(x[1], y[1])) for x, y in zip(ra, rb)]

    if both:
        if a.extent is not None and b.extent is not None:
            extent = tuple((max(x[0], y[0]), min(x[1], y[1])) for x, y in zip(a.extent, b.extent))
        else:
            extent = a.extent or b.extent
        if extent is None:
            raise ConfigError(f"cannot estimate the measure of {name!r}: both members unbounded")
        if any(lo >= hi for lo, hi in extent):
            measure, err = 0.0, 0.0
        else:
            measure, err = monte_carlo_measure(indicator, extent)
        kind = "monte-carlo"
        bounded = True
    elif a.extent is not None and b.extent is not None:
        extent = tuple((min(x[0], y[0]), max(x[1], y[1])) for x, y in zip(a.extent, b.extent))
        measure, err = monte_carlo_measure(indicator, extent)
        kind, bounded = "monte-carlo", True
    else:
        inter = _combine(a, b, "and", f"({a.name}&{b.name})")
        measure = a.measure + b.measure - (inter.measure if inter.measure > 1e-15 else 0.0)
        err, kind, bounded, extent = inter.measure_stderr, "monte-carlo", False, None
    if measure <= 0:
        # empty intersection: keep a tiny positive placeholder so the DomainSpec stays valid
        measure = float.fromhex("0x1p-60")
    return DomainSpec(
        name=name,
        d=a.d,
        indicator=indicator,
        lattice_inside=lattice_inside,
        index_bounds=bounds,
        measure=measure,
        measure_kind=kind,
        measure_stderr=err,
        mc_samples=MC_SAMPLES,
        mc_seed=MC_SEED,
        bounded=bounded,
        bounding_box=_enclosing_cube(extent) if bounded else None,
        extent=extent if bounded else None,
        params={"op": op, "members": [a.name, b.name]},
    )


# ---------------------------------------------------------------------------
# registry

_DOMAIN_FACTORIES: dict[str, Callable[..., DomainSpec]] = {
    "unit_square": unit_square,
    "box": lambda lo=(0, 0), hi=(1, 1): box_domain(lo, hi),
    "disk": lambda center=("1/2", "1/2"), radius="1/2": disk_domain(
        tuple(Fraction(v) for v in center), Fraction(radius)
    ),
    "cusp": cusp_domain,
    "left_half": lambda: box_domain((0, 0), (Fraction(5, 8), 1), name="left_half"),
    "right_half": lambda: box_domain((Fraction(3, 8), 0), (1, 1), name="right_half"),
}

_DOMAIN_CACHE: dict[tuple, DomainSpec] = {}


def domain_names() -> list[str]:
    return sorted(_DOMAIN_FACTORIES)


def get_domain(name: str, **params) -> DomainSpec:
    """Look up a built-in domain by registry name (instances are shared)."""
    if name not in _DOMAIN_FACTORIES:
        raise ConfigError(f"unknown domain {name!r}; known: {', '.join(domain_names())}")
    key = (name, tuple(sorted((k, repr(v)) for k, v in params.items())))
    if key not in _DOMAIN_CACHE:
        try:
            _DOMAIN_CACHE[key] = _DOMAIN_FACTORIES[name](**params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for domain {name!r}: {exc}") from None
    return _DOMAIN_CACHE[key]
