"""Point-set generators: quasicrystals, dual model sets, periodic variants.

Every generator takes an explicit search range (reproducibility over
convenience), keeps exact coordinates alongside the float embedding when
the data lives in the algebra, and tags each point with the integer data
(m_1..m_d, n) of the lattice point that produced it.  Output order is the
lexicographic order of that provenance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algebra import QValue, lift_to
from .dynamics import orbit_hits
from .errors import PreconditionError
from .lattice import Lattice, check_special_form
from .regions import RegionMembership, RegionSet, multiplicity

__all__ = [
    "PointSet",
    "cut_and_project",
    "special_quasicrystal",
    "dual_model_points",
    "sequence_points",
    "periodic_points",
    "periodic_dual",
    "density_estimate",
    "separation",
]


@dataclass(eq=False)
class PointSet:
    """Finite tagged point set.

    coords is an (n, dim) float array; provenance holds the integer data
    (m_1..m_d, n) per point (the block index of a one-dimensional dual
    model point is the last entry).  qcoords retains exact coordinates
    when the generator worked in the algebra.
    """

    dim: int
    coords: np.ndarray
    provenance: tuple[tuple[int, ...], ...]
    qcoords: Optional[tuple[tuple[QValue, ...], ...]] = None
    window: str = ""

    def __post_init__(self) -> None:
        self.coords = np.asarray(self.coords, dtype=float).reshape(
            -1, self.dim
        )
        if len(self.provenance) != len(self.coords):
            raise PreconditionError("provenance length mismatch")

    def __len__(self) -> int:
        return len(self.coords)

    @property
    def values(self) -> np.ndarray:
        """1-D coordinates as a flat array."""
        if self.dim != 1:
            raise PreconditionError("values is for 1-D point sets")
        return self.coords[:, 0]

    def sorted_by_provenance(self) -> "PointSet":
        order = sorted(range(len(self)), key=lambda i: self.provenance[i])
        return self.take(order)

    def take(self, order: Sequence[int]) -> "PointSet":
        return PointSet(
            self.dim,
            self.coords[list(order)],
            tuple(self.provenance[i] for i in order),
            None if self.qcoords is None else tuple(self.qcoords[i] for i in order),
            self.window,
        )

    def restrict_box(self, radius: float) -> "PointSet":
        keep = np.nonzero(np.abs(self.coords).max(axis=1) <= radius)[0]
        return self.take(keep)

    def to_csv(self) -> str:
        lines = [f"# quasilab pointset v1 dim={self.dim}"]
        for row, prov in zip(self.coords, self.provenance):
            cells = [format(v, ".17g") for v in row]
            cells.extend(str(int(p)) for p in prov)
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "PointSet":
        lines = [l for l in text.splitlines() if l.strip()]
        if not lines or not lines[0].startswith("# quasilab pointset v1"):
            raise PreconditionError("not a quasilab pointset file")
        dim = int(lines[0].split("dim=")[1])
        coords, prov = [], []
        for line in lines[1:]:
            cells = line.split(",")
            coords.append([float(c) for c in cells[:dim]])
            prov.append(tuple(int(c) for c in cells[dim:]))
        return cls(dim, np.array(coords), tuple(prov))


def _window_check(window: RegionSet) -> None:
    if window.dim != 1:
        raise PreconditionError("window must be one-dimensional")


def cut_and_project(
    gamma: Lattice,
    window: RegionSet,
    search: Sequence[tuple[int, int]],
) -> PointSet:
    """All lattice points in the search box whose last coordinate is in the window.

    The search box gives inclusive integer ranges for the generator
    coordinates (m_1..m_d, n); membership of p2(gamma) in the semi-closed
    window is decided exactly in the algebra.
    """
    _window_check(window)
    d = gamma.dim_d
    if len(search) != d + 1:
        raise PreconditionError(f"search box needs {d + 1} coordinate ranges")
    if any(lo > hi for lo, hi in search):
        raise PreconditionError("empty search box")
    spec = gamma.spec
    intervals = [
        (lift_to(spec, a), lift_to(spec, b), lc) for a, b, lc in window.intervals()
    ]

    def in_window(v: QValue) -> bool:
        for a, b, left_closed in intervals:
            if left_closed:
                if (v - a).sign() >= 0 and (v - b).sign() < 0:
                    return True
            else:
                if (v - a).sign() > 0 and (v - b).sign() <= 0:
                    return True
        return False

    pts: list[tuple[tuple[int, ...], tuple[QValue, ...]]] = []

    def scan(prefix: list[int], idx: int) -> None:
        if idx == d + 1:
            point = gamma.point(prefix)
            if in_window(point[d]):
                pts.append((tuple(prefix), point[:d]))
            return
        lo, hi = search[idx]
        for v in range(lo, hi + 1):
            scan(prefix + [v], idx + 1)

    scan([], 0)
    pts.sort(key=lambda t: t[0])
    coords = np.array([[float(v) for v in q] for _, q in pts]).reshape(-1, d)
    return PointSet(
        d,
        coords,
        tuple(p for p, _ in pts),
        tuple(q for _, q in pts),
        window.describe(),
    )


def special_quasicrystal(
    alpha: Sequence[QValue],
    beta: Sequence[QValue],
    window: RegionSet,
    m_box: Sequence[tuple[int, int]],
) -> PointSet:
    """Cut-and-project points of the special-form lattice over an m-box.

    For each m the candidate n range is derived exactly from the window
    (p2 = n - alpha^T m), then membership is decided exactly; this is the
    same selection as cut_and_project with a sufficient box, at the cost
    of one floor computation per m.
    """
    _window_check(window)
    d = len(alpha)
    if len(m_box) != d:
        raise PreconditionError(f"m box needs {d} coordinate ranges")
    spec = next(
        (v.spec for v in list(alpha) + list(beta) if not v.is_rational()),
        alpha[0].spec,
    )
    alpha = [lift_to(spec, a) for a in alpha]
    beta = [lift_to(spec, b) for b in beta]
    intervals = [
        (lift_to(spec, a), lift_to(spec, b), lc) for a, b, lc in window.intervals()
    ]

    pts = []
    ranges = [range(lo, hi + 1) for lo, hi in m_box]
    for m in itertools.product(*ranges):
        am = sum((alpha[i] * m[i] for i in range(1, d)), alpha[0] * m[0])
        for a, b, left_closed in intervals:
            # n - am in [a, b) or (a, b]
            if left_closed:
                n_lo = _exact_ceil(am + a)
                n_hi = -(-(am + b)).floor()  # smallest n with n >= am+b
                candidates = range(n_lo, n_hi + 1)
            else:
                n_lo = (am + a).floor()
                n_hi = (am + b).floor() + 1
                candidates = range(n_lo, n_hi + 1)
            for n in candidates:
                p2 = -am + n
                ok = (
                    (p2 - a).sign() >= 0 and (p2 - b).sign() < 0
                    if left_closed
                    else (p2 - a).sign() > 0 and (p2 - b).sign() <= 0
                )
                if ok:
                    point = tuple(
                        spec.from_rational(m[i]) - beta[i] * (n - am)
                        for i in range(d)
                    )
                    pts.append((tuple(m) + (n,), point))
    pts.sort(key=lambda t: t[0])
    coords = np.array([[float(v) for v in q] for _, q in pts]).reshape(-1, d)
    return PointSet(
        d,
        coords,
        tuple(p for p, _ in pts),
        tuple(q for _, q in pts),
        window.describe(),
    )


def _exact_ceil(v: QValue) -> int:
    return -((-v).floor())


def dual_model_points(
    alpha: Sequence[QValue],
    beta: Sequence[QValue],
    region: RegionSet,
    n_range: tuple[int, int],
) -> PointSet:
    """One-dimensional dual model set of a special-form lattice.

    For each n in range and each integer m with n*alpha + m in S (exact
    membership on the region's corners), emits n + <n alpha + m, beta>
    with provenance (m_1..m_d, n); the block structure is recoverable from
    the last provenance entry.
    """
    d = len(alpha)
    if region.dim != d:
        raise PreconditionError("region dimension must match alpha")
    spec = region.spec
    alpha = [lift_to(spec, a) for a in alpha]
    beta = [lift_to(spec, b) for b in beta]
    n_lo, n_hi = n_range
    if n_lo > n_hi:
        raise PreconditionError("empty n range")
    lo, hi = region.bbox()
    alpha_f = np.array([float(a) for a in alpha])
    tester = RegionMembership(region)
    pts = []
    for n in range(n_lo, n_hi + 1):
        anf = alpha_f * n
        m_ranges = [
            range(int(math.floor(lo[i] - anf[i])) - 1,
                  int(math.ceil(hi[i] - anf[i])) + 2)
            for i in range(d)
        ]
        for m in itertools.product(*m_ranges):
            xf = anf + np.array(m, dtype=float)
            x_exact = lambda n=n, m=m: tuple(
                alpha[i] * n + m[i] for i in range(d)
            )
            if tester.contains(xf, x_exact):
                x = x_exact()
                lam = sum((x[i] * beta[i] for i in range(1, d)),
                          x[0] * beta[0]) + n
                pts.append((tuple(m) + (n,), (lam,)))
    pts.sort(key=lambda t: t[0])
    coords = np.array([[float(v) for v in q] for _, q in pts]).reshape(-1, 1)
    return PointSet(
        1,
        coords,
        tuple(p for p, _ in pts),
        tuple(q for _, q in pts),
        region.describe(),
    )


def sequence_points(
    alpha: Sequence[QValue],
    beta: Sequence[QValue],
    m_box: Sequence[tuple[int, int]],
) -> PointSet:
    """The explicit sequence m + {alpha^T m} * beta over an integer box.

    Checks the special-form rank conditions first; provenance stores
    (m_1..m_d, floor(alpha^T m)), matching the cut-and-project provenance
    on the window (-1, 0].
    """
    check_special_form(alpha, beta)
    d = len(alpha)
    if len(m_box) != d:
        raise PreconditionError(f"m box needs {d} coordinate ranges")
    spec = next(
        (v.spec for v in list(alpha) + list(beta) if not v.is_rational()),
        alpha[0].spec,
    )
    alpha = [lift_to(spec, a) for a in alpha]
    beta = [lift_to(spec, b) for b in beta]
    pts = []
    for m in itertools.product(*[range(lo, hi + 1) for lo, hi in m_box]):
        am = sum((alpha[i] * m[i] for i in range(1, d)), alpha[0] * m[0])
        n = am.floor()
        frac_part = am - n
        point = tuple(
            spec.from_rational(m[i]) + beta[i] * frac_part for i in range(d)
        )
        pts.append((tuple(m) + (n,), point))
    pts.sort(key=lambda t: t[0])
    coords = np.array([[float(v) for v in q] for _, q in pts]).reshape(-1, d)
    return PointSet(
        d,
        coords,
        tuple(p for p, _ in pts),
        tuple(q for _, q in pts),
        "sequence",
    )


def periodic_points(
    alpha: Sequence[QValue],
    window: RegionSet,
    n_box: Sequence[tuple[int, int]],
) -> PointSet:
    """Integer points n with <n, alpha> mod 1 in the circle window.

    The window length must lie in (0, 1); membership is exact through the
    algebra (vectorized with guarded fallback in one dimension).
    """
    _window_check(window)
    d = len(alpha)
    if len(n_box) != d:
        raise PreconditionError(f"n box needs {d} coordinate ranges")
    length = window.volume()
    if not (length.sign() > 0 and (length - 1).sign() < 0):
        raise PreconditionError("window length must lie in (0, 1)")
    spec = window.spec
    alpha = [lift_to(spec, a) for a in alpha]
    if d == 1:
        lo, hi = n_box[0]
        # chi counts integer translates of n*alpha into the window, which
        # is exactly the mod-1 membership indicator for sub-unit windows
        chi = orbit_hits(window, alpha[0], 0, lo, hi)
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        keep = chi > 0
        coords = ns[keep].astype(float).reshape(-1, 1)
        prov = tuple((int(n),) for n in ns[keep])
        return PointSet(1, coords, prov, None, window.describe())
    pts = []
    for n in itertools.product(*[range(lo, hi + 1) for lo, hi in n_box]):
        v = sum((alpha[i] * n[i] for i in range(1, d)), alpha[0] * n[0])
        if multiplicity(window, (v,)) > 0:
            pts.append(tuple(n))
    pts.sort()
    coords = np.array(pts, dtype=float).reshape(-1, d)
    return PointSet(d, coords, tuple(pts), None, window.describe())


def periodic_dual(
    alpha: Sequence[QValue],
    region: RegionSet,
    m_range: tuple[int, int],
) -> PointSet:
    """Integers m with -m*alpha in S (multiplicity convention on the torus)."""
    d = len(alpha)
    if region.dim != d:
        raise PreconditionError("region dimension must match alpha")
    spec = region.spec
    alpha = [lift_to(spec, a) for a in alpha]
    lo, hi = m_range
    if lo > hi:
        raise PreconditionError("empty m range")
    if d == 1:
        chi = orbit_hits(region, -alpha[0], 0, lo, hi)
        ms = np.arange(lo, hi + 1, dtype=np.int64)
        keep = chi > 0
        coords = ms[keep].astype(float).reshape(-1, 1)
        return PointSet(
            1, coords, tuple((int(m),) for m in ms[keep]), None, region.describe()
        )
    pts = []
    for m in range(lo, hi + 1):
        x = tuple(-(alpha[i] * m) for i in range(d))
        if multiplicity(region, x) > 0:
            pts.append((m,))
    coords = np.array(pts, dtype=float).reshape(-1, 1)
    return PointSet(1, coords, tuple(pts), None, region.describe())


def density_estimate(
    points: PointSet, window_radii: Sequence[float]
) -> list[tuple[float, float, float]]:
    """(radius, lower, upper) of counts over translated windows per radius.

    In one dimension the extrema over all window positions fully inside
    the generated span are exact (counts change only at point events);
    higher dimensions scan a grid of centers and report the sampled range.
    """
    if len(points) == 0:
        raise PreconditionError("empty point set")
    radii = list(window_radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise PreconditionError("radii must be increasing")
    out = []
    if points.dim == 1:
        vals = np.sort(points.values)
        for r in radii:
            length = 2.0 * r
            x_lo, x_hi = vals[0], vals[-1] - length
            if x_hi <= x_lo:
                raise PreconditionError(
                    f"radius {r} too large for the generated range"
                )
            events = np.concatenate([vals, vals - length])
            events = np.sort(events[(events >= x_lo) & (events <= x_hi)])
            mids = (events[:-1] + events[1:]) / 2.0 if len(events) > 1 else events
            probes = np.concatenate([[x_lo], events, mids, [x_hi]])
            probes = probes[(probes >= x_lo) & (probes <= x_hi)]
            counts = (
                np.searchsorted(vals, probes + length, side="left")
                - np.searchsorted(vals, probes, side="left")
            )
            out.append((r, counts.min() / length, counts.max() / length))
        return out
    lo, hi = points.coords.min(axis=0), points.coords.max(axis=0)
    for r in radii:
        length = 2.0 * r
        vol = length ** points.dim
        steps = [
            np.linspace(lo[i], hi[i] - length, num=9)
            for i in range(points.dim)
        ]
        if any(s[-1] <= s[0] for s in steps):
            raise PreconditionError(f"radius {r} too large for the generated range")
        counts = []
        grids = np.meshgrid(*steps, indexing="ij")
        centers = np.stack([g.ravel() for g in grids], axis=1)
        for c in centers:
            inside = np.all(
                (points.coords >= c) & (points.coords < c + length), axis=1
            )
            counts.append(int(inside.sum()))
        counts = np.array(counts)
        out.append((r, counts.min() / vol, counts.max() / vol))
    return out


def separation(points: PointSet) -> float:
    """Minimum pairwise gap (uniform discreteness within the range)."""
    n = len(points)
    if n < 2:
        raise PreconditionError("need at least two points")
    if points.dim == 1:
        vals = np.sort(points.values)
        return float(np.diff(vals).min())
    from scipy.spatial import cKDTree

    tree = cKDTree(points.coords)
    dists, _ = tree.query(points.coords, k=2)
    return float(dists[:, 1].min())
