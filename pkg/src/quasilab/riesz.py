"""Finite-section diagnostics for exponential systems.

Block enumerations of one-dimensional model sets, perturbation sequences
delta_j and their windowed means, the averaged-perturbation basis check on
an interval, Gram matrices with closed-form entries, and extreme-eigenvalue
traces over nested truncations.  Verdicts here are evidence, not theorems:
finite sections cannot certify infinite-dimensional basis properties, so
reports carry the thresholds and ranges they used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .algebra import QValue, admissible_decomposition, lift_to
from .errors import PreconditionError, QuasilabError
from .lattice import make_special_lattice
from .modelset import PointSet, dual_model_points, special_quasicrystal
from .regions import RegionSet, ft_indicator

__all__ = [
    "Enumeration",
    "enumerate_blocks",
    "DeltaSequence",
    "MeansTable",
    "delta_and_means",
    "AvdoninVerdict",
    "avdonin_check",
    "gram_matrix",
    "extreme_eigs",
    "BoundsTrace",
    "riesz_bound_trace",
    "DualityReport",
    "duality_experiment",
]


@dataclass(eq=False)
class Enumeration:
    """Block enumeration lambda_j with its integer ramp s_n.

    Block n occupies indices s_n <= j < s_{n+1}; within a block points are
    ascending by value, and s_0 anchors at the given value (0 by default,
    with lambda_0 the first element of block 0).
    """

    js: np.ndarray
    lambdas: np.ndarray
    blocks: np.ndarray
    ranks: np.ndarray
    n_lo: int
    n_hi: int
    s: np.ndarray  # s[n - n_lo] = s_n for n in [n_lo, n_hi + 1]

    def s_of(self, n: int) -> int:
        return int(self.s[n - self.n_lo])

    def block_sizes(self) -> np.ndarray:
        return np.diff(self.s)

    def max_block_size(self) -> int:
        return int(self.block_sizes().max())


def enumerate_blocks(points: PointSet, s0_anchor: int = 0) -> Enumeration:
    """Enumerate a block-tagged 1-D point set as lambda_j.

    The block index is the last provenance entry.  Empty blocks inside the
    generated range are allowed (the ramp stays flat there); the range must
    contain 0 so the anchor s_0 = s0_anchor is meaningful.
    """
    if points.dim != 1:
        raise PreconditionError("enumeration needs a 1-D point set")
    if not points.provenance:
        raise PreconditionError("enumeration needs provenance")
    blocks = np.array([p[-1] for p in points.provenance], dtype=np.int64)
    n_lo, n_hi = int(blocks.min()), int(blocks.max())
    if not (n_lo <= 0 <= n_hi):
        raise PreconditionError("block range must contain 0 for the s_0 anchor")
    values = points.values
    order = np.lexsort((values, blocks))
    values = values[order]
    blocks = blocks[order]
    sizes = np.zeros(n_hi - n_lo + 1, dtype=np.int64)
    for b in blocks:
        sizes[b - n_lo] += 1
    s = np.zeros(n_hi - n_lo + 2, dtype=np.int64)
    s[1:] = np.cumsum(sizes)
    s += s0_anchor - s[-n_lo]  # force s_0 = anchor
    js = np.arange(s[0], s[0] + len(values), dtype=np.int64)
    ranks = np.concatenate([np.arange(sz, dtype=np.int64) for sz in sizes if sz]) \
        if len(values) else np.zeros(0, dtype=np.int64)
    return Enumeration(js, values, blocks, ranks, n_lo, n_hi, s)


@dataclass(eq=False)
class DeltaSequence:
    """delta_j = lambda_j - j / mes S, with the enumeration it came from."""

    js: np.ndarray
    lambdas: np.ndarray
    deltas: np.ndarray
    mes: float

    @property
    def sup_abs(self) -> float:
        return float(np.abs(self.deltas).max())


@dataclass(eq=False)
class MeansTable:
    """sup over window starts of |windowed mean of delta - c_hat| per N."""

    c_hat: float
    rows: list[tuple[int, float, int]]  # (N, sup deviation, windows examined)


def delta_sequence(enum: Enumeration, mes_s: Union[QValue, float]) -> DeltaSequence:
    mes = float(mes_s)
    if mes <= 0:
        raise PreconditionError("mes S must be positive")
    deltas = enum.lambdas - enum.js / mes
    return DeltaSequence(enum.js, enum.lambdas, deltas, mes)


def _window_sup(
    deltas: np.ndarray, js: np.ndarray, N: int, k_range: tuple[int, int],
    center: float,
) -> tuple[float, int]:
    """sup over k in k_range of |mean(delta_{k+1..k+N}) - center|."""
    j_lo = int(js[0])
    cs = np.concatenate([[0.0], np.cumsum(deltas)])
    k_min = max(k_range[0], j_lo - 1)
    k_max = min(k_range[1], int(js[-1]) - N)
    if k_max < k_min:
        return float("nan"), 0
    ks = np.arange(k_min, k_max + 1, dtype=np.int64)
    i0 = ks + 1 - j_lo
    sums = cs[i0 + N] - cs[i0]
    devs = np.abs(sums / N - center)
    return float(devs.max()), len(ks)


def delta_and_means(
    enum: Enumeration,
    mes_s: Union[QValue, float],
    n_list: Sequence[int],
    k_range: tuple[int, int],
) -> tuple[DeltaSequence, MeansTable]:
    """Perturbations delta_j plus the windowed-mean deviation table.

    c_hat is the empirical mean of delta over the full generated range (the
    estimator for the limiting average of the perturbations); each row
    reports the sup over window starts k in k_range of the deviation of the
    length-N windowed mean from c_hat.
    """
    ds = delta_sequence(enum, mes_s)
    c_hat = float(ds.deltas.mean())
    rows = []
    for N in n_list:
        if N < 1:
            raise PreconditionError("window lengths must be positive")
        sup, count = _window_sup(ds.deltas, ds.js, N, k_range, c_hat)
        rows.append((int(N), sup, count))
    return ds, MeansTable(c_hat, rows)


@dataclass(frozen=True)
class AvdoninVerdict:
    satisfied_at: Optional[int]
    sup_deviation: float
    threshold: float
    margin: float
    c_hat: float
    n_max: int
    k_range: tuple[int, int]
    separation: float

    @property
    def satisfied(self) -> bool:
        return self.satisfied_at is not None


def avdonin_check(
    deltas: DeltaSequence,
    interval_length: Union[QValue, float],
    n_max: int,
    k_range: tuple[int, int] = (-10000, 10000),
) -> AvdoninVerdict:
    """Averaged-perturbation basis condition on an interval of given length.

    Finds the smallest window length N <= n_max whose windowed means of
    delta_j deviate from the empirical constant by strictly less than
    1/(4|I|) over all window starts in k_range.  Requires the underlying
    sequence to be separated.
    """
    lam = np.sort(deltas.lambdas)
    if len(lam) < 2:
        raise PreconditionError("need at least two points")
    gap = float(np.diff(lam).min())
    if gap <= 0:
        raise PreconditionError("non-separated input: coincident points")
    length = float(interval_length)
    if length <= 0:
        raise PreconditionError("interval length must be positive")
    threshold = 1.0 / (4.0 * length)
    c_hat = float(deltas.deltas.mean())
    best_sup = float("inf")
    for N in range(1, n_max + 1):
        sup, count = _window_sup(deltas.deltas, deltas.js, N, k_range, c_hat)
        if count == 0:
            break
        best_sup = sup
        if sup < threshold:
            return AvdoninVerdict(
                N, sup, threshold, threshold - sup, c_hat, n_max, k_range, gap
            )
    return AvdoninVerdict(
        None, best_sup, threshold, threshold - best_sup, c_hat, n_max,
        k_range, gap,
    )


def gram_matrix(points, region: RegionSet) -> np.ndarray:
    """Gram matrix of the exponential system on the region.

    entry(j, k) = ft_indicator(S, lambda_k - lambda_j); the diagonal is
    mes S and the lower triangle is the conjugate mirror of the upper, so
    the result is Hermitian by construction.
    """
    if isinstance(points, PointSet):
        pts = points.coords
    else:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
    n, d = pts.shape
    if d != region.dim:
        raise PreconditionError("point dimension does not match the region")
    iu = np.triu_indices(n)
    diffs = pts[iu[1]] - pts[iu[0]]  # lambda_k - lambda_j for j <= k
    vals = ft_indicator(region, diffs if d > 1 else diffs[:, 0])
    g = np.zeros((n, n), dtype=complex)
    g[iu] = vals
    il = (iu[1], iu[0])
    g[il] = np.conj(vals)
    return g


def extreme_eigs(g: np.ndarray) -> tuple[float, float]:
    """Extreme eigenvalues of a Hermitian matrix (direct dense solve)."""
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise PreconditionError("matrix must be square")
    if not np.array_equal(g, g.conj().T):
        raise PreconditionError("matrix is not exactly Hermitian")
    ev = scipy.linalg.eigvalsh(g)
    return float(ev[0]), float(ev[-1])


@dataclass(eq=False)
class BoundsTrace:
    rows: list[tuple[float, int, float, float]]  # (R, size, lmin, lmax)

    def lmin(self, radius: float) -> float:
        for r, _, lo, _ in self.rows:
            if r == radius:
                return lo
        raise PreconditionError(f"radius {radius} not in the trace")

    def as_dict(self) -> dict:
        return {
            "rows": [
                {"R": r, "size": n, "lambda_min": lo, "lambda_max": hi}
                for r, n, lo, hi in self.rows
            ]
        }


def riesz_bound_trace(
    points: Union[PointSet, Callable[[float], PointSet]],
    radii: Sequence[float],
    region: RegionSet,
) -> BoundsTrace:
    """Extreme Gram eigenvalues over nested truncations [-R, R]^d.

    Nested principal submatrices interlace, so lambda_min must be
    nonincreasing and lambda_max nondecreasing in R; this is asserted (with
    solver slack) on every trace.
    """
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise PreconditionError("radii must be increasing")
    rows = []
    for r in radii:
        pset = points(r) if callable(points) else points.restrict_box(r)
        if len(pset) == 0:
            raise PreconditionError(f"no points within radius {r}")
        g = gram_matrix(pset, region)
        lo, hi = extreme_eigs(g)
        rows.append((float(r), len(pset), lo, hi))
    tol = 1e-9
    for (_, _, lo0, hi0), (_, _, lo1, hi1) in zip(rows, rows[1:]):
        if lo1 > lo0 + tol or hi1 < hi0 - tol:
            raise QuasilabError(
                "interlacing violated along the trace; eigensolve suspect"
            )
    return BoundsTrace(rows)


@dataclass(eq=False)
class DualityReport:
    """Juxtaposed primal/dual finite-section traces with the dual verdict."""

    alpha: list[str]
    beta: list[str]
    window_desc: str
    region_desc: str
    interval_length: float
    region_measure: float
    measures_match: bool
    length_is_admissible: bool
    warning: Optional[str]
    primal: BoundsTrace
    dual: BoundsTrace
    dual_verdict: AvdoninVerdict
    translate: Optional[list[float]] = None

    def as_dict(self) -> dict:
        v = self.dual_verdict
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "window": self.window_desc,
            "region": self.region_desc,
            "interval_length": self.interval_length,
            "region_measure": self.region_measure,
            "measures_match": self.measures_match,
            "length_is_admissible": self.length_is_admissible,
            "warning": self.warning,
            "translate": self.translate,
            "primal_trace": self.primal.as_dict(),
            "dual_trace": self.dual.as_dict(),
            "dual_verdict": {
                "satisfied_at": v.satisfied_at,
                "sup_deviation": v.sup_deviation,
                "threshold": v.threshold,
                "margin": v.margin,
                "c_hat": v.c_hat,
                "n_max": v.n_max,
                "k_range": list(v.k_range),
                "separation": v.separation,
            },
        }


def duality_experiment(
    alpha: Sequence[QValue],
    beta: Sequence[QValue],
    window: RegionSet,
    region: RegionSet,
    radii: Sequence[float],
    n_max: int = 128,
    k_bound: int = 2000,
    translate: Optional[Sequence[QValue]] = None,
) -> DualityReport:
    """Primal and dual finite-section traces for one special-form geometry.

    Generates the quasicrystal for the window and its one-dimensional dual
    model set for the region, runs the eigenvalue trace on both sides, and
    attaches the averaged-perturbation verdict for the dual enumeration.
    A measure mismatch between the region and the window is a warning (the
    density necessary condition fails), not an error.
    """
    gamma, _ = make_special_lattice(alpha, beta)
    spec = gamma.spec
    alpha = [lift_to(spec, a) for a in alpha]
    beta = [lift_to(spec, b) for b in beta]
    translate_f = None
    if translate is not None:
        region = region.translate([lift_to(spec, t) for t in translate])
        translate_f = [float(lift_to(spec, t)) for t in translate]
    length_q = window.volume()
    mes_q = region.volume()
    warning = None
    if length_q != mes_q:
        warning = (
            "mes S != |I|: the uniform densities disagree, so no two-sided "
            "basis bounds are expected"
        )
    admissible = admissible_decomposition(alpha, length_q) is not None

    r_max = max(radii)
    d = len(alpha)
    span = float(max(abs(float(b)) for b in beta)) * float(length_q) + 2.0
    m_pad = int(np.ceil(r_max + span))
    primal_pts = special_quasicrystal(
        alpha, beta, window, [(-m_pad, m_pad)] * d
    )
    primal = riesz_bound_trace(primal_pts, radii, region)

    lo, hi = region.bbox()
    r_region = float(
        sum(max(abs(l), abs(h)) * abs(float(b)) for l, h, b in zip(lo, hi, beta))
    )
    n_pad = int(np.ceil(r_max + r_region + 2))
    # enough blocks that the j-windows of the interval check are never
    # clamped: j grows like n * mes S
    mes_f = max(float(mes_q), 0.05)
    n_pad = max(n_pad, int(np.ceil((k_bound + n_max + r_region + 4) / mes_f)))
    dual_pts = dual_model_points(alpha, beta, region, (-n_pad, n_pad))
    dual = riesz_bound_trace(dual_pts, radii, window)

    enum = enumerate_blocks(dual_pts)
    ds = delta_sequence(enum, mes_q)
    verdict = avdonin_check(ds, length_q, n_max, (-k_bound, k_bound))

    return DualityReport(
        [str(a) for a in alpha],
        [str(b) for b in beta],
        window.describe(),
        region.describe(),
        float(length_q),
        float(mes_q),
        length_q == mes_q,
        admissible,
        warning,
        primal,
        dual,
        verdict,
        translate_f,
    )
