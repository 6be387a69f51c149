"""Full-rank lattices in R^(d+1), their duals, and the special form.

Basis matrices follow a column-generator convention throughout: column i of
the basis matrix is the i-th generator.  The first d generator indices are
written m_1..m_d and the last one n, matching the integer coordinates used
for point provenance.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .algebra import (
    AlgebraSpec,
    QMatrix,
    QValue,
    coeff_rank,
    exact_det,
    lift_to,
    mat_inverse,
    mat_mul,
    mat_transpose,
    mat_vec,
)
from .errors import PreconditionError


class Lattice:
    """Lattice given by an exact basis matrix (columns are generators)."""

    def __init__(self, dim_d: int, basis: QMatrix) -> None:
        n = dim_d + 1
        if len(basis) != n or any(len(row) != n for row in basis):
            raise PreconditionError(f"basis must be {n}x{n}")
        det = exact_det(basis)
        if det == 0:
            raise PreconditionError("basis matrix is singular")
        self.dim_d = dim_d
        self.basis = tuple(tuple(row) for row in basis)
        self._det = det
        self._dual: Optional["Lattice"] = None

    @property
    def spec(self) -> AlgebraSpec:
        return self.basis[0][0].spec

    @property
    def det(self) -> QValue:
        return self._det

    def generator(self, i: int) -> tuple[QValue, ...]:
        return tuple(row[i] for row in self.basis)

    def generators(self) -> list[tuple[QValue, ...]]:
        return [self.generator(i) for i in range(self.dim_d + 1)]

    def point(self, coeffs: Sequence[int]) -> tuple[QValue, ...]:
        """Lattice point for integer coordinates (m_1..m_d, n)."""
        if len(coeffs) != self.dim_d + 1:
            raise PreconditionError("coefficient length mismatch")
        return tuple(
            sum((row[j] * int(coeffs[j]) for j in range(1, len(row))),
                row[0] * int(coeffs[0]))
            for row in self.basis
        )

    @property
    def dual(self) -> "Lattice":
        """Dual lattice, with basis the exact inverse transpose."""
        if self._dual is None:
            dual_basis = mat_transpose(mat_inverse(self.basis))
            dual = Lattice(self.dim_d, dual_basis)
            dual._dual = self
            self._dual = dual
        return self._dual

    def pairing_matrix(self, other: "Lattice") -> list[list[QValue]]:
        """Exact inner products <g_i, g*_j> of generators against another lattice."""
        return mat_mul(mat_transpose(self.basis), other.basis)

    def pairings_are_integer(self, other: "Lattice") -> bool:
        return all(
            v.is_integer() for row in self.pairing_matrix(other) for v in row
        )

    def basis_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.basis])

    def __repr__(self) -> str:
        return f"Lattice(d={self.dim_d})"


def dual_lattice(lat: Lattice) -> Lattice:
    """Exact dual; errors if the determinant is not invertible in the algebra."""
    return lat.dual


def check_special_form(alpha: Sequence[QValue], beta: Sequence[QValue]) -> None:
    """Exact rank checks for the two independence conditions.

    Condition (i): the coefficient vectors of 1, alpha_1..alpha_d have full
    rank over Q.  Condition (ii): the same for beta_1..beta_d together with
    1 + beta^T alpha.  Raises naming the violated condition.
    """
    d = len(alpha)
    if len(beta) != d or d == 0:
        raise PreconditionError("alpha and beta must be nonempty, equal length")
    spec = next(
        (v.spec for v in list(alpha) + list(beta) if not v.is_rational()),
        alpha[0].spec,
    )
    one = spec.one()
    alpha = [lift_to(spec, a) for a in alpha]
    beta = [lift_to(spec, b) for b in beta]
    if coeff_rank([one] + list(alpha)) != d + 1:
        raise PreconditionError(
            "condition (i) violated: 1, alpha_1..alpha_d are rationally "
            "dependent (coefficient rank < d+1)"
        )
    bta = one + sum((b * a for b, a in zip(beta, alpha)), spec.zero())
    if coeff_rank(list(beta) + [bta]) != d + 1:
        raise PreconditionError(
            "condition (ii) violated: beta_1..beta_d, 1+beta^T alpha are "
            "rationally dependent (coefficient rank < d+1)"
        )


def make_special_lattice(
    alpha: Sequence[QValue], beta: Sequence[QValue]
) -> tuple[Lattice, Lattice]:
    """Build the special-form lattice pair from direction data alpha, beta.

    Generators (columns), for integer coordinates (m, n):

        Gamma      m=e_i: (e_i + beta*alpha_i, -alpha_i)   n=1: (-beta, 1)
        Gamma*     m=e_i: (e_i, beta_i)                    n=1: (alpha, 1+beta^T alpha)

    The pair is validated exactly: det Gamma = +-1 and every generator
    pairing is an exact integer.
    """
    check_special_form(alpha, beta)
    d = len(alpha)
    spec = next(
        (v.spec for v in list(alpha) + list(beta) if not v.is_rational()),
        alpha[0].spec,
    )
    alpha = [lift_to(spec, a) for a in alpha]
    beta = [lift_to(spec, b) for b in beta]
    one, zero = spec.one(), spec.zero()

    g = [[zero] * (d + 1) for _ in range(d + 1)]
    for i in range(d):
        for j in range(d):
            g[j][i] = (one if i == j else zero) + beta[j] * alpha[i]
        g[d][i] = -alpha[i]
    for j in range(d):
        g[j][d] = -beta[j]
    g[d][d] = one

    gs = [[zero] * (d + 1) for _ in range(d + 1)]
    bta = one + sum((b * a for b, a in zip(beta, alpha)), zero)
    for i in range(d):
        for j in range(d):
            gs[j][i] = one if i == j else zero
        gs[d][i] = beta[i]
    for j in range(d):
        gs[j][d] = alpha[j]
    gs[d][d] = bta

    gamma = Lattice(d, g)
    gamma_star = Lattice(d, gs)
    det = gamma.det
    if not (det == 1 or det == -1):
        raise PreconditionError(f"special-form determinant is {det}, not +-1")
    if not gamma.pairings_are_integer(gamma_star):
        raise PreconditionError("generator pairings are not all integers")
    return gamma, gamma_star


def reduce_to_special(lat: Lattice) -> tuple[list[list[QValue]], QValue, Lattice]:
    """Map a lattice in general position onto one of special form.

    Takes the block decomposition [[a, b], [c^T, e]] of the basis of the
    dual lattice, forms alpha = a^{-1} b and beta = c / (e - c^T a^{-1} b),
    and returns (A, B, Gamma) where the transform T(x, y) = (A x, B y) with
    A = a^T and B = e - c^T a^{-1} b maps the input lattice onto Gamma
    exactly.  Generator correspondence is verified exactly: the unimodular
    change of basis between T(basis) and Gamma's basis is checked to be an
    integer matrix of determinant +-1.

    Raises if block a is singular in the algebra or if the derived alpha,
    beta fail the special-form rank checks (reported, not silently accepted).
    """
    d = lat.dim_d
    m = lat.dual.basis
    a = [[m[i][j] for j in range(d)] for i in range(d)]
    b = [m[i][d] for i in range(d)]
    c = [m[d][j] for j in range(d)]
    e = m[d][d]
    try:
        a_inv = mat_inverse(a)
    except PreconditionError:
        raise PreconditionError(
            "block a of the dual basis is singular in the algebra"
        ) from None
    alpha = mat_vec(a_inv, b)
    spec = lat.spec
    cta = sum((ci * ai for ci, ai in zip(c, alpha)), spec.zero())
    b_primal = e - cta
    b_dual = b_primal.inverse()
    beta = [ci * b_dual for ci in c]
    gamma, _ = make_special_lattice(alpha, beta)

    a_primal = mat_transpose(a)
    t_basis = [
        [None] * (d + 1) for _ in range(d + 1)
    ]  # T applied to the input basis, T = diag(a^T, B)
    lb = lat.basis
    top = mat_mul(a_primal, [[lb[i][j] for j in range(d + 1)] for i in range(d)])
    for i in range(d):
        for j in range(d + 1):
            t_basis[i][j] = top[i][j]
    for j in range(d + 1):
        t_basis[d][j] = b_primal * lb[d][j]

    change = mat_mul(mat_inverse(gamma.basis), t_basis)
    if not all(v.is_integer() for row in change for v in row):
        raise PreconditionError(
            "reduction verification failed: T(L) generators are not integer "
            "combinations of the special-form generators"
        )
    cdet = exact_det(change)
    if not (cdet == 1 or cdet == -1):
        raise PreconditionError(
            "reduction verification failed: change of basis is not unimodular"
        )
    return a_primal, b_primal, gamma


def transform_pointset(points, a) -> "PointSet":
    """Image of a point set under an invertible linear map (numeric)."""
    from .modelset import PointSet

    a_f = np.array(
        [[float(v) for v in row] for row in a]
        if not isinstance(a, np.ndarray)
        else a,
        dtype=float,
    )
    if abs(np.linalg.det(a_f)) < 1e-14:
        raise PreconditionError("transform matrix is singular")
    return PointSet(
        points.dim,
        points.coords @ a_f.T,
        points.provenance,
        None,
        points.window,
    )


def transform_region(region, m) -> "RegionSet":
    """Image of a region under an invertible linear map, kept exact.

    Matrix entries may be QValues, Fractions, ints or floats (floats are
    exact rationals); edge witnesses no longer apply after a general map
    and are dropped.
    """
    from fractions import Fraction

    from .regions import Piece, RegionSet

    spec = region.spec
    d = region.dim

    def q(entry) -> QValue:
        if isinstance(entry, QValue):
            return lift_to(spec, entry)
        return spec.from_rational(Fraction(entry))

    mq = [[q(m[i][j]) for j in range(d)] for i in range(d)]
    if exact_det(mq) == 0:
        raise PreconditionError("transform matrix is singular")
    pieces = []
    for p in region.pieces:
        off = mat_vec(mq, list(p.offset))
        edges = mat_mul(mq, [list(row) for row in p.edges])
        pieces.append(Piece(tuple(off), tuple(tuple(r) for r in edges)))
    return RegionSet(d, pieces)


def lattice_to_text(lat: Lattice) -> str:
    lines = [lat.spec.to_text().rstrip("\n"), f"dim_d = {lat.dim_d}"]
    for gen in lat.generators():
        lines.append("generator " + ", ".join(str(v) for v in gen))
    return "\n".join(lines) + "\n"


def lattice_from_text(text: str) -> Lattice:
    algebra_lines, dim_d, gens = [], None, []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith(("basis", "product")):
            algebra_lines.append(line)
        elif line.startswith("dim_d"):
            dim_d = int(line.split("=", 1)[1])
        elif line.startswith("generator"):
            gens.append(line[len("generator"):].strip())
        else:
            raise PreconditionError(f"bad lattice line: {raw!r}")
    if dim_d is None or len(gens) != dim_d + 1:
        raise PreconditionError("lattice text needs dim_d and d+1 generators")
    spec = AlgebraSpec.from_text("\n".join(algebra_lines))
    cols = [spec.parse_vector(g) for g in gens]
    basis = [[cols[j][i] for j in range(dim_d + 1)] for i in range(dim_d + 1)]
    return Lattice(dim_d, basis)
