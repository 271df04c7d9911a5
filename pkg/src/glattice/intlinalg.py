"""
Exact integer linear algebra.

Dense matrices of arbitrary-precision Python integers, Smith and Hermite
normal forms with transformation matrices, saturated kernel bases, cokernel
invariant factors, integral linear solving, LLL basis reduction, and a
bounded search for unimodular elements of a lattice of square matrices.

Everything here is immutable and pure; all downstream cohomology and
isomorphism machinery reduces to these routines.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd


class BudgetExhausted(Exception):
    """A bounded search ran out of budget: the answer is 'unknown', never 'no'."""


class IntMat:
    """Immutable dense matrix over Z (row-major tuple of tuples of int)."""

    __slots__ = ("rows", "cols", "data", "_hash")

    def __init__(self, data):
        rows = tuple(tuple(int(x) for x in row) for row in data)
        self.rows = len(rows)
        self.cols = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != self.cols:
                raise ValueError("ragged rows")
        self.data = rows
        self._hash = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def identity(n):
        return IntMat([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def zeros(m, n):
        return IntMat([[0] * n for _ in range(m)])

    @staticmethod
    def from_flat(m, n, entries):
        entries = list(entries)
        if len(entries) != m * n:
            raise ValueError("entry count mismatch")
        return IntMat([entries[i * n:(i + 1) * n] for i in range(m)])

    @staticmethod
    def diag(values):
        n = len(values)
        return IntMat([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    # -- basics ------------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, IntMat) and self.data == other.data

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.data)
        return self._hash

    def __repr__(self):
        return "IntMat(%r)" % (list(map(list, self.data)),)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def row(self, i):
        return self.data[i]

    @property
    def shape(self):
        return (self.rows, self.cols)

    def is_square(self):
        return self.rows == self.cols

    def is_zero(self):
        return all(x == 0 for row in self.data for x in row)

    def transpose(self):
        return IntMat(list(zip(*self.data))) if self.rows else IntMat.zeros(self.cols, 0)

    def __neg__(self):
        return IntMat([[-x for x in row] for row in self.data])

    def __add__(self, other):
        assert self.shape == other.shape
        return IntMat([[a + b for a, b in zip(r, s)]
                       for r, s in zip(self.data, other.data)])

    def __sub__(self, other):
        assert self.shape == other.shape
        return IntMat([[a - b for a, b in zip(r, s)]
                       for r, s in zip(self.data, other.data)])

    def scale(self, c):
        return IntMat([[c * x for x in row] for row in self.data])

    def __mul__(self, other):
        """Matrix product (also accepts an int scalar)."""
        if isinstance(other, int):
            return self.scale(other)
        if self.rows == 0:
            # a 0 x n matrix is stored with no rows (so cols reads as 0)
            return IntMat.zeros(0, other.cols)
        assert self.cols == other.rows, (self.shape, other.shape)
        bt = list(zip(*other.data))
        return IntMat([[sum(a * b for a, b in zip(row, col)) for col in bt]
                       for row in self.data])

    __matmul__ = __mul__

    def pow(self, k):
        assert self.is_square() and k >= 0
        result = IntMat.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def stack(self, other):
        """Vertical concatenation."""
        assert self.cols == other.cols or self.rows == 0 or other.rows == 0
        if self.rows == 0:
            return other
        if other.rows == 0:
            return self
        return IntMat(self.data + other.data)

    def hstack(self, other):
        assert self.rows == other.rows
        return IntMat([r + s for r, s in zip(self.data, other.data)])

    def submatrix(self, rows, cols):
        return IntMat([[self.data[i][j] for j in cols] for i in rows])

    def kron(self, other):
        """Kronecker product, left factor major."""
        out = []
        for arow in self.data:
            for brow in other.data:
                out.append([a * b for a in arow for b in brow])
        return IntMat(out) if out else IntMat.zeros(0, self.cols * other.cols)

    def max_abs(self):
        return max((abs(x) for row in self.data for x in row), default=0)

    def det(self):
        """Determinant by fraction-free (Bareiss) elimination."""
        assert self.is_square()
        n = self.rows
        if n == 0:
            return 1
        a = [list(row) for row in self.data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            pk = a[k][k]
            for i in range(k + 1, n):
                aik = a[i][k]
                arow = a[i]
                krow = a[k]
                for j in range(k + 1, n):
                    arow[j] = (pk * arow[j] - aik * krow[j]) // prev
                arow[k] = 0
            prev = pk
        return sign * a[n - 1][n - 1]

    def is_unimodular(self):
        return self.is_square() and self.det() in (1, -1)

    def inverse_unimodular(self):
        """Inverse of a matrix with det +-1 (exact, integral)."""
        h = hnf(self)
        assert h.h == IntMat.identity(self.rows), "matrix is not unimodular"
        return h.u

    def charpoly(self):
        """Coefficients [c_0, ..., c_n] of det(xI - A) = sum c_i x^i
        (Faddeev-LeVerrier; exact integer divisions)."""
        assert self.is_square()
        n = self.rows
        coeffs = [0] * (n + 1)
        coeffs[n] = 1
        m = IntMat.identity(n)
        for k in range(1, n + 1):
            m = self * m
            trace = sum(m.data[i][i] for i in range(n))
            c = -trace // k
            assert c * k == -trace
            coeffs[n - k] = c
            if k < n:
                m = IntMat([[m.data[i][j] + (c if i == j else 0) for j in range(n)]
                            for i in range(n)])
        return tuple(coeffs)


# ---------------------------------------------------------------------------
# Hermite normal form (row style)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HermiteForm:
    h: IntMat
    u: IntMat  # unimodular, u * a = h

    @property
    def rank(self):
        return sum(1 for row in self.h.data if any(row))

    @property
    def pivots(self):
        out = []
        for row in self.h.data:
            for j, x in enumerate(row):
                if x:
                    out.append(j)
                    break
        return out


def hnf(a: IntMat) -> HermiteForm:
    """Canonical row-style Hermite normal form h = u*a.

    Pivots positive, entries above each pivot reduced into [0, pivot),
    zero rows at the bottom.
    """
    m, n = a.rows, a.cols
    h = [list(row) for row in a.data]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    r = 0  # current pivot row
    for j in range(n):
        # euclidean elimination in column j below row r
        while True:
            nz = [i for i in range(r, m) if h[i][j] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(h[i][j]), i))
            if piv != r:
                h[r], h[piv] = h[piv], h[r]
                u[r], u[piv] = u[piv], u[r]
            done = True
            for i in range(r + 1, m):
                if h[i][j] != 0:
                    q = h[i][j] // h[r][j]
                    if q:
                        h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                        u[i] = [x - q * y for x, y in zip(u[i], u[r])]
                    if h[i][j] != 0:
                        done = False
            if done:
                break
        if r < m and h[r][j] != 0:
            if h[r][j] < 0:
                h[r] = [-x for x in h[r]]
                u[r] = [-x for x in u[r]]
            # reduce the entries above the pivot into [0, pivot)
            p = h[r][j]
            for i in range(r):
                q = h[i][j] // p
                if q:
                    h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[r])]
            r += 1
            if r == m:
                break
    return HermiteForm(IntMat(h), IntMat(u))


def kernel_basis(a: IntMat) -> IntMat:
    """Z-basis of the left kernel {x : x*a = 0}; saturated by construction
    (the basis rows extend to a basis of the ambient Z^m)."""
    f = hnf(a)
    rank = f.rank
    return IntMat(f.u.data[rank:]) if rank < a.rows else IntMat.zeros(0, a.rows)


def row_space_contains(a: IntMat, v) -> bool:
    """Is the integer row vector v in the Z-row-span of a?"""
    return solve_left(a, IntMat([list(v)])) is not None


def solve_left(a: IntMat, b: IntMat):
    """Solve x * a = b over Z; returns x (b.rows x a.rows) or None."""
    f = hnf(a)
    h, u = f.h, f.u
    pivots = f.pivots
    rank = len(pivots)
    xs = []
    for brow in b.data:
        resid = list(brow)
        coeff = [0] * a.rows
        for k, j in enumerate(pivots):
            q, rem = divmod(resid[j], h.data[k][j])
            if rem:
                return None
            if q:
                coeff[k] = q
                resid = [x - q * y for x, y in zip(resid, h.data[k])]
        if any(resid):
            return None
        xs.append(coeff)
    x = IntMat(xs) if xs else IntMat.zeros(0, a.rows)
    return x * u if x.rows else IntMat.zeros(0, a.rows)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmithForm:
    d: tuple      # invariant factors, divisibility chain, zeros trailing
    u: IntMat
    v: IntMat     # u * a * v = diag(d)


def _min_pivot(a, t, m, n):
    """Smallest-|entry| nonzero pivot in the trailing block, ties broken
    by (row, col) lexicographic order."""
    best = None
    for i in range(t, m):
        arow = a[i]
        for j in range(t, n):
            x = arow[j]
            if x:
                key = (abs(x), i, j)
                if best is None or key < best[0]:
                    best = (key, i, j)
                    if abs(x) == 1:
                        return best[1], best[2]
    return (None, None) if best is None else (best[1], best[2])


def snf(a: IntMat) -> SmithForm:
    """Smith normal form u*a*v = diag(d) with d a divisibility chain.

    Deterministic: pivot is the minimal-absolute-value entry of the
    trailing block with (row, col) lexicographic tie-break.
    """
    m, n = a.rows, a.cols
    w = [list(row) for row in a.data]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        w[i], w[k] = w[k], w[i]
        u[i], u[k] = u[k], u[i]

    def swap_cols(j, k):
        for row in w:
            row[j], row[k] = row[k], row[j]
        for row in v:
            row[j], row[k] = row[k], row[j]

    def addmul_row(dst, src, q):
        w[dst] = [x + q * y for x, y in zip(w[dst], w[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def addmul_col(dst, src, q):
        for row in w:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    t = 0
    while t < m and t < n:
        i, j = _min_pivot(w, t, m, n)
        if i is None:
            break
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)
        while True:
            # clear column t
            progress = False
            for i in range(t + 1, m):
                if w[i][t]:
                    q = w[i][t] // w[t][t]
                    addmul_row(i, t, -q)
                    if w[i][t]:
                        swap_rows(t, i)
                        progress = True
            if progress:
                continue
            # clear row t
            for j in range(t + 1, n):
                if w[t][j]:
                    q = w[t][j] // w[t][t]
                    addmul_col(j, t, -q)
                    if w[t][j]:
                        swap_cols(t, j)
                        progress = True
            if progress:
                continue
            # pivot must divide the whole trailing block
            p = w[t][t]
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if w[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            addmul_row(t, bad, 1)
        if w[t][t] < 0:
            w[t] = [-x for x in w[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    d = tuple(w[i][i] if i < n else 0 for i in range(min(m, n)))
    # zero factors already trail because elimination stops when block is zero
    return SmithForm(d, IntMat(u), IntMat(v))


@dataclass(frozen=True)
class AbelianInvariants:
    """A finitely generated abelian group: Z^free_rank + sum Z/f_i with
    f_i > 1 forming a divisibility chain."""
    factors: tuple
    free_rank: int = 0

    def __post_init__(self):
        for a, b in zip(self.factors, self.factors[1:]):
            assert b % a == 0, self.factors
        assert all(f > 1 for f in self.factors)

    def is_trivial(self):
        return not self.factors and self.free_rank == 0

    @property
    def order(self):
        assert self.free_rank == 0
        n = 1
        for f in self.factors:
            n *= f
        return n

    def __str__(self):
        parts = ["Z"] * self.free_rank + ["Z/%d" % f for f in self.factors]
        return " + ".join(parts) if parts else "0"


TRIVIAL_GROUP = AbelianInvariants(())


def cokernel_invariants(sub: IntMat, amb_rank: int) -> AbelianInvariants:
    """Invariant factors of Z^amb_rank / rowspan(sub)."""
    if sub.rows == 0:
        return AbelianInvariants((), amb_rank)
    assert sub.cols == amb_rank
    d = snf(sub).d
    nonzero = [x for x in d if x]
    return AbelianInvariants(tuple(x for x in nonzero if x > 1),
                             amb_rank - len(nonzero))


def quotient_invariants(big: IntMat, small: IntMat) -> AbelianInvariants:
    """Invariants of rowspan(big)/rowspan(small); small must lie in big."""
    if big.rows == 0:
        assert small.rows == 0 or small.is_zero()
        return TRIVIAL_GROUP
    if small.rows == 0:
        return AbelianInvariants((), hnf(big).rank)
    assert hnf(big).rank == big.rows, "big must be a basis (independent rows)"
    x = solve_left(big, small)
    assert x is not None, "small is not contained in the span of big"
    return cokernel_invariants(x, big.rows)


def saturate(a: IntMat) -> IntMat:
    """Basis of the saturation (Q-span intersect Z^n) of the row span of a."""
    if a.rows == 0:
        return a
    k = kernel_basis(a.transpose())
    # rows of a span a full-rank sublattice of the right-kernel-orthogonal
    # complement; the saturation is the left kernel of k^T
    if k.rows == 0:
        return IntMat.identity(a.cols)
    return kernel_basis(k.transpose())


# ---------------------------------------------------------------------------
# LLL reduction (exact, on integer row vectors)
# ---------------------------------------------------------------------------

def lll_reduce(rows, delta=Fraction(3, 4)):
    """LLL-reduce a list of linearly independent integer vectors.

    Returns (reduced rows, transform) with transform * rows_in = rows_out.
    Exact rational Gram-Schmidt; fine for the small dimensions used here.
    """
    b = [list(map(int, r)) for r in rows]
    n = len(b)
    if n <= 1:
        return [list(r) for r in b], IntMat.identity(n)
    t = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def dot(x, y):
        return sum(a * c for a, c in zip(x, y))

    def gram():
        mu = [[Fraction(0)] * n for _ in range(n)]
        bstar = [[Fraction(x) for x in b[0]]]
        norms = [Fraction(dot(b[0], b[0]))]
        for i in range(1, n):
            vi = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = (Fraction(dot(b[i], b[j])) -
                            sum(mu[i][k] * mu[j][k] * norms[k] for k in range(j))) / norms[j] \
                    if norms[j] else Fraction(0)
                vi = [a - mu[i][j] * c for a, c in zip(vi, bstar[j])]
            bstar.append(vi)
            norms.append(sum(x * x for x in vi))
        return mu, norms

    mu, norms = gram()
    k = 1
    while k < n:
        # size reduction
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                t[k] = [x - q * y for x, y in zip(t[k], t[j])]
                for l in range(j + 1):
                    mu[k][l] -= q * mu[j][l]
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            t[k], t[k - 1] = t[k - 1], t[k]
            mu, norms = gram()
            k = max(k - 1, 1)
    return b, IntMat(t)


# ---------------------------------------------------------------------------
# Unimodular element search in a matrix lattice
# ---------------------------------------------------------------------------

def _make_unimodular_test(size):
    """Determinant-is-+-1 test with a floating-point prescreen for larger
    matrices (exact Bareiss only on near-unimodular candidates)."""
    if size < 8:
        return lambda m: m.det() in (1, -1)
    import numpy as _np

    def test(m):
        arr = _np.array(m.data, dtype=float)
        sign, logdet = _np.linalg.slogdet(arr)
        if sign == 0 or abs(logdet) > 0.5:
            return False
        return m.det() in (1, -1)

    return test


def unimodular_in_lattice(basis, bound=20000, rng_seed=0):
    """Search the Z-span of `basis` (square IntMats of equal size) for an
    element of determinant +-1.

    The flattened basis is LLL-reduced, then coefficient boxes of growing
    radius are enumerated; `bound` counts determinant evaluations.  Returns
    the element found, or None once the budget is exhausted ("unknown",
    never "no").
    """
    basis = [m for m in basis if not m.is_zero()]
    if not basis:
        return None
    size = basis[0].rows
    assert all(m.is_square() and m.rows == size for m in basis)
    flat = [[x for row in m.data for x in row] for m in basis]
    # drop Z-linear dependencies via HNF
    f = hnf(IntMat(flat))
    indep = [row for row in f.h.data if any(row)]
    # exact-rational LLL is only worthwhile for modest flattened dimensions
    if size * size <= 600 and len(indep) <= 30:
        reduced, _ = lll_reduce(indep)
    else:
        reduced = indep
    mats = [IntMat.from_flat(size, size, row) for row in reduced]
    d = len(mats)

    evals = 0
    is_unimodular = _make_unimodular_test(size)

    def check(coeffs):
        nonlocal evals
        m = None
        for c, bm in zip(coeffs, mats):
            if c == 0:
                continue
            term = bm.scale(c)
            m = term if m is None else m + term
        if m is None:
            return None
        evals += 1
        if is_unimodular(m):
            return m
        return None

    # single basis elements first
    for bm in mats:
        if evals >= bound:
            return None
        if is_unimodular(bm):
            return bm
        evals += 1

    # for larger matrices, prescreen whole coefficient batches through a
    # stacked float slogdet; only near-unimodular candidates get an exact
    # determinant
    batched = size >= 8

    def check_batch(coeff_rows):
        nonlocal evals
        import numpy as _np
        arr = _np.array(coeff_rows, dtype=float) @ stack.reshape(d, -1)
        arr = arr.reshape(len(coeff_rows), size, size)
        signs, logdets = _np.linalg.slogdet(arr)
        evals += len(coeff_rows)
        for i in _np.nonzero((signs != 0) & (_np.abs(logdets) < 0.5))[0]:
            m = None
            for c, bm in zip(coeff_rows[i], mats):
                if c:
                    term = bm.scale(int(c))
                    m = term if m is None else m + term
            if m is not None and m.det() in (1, -1):
                return m
        return None

    if batched:
        import numpy as _np
        stack = _np.array([[x for row in m.data for x in row]
                           for m in mats], dtype=float).reshape(d, size, size)

    radius = 1
    rng = random.Random(rng_seed)
    while evals < bound:
        n_box = (2 * radius + 1) ** d
        if n_box <= max(bound - evals, 0) and n_box <= 3 ** 12:
            it = itertools.product(range(-radius, radius + 1), repeat=d)
            if batched:
                rows = [c for c in it if any(c)]
                for k in range(0, len(rows), 4096):
                    hit = check_batch(rows[k:k + 4096])
                    if hit is not None:
                        return hit
                    if evals >= bound:
                        return None
            else:
                for coeffs in it:
                    hit = check(coeffs)
                    if hit is not None:
                        return hit
                    if evals >= bound:
                        return None
            radius += 1
        else:
            # box too large: randomized sampling at this radius
            n_rand = min(bound - evals, 20000 if batched else 2000)
            if batched:
                rows = [[rng.randint(-radius, radius) for _ in range(d)]
                        for _ in range(n_rand)]
                for k in range(0, len(rows), 4096):
                    hit = check_batch(rows[k:k + 4096])
                    if hit is not None:
                        return hit
            else:
                for _ in range(n_rand):
                    coeffs = [rng.randint(-radius, radius) for _ in range(d)]
                    hit = check(coeffs)
                    if hit is not None:
                        return hit
            radius += 1
    return None
