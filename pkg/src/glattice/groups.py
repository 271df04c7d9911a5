"""
Finite subgroups of GL_r(Z) as concrete objects.

Groups are generated by unimodular integer matrices and closed by breadth
first search; elements act on row vectors (x -> x*g), matching the row
convention used for all lattices in this package.  On top of the element
table live Cayley tables, subgroup-lattice enumeration up to conjugacy,
Sylow subgroups, double cosets and a GL_r(Z)-conjugacy search between two
matrix groups.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .intlinalg import (
    BudgetExhausted,
    IntMat,
    kernel_basis,
    unimodular_in_lattice,
)


class OrderCapExceeded(Exception):
    pass


class NotUnimodular(Exception):
    pass


class ProvablyDistinct(Exception):
    """Two matrix groups are certifiably not GL_r(Z)-conjugate."""


def _sort_key(m: IntMat):
    return tuple(x for row in m.data for x in row)


class FiniteMatrixGroup:
    """A finite subgroup of GL_r(Z) with full element list and Cayley table.

    Element 0 is the identity; the rest follow breadth-first discovery
    order with a lexicographic tie-break on matrix entries, so the element
    numbering is deterministic for a fixed generator list.
    """

    def __init__(self, rank, elements, generator_indices, name=None):
        self.rank = rank
        self.elements = tuple(elements)
        self.generator_indices = tuple(generator_indices)
        self.index = {m: i for i, m in enumerate(self.elements)}
        self.name = name
        self._table = None
        self._inv = None
        self._orders = None
        self._charpolys = None
        self._conj_class_of = None
        self._subgroups = None

    # -- basic data --------------------------------------------------------

    @property
    def order(self):
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return "FiniteMatrixGroup(rank=%d, order=%d%s)" % (
            self.rank, self.order, ", name=%r" % self.name if self.name else "")

    @property
    def table(self):
        """Cayley table: table[i][j] = index of elements[i] * elements[j]."""
        if self._table is None:
            self._table = self._build_table()
        return self._table

    def _build_table(self):
        n = self.order
        r = self.rank
        maxabs = max(m.max_abs() for m in self.elements)
        if n * r > 0 and maxabs < 2 ** 20:
            arr = np.array([[list(row) for row in m.data] for m in self.elements],
                           dtype=np.int64)
            keys = {m.data: i for i, m in enumerate(self.elements)}
            table = []
            for i in range(n):
                prods = arr[i] @ arr  # (n, r, r)
                row = [keys[tuple(map(tuple, p))] for p in prods.tolist()]
                table.append(row)
            return table
        table = []
        for i, a in enumerate(self.elements):
            table.append([self.index[a * b] for b in self.elements])
        return table

    @property
    def inv(self):
        if self._inv is None:
            t = self.table
            inv = [0] * self.order
            for i, row in enumerate(t):
                inv[i] = row.index(0)
            self._inv = inv
        return self._inv

    @property
    def element_orders(self):
        if self._orders is None:
            t = self.table
            orders = [1] * self.order
            for i in range(1, self.order):
                k, x = 1, i
                while x != 0:
                    x = t[x][i]
                    k += 1
                orders[i] = k
            self._orders = orders
        return self._orders

    @property
    def charpolys(self):
        if self._charpolys is None:
            self._charpolys = [m.charpoly() for m in self.elements]
        return self._charpolys

    @property
    def conj_class_of(self):
        """conj_class_of[i] = smallest element index conjugate to i."""
        if self._conj_class_of is None:
            t, inv = self.table, self.inv
            cls = [-1] * self.order
            for i in range(self.order):
                if cls[i] >= 0:
                    continue
                orbit = {i}
                frontier = [i]
                while frontier:
                    x = frontier.pop()
                    for g in range(self.order):
                        y = t[t[g][x]][inv[g]]
                        if y not in orbit:
                            orbit.add(y)
                            frontier.append(y)
                for y in orbit:
                    cls[y] = i
            self._conj_class_of = cls
        return self._conj_class_of

    def class_sizes(self):
        sizes = {}
        for c in self.conj_class_of:
            sizes[c] = sizes.get(c, 0) + 1
        return sizes

    def mul(self, i, j):
        return self.table[i][j]

    def conj(self, g, x):
        """Index of elements[g] * elements[x] * elements[g]^-1."""
        t = self.table
        return t[t[g][x]][self.inv[g]]

    def conjugate_set(self, members, g):
        t, inv = self.table, self.inv
        gi = inv[g]
        row = t[g]
        return frozenset(t[row[x]][gi] for x in members)

    def closure_indices(self, gens):
        """Subgroup of element indices generated by the given indices."""
        t = self.table
        members = {0}
        frontier = [0]
        gens = [g for g in gens if g]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = t[x][g]
                if y not in members:
                    members.add(y)
                    frontier.append(y)
        return frozenset(members)

    def generating_set(self, members):
        """Small generating sequence for a subgroup given by member indices."""
        chosen = []
        have = frozenset([0])
        for x in sorted(members):
            if x not in have:
                chosen.append(x)
                have = self.closure_indices(chosen)
                if len(have) == len(members):
                    break
        return chosen

    def subgroup(self, members):
        return Subgroup(self, frozenset(members))

    def full_subgroup(self):
        return Subgroup(self, frozenset(range(self.order)))

    def trivial_subgroup(self):
        return Subgroup(self, frozenset([0]))


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteMatrixGroup
    members: frozenset

    def __post_init__(self):
        assert 0 in self.members

    @property
    def order(self):
        return len(self.members)

    @property
    def sorted_members(self):
        return tuple(sorted(self.members))

    def generators(self):
        return self.parent.generating_set(self.members)

    def generator_matrices(self):
        return [self.parent.elements[i] for i in self.generators()]

    def matrices(self):
        return [self.parent.elements[i] for i in self.sorted_members]

    def as_group(self, name=None):
        """The subgroup as a standalone FiniteMatrixGroup (same matrices)."""
        elems = sorted((self.parent.elements[i] for i in self.members),
                       key=lambda m: (m != IntMat.identity(self.parent.rank),
                                      _sort_key(m)))
        gens = self.generators()
        gen_pos = [elems.index(self.parent.elements[i]) for i in gens]
        return FiniteMatrixGroup(self.parent.rank, elems, gen_pos, name=name)

    def contains_index(self, i):
        return i in self.members

    def is_normal(self):
        g = self.parent
        for s in g.generator_indices:
            if g.conjugate_set(self.members, s) != self.members:
                return False
        return True

    def conjugate_by(self, g_idx):
        return Subgroup(self.parent, self.parent.conjugate_set(self.members, g_idx))

    def normalizer_members(self):
        g = self.parent
        return [x for x in range(g.order)
                if g.conjugate_set(self.members, x) == self.members]

    def __contains__(self, other):
        return other.members <= self.members

    def __eq__(self, other):
        return self.parent is other.parent and self.members == other.members

    def __hash__(self):
        return hash((id(self.parent), self.members))

    def __repr__(self):
        return "Subgroup(order=%d of %r)" % (self.order, self.parent)


# ---------------------------------------------------------------------------
# closure
# ---------------------------------------------------------------------------

def closure(generators, order_cap=4000, name=None) -> FiniteMatrixGroup:
    """Close a list of unimodular matrices to a finite matrix group.

    Breadth-first: identity first, then round by round, each round's new
    elements sorted lexicographically by entries.  Raises OrderCapExceeded
    if the cap is passed (the input may generate an infinite group).
    """
    gens = [g if isinstance(g, IntMat) else IntMat(g) for g in generators]
    assert gens, "need at least one generator"
    r = gens[0].rows
    for g in gens:
        if not (g.is_square() and g.rows == r):
            raise ValueError("generators must be square of equal rank")
        if not g.is_unimodular():
            raise NotUnimodular(repr(g))
    ident = IntMat.identity(r)
    elements = [ident]
    seen = {ident}
    frontier = [ident]
    while frontier:
        new = set()
        for x in frontier:
            for g in gens:
                y = x * g
                if y not in seen and y not in new:
                    new.add(y)
        new = sorted(new, key=_sort_key)
        for y in new:
            seen.add(y)
            elements.append(y)
            if len(elements) > order_cap:
                raise OrderCapExceeded("order cap %d exceeded" % order_cap)
        frontier = new
    gen_idx = []
    index = {m: i for i, m in enumerate(elements)}
    for g in gens:
        i = index[g]
        if i not in gen_idx:
            gen_idx.append(i)
    return FiniteMatrixGroup(r, elements, gen_idx, name=name)


# ---------------------------------------------------------------------------
# subgroup lattice
# ---------------------------------------------------------------------------

@dataclass
class SubgroupClass:
    representative: Subgroup
    orbit: tuple  # of frozensets, includes representative.members

    @property
    def size(self):
        return len(self.orbit)


@dataclass
class SubgroupClassification:
    group: FiniteMatrixGroup
    classes: list  # of SubgroupClass, sorted by (order, sorted members)

    def total_subgroups(self):
        return sum(c.size for c in self.classes)

    def class_of(self, members):
        members = frozenset(members)
        for c in self.classes:
            if members in c.orbit:
                return c
        raise KeyError("not a subgroup of this classification")

    def representatives(self):
        return [c.representative for c in self.classes]


def _subgroup_orbit(g, members):
    orbit = {members}
    frontier = [members]
    gens = g.generator_indices
    while frontier:
        s = frontier.pop()
        for x in gens:
            c = g.conjugate_set(s, x)
            if c not in orbit:
                orbit.add(c)
                frontier.append(c)
    return orbit


def all_subgroups(g: FiniteMatrixGroup) -> SubgroupClassification:
    """All subgroups of g, grouped into conjugacy classes.

    Extension search over class representatives: every subgroup arises by
    repeatedly adjoining one prime-power-order element, so extending each
    known class representative by (normalizer-orbit representatives of)
    such elements finds every class.  No solvability assumption.
    """
    if g._subgroups is not None:
        return g._subgroups
    n = g.order
    t = g.table
    orders = g.element_orders
    pp_elements = [i for i in range(1, n) if _is_prime_power(orders[i])]

    trivial = frozenset([0])
    known = {trivial: 0}            # member set -> class id
    class_reps = [trivial]          # class id -> canonical member set
    class_orbits = [{trivial}]
    class_gens = [[]]
    queue = [0]
    while queue:
        cid = queue.pop(0)
        h = class_reps[cid]
        hgens = class_gens[cid]
        if len(h) == n:
            continue
        norm = [x for x in range(n) if g.conjugate_set(h, x) == h]
        norm_gens = g.generating_set(frozenset(norm)) if len(norm) > 1 else []
        seen_x = set(h)
        for x in pp_elements:
            if x in seen_x:
                continue
            # mark the whole N(H)-conjugacy orbit of x: all give conjugate
            # (here: equal-class) extensions
            orbit_x = {x}
            fx = [x]
            while fx:
                y = fx.pop()
                for s in norm_gens:
                    z = g.conj(s, y)
                    if z not in orbit_x:
                        orbit_x.add(z)
                        fx.append(z)
            seen_x |= orbit_x
            s = g.closure_indices(hgens + [x])
            if s in known:
                continue
            orbit = _subgroup_orbit(g, s)
            rep = min(orbit, key=lambda m: tuple(sorted(m)))
            new_id = len(class_reps)
            class_reps.append(rep)
            class_orbits.append(orbit)
            class_gens.append(g.generating_set(rep))
            for m in orbit:
                known[m] = new_id
            queue.append(new_id)

    classes = [
        SubgroupClass(Subgroup(g, rep), tuple(sorted(orb, key=lambda m: tuple(sorted(m)))))
        for rep, orb in zip(class_reps, class_orbits)
    ]
    classes.sort(key=lambda c: (c.representative.order,
                                c.representative.sorted_members))
    result = SubgroupClassification(g, classes)
    g._subgroups = result
    return result


def _is_prime_power(k):
    if k < 2:
        return False
    p = _least_prime_factor(k)
    while k % p == 0:
        k //= p
    return k == 1


def _least_prime_factor(k):
    i = 2
    while i * i <= k:
        if k % i == 0:
            return i
        i += 1
    return k


def sylow(g: FiniteMatrixGroup, p: int) -> Subgroup:
    """A Sylow p-subgroup of g (canonical: the lexicographically least
    member set in its conjugacy class)."""
    n = g.order
    target = 1
    m = n
    while m % p == 0:
        m //= p
        target *= p
    members = frozenset([0])
    gens = []
    orders = g.element_orders
    while len(members) < target:
        norm = [x for x in range(n) if g.conjugate_set(members, x) == members]
        x = next(i for i in norm
                 if i not in members and _is_power_of(orders[i], p))
        gens.append(x)
        members = g.closure_indices(gens)
    rep = min(_subgroup_orbit(g, members), key=lambda s: tuple(sorted(s)))
    return Subgroup(g, rep)


def _is_power_of(k, p):
    while k % p == 0:
        k //= p
    return k == 1


# ---------------------------------------------------------------------------
# double cosets
# ---------------------------------------------------------------------------

def double_cosets(g: FiniteMatrixGroup, a: Subgroup, b: Subgroup):
    """Representatives of A\\G/B with the intersections A n xBx^-1.

    Returns a list of (representative index, Subgroup a n b^x) in order of
    least representative.
    """
    t, inv = g.table, g.inv
    n = g.order
    seen = [False] * n
    out = []
    for x in range(n):
        if seen[x]:
            continue
        coset = set()
        for ai in a.members:
            ax = t[ai][x]
            for bi in b.members:
                coset.add(t[ax][bi])
        for y in coset:
            seen[y] = True
        xinv = inv[x]
        bx = frozenset(t[t[x][bi]][xinv] for bi in b.members)
        inter = a.members & bx
        out.append((x, Subgroup(g, inter)))
    return out


# ---------------------------------------------------------------------------
# structure probe
# ---------------------------------------------------------------------------

@dataclass
class StructureProbe:
    order: int
    is_cyclic: bool
    is_abelian: bool
    sylows_all_cyclic: bool
    center: Subgroup
    normal_subgroups: list = field(default_factory=list)


def structure_probe(g: FiniteMatrixGroup, with_normal_subgroups=True) -> StructureProbe:
    n = g.order
    t = g.table
    orders = g.element_orders
    is_cyclic = any(o == n for o in orders)
    is_abelian = all(t[i][j] == t[j][i]
                     for i in g.generator_indices for j in g.generator_indices)
    primes = _prime_factors(n)
    syl_cyc = all(_subgroup_is_cyclic(g, sylow(g, p)) for p in primes)
    center = frozenset(i for i in range(n)
                       if all(t[i][s] == t[s][i] for s in g.generator_indices))
    normals = []
    if with_normal_subgroups:
        cls = all_subgroups(g)
        normals = [c.representative for c in cls.classes if c.size == 1]
    return StructureProbe(n, is_cyclic, is_abelian, syl_cyc,
                          Subgroup(g, center), normals)


def _subgroup_is_cyclic(g, h: Subgroup):
    orders = g.element_orders
    return any(orders[i] == h.order for i in h.members)


def _prime_factors(n):
    out = []
    k = 2
    while k * k <= n:
        if n % k == 0:
            out.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# abstract isomorphisms and GL_r(Z) conjugacy
# ---------------------------------------------------------------------------

def _iso_gen_data(g1: FiniteMatrixGroup):
    """Deterministic small generating sequence for isomorphism search."""
    gens = g1.generating_set(frozenset(range(g1.order)))
    return gens


def _hom_extends(g1, g2, gens, images):
    """If gens -> images extends to a homomorphism g1 -> g2, return the full
    image map (list), else None.  Defined by breadth-first word evaluation
    with consistency checking."""
    t1, t2 = g1.table, g2.table
    f = [-1] * g1.order
    f[0] = 0
    frontier = [0]
    while frontier:
        x = frontier.pop()
        for a, b in zip(gens, images):
            y = t1[x][a]
            fy = t2[f[x]][b]
            if f[y] == -1:
                f[y] = fy
                frontier.append(y)
            elif f[y] != fy:
                return None
    if -1 in f:
        return None  # gens do not generate g1 (should not happen)
    return f


def iter_isomorphisms(g1: FiniteMatrixGroup, g2: FiniteMatrixGroup,
                      match_charpoly=True, limit=None):
    """Yield isomorphisms g1 -> g2 as full image maps.

    When match_charpoly is set, generator images are constrained to share
    the characteristic polynomial of their preimage — the right notion for
    GL_r(Z)-conjugacy, where conjugation preserves characteristic
    polynomials elementwise.
    """
    if g1.order != g2.order:
        return
    n = g1.order
    gens = _iso_gen_data(g1)
    if not gens:
        yield [0] * 1
        return
    o1, o2 = g1.element_orders, g2.element_orders
    cs1 = {i: s for i, s in _class_size_map(g1).items()}
    cs2 = {i: s for i, s in _class_size_map(g2).items()}
    cp1 = g1.charpolys if match_charpoly else None
    cp2 = g2.charpolys if match_charpoly else None

    def candidates(a):
        for b in range(n):
            if o2[b] != o1[a]:
                continue
            if cs2[b] != cs1[a]:
                continue
            if match_charpoly and cp2[b] != cp1[a]:
                continue
            yield b

    count = 0
    t1, t2 = g1.table, g2.table

    subdomains = [g1.closure_indices(gens[:d + 1]) for d in range(len(gens))]

    def extend(depth, partial_f):
        nonlocal count
        if limit is not None and count >= limit:
            return
        if depth == len(gens):
            count += 1
            yield list(partial_f)
            return
        a = gens[depth]
        domain = subdomains[depth]
        prev_imgs = [partial_f[g] for g in gens[:depth]]
        for b in candidates(a):
            f = _hom_extends_on(g1, g2, gens[:depth + 1], prev_imgs + [b], domain)
            if f is None:
                continue
            if match_charpoly and any(cp1[x] != cp2[f[x]] for x in domain):
                continue
            if len(frozenset(f[x] for x in domain)) != len(domain):
                continue
            yield from extend(depth + 1, f)
            if limit is not None and count >= limit:
                return

    f0 = [-1] * n
    f0[0] = 0
    yield from extend(0, f0)


def _hom_extends_on(g1, g2, gens, images, domain):
    """Extend gens -> images to a homomorphism on the subgroup `domain`
    of g1; returns the image map (with -1 outside domain) or None."""
    t1, t2 = g1.table, g2.table
    f = [-1] * g1.order
    f[0] = 0
    frontier = [0]
    while frontier:
        x = frontier.pop()
        for a, b in zip(gens, images):
            y = t1[x][a]
            fy = t2[f[x]][b]
            if f[y] == -1:
                f[y] = fy
                frontier.append(y)
            elif f[y] != fy:
                return None
    for x in domain:
        if f[x] == -1:
            return None
    return f


def _class_size_map(g):
    cls = g.conj_class_of
    sizes = {}
    for c in cls:
        sizes[c] = sizes.get(c, 0) + 1
    return {i: sizes[cls[i]] for i in range(g.order)}


def intertwiner_lattice(g1, g2, gens, images):
    """Basis of {X : X * rho1(s) = rho2(f(s)) * X for the given generators}."""
    r = g1.rank
    cols = []
    for s, b in zip(gens, images):
        a_mat = g1.elements[s]
        b_mat = g2.elements[b]
        # unknown X (r x r, row-major); equation X*A - B*X = 0
        for i in range(r):
            for k in range(r):
                col = [0] * (r * r)
                for j in range(r):
                    col[i * r + j] += a_mat.data[j][k]
                    col[j * r + k] -= b_mat.data[i][j]
                cols.append(col)
    if not cols:
        return [IntMat.identity(r)]
    constraint = IntMat([[col[e] for col in cols] for e in range(r * r)])
    kern = kernel_basis(constraint)
    return [IntMat.from_flat(r, r, row) for row in kern.data]


def glz_conjugate(g1: FiniteMatrixGroup, g2: FiniteMatrixGroup,
                  budget=20000, iso_limit=2000):
    """Search for X in GL_r(Z) with X g1 X^-1 = g2 (as matrix sets).

    Three-valued: returns X on success, raises ProvablyDistinct when an
    invariant rules conjugacy out (order or Q-character multiset mismatch,
    or no characteristic-polynomial-preserving abstract isomorphism
    exists), raises BudgetExhausted otherwise.
    """
    if g1.rank != g2.rank:
        raise ProvablyDistinct("rank mismatch")
    if g1.order != g2.order:
        raise ProvablyDistinct("order mismatch")
    if sorted(g1.charpolys) != sorted(g2.charpolys):
        raise ProvablyDistinct("characteristic polynomial multiset mismatch")
    gens = _iso_gen_data(g1)
    if not gens:  # trivial groups
        return IntMat.identity(g1.rank)
    found_iso = False
    per_iso = max(budget // 20, 500)
    spent = 0
    iso_count = 0
    any_open = False
    for f in iter_isomorphisms(g1, g2, match_charpoly=True, limit=iso_limit):
        found_iso = True
        iso_count += 1
        images = [f[s] for s in gens]
        basis = intertwiner_lattice(g1, g2, gens, images)
        basis = [b for b in basis if not b.is_zero()]
        # cheap mod-p obstruction first: if the determinant form vanishes
        # identically mod some small prime, this isomorphism can never
        # yield a unimodular intertwiner -- skip the search entirely
        if not basis or _det_obstructed_mod_p(basis):
            continue
        any_open = True
        allow = min(per_iso, budget - spent)
        if allow <= 0:
            raise BudgetExhausted("conjugacy search budget exhausted")
        x = unimodular_in_lattice(basis, bound=allow)
        spent += allow
        if x is not None:
            # X * rho1(s) * X^-1 = rho2(f(s)); verify set equality
            xinv = x.inverse_unimodular()
            mapped = {x * m * xinv for m in g1.elements}
            assert mapped == set(g2.elements)
            return x
    if not found_iso:
        raise ProvablyDistinct(
            "no characteristic-polynomial-preserving isomorphism exists")
    # when the enumeration was exhaustive and every isomorphism was
    # obstructed, conjugacy is impossible
    if iso_count < iso_limit and not any_open:
        raise ProvablyDistinct(
            "no isomorphism admits a unimodular intertwiner "
            "(determinant obstruction mod a small prime)")
    raise BudgetExhausted("no unimodular intertwiner found within budget")


def _det_mod_p(m, p):
    n = len(m)
    a = [row[:] for row in m]
    det = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] % p), None)
        if piv is None:
            return 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det = (det * a[col][col]) % p
        inv = pow(a[col][col], p - 2, p)
        for r in range(col + 1, n):
            f = (a[r][col] * inv) % p
            if f:
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[col])]
    return det % p


def _det_obstructed_mod_p(basis, primes=(2, 3, 5), cap=2 ** 21):
    """True when det(sum c_i B_i) = 0 mod p for all coefficients over
    F_p, for some listed prime p — then the Z-span of `basis` contains
    no unimodular matrix."""
    if not basis:
        return True
    size = basis[0].rows
    d = len(basis)
    for p in primes:
        if p ** d > cap:
            continue
        flats = [[x % p for row in b.data for x in row] for b in basis]
        hit = False
        for coeffs in itertools.product(range(p), repeat=d):
            flat = [sum(c * f[k] for c, f in zip(coeffs, flats)) % p
                    for k in range(size * size)]
            m = [flat[i * size:(i + 1) * size] for i in range(size)]
            if _det_mod_p(m, p):
                hit = True
                break
        if not hit:
            return True
    return False
