"""
G-lattices: finite-rank Z-lattices with an action of a finite matrix group.

The action convention is on rows throughout: an element g acts on a row
vector v as v * act(g), and act(ab) = act(a) * act(b).  Constructors cover
the standard lattice of a matrix group, permutation lattices Z[X],
augmentation ideals I_X, the quotients J_X = Z[X]/Z(sum), rank-one sign
lattices, duals, direct sums, tensor products, restriction, induction and
inflation.  On top of these: fixed sublattices, norm maps, Tate cohomology
in degrees -1, 0, 1, flasque/coflasque predicates, Hom-lattices,
isomorphism search and (sign-)permutation-basis recognition.

Tate orientation.  Here H^0(H, M) = M^H / N_H(M) and
H^-1(H, M) = ker(N_H) / I_H(M), with degree +1 computed through duality
H^1(H, M) = H^-1(H, M*).  (Some sources display the two quotients the
other way round; the orientation fixed here is the one under which
H^0(C2, Z) = Z/2 and permutation lattices are flasque and coflasque.)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .intlinalg import (
    AbelianInvariants,
    BudgetExhausted,
    IntMat,
    TRIVIAL_GROUP,
    cokernel_invariants,
    hnf,
    kernel_basis,
    solve_left,
    unimodular_in_lattice,
)
from .groups import FiniteMatrixGroup, ProvablyDistinct, Subgroup, all_subgroups


class NotIndexTwoNormal(Exception):
    pass


# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------

class GLattice:
    """A lattice Z^rank with a right row-action of a finite matrix group."""

    __slots__ = ("group", "rank", "_action", "name")

    def __init__(self, group: FiniteMatrixGroup, action, name=None, check=True):
        self.group = group
        self._action = tuple(action)
        assert len(self._action) == group.order
        self.rank = self._action[0].rows if self._action else 0
        self.name = name
        if check and group.order > 1:
            self._check_on_generators()

    def _check_on_generators(self):
        assert self._action[0] == IntMat.identity(self.rank)
        t = self.group.table
        for s in self.group.generator_indices:
            a_s = self._action[s]
            for x in range(self.group.order):
                assert self._action[t[x][s]] == self._action[x] * a_s, \
                    "action is not a homomorphism"

    def check_full_table(self):
        """Homomorphism property over the full Cayley table (slow; tests)."""
        t = self.group.table
        n = self.group.order
        for i in range(n):
            for j in range(n):
                if self._action[t[i][j]] != self._action[i] * self._action[j]:
                    return False
        return True

    def act(self, i) -> IntMat:
        return self._action[i]

    @property
    def action(self):
        return self._action

    def character(self):
        """Trace of the action per element index (the Q-character)."""
        return tuple(sum(a.data[i][i] for i in range(self.rank))
                     for a in self._action)

    def __eq__(self, other):
        return (isinstance(other, GLattice) and self.group is other.group
                and self._action == other._action)

    def __hash__(self):
        return hash((id(self.group), self._action))

    def __repr__(self):
        return "GLattice(rank=%d over order-%d group%s)" % (
            self.rank, self.group.order,
            ", name=%r" % self.name if self.name else "")


def lattice_from_gen_action(group: FiniteMatrixGroup, gen_images, name=None):
    """Build the full action from matrices for group.generator_indices."""
    n = group.order
    t = group.table
    action = [None] * n
    action[0] = IntMat.identity(gen_images[0].rows if gen_images else 0)
    gen_map = dict(zip(group.generator_indices, gen_images))
    frontier = [0]
    while frontier:
        x = frontier.pop()
        for s, a_s in gen_map.items():
            y = t[x][s]
            if action[y] is None:
                action[y] = action[x] * a_s
                frontier.append(y)
    assert all(a is not None for a in action)
    return GLattice(group, action, name=name)


@dataclass(frozen=True)
class GSet:
    """A finite right G-set: perms[g][i] = image of point i under g."""
    group: FiniteMatrixGroup
    points: int
    perms: tuple  # tuple (per element) of tuples of point images

    def __post_init__(self):
        assert len(self.perms) == self.group.order
        t = self.group.table
        for s in self.group.generator_indices:
            for x in range(self.group.order):
                pa = self.perms[x]
                ps = self.perms[s]
                assert self.perms[t[x][s]] == tuple(ps[pa[i]] for i in range(self.points))

    def orbits(self):
        seen = [False] * self.points
        out = []
        for i in range(self.points):
            if seen[i]:
                continue
            orb = sorted({p[i] for p in self.perms})
            for j in orb:
                seen[j] = True
            out.append(orb)
        return out

    def stabilizer(self, i) -> Subgroup:
        return Subgroup(self.group,
                        frozenset(g for g in range(self.group.order)
                                  if self.perms[g][i] == i))


@dataclass
class EquivariantMap:
    """f: source -> target on row vectors, f(v) = v * matrix."""
    source: GLattice
    target: GLattice
    matrix: IntMat

    def check(self):
        assert self.source.group is self.target.group
        for s in self.source.group.generator_indices:
            if self.source.act(s) * self.matrix != self.matrix * self.target.act(s):
                return False
        return True

    def compose(self, other: "EquivariantMap") -> "EquivariantMap":
        assert self.target is other.source or self.target == other.source
        return EquivariantMap(self.source, other.target, self.matrix * other.matrix)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def std_lattice(g: FiniteMatrixGroup, name=None) -> GLattice:
    """The lattice the matrix group acts on tautologically."""
    return GLattice(g, g.elements, name=name or (g.name and "std(%s)" % g.name))


def trivial_lattice(g: FiniteMatrixGroup, rank=1) -> GLattice:
    ident = IntMat.identity(rank)
    return GLattice(g, [ident] * g.order, name="Z^%d" % rank if rank != 1 else "Z")


def coset_transversal(g: FiniteMatrixGroup, h: Subgroup):
    """(reps, coset_of): right-coset transversal of h in g, cosets ordered
    (and represented) by least element index."""
    n = g.order
    t = g.table
    coset_of = [-1] * n
    reps = []
    for x in range(n):
        if coset_of[x] >= 0:
            continue
        idx = len(reps)
        reps.append(x)
        for hi in h.members:
            coset_of[t[hi][x]] = idx
    return reps, coset_of


def coset_gset(g: FiniteMatrixGroup, h: Subgroup) -> GSet:
    """Right-coset space of h in g, cosets ordered by least element index."""
    t = g.table
    reps, coset_of = coset_transversal(g, h)
    perms = tuple(tuple(coset_of[t[reps[i]][gg]] for i in range(len(reps)))
                  for gg in range(g.order))
    return GSet(g, len(reps), perms)


def perm_lattice(x: GSet, name=None) -> GLattice:
    n = x.points
    action = []
    for p in x.perms:
        action.append(IntMat([[1 if p[i] == j else 0 for j in range(n)]
                              for i in range(n)]))
    return GLattice(x.group, action, name=name)


def coset_lattice(g: FiniteMatrixGroup, h: Subgroup, name=None) -> GLattice:
    """Z[G/H], the transitive permutation lattice on cosets of h."""
    return perm_lattice(coset_gset(g, h), name=name or "Z[G/H(%d)]" % h.order)


def gset_isomorphism(a: GSet, b: GSet):
    """Equivariant point bijection a -> b, as a tuple phi (phi[i] = image
    of point i), or None if the G-sets are not isomorphic.

    Orbits are matched by their point stabilizers: two transitive G-sets
    are isomorphic iff the stabilizers are conjugate, and a base point of
    one whose stabilizer literally equals that of a base point of the
    other determines the bijection.
    """
    if a.points != b.points:
        return None
    n = a.group.order

    def orbits(x):
        seen = [False] * x.points
        out = []
        for p in range(x.points):
            if seen[p]:
                continue
            orb = sorted({x.perms[g][p] for g in range(n)})
            for q in orb:
                seen[q] = True
            out.append(orb)
        return out

    def stab(x, p):
        return frozenset(g for g in range(n) if x.perms[g][p] == p)

    phi = [None] * a.points
    used = set()
    borbs = orbits(b)
    for orb in orbits(a):
        s = stab(a, orb[0])
        match = None
        for bo in borbs:
            if bo[0] in used or len(bo) != len(orb):
                continue
            for q in bo:
                if stab(b, q) == s:
                    match = q
                    break
            if match is not None:
                used.update(bo)
                break
        if match is None:
            return None
        for g in range(n):
            phi[a.perms[g][orb[0]]] = b.perms[g][match]
    return tuple(phi)


def gset_from_permutation_matrices(g: FiniteMatrixGroup) -> GSet:
    """The defining G-set of a group of permutation matrices."""
    n = g.rank
    perms = []
    for m in g.elements:
        p = []
        for i in range(n):
            row = m.data[i]
            assert sorted(row) == [0] * (n - 1) + [1], "not a permutation matrix"
            p.append(row.index(1))
        perms.append(tuple(p))
    return GSet(g, n, tuple(perms))


def aug_ideal(x: GSet, name=None) -> GLattice:
    """I_X: kernel of the sum map Z[X] -> Z, basis {x_i - x_{i+1}}."""
    n = x.points
    if n <= 1:
        return GLattice(x.group, [IntMat.zeros(0, 0)] * x.group.order,
                        name=name, check=False)
    emb = IntMat([[1 if j == i else (-1 if j == i + 1 else 0) for j in range(n)]
                  for i in range(n - 1)])
    zl = perm_lattice(x)
    action = []
    for g in range(x.group.order):
        a = solve_left(emb, emb * zl.act(g))
        assert a is not None
        action.append(a)
    return GLattice(x.group, action, name=name)


def j_lattice(x: GSet, name=None) -> GLattice:
    """J_X = Z[X]/Z(sum of X), basis = images of the first n-1 points.

    The last point maps to minus the sum of the basis, so each action
    matrix is the corresponding permutation matrix with any row that
    would land on the last point replaced by (-1, ..., -1).
    """
    n = x.points
    if n <= 1:
        return GLattice(x.group, [IntMat.zeros(0, 0)] * x.group.order,
                        name=name, check=False)
    action = []
    for p in x.perms:
        rows = []
        for i in range(n - 1):
            j = p[i]
            if j < n - 1:
                rows.append([1 if k == j else 0 for k in range(n - 1)])
            else:
                rows.append([-1] * (n - 1))
        action.append(IntMat(rows))
    return GLattice(x.group, action, name=name)


def sign_lattice(g: FiniteMatrixGroup, n: Subgroup, name=None) -> GLattice:
    """Rank-1 lattice with kernel exactly the index-2 normal subgroup n."""
    if 2 * n.order != g.order:
        raise NotIndexTwoNormal("subgroup has index %d" % (g.order // n.order))
    for s in g.generator_indices:
        if g.conjugate_set(n.members, s) != n.members:
            raise NotIndexTwoNormal("subgroup is not normal")
    action = [IntMat([[1]]) if i in n.members else IntMat([[-1]])
              for i in range(g.order)]
    lat = GLattice(g, action, name=name)
    return lat


def dual(m: GLattice, name=None) -> GLattice:
    """Dual lattice; action matrices are inverse-transposes."""
    inv = m.group.inv
    action = [m.act(inv[i]).transpose() for i in range(m.group.order)]
    return GLattice(m.group, action, name=name or (m.name and "dual(%s)" % m.name))


def direct_sum(m: GLattice, n: GLattice, name=None) -> GLattice:
    assert m.group is n.group
    action = []
    for a, b in zip(m.action, n.action):
        rows = []
        for r in a.data:
            rows.append(list(r) + [0] * n.rank)
        for r in b.data:
            rows.append([0] * m.rank + list(r))
        action.append(IntMat(rows) if rows else IntMat.zeros(0, 0))
    return GLattice(m.group, action, name=name)


def direct_sum_many(lats, group=None, name=None) -> GLattice:
    if not lats:
        assert group is not None
        return GLattice(group, [IntMat.zeros(0, 0)] * group.order,
                        name=name, check=False)
    out = lats[0]
    for l in lats[1:]:
        out = direct_sum(out, l)
    out.name = name
    return out


def tensor(m: GLattice, n: GLattice, name=None) -> GLattice:
    """Kronecker-product action, left factor major in the basis order."""
    assert m.group is n.group
    action = [a.kron(b) for a, b in zip(m.action, n.action)]
    return GLattice(m.group, action, name=name, check=False)


def restrict(m: GLattice, h: Subgroup, hgroup: FiniteMatrixGroup = None,
             name=None) -> GLattice:
    """Restriction of m to the subgroup h (returned over h.as_group())."""
    assert h.parent is m.group
    sub = hgroup if hgroup is not None else h.as_group()
    action = [m.act(m.group.index[mat]) for mat in sub.elements]
    return GLattice(sub, action, name=name)


def induce(h: Subgroup, m: GLattice, name=None) -> GLattice:
    """Induced lattice over the parent of h; m lives over h.as_group()
    (or any group whose elements are exactly h's matrices).

    Basis blocks follow the right cosets of h ordered by least element
    index; block (j, j') of act(g) is act_m(t_j g t_j'^-1).
    """
    g = h.parent
    t, inv = g.table, g.inv
    # coset transversal
    coset_of = [-1] * g.order
    reps = []
    for x in range(g.order):
        if coset_of[x] >= 0:
            continue
        idx = len(reps)
        reps.append(x)
        for hi in h.members:
            coset_of[t[hi][x]] = idx
    k = len(reps)
    r = m.rank
    sub_index = {mat: i for i, mat in enumerate(m.group.elements)}
    action = []
    for gg in range(g.order):
        rows = [[0] * (k * r) for _ in range(k * r)]
        for j in range(k):
            x = t[reps[j]][gg]
            j2 = coset_of[x]
            h_idx = t[x][inv[reps[j2]]]
            a = m.act(sub_index[g.elements[h_idx]])
            for u in range(r):
                for v in range(r):
                    rows[j * r + u][j2 * r + v] = a.data[u][v]
        action.append(IntMat(rows) if rows else IntMat.zeros(0, 0))
    return GLattice(g, action, name=name, check=False)


def quotient_group(g: FiniteMatrixGroup, n: Subgroup):
    """(Q, proj): Q is g/n realized by permutation matrices on the cosets
    of n (the regular action of the quotient); proj maps element index of
    g to element index of Q."""
    assert n.is_normal() or all(
        g.conjugate_set(n.members, x) == n.members for x in range(g.order))
    x = coset_gset(g, n)
    mats = [IntMat([[1 if p[i] == j else 0 for j in range(x.points)]
                    for i in range(x.points)]) for p in x.perms]
    seen = {}
    elems = []
    proj = []
    for mat in mats:
        if mat not in seen:
            seen[mat] = len(elems)
            elems.append(mat)
        proj.append(seen[mat])
    # reorder deterministically: identity first, then lex
    order = sorted(range(len(elems)),
                   key=lambda i: (elems[i] != IntMat.identity(x.points),
                                  tuple(xx for row in elems[i].data for xx in row)))
    newpos = {old: newi for newi, old in enumerate(order)}
    elems = [elems[old] for old in order]
    proj = [newpos[i] for i in proj]
    gen_idx = []
    for s in g.generator_indices:
        if proj[s] not in gen_idx and proj[s] != 0:
            gen_idx.append(proj[s])
    if not gen_idx:
        gen_idx = [0]
    q = FiniteMatrixGroup(x.points, elems, gen_idx)
    return q, proj


def inflate(g: FiniteMatrixGroup, proj, m: GLattice, name=None) -> GLattice:
    """Inflation along a projection g -> m.group given as an index map."""
    action = [m.act(proj[i]) for i in range(g.order)]
    return GLattice(g, action, name=name)


# ---------------------------------------------------------------------------
# fixed points, norms, Tate cohomology
# ---------------------------------------------------------------------------

def fixed_sublattice(m: GLattice, h: Subgroup) -> IntMat:
    """Saturated Z-basis of M^H, in Hermite normal form (deterministic)."""
    assert h.parent is m.group
    gens = h.generators()
    if not gens or m.rank == 0:
        return IntMat.identity(m.rank)
    blocks = None
    for s in gens:
        d = m.act(s) - IntMat.identity(m.rank)
        blocks = d if blocks is None else blocks.hstack(d)
    k = kernel_basis(blocks)
    if k.rows == 0:
        return IntMat.zeros(0, m.rank)
    f = hnf(k)
    return IntMat(f.h.data[:f.rank])


def norm_matrix(m: GLattice, h: Subgroup) -> IntMat:
    total = IntMat.zeros(m.rank, m.rank)
    for i in sorted(h.members):
        total = total + m.act(i)
    return total


def _augmentation_image(m: GLattice, h: Subgroup) -> IntMat:
    """Stacked rows spanning I_H(M) = <v(act(g) - 1)>."""
    gens = h.generators()
    if not gens:
        return IntMat.zeros(0, m.rank)
    blocks = []
    ident = IntMat.identity(m.rank)
    for s in gens:
        blocks.append(m.act(s) - ident)
    out = blocks[0]
    for b in blocks[1:]:
        out = out.stack(b)
    return out


def tate(m: GLattice, h: Subgroup, k: int) -> AbelianInvariants:
    """Tate cohomology of h with coefficients in m, degree k in {-1,0,1}."""
    assert k in (-1, 0, 1)
    if m.rank == 0 or h.order == 1:
        return TRIVIAL_GROUP
    if k == 1:
        return tate(dual(m), h, -1)
    norm = norm_matrix(m, h)
    if k == 0:
        fix = fixed_sublattice(m, h)
        if fix.rows == 0:
            return TRIVIAL_GROUP
        x = solve_left(fix, norm)
        assert x is not None
        return _drop_free(cokernel_invariants(x, fix.rows))
    # k == -1
    ker = kernel_basis(norm)
    if ker.rows == 0:
        return TRIVIAL_GROUP
    img = _augmentation_image(m, h)
    # I_H(M) lies in ker(N): project its rows onto the kernel basis
    sel = [row for row in img.data]
    x = solve_left(ker, IntMat(sel)) if sel else IntMat.zeros(0, ker.rows)
    assert x is not None
    return _drop_free(cokernel_invariants(x, ker.rows))


def _drop_free(inv: AbelianInvariants) -> AbelianInvariants:
    assert inv.free_rank == 0, "Tate group must be finite"
    return inv


def subgroup_class_reps(g: FiniteMatrixGroup):
    return all_subgroups(g).representatives()


def is_flasque(m: GLattice) -> bool:
    """H^-1(H, M) = 0 for one representative per subgroup conjugacy class."""
    return all(tate(m, h, -1).is_trivial() for h in subgroup_class_reps(m.group))


def is_coflasque(m: GLattice) -> bool:
    """H^1(H, M) = 0 for one representative per subgroup conjugacy class."""
    md = dual(m)
    return all(tate(md, h, -1).is_trivial() for h in subgroup_class_reps(m.group))


def tate_profile(m: GLattice, degrees=(-1, 0, 1)):
    """Sorted multiset of Tate invariants over all subgroup class reps
    (a conjugation-invariant fingerprint)."""
    out = []
    for h in subgroup_class_reps(m.group):
        out.append((h.order,) + tuple(tate(m, h, k).factors for k in degrees))
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# Hom lattices and isomorphism search
# ---------------------------------------------------------------------------

def hom_basis(m: GLattice, n: GLattice):
    """Z-basis of Hom_G(M, N) = {F : act_m(g) F = F act_n(g)}."""
    assert m.group is n.group
    rm, rn = m.rank, n.rank
    if rm == 0 or rn == 0:
        return []
    cols = []
    for s in m.group.generator_indices:
        a = m.act(s)
        b = n.act(s)
        for i in range(rm):
            for k in range(rn):
                col = [0] * (rm * rn)
                for j in range(rm):
                    col[j * rn + k] += a.data[i][j]
                for j in range(rn):
                    col[i * rn + j] -= b.data[j][k]
                cols.append(col)
    if not cols:
        return [IntMat.from_flat(rm, rn, row)
                for row in IntMat.identity(rm * rn).data]
    constraint = IntMat([[c[e] for c in cols] for e in range(rm * rn)])
    kern = kernel_basis(constraint)
    return [IntMat.from_flat(rm, rn, row) for row in kern.data]


def find_isomorphism(m: GLattice, n: GLattice, budget=20000) -> EquivariantMap:
    """Unimodular equivariant map m -> n, or a three-valued refusal.

    Raises ProvablyDistinct on an invariant mismatch (elementwise
    character, or Tate profile over cyclic subgroups), BudgetExhausted if
    the unimodular search in Hom_G(M, N) comes up empty.
    """
    assert m.group is n.group
    if m.rank != n.rank:
        raise ProvablyDistinct("rank mismatch")
    if m.rank == 0:
        return EquivariantMap(m, n, IntMat.zeros(0, 0))
    if m.character() != n.character():
        raise ProvablyDistinct("character mismatch")
    for h in _cyclic_subgroup_reps(m.group):
        for k in (-1, 0):
            if tate(m, h, k) != tate(n, h, k):
                raise ProvablyDistinct(
                    "Tate profile mismatch on a cyclic subgroup")
    basis = hom_basis(m, n)
    if not basis:
        raise ProvablyDistinct("Hom_G(M, N) = 0")
    x = unimodular_in_lattice(basis, bound=budget)
    if x is None:
        raise BudgetExhausted("no unimodular equivariant map found in budget")
    f = EquivariantMap(m, n, x)
    assert f.check()
    return f


def _cyclic_subgroup_reps(g: FiniteMatrixGroup):
    t = g.table
    seen = set()
    reps = []
    cls = g.conj_class_of
    done_classes = set()
    for i in range(g.order):
        if cls[i] in done_classes:
            continue
        done_classes.add(cls[i])
        members = frozenset(_cycle(t, i))
        if members not in seen:
            seen.add(members)
            reps.append(Subgroup(g, members))
    return reps


def _cycle(t, i):
    out = [0]
    x = i
    while x != 0:
        out.append(x)
        x = t[x][i]
    return out


# ---------------------------------------------------------------------------
# permutation / sign-permutation recognition
# ---------------------------------------------------------------------------

@dataclass
class PermutationWitness:
    gset: GSet
    map: EquivariantMap          # from perm_lattice(gset) onto m


@dataclass
class SignPermutationWitness:
    basis: IntMat                # rows permuted up to sign by the action
    signed_perms: tuple          # per element: tuple of (image index, sign)


def _short_vectors(rank, radius):
    for v in itertools.product(range(-radius, radius + 1), repeat=rank):
        if any(v):
            yield v


def _vector_orbit(m: GLattice, v, up_to_sign=False):
    """Orbit of the row vector v under the action (as tuples); None if the
    orbit has more than rank elements (cannot be part of a basis)."""
    cap = m.rank
    vm = IntMat([list(v)])
    orbit = []
    seen = set()
    for g in range(m.group.order):
        w = tuple((vm * m.act(g)).data[0])
        key = max(w, tuple(-x for x in w)) if up_to_sign else w
        if key not in seen:
            seen.add(key)
            orbit.append(key)
            if len(orbit) > cap:
                return None
    return sorted(orbit)


def recognize_permutation(m: GLattice, budget=200000, max_radius=3):
    """Search for a Z-basis permuted by the action.

    Enumerates candidate vectors of sup-norm <= max_radius in increasing
    radius, collects full G-orbits of size <= rank, and looks for a union
    of orbits forming a unimodular basis.  Returns a PermutationWitness or
    None ("unknown": the search is sound but not complete).
    """
    basis_rows = _orbit_basis_search(m, budget, max_radius, up_to_sign=False)
    if basis_rows is None:
        return None
    basis = IntMat(basis_rows)
    # read off the induced permutation action
    pos = {tuple(r): i for i, r in enumerate(basis_rows)}
    perms = []
    for g in range(m.group.order):
        a = m.act(g)
        p = []
        for r in basis_rows:
            w = tuple((IntMat([list(r)]) * a).data[0])
            p.append(pos[w])
        perms.append(tuple(p))
    gset = GSet(m.group, m.rank, tuple(perms))
    pl = perm_lattice(gset)
    f = EquivariantMap(pl, m, basis)
    assert f.check()
    return PermutationWitness(gset, f)


def recognize_sign_permutation(m: GLattice, budget=200000, max_radius=3):
    """Like recognize_permutation but the basis may be permuted up to sign."""
    basis_rows = _orbit_basis_search(m, budget, max_radius, up_to_sign=True)
    if basis_rows is None:
        return None
    basis = IntMat(basis_rows)
    pos = {}
    for i, r in enumerate(basis_rows):
        pos[tuple(r)] = (i, 1)
        pos[tuple(-x for x in r)] = (i, -1)
    signed = []
    for g in range(m.group.order):
        a = m.act(g)
        p = []
        for r in basis_rows:
            w = tuple((IntMat([list(r)]) * a).data[0])
            p.append(pos[w])
        signed.append(tuple(p))
    return SignPermutationWitness(basis, tuple(signed))


def _orbit_basis_search(m: GLattice, budget, max_radius, up_to_sign):
    rank = m.rank
    if rank == 0:
        return []
    import numpy as np

    orbits = []
    per_size = {}
    pool_cap = 300
    seen_vecs = set()
    spent = 0
    acts = np.array([m.act(g).data for g in range(m.group.order)],
                    dtype=np.int64)

    def collect(rows):
        nonlocal spent
        for row in rows:
            v = tuple(row)
            if not any(v) or v in seen_vecs:
                continue
            spent += 1
            if spent > budget:
                return True
            imgs = np.tensordot(np.array(v, dtype=np.int64), acts,
                                axes=(0, 1))
            keys = set(map(tuple, imgs.tolist()))
            if up_to_sign:
                keys = {max(w, tuple(-x for x in w)) for w in keys}
            orb = sorted(keys)
            for w in orb:
                seen_vecs.add(w)
                if up_to_sign:
                    seen_vecs.add(tuple(-x for x in w))
            if len(orb) > rank or per_size.get(len(orb), 0) >= pool_cap:
                continue
            per_size[len(orb)] = per_size.get(len(orb), 0) + 1
            orbits.append(orb)
        return False

    def box_rows(basis_rows, radius):
        # all nonzero integer combinations of the basis rows with
        # coefficients of sup-norm <= radius, shortest first
        coeffs = np.array(list(_short_vectors(len(basis_rows), radius)),
                          dtype=np.int64)
        vecs = coeffs @ np.array(basis_rows, dtype=np.int64)
        norms = (vecs * vecs).sum(axis=1)
        return vecs[np.argsort(norms, kind="stable")].tolist()

    # A basis vector whose orbit fits inside a basis has a stabilizer of
    # index <= rank, so it lies in the fixed sublattice of some subgroup
    # in that index range.  Those sublattices usually have small rank, so
    # enumerating short coefficient vectors on each of them reaches far
    # beyond what a box search on the ambient lattice can afford.
    fixed = []
    for cls in all_subgroups(m.group).classes:
        h = cls.representative
        if m.group.order > h.order * rank:
            continue
        fx = fixed_sublattice(m, h)
        if fx.rows:
            fixed.append(fx.data)
    fixed.sort(key=len)
    if rank <= 12:
        fixed.append([row[:] for row in IntMat.identity(rank).data])
    for radius in range(1, max_radius + 1):
        out_of_budget = False
        for rows in fixed:
            if (2 * radius + 1) ** len(rows) - 1 > budget - spent:
                continue
            if collect(box_rows(rows, radius)):
                out_of_budget = True
                break
        # try to assemble a basis from the orbits collected so far
        hit = _assemble_basis(orbits, rank)
        if hit is not None:
            return hit
        if out_of_budget:
            break
    return None


def _assemble_basis(orbits, rank, max_tries=100000):
    """Backtracking subset search: orbits with total size = rank and
    unimodular stacked matrix.

    Partial selections are pruned unless their rows stay linearly
    independent mod 2 (a unimodular matrix is invertible over F_2), which
    collapses the combinatorics when many orbits share a size.  Surviving
    complete selections get a float determinant prescreen and an exact
    check only on near-unimodular hits."""
    import numpy as np

    orbits = sorted(orbits, key=lambda o: (-len(o), o))
    masks = [[sum((x & 1) << i for i, x in enumerate(v)) for v in o]
             for o in orbits]
    tries = [0]

    def eliminate(pivots, rows):
        # GF(2) row reduction state: {pivot bit: row mask}.  None if some
        # new row is dependent on what came before.
        b = dict(pivots)
        for r in rows:
            while r:
                p = r.bit_length() - 1
                if p in b:
                    r ^= b[p]
                else:
                    b[p] = r
                    break
            else:
                return None
        return b

    def rec(i, chosen, total, pivots):
        if total == rank:
            tries[0] += 1
            rows = [list(v) for o in chosen for v in o]
            sign, logdet = np.linalg.slogdet(np.array(rows, dtype=float))
            if sign == 0 or abs(logdet) > 0.5:
                return None
            if IntMat(rows).det() in (1, -1):
                return rows
            return None
        if i == len(orbits) or tries[0] > max_tries:
            return None
        for j in range(i, len(orbits)):
            o = orbits[j]
            if total + len(o) > rank:
                continue
            np2 = eliminate(pivots, masks[j])
            if np2 is None:
                continue
            hit = rec(j + 1, chosen + [o], total + len(o), np2)
            if hit is not None:
                return hit
        return None

    return rec(0, [], 0, {})
