"""
Rationality classification of algebraic tori by their character lattices.

classify() runs a decision cascade: hereditary-rational detectors
(permutation and sign-permutation bases, augmentation ideals, direct-sum
blocks, registered coprime tensor products of augmentation ideals,
permutation-quotient extensions, visible rank-2 wreath doubling), then a
quasi-permutation check for stable rationality, then invertibility of
the flasque term for retract rationality.  Verdict levels form a chain
HereditarilyRational > Rational > StablyRational > RetractRational;
NotRetractRational is the proven negative and Unknown the honest
fallback.  All verdicts are claims about the lattice (stable and retract
rationality depend only on the lattice; plain rationality may in
principle depend on the field, so "Rational" here means rational for
every split form).

norm_one_classify() is the group-structure decision table for norm-one
tori of a degree-[G:H] separable field extension with Galois closure
group G and subgroup H, covering the Galois case (Sylow conditions and
the cyclic-times-twisted-dihedral classification), groups with all
Sylow subgroups cyclic, nilpotent non-Galois extensions, and the
symmetric/alternating natural cases (retract iff the degree is prime,
with the alternating degree-5 stable upgrade certified by an explicit
quasi-permutation certificate).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .intlinalg import BudgetExhausted, IntMat, cokernel_invariants
from .groups import FiniteMatrixGroup, Subgroup, all_subgroups, closure, sylow
from .lattices import (
    GLattice,
    GSet,
    aug_ideal,
    coset_gset,
    coset_lattice,
    dual,
    j_lattice,
    perm_lattice,
    recognize_permutation,
    recognize_sign_permutation,
    restrict,
    tensor,
)
from .homology import quasi_permutation_check, sub_lattice_from_rows
from .lattices import fixed_sublattice
from .modular import (
    ProvablyNot,
    _primes_of,
    is_invertible,
    is_permutation_modp,
    reduce_mod_p,
)
from . import lattices as _lat
from .intlinalg import kernel_basis


HEREDITARILY_RATIONAL = "HereditarilyRational"
RATIONAL = "Rational"
STABLY_RATIONAL = "StablyRational"
RETRACT_RATIONAL = "RetractRational"
NOT_RETRACT_RATIONAL = "NotRetractRational"
UNKNOWN = "Unknown"

_STRENGTH = {
    HEREDITARILY_RATIONAL: 4,
    RATIONAL: 3,
    STABLY_RATIONAL: 2,
    RETRACT_RATIONAL: 1,
    UNKNOWN: 0,
    NOT_RETRACT_RATIONAL: -1,
}


class UnrecognizedShape(Exception):
    pass


@dataclass
class CertStep:
    kind: str
    data: dict = field(default_factory=dict)

    def __repr__(self):
        return "CertStep(%s)" % self.kind


@dataclass
class RationalityVerdict:
    level: str
    certificate: tuple = ()
    notes: str = ""

    def implies(self, other_level):
        return _STRENGTH[self.level] >= _STRENGTH[other_level]


# ---------------------------------------------------------------------------
# construction registry (for detectors that need provenance)
# ---------------------------------------------------------------------------

_CONSTRUCTIONS = {}


def register_construction(m: GLattice, info):
    """Attach construction provenance to a lattice, e.g.
    ("aug_tensor", X, Y) for I_X (x) I_Y."""
    _CONSTRUCTIONS[m] = info


def construction_of(m: GLattice):
    return _CONSTRUCTIONS.get(m)


def aug_tensor(x: GSet, y: GSet, name=None) -> GLattice:
    """I_X (x) I_Y with its construction registered (the coprime-tensor
    detector only fires on registered products)."""
    m = tensor(aug_ideal(x), aug_ideal(y), name=name)
    register_construction(m, ("aug_tensor", x, y))
    return m


# ---------------------------------------------------------------------------
# augmentation-ideal recognition
# ---------------------------------------------------------------------------

def recognize_aug_ideal(m: GLattice, budget=200000, max_radius=3):
    """Search for an identification M = I_X.

    Works through the dual: M = I_X iff M* = J_X, and J_X visibly
    contains the images of the |X| points: a G-stable set of rank+1
    vectors with zero sum such that dropping any one leaves a Z-basis.
    Returns (gset, point_vectors_in_dual) or None (unknown).
    """
    md = dual(m)
    r = md.rank
    if r == 0:
        return None
    target = r + 1
    import itertools
    orbits = []
    seen = set()
    spent = 0
    for radius in range(1, max_radius + 1):
        if (2 * radius + 1) ** r - 1 > budget:
            break
        for v in itertools.product(range(-radius, radius + 1), repeat=r):
            if not any(v) or v in seen:
                continue
            spent += 1
            if spent > budget:
                break
            orb = _vector_orbit_capped(md, v, target)
            if orb is None:
                seen.add(v)
                continue
            for w in orb:
                seen.add(w)
            orbits.append(orb)
        hit = _assemble_point_set(md, orbits, target)
        if hit is not None:
            return hit
        if spent > budget:
            break
    return None


def _vector_orbit_capped(m, v, cap):
    vm = IntMat([list(v)])
    orbit = []
    got = set()
    for g in range(m.group.order):
        w = tuple((vm * m.act(g)).data[0])
        if w not in got:
            got.add(w)
            orbit.append(w)
            if len(orbit) > cap:
                return None
    return sorted(orbit)


def _assemble_point_set(md, orbits, target):
    orbits = sorted(orbits, key=lambda o: (len(o), o))

    def rec(i, chosen, total):
        if total == target:
            pts = [v for o in chosen for v in o]
            if any(sum(col) != 0 for col in zip(*pts)):
                return None
            basis = IntMat([list(v) for v in pts[:-1]])
            if basis.det() not in (1, -1):
                return None
            return pts
        if i == len(orbits):
            return None
        for j in range(i, len(orbits)):
            if total + len(orbits[j]) <= target:
                hit = rec(j + 1, chosen + [orbits[j]], total + len(orbits[j]))
                if hit is not None:
                    return hit
        return None

    pts = rec(0, [], 0)
    if pts is None:
        return None
    pos = {v: i for i, v in enumerate(pts)}
    perms = []
    for g in range(md.group.order):
        a = md.act(g)
        perms.append(tuple(pos[tuple((IntMat([list(v)]) * a).data[0])]
                           for v in pts))
    gset = GSet(md.group, len(pts), tuple(perms))
    return gset, tuple(pts)


# ---------------------------------------------------------------------------
# structural detectors
# ---------------------------------------------------------------------------

def _coordinate_blocks(m: GLattice):
    """Partition of coordinates closed under all action matrices
    (union-find over nonzero entries)."""
    r = m.rank
    parent = list(range(r))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    for s in m.group.generator_indices:
        a = m.act(s)
        for i in range(r):
            for j in range(r):
                if a.data[i][j]:
                    union(i, j)
    blocks = {}
    for i in range(r):
        blocks.setdefault(find(i), []).append(i)
    return sorted(blocks.values())


def _block_lattice(m: GLattice, coords):
    action = [a.submatrix(coords, coords) for a in m.action]
    return GLattice(m.group, action, check=False)


def _visible_wreath_double(m: GLattice):
    """Detect a basis-visible G^2 x| S2 block structure: every generator
    is diag(A, B) or antidiag(A, B) for half-rank blocks, with at least
    one swap.  Returns the half-rank lattice over the group generated by
    all blocks, or None."""
    r = m.rank
    if r % 2 or r == 0:
        return None
    h = r // 2
    top = list(range(h))
    bot = list(range(h, r))
    blocks = []
    saw_swap = False
    for s in m.group.generator_indices:
        a = m.act(s)
        tt, tb = a.submatrix(top, top), a.submatrix(top, bot)
        bt, bb = a.submatrix(bot, top), a.submatrix(bot, bot)
        if tb.is_zero() and bt.is_zero():
            blocks.extend([tt, bb])
        elif tt.is_zero() and bb.is_zero():
            blocks.extend([tb, bt])
            saw_swap = True
        else:
            return None
    if not saw_swap:
        return None
    gens = [b for b in blocks if b != IntMat.identity(h)]
    if not gens:
        gens = [IntMat.identity(h)]
    try:
        grp = closure(gens)
    except Exception:
        return None
    return GLattice(grp, grp.elements, check=False)


def is_faithful(m: GLattice) -> bool:
    ident = IntMat.identity(m.rank)
    return all(m.act(i) != ident for i in range(1, m.group.order))


def _permutation_quotients(m: GLattice, max_index=None, combo_cap=800):
    """Yield (subgroup, surjection matrix) for surjections M -> Z[G/H],
    searching hom basis elements and their small {-1,0,1} combinations."""
    import itertools
    g = m.group
    for h in all_subgroups(g).representatives():
        pts = g.order // h.order
        if pts >= m.rank:
            # a full-rank quotient has zero kernel: nothing to learn
            continue
        if max_index is not None and pts > max_index:
            continue
        zx = coset_lattice(g, h)
        basis = _lat.hom_basis(m, zx)
        if not basis:
            continue
        cands = list(basis)
        if 3 ** len(basis) <= combo_cap:
            for coeffs in itertools.product((-1, 0, 1), repeat=len(basis)):
                if sum(1 for c in coeffs if c) < 2:
                    continue
                f = basis[0].scale(coeffs[0])
                for b, c in zip(basis[1:], coeffs[1:]):
                    if c:
                        f = f + b.scale(c)
                cands.append(f)
        for f in cands:
            if cokernel_invariants(f, pts).is_trivial():
                yield h, f


# ---------------------------------------------------------------------------
# the classifier
# ---------------------------------------------------------------------------

def classify(m: GLattice, budget=20000, depth=2) -> RationalityVerdict:
    """Decision cascade for the rationality of a torus with character
    lattice m; see the module docstring.  `budget` bounds the search
    effort of each witness-finding step, `depth` the recursion of the
    structural detectors."""
    if m.rank == 0:
        return RationalityVerdict(HEREDITARILY_RATIONAL,
                                  (CertStep("zero_rank"),))
    v = _classify_hereditary(m, budget, depth)
    if v is not None:
        return v
    steps = []
    res = quasi_permutation_check(m, budget=None, iso_budget=budget)
    if res.verdict == "yes":
        steps.append(CertStep("quasi_permutation", {"result": res}))
        return RationalityVerdict(STABLY_RATIONAL, tuple(steps))
    fl = res.resolution
    f = fl.cert.right
    notes = ""
    if res.verdict == "no":
        steps.append(CertStep("stably_permutation_obstruction",
                              {"witness": res.witness}))
        notes = "not stably rational (integral obstruction)"
    else:
        notes = "stable rationality undecided"
    record = _noninvertibility_record(f, budget)
    if record is not None:
        steps.append(CertStep("flasque_not_invertible",
                              dict(record, flasque=f)))
        return RationalityVerdict(
            NOT_RETRACT_RATIONAL, tuple(steps),
            "flasque term is not invertible (p = %d Sylow)" % record["prime"])
    try:
        inv = is_invertible(f, budget=budget)
    except BudgetExhausted:
        steps.append(CertStep("invertibility_undecided"))
        return RationalityVerdict(UNKNOWN, tuple(steps),
                                  notes + "; invertibility undecided")
    assert inv
    steps.append(CertStep("flasque_invertible", {"flasque": f,
                                                 "resolution": fl}))
    return RationalityVerdict(RETRACT_RATIONAL, tuple(steps), notes)


def _noninvertibility_record(f: GLattice, budget):
    """Named prime / Sylow evidence that the flasque term is not
    invertible (mod-p permutation recognition fails provably)."""
    g = f.group
    for p in _primes_of(g.order):
        syl = sylow(g, p)
        sgrp = syl.as_group()
        res = restrict(f, syl, hgroup=sgrp)
        modp = reduce_mod_p(res, p)
        if p == 2:
            qrank = fixed_sublattice(res, sgrp.full_subgroup()).rows
            frank = modp.fixed_dim(range(sgrp.order))
            if qrank != frank:
                return {"prime": 2, "sylow": syl,
                        "reason": "fixed-point rank drops mod 2 "
                                  "(%d over Z, %d over F_2)" % (qrank, frank)}
        try:
            is_permutation_modp(modp, budget=budget)
        except ProvablyNot as e:
            return {"prime": p, "sylow": syl, "reason": str(e)}
        except BudgetExhausted:
            continue
    return None


def _classify_hereditary(m, budget, depth):
    # permutation basis
    w = recognize_permutation(m, budget=budget)
    if w is not None:
        return RationalityVerdict(
            HEREDITARILY_RATIONAL,
            (CertStep("permutation_basis", {"witness": w}),))
    # sign-permutation basis
    w = recognize_sign_permutation(m, budget=budget)
    if w is not None:
        return RationalityVerdict(
            HEREDITARILY_RATIONAL,
            (CertStep("sign_permutation_basis", {"witness": w}),))
    # augmentation ideal
    hit = recognize_aug_ideal(m, budget=budget)
    if hit is not None:
        gset, pts = hit
        return RationalityVerdict(
            HEREDITARILY_RATIONAL,
            (CertStep("augmentation_ideal", {"gset": gset, "points": pts}),))
    # registered coprime tensor of augmentation ideals
    info = construction_of(m)
    if info and info[0] == "aug_tensor":
        _tag, x, y = info
        if gcd(x.points, y.points) == 1:
            return RationalityVerdict(
                HEREDITARILY_RATIONAL,
                (CertStep("coprime_aug_tensor",
                          {"sizes": (x.points, y.points)}),))
    if depth <= 0:
        return None
    # coordinate direct-sum blocks
    blocks = _coordinate_blocks(m)
    if len(blocks) > 1:
        subs = []
        level = HEREDITARILY_RATIONAL
        for coords in blocks:
            sub = classify(_block_lattice(m, coords), budget, depth - 1)
            subs.append((tuple(coords), sub))
            if _STRENGTH[sub.level] < _STRENGTH[level]:
                level = sub.level
        if _STRENGTH[level] > 0:
            return RationalityVerdict(
                level, (CertStep("direct_sum", {"parts": tuple(subs)}),))
        # negative/unknown block: fall through to the lattice-level checks
    # visible rank-2 wreath doubling
    half = _visible_wreath_double(m)
    if half is not None:
        sub = classify(half, budget, depth - 1)
        if sub.level == HEREDITARILY_RATIONAL:
            return RationalityVerdict(
                HEREDITARILY_RATIONAL,
                (CertStep("wreath_double", {"half": sub}),))
    # permutation-quotient extension 0 -> M' -> M -> Z[G/H] -> 0
    for h, f in _permutation_quotients(m):
        ker = kernel_basis(f)
        if ker.rows == 0:
            continue
        sub, _inc = sub_lattice_from_rows(m, ker)
        if not is_faithful(sub):
            continue
        v = _classify_hereditary(sub, budget, depth - 1)
        if v is not None and v.level == HEREDITARILY_RATIONAL:
            return RationalityVerdict(
                HEREDITARILY_RATIONAL,
                (CertStep("permutation_quotient_extension",
                          {"quotient_subgroup": h, "surjection": f,
                           "kernel_verdict": v}),))
    return None


# ---------------------------------------------------------------------------
# hereditary closure
# ---------------------------------------------------------------------------

@dataclass
class HereditaryReport:
    entries: tuple          # ((subgroup, verdict), ...)
    top: RationalityVerdict


def hereditary_closure(m: GLattice, budget=20000) -> HereditaryReport:
    """classify(restrict(m, H)) for every subgroup class representative;
    the top verdict is HereditarilyRational only when every restriction
    reaches Rational or better."""
    entries = []
    ok = True
    for h in all_subgroups(m.group).representatives():
        v = classify(restrict(m, h), budget=budget)
        entries.append((h, v))
        if not v.implies(RATIONAL):
            ok = False
    top = RationalityVerdict(
        HEREDITARILY_RATIONAL if ok else UNKNOWN,
        (CertStep("hereditary_closure", {"entries": tuple(entries)}),),
        "" if ok else "some restriction not certified rational")
    return HereditaryReport(tuple(entries), top)


# ---------------------------------------------------------------------------
# norm-one tori
# ---------------------------------------------------------------------------

@dataclass
class NormOneSpec:
    g: FiniteMatrixGroup
    h: Subgroup

    def lattice(self):
        return j_lattice(coset_gset(self.g, self.h))

    def action_kernel(self) -> frozenset:
        """Kernel of the action on the cosets (the normal core of h);
        the decision table assumes this is trivial."""
        x = coset_gset(self.g, self.h)
        ident = tuple(range(x.points))
        return frozenset(i for i in range(self.g.order)
                         if x.perms[i] == ident)


def _sylows_all_cyclic(g: FiniteMatrixGroup):
    n = g.order
    p = 2
    primes = []
    while p * p <= n:
        if n % p == 0:
            primes.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        primes.append(n)
    for p in primes:
        s = sylow(g, p)
        if not _is_cyclic(g, s.members):
            return False
    return True


def _is_cyclic(g, members):
    k = len(members)
    return any(g.element_orders[i] == k for i in members)


def _is_nilpotent(g: FiniteMatrixGroup):
    """Nilpotent iff every Sylow subgroup is normal."""
    n = g.order
    p, primes = 2, []
    m = n
    while p * p <= m:
        if m % p == 0:
            primes.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        primes.append(m)
    for p in primes:
        if not sylow(g, p).is_normal():
            return False
    return True


def _cyclic_subgroups(g):
    seen = set()
    out = []
    for i in range(g.order):
        members = frozenset(_cyc(g.table, i))
        if members not in seen:
            seen.add(members)
            out.append((i, members))
    return out


def _cyc(t, i):
    out = [0]
    x = i
    while x != 0:
        out.append(x)
        x = t[x][i]
    return out


def _odd_part(n):
    while n % 2 == 0:
        n //= 2
    return n


def _two_part(n):
    return n // _odd_part(n)


def _is_dihedral_odd(g, members=None):
    """Is the (sub)group dihedral of order 2n with n odd (n >= 1 means C2
    counts only with n=1 excluded: D_2n needs n odd >= 1; the theorem
    uses n odd which includes n=1, i.e. C2)."""
    mem = sorted(members) if members is not None else list(range(g.order))
    k = len(mem)
    if k % 2:
        return False
    n = k // 2
    if n % 2 == 0:
        return False
    rot = [i for i in mem if g.element_orders[i] == n]
    if n == 1:
        return all(g.element_orders[i] in (1, 2) for i in mem)
    if not rot:
        return False
    r = rot[0]
    cyc = set(_cyc(g.table, r))
    if len(cyc) != n or not cyc <= set(mem):
        return False
    flips = [i for i in mem if i not in cyc]
    return all(g.element_orders[i] == 2 for i in flips)


def _galois_stable_shape(g: FiniteMatrixGroup):
    """G = C_m, or G = C_n x <s, t | s^k = t^(2^d) = 1, t s t^-1 = s^-1>
    with d >= 1, k >= 3 odd, n odd, gcd(n, k) = 1."""
    if _is_cyclic(g, range(g.order)):
        return True
    t = g.table
    inv = g.inv
    two = _two_part(g.order)
    if two < 2:
        return False
    orders = g.element_orders
    for ti in range(g.order):
        if orders[ti] != two:
            continue
        for si in range(g.order):
            k = orders[si]
            if k < 3 or k % 2 == 0:
                continue
            # t s t^-1 == s^-1
            if t[t[ti][si]][inv[ti]] != inv[si]:
                continue
            d_members = _closure_members(g, [si, ti])
            if len(d_members) != k * two:
                continue
            # a cyclic odd complement centralizing <s, t>
            rest = g.order // (k * two)
            if rest == 1:
                return True
            if rest % 2 == 0 or gcd(rest, k) != 1:
                continue
            for zi, z_members in _cyclic_subgroups(g):
                if len(z_members) != rest:
                    continue
                if z_members & d_members != {0}:
                    continue
                if any(t[zi][x] != t[x][zi] for x in d_members):
                    continue
                if len(_closure_members(g, [si, ti, zi])) == g.order:
                    return True
    return False


def _closure_members(g, gens):
    t = g.table
    out = {0}
    frontier = [0]
    while frontier:
        x = frontier.pop()
        for s in gens:
            y = t[x][s]
            if y not in out:
                out.add(y)
                frontier.append(y)
    return out


def _theorem2_stable_shape(g: FiniteMatrixGroup, h: Subgroup):
    """G = D_2n (n odd) with H of order 2, or G = C_m x D_2n (n odd,
    gcd(m, n) = 1) with H cyclic of order 2 inside the D_2n factor."""
    if h.order != 2:
        return False
    if _is_dihedral_odd(g):
        return True
    # direct factorization G = Z x D with Z cyclic, D dihedral-odd,
    # H inside D
    t = g.table
    hgen = [i for i in h.members if i != 0][0]
    for zi, z_members in _cyclic_subgroups(g):
        m = len(z_members)
        if g.order % m:
            continue
        dn = g.order // m
        if dn % 2 or gcd(m, _odd_part(dn)) != 1:
            continue
        # Z must be central for a direct product with the right shape
        if any(t[zi][x] != t[x][zi] for x in range(g.order)):
            continue
        # find a complement containing H
        for cand in _subgroups_of_order(g, dn):
            if hgen not in cand:
                continue
            if cand & z_members != {0}:
                continue
            if not _is_dihedral_odd(g, cand):
                continue
            if len(_closure_members(g, list(cand) + [zi])) == g.order:
                return True
    return False


def _subgroups_of_order(g, k):
    out = []
    for rep in all_subgroups(g).representatives():
        if rep.order == k:
            out.extend(s.members for s in _conjugates(g, rep))
    return out


def _conjugates(g, sub):
    seen = set()
    out = []
    for x in range(g.order):
        mem = g.conjugate_set(sub.members, x)
        if mem not in seen:
            seen.add(mem)
            out.append(Subgroup(g, mem))
    return out


def _coset_image(g, h):
    """(image permutation group on cosets, faithful?, all even?)."""
    x = coset_gset(g, h)
    n = x.points
    mats = []
    for p in x.perms:
        mats.append(IntMat([[1 if p[i] == j else 0 for j in range(n)]
                            for i in range(n)]))
    distinct = len(set(mats))
    faithful = distinct == g.order
    even = all(_perm_sign(p) == 1 for p in x.perms)
    return x, faithful, even


def _perm_sign(p):
    n = len(p)
    seen = [False] * n
    sign = 1
    for i in range(n):
        if seen[i]:
            continue
        l = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            l += 1
        if l % 2 == 0:
            sign = -sign
    return sign


def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def norm_one_classify(spec: NormOneSpec, budget=200000) -> RationalityVerdict:
    """Decision table for the norm-one torus of a degree-[G:H] extension
    with Galois closure group G and H the closure's subgroup over the
    intermediate field; raises UnrecognizedShape when no structural
    branch applies (callers may fall back to classify on J_{G/H})."""
    g, h = spec.g, spec.h
    n = g.order // h.order
    core = spec.action_kernel()
    if len(core) > 1:
        raise UnrecognizedShape(
            "the coset action has a kernel of order %d; pass the faithful "
            "quotient instead" % len(core))
    steps = [CertStep("norm_one_shape", {"order": g.order, "degree": n,
                                         "action_kernel": core})]
    if h.order == 1:
        # Galois case
        if not _sylows_all_cyclic(g):
            steps.append(CertStep("sylow_not_cyclic"))
            return RationalityVerdict(NOT_RETRACT_RATIONAL, tuple(steps),
                                      "a Sylow subgroup is not cyclic")
        if _galois_stable_shape(g):
            steps.append(CertStep("galois_stable_shape"))
            return RationalityVerdict(STABLY_RATIONAL, tuple(steps))
        steps.append(CertStep("sylow_all_cyclic"))
        return RationalityVerdict(RETRACT_RATIONAL, tuple(steps),
                                  "not stably rational (shape excluded)")
    # natural symmetric / alternating cases
    x, faithful, even = _coset_image(g, h)
    if faithful and g.order == _factorial(n) and n >= 3:
        steps.append(CertStep("symmetric_natural", {"degree": n}))
        if n == 3:
            return RationalityVerdict(STABLY_RATIONAL, tuple(steps))
        if _is_prime(n):
            return RationalityVerdict(RETRACT_RATIONAL, tuple(steps),
                                      "not stably rational (degree > 3)")
        return RationalityVerdict(NOT_RETRACT_RATIONAL, tuple(steps),
                                  "degree not prime")
    if faithful and even and 2 * g.order == _factorial(n) and n >= 4:
        steps.append(CertStep("alternating_natural", {"degree": n}))
        if n == 5:
            res = quasi_permutation_check(
                spec.lattice(), resolution=_a5_flasque_resolution(g, x),
                iso_budget=budget)
            assert res.verdict == "yes"
            steps.append(CertStep("quasi_permutation", {"result": res}))
            return RationalityVerdict(STABLY_RATIONAL, tuple(steps))
        if _is_prime(n):
            return RationalityVerdict(RETRACT_RATIONAL, tuple(steps),
                                      "stable rationality excluded")
        return RationalityVerdict(NOT_RETRACT_RATIONAL, tuple(steps),
                                  "degree not prime")
    # non-Galois with all Sylow subgroups of G cyclic
    if _sylows_all_cyclic(g):
        steps.append(CertStep("sylow_all_cyclic"))
        if _theorem2_stable_shape(g, h):
            steps.append(CertStep("metacyclic_stable_shape"))
            return RationalityVerdict(STABLY_RATIONAL, tuple(steps))
        return RationalityVerdict(RETRACT_RATIONAL, tuple(steps),
                                  "not stably rational (shape excluded)")
    if _is_nilpotent(g):
        steps.append(CertStep("nilpotent_non_galois"))
        return RationalityVerdict(NOT_RETRACT_RATIONAL, tuple(steps),
                                  "nilpotent Galois closure group")
    raise UnrecognizedShape(
        "no structural branch applies (order %d, degree %d)" % (g.order, n))


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _a5_flasque_resolution(g, x):
    """Explicit flasque resolution 0 -> J -> Z[pairs] -> J(x)J -> 0 for
    the natural degree-5 alternating action; the middle is identified
    with the coset lattice on ordered pairs via the basis vectors
    (image of e_i) (x) e_j for ordered pairs (i, j)."""
    from .homology import ExactSequenceCert, verify_exact
    from .lattices import EquivariantMap
    j = j_lattice(x)
    zx = perm_lattice(x)
    jzx = tensor(j, zx)
    n = x.points
    # stabilizer of the ordered pair (0, 1)
    stab = Subgroup(g, frozenset(
        i for i in range(g.order)
        if x.perms[i][0] == 0 and x.perms[i][1] == 1))
    pair_lat = coset_lattice(g, stab)
    from .lattices import coset_transversal
    reps, _ = coset_transversal(g, stab)
    rows = []
    for t in reps:
        i, jj = x.perms[t][0], x.perms[t][1]
        vec = [0] * ((n - 1) * n)
        # image of e_i (x) e_j in J (x) Z[X] coordinates (J index major)
        if i < n - 1:
            vec[i * n + jj] = 1
        else:
            for k in range(n - 1):
                vec[k * n + jj] = -1
        rows.append(vec)
    phi = EquivariantMap(pair_lat, jzx, IntMat(rows))
    assert phi.check() and phi.matrix.is_unimodular()
    # surjection J (x) Z[X] -> J (x) J via 1 (x) (projection to J)
    pj_rows = [[1 if a == b else 0 for b in range(n - 1)] for a in range(n)]
    pj_rows[n - 1] = [-1] * (n - 1)
    surj_t = IntMat.identity(n - 1).kron(IntMat(pj_rows))
    jj_lat = tensor(j, j)
    surj = EquivariantMap(pair_lat, jj_lat, phi.matrix * surj_t)
    ker = kernel_basis(surj.matrix)
    left, inj = sub_lattice_from_rows(pair_lat, ker)
    cert = ExactSequenceCert(left, pair_lat, jj_lat, inj, surj,
                             mid_parts=(stab,))
    assert verify_exact(cert)
    from .homology import FlasqueResolution
    from .lattices import tate
    checks = []
    for sub in all_subgroups(g).representatives():
        inv = tate(jj_lat, sub, -1)
        assert inv.is_trivial()
        checks.append((sub.order, inv))
    return FlasqueResolution(cert, tuple(checks))
