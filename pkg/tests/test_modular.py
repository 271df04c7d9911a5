import random

import pytest

from glattice.intlinalg import BudgetExhausted, IntMat
from glattice.groups import all_subgroups, closure, sylow
from glattice.lattices import (
    GLattice,
    aug_ideal,
    coset_gset,
    coset_lattice,
    direct_sum,
    dual,
    gset_from_permutation_matrices,
    is_coflasque,
    is_flasque,
    j_lattice,
    perm_lattice,
    std_lattice,
    trivial_lattice,
)
from glattice.modular import (
    ModpModule,
    ProvablyNot,
    is_cohomologically_trivial,
    is_invertible,
    is_permutation_modp,
    is_projective_modp,
    left_nullspace_modp,
    rank_modp,
    reduce_mod_p,
)


def perm_mat(p):
    n = len(p)
    return IntMat([[1 if p[i] == j else 0 for j in range(n)] for i in range(n)])


C2 = closure([IntMat([[-1]])])
C3 = closure([perm_mat([1, 2, 0])])
C4 = closure([IntMat([[0, -1], [1, 0]])])
S3 = closure([perm_mat([1, 2, 0]), perm_mat([1, 0, 2])])


# ---------------------------------------------------------------------------
# F_p linear algebra
# ---------------------------------------------------------------------------

def test_rank_and_nullspace_modp():
    assert rank_modp([[1, 0], [0, 1]], 2) == 2
    assert rank_modp([[2, 4], [6, 8]], 2) == 0
    assert rank_modp([[1, 2], [2, 4]], 5) == 1
    ns = left_nullspace_modp([[1, 2], [2, 4]], 5)
    assert len(ns) == 1
    x = ns[0]
    assert (x[0] * 1 + x[1] * 2) % 5 == 0 and (x[0] * 2 + x[1] * 4) % 5 == 0


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------

def test_reduce_sign_mod2_is_trivial():
    m = reduce_mod_p(std_lattice(C2), 2)
    assert m.action[1] == ((1,),)
    subs, f = is_permutation_modp(m)
    assert [q.order for q in subs] == [2]


def test_reduce_perm_mod3():
    x = gset_from_permutation_matrices(S3)
    m = reduce_mod_p(perm_lattice(x), 3)
    assert m.dim == 3
    assert m.fixed_dim(range(6)) == 1


def test_modp_homomorphism_validated():
    # the non-identity element mapped to 2 mod 5 (order 4, not 2)
    with pytest.raises(AssertionError):
        ModpModule(5, C2, 1, (((1,),), ((2,),)))


# ---------------------------------------------------------------------------
# cohomological triviality
# ---------------------------------------------------------------------------

def test_cohomologically_trivial_free():
    for g in (C2, C4, S3):
        zg = coset_lattice(g, g.trivial_subgroup())
        assert is_cohomologically_trivial(zg)
        for p in (2, 3):
            assert is_cohomologically_trivial(reduce_mod_p(zg, p))


def test_cohomologically_trivial_negatives():
    assert not is_cohomologically_trivial(trivial_lattice(C2))
    assert not is_cohomologically_trivial(reduce_mod_p(trivial_lattice(C3), 3))
    assert not is_cohomologically_trivial(std_lattice(C2))


def test_lattice_vs_modp_triviality_consistent():
    # a cohomologically trivial lattice reduces to trivial modules at each p
    for g in (C4, S3):
        zg = coset_lattice(g, g.trivial_subgroup())
        m = direct_sum(zg, zg)
        assert is_cohomologically_trivial(m)
        assert is_cohomologically_trivial(reduce_mod_p(m, 2))


# ---------------------------------------------------------------------------
# projectivity
# ---------------------------------------------------------------------------

def test_projective_group_algebra():
    for g, p in [(C2, 2), (C3, 3), (S3, 2), (S3, 3)]:
        zg = coset_lattice(g, g.trivial_subgroup())
        assert is_projective_modp(reduce_mod_p(zg, p))


def test_projective_trivial_module_over_p_group():
    assert not is_projective_modp(reduce_mod_p(trivial_lattice(C3), 3))
    assert not is_projective_modp(reduce_mod_p(trivial_lattice(C2), 2))


def test_projective_iff_stabilizer_order_coprime_to_p():
    # F_p[X] projective iff point stabilizers have order coprime to p
    for g in (S3, C4):
        for h in all_subgroups(g).representatives():
            zx = coset_lattice(g, h)
            for p in (2, 3):
                expected = h.order % p != 0
                assert is_projective_modp(reduce_mod_p(zx, p)) == expected


# ---------------------------------------------------------------------------
# permutation recognition over p-groups
# ---------------------------------------------------------------------------

def test_recognize_coset_modules():
    wb2 = closure([perm_mat([1, 0]), IntMat.diag([-1, 1])])
    assert wb2.order == 8
    for q in all_subgroups(wb2).representatives():
        m = reduce_mod_p(coset_lattice(wb2, q), 2)
        subs, f = is_permutation_modp(m)
        assert sum(wb2.order // s.order for s in subs) == m.dim
        # the recognized multiset reproduces all fixed-point dimensions
        for h in all_subgroups(wb2).representatives():
            from glattice.modular import _direct_sum_perm_modp
            cand = _direct_sum_perm_modp(wb2, subs, 2)
            assert cand.fixed_dim(h.members) == m.fixed_dim(h.members)


def test_recognize_twisted_permutation_module():
    rng = random.Random(13)
    q8_like = C4  # small p-group
    m = coset_lattice(q8_like, q8_like.trivial_subgroup())
    u = IntMat([[1, 1, 0, 0], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]])
    ui = u.inverse_unimodular()
    tw = GLattice(q8_like.elements and q8_like, [u * a * ui for a in m.action])
    subs, f = is_permutation_modp(reduce_mod_p(tw, 2))
    assert [s.order for s in subs] == [1]


def test_recognize_provably_not():
    # the 2-dim F3[C3]-module from Z[zeta_3] is indecomposable non-permutation
    comp = IntMat([[0, 1], [-1, -1]])
    c3 = closure([comp])
    with pytest.raises(ProvablyNot):
        is_permutation_modp(reduce_mod_p(std_lattice(c3), 3))


# ---------------------------------------------------------------------------
# invertibility
# ---------------------------------------------------------------------------

def test_permutation_lattices_invertible():
    for g in (S3, C4):
        for h in all_subgroups(g).representatives():
            assert is_invertible(coset_lattice(g, h))


def test_aug_ideal_s3_not_invertible():
    x = gset_from_permutation_matrices(S3)
    assert not is_invertible(aug_ideal(x))
    assert not is_invertible(j_lattice(x))


def test_invertible_implies_flasque_coflasque():
    # checked wherever invertibility holds in this suite
    for g in (S3, C4):
        for h in all_subgroups(g).representatives():
            m = coset_lattice(g, h)
            if is_invertible(m):
                assert is_flasque(m) and is_coflasque(m)


def test_sign_lattice_not_invertible_over_c2():
    assert not is_invertible(std_lattice(C2))
    assert not is_coflasque(std_lattice(C2))
