import random

import pytest

from glattice.intlinalg import IntMat
from glattice.groups import all_subgroups, closure
from glattice.homology import (
    DegreesNotCoprime,
    SectionInvalid,
    SectionedSequence,
    coflasque_resolution,
    find_isomorphism_parts,
    flasque_resolution,
    florence_combine,
    hom_basis_parts,
    parts_lattice,
    pullback_split,
    quasi_permutation_check,
    sequence_from_surjection,
    stably_permutation_obstruction,
    verify_exact,
)
from glattice.lattices import (
    EquivariantMap,
    GLattice,
    aug_ideal,
    coset_gset,
    coset_lattice,
    dual,
    gset_from_permutation_matrices,
    hom_basis,
    is_coflasque,
    is_flasque,
    j_lattice,
    perm_lattice,
    tensor,
    trivial_lattice,
)
from glattice.modular import is_invertible


def perm_mat(p):
    n = len(p)
    return IntMat([[1 if p[i] == j else 0 for j in range(n)] for i in range(n)])


S3 = closure([perm_mat([1, 2, 0]), perm_mat([1, 0, 2])])
C4 = closure([IntMat([[0, -1], [1, 0]])])
V4 = closure([perm_mat([1, 0, 3, 2]), perm_mat([2, 3, 0, 1])])
X3 = gset_from_permutation_matrices(S3)
ZX = perm_lattice(X3)
I3 = aug_ideal(X3)
J3 = j_lattice(X3)
SUM3 = IntMat([[1], [1], [1]])


def twisted(lat, u):
    ui = u.inverse_unimodular()
    return GLattice(lat.group, [u * a * ui for a in lat.action])


# ---------------------------------------------------------------------------
# exact sequence certificates
# ---------------------------------------------------------------------------

def test_augmentation_sequence_verifies():
    cert = sequence_from_surjection(ZX, trivial_lattice(S3), SUM3)
    assert verify_exact(cert)
    assert cert.left.rank == 2
    # the kernel carries the augmentation ideal action
    assert cert.left.character() == I3.character()


def test_doubled_surjection_rejected():
    cert = sequence_from_surjection(ZX, trivial_lattice(S3), SUM3)
    cert.surj.matrix = SUM3.scale(2)
    ok, why = verify_exact(cert, explain=True)
    assert not ok and why == "surjection not onto"


def test_wrong_kernel_rejected():
    cert = sequence_from_surjection(ZX, trivial_lattice(S3), SUM3)
    # replace the injection by twice itself: image has index 4 in the kernel
    cert.inj.matrix = cert.inj.matrix.scale(2)
    ok, why = verify_exact(cert, explain=True)
    assert not ok


def test_rank_mismatch_rejected():
    cert = sequence_from_surjection(ZX, trivial_lattice(S3), SUM3)
    cert.right = trivial_lattice(S3, rank=2)
    ok, why = verify_exact(cert, explain=True)
    assert not ok and why == "rank mismatch"


# ---------------------------------------------------------------------------
# resolutions
# ---------------------------------------------------------------------------

def test_coflasque_resolution_of_j3():
    cert = coflasque_resolution(J3)
    assert verify_exact(cert)
    assert is_coflasque(cert.left)
    assert sum(S3.order // h.order for h in cert.mid_parts) == cert.mid.rank


def test_coflasque_resolution_of_permutation_is_split_size():
    # a permutation lattice is its own best approximation: C is coflasque
    for g in (S3, C4):
        for h in all_subgroups(g).representatives():
            cert = coflasque_resolution(coset_lattice(g, h))
            assert verify_exact(cert)
            assert is_coflasque(cert.left)


def test_coflasque_resolution_random_twists():
    rng = random.Random(20240821)
    for _ in range(5):
        u = IntMat.identity(3)
        for _ in range(3):
            i, j = rng.sample(range(3), 2)
            bump = [[1 if a == b else 0 for b in range(3)] for a in range(3)]
            bump[i][j] = rng.choice([-1, 1])
            u = u * IntMat(bump)
        lat = twisted(ZX, u)
        cert = coflasque_resolution(lat)
        assert verify_exact(cert)
        assert is_coflasque(cert.left)


def test_flasque_resolution_of_j3():
    fl = flasque_resolution(J3)
    assert verify_exact(fl.cert)
    assert fl.cert.left == J3
    assert is_flasque(fl.cert.right)
    for order, inv in fl.flasque_check:
        assert inv.is_trivial()


def test_flasque_resolution_reverify_property():
    # re-verification suite over a small pool of lattices
    pool = [I3, J3, dual(J3), tensor(J3, J3)]
    for m in pool:
        fl = flasque_resolution(m)
        assert verify_exact(fl.cert)
        assert is_flasque(fl.cert.right)
        cof = coflasque_resolution(m)
        assert verify_exact(cof)
        assert is_coflasque(cof.left)


# ---------------------------------------------------------------------------
# sectioned sequences
# ---------------------------------------------------------------------------

def j_sequence():
    pj = IntMat([[1, 0], [0, 1], [-1, -1]])
    cert = sequence_from_surjection(ZX, J3, pj)
    s = IntMat([[2, -1, -1], [-1, 2, -1]])  # s(pi(x)) = 3x - sum
    return SectionedSequence(cert, EquivariantMap(J3, ZX, s), 3)


def y2_sequence():
    a3 = [h for h in all_subgroups(S3).representatives() if h.order == 3][0]
    zy = coset_lattice(S3, a3)
    cert = sequence_from_surjection(zy, trivial_lattice(S3),
                                    IntMat([[1], [1]]))
    return SectionedSequence(cert, EquivariantMap(trivial_lattice(S3), zy,
                                                  IntMat([[1, 1]])), 2)


def test_florence_combine_degrees_not_coprime():
    with pytest.raises(DegreesNotCoprime):
        florence_combine(y2_sequence(), y2_sequence())


def test_florence_combine_invalid_section():
    bad = j_sequence()
    bad.section = EquivariantMap(J3, ZX, bad.section.matrix.scale(2))
    with pytest.raises(SectionInvalid):
        florence_combine(bad, y2_sequence())


def test_florence_combine_j_times_y2():
    comb = florence_combine(j_sequence(), y2_sequence())
    assert comb.degree == 6
    assert verify_exact(comb.cert)
    # combined kernel is Z (x) I_Y2 = I_Y2; compare characters
    a = comb.cert.left
    iy = y2_sequence().cert.left
    assert a.character() == iy.character()
    # section property holds
    assert comb.section.matrix * comb.cert.surj.matrix == \
        IntMat.identity(comb.cert.right.rank).scale(6)


# ---------------------------------------------------------------------------
# pullback splitting
# ---------------------------------------------------------------------------

def test_pullback_split_b3_identity():
    # bottom: 0 -> J(x)I -> J(x)Z[X] -> J -> 0 (augmentation tensored by J)
    jzx = tensor(J3, ZX)
    bottom = sequence_from_surjection(
        jzx, J3, IntMat.identity(2).kron(SUM3))
    rightcol = j_sequence().cert
    split = pullback_split(bottom, rightcol)
    assert split is not None
    # the split certifies B3 + Z[X3] = Z + (J3 (x) Z[X3])
    assert split.sum1.character() == split.sum2.character()
    assert split.iso.check() and split.iso.matrix.is_unimodular()
    assert is_invertible(bottom.left)


def test_pullback_split_on_split_sequences():
    from glattice.lattices import direct_sum
    z = trivial_lattice(S3)
    bottom = sequence_from_surjection(direct_sum(I3, z), z,
                                      IntMat([[0], [0], [1]]))
    rightcol = sequence_from_surjection(trivial_lattice(S3, rank=2), z,
                                        IntMat([[0], [1]]))
    split = pullback_split(bottom, rightcol)
    assert split is not None
    assert split.sum1.character() == split.sum2.character()
    assert split.iso.matrix.is_unimodular()


def test_pullback_split_unsplittable_returns_none():
    # rightcol 0 -> 0 -> Z -> Z -> 0 forces one induced row to be the
    # augmentation sequence, which does not split: expect None
    z = trivial_lattice(S3)
    zero = GLattice(S3, [IntMat.zeros(0, 0)] * S3.order, check=False)
    from glattice.homology import ExactSequenceCert
    rightcol = ExactSequenceCert(
        zero, z, z,
        EquivariantMap(zero, z, IntMat.zeros(0, 1)),
        EquivariantMap(z, z, IntMat.identity(1)))
    bottom = sequence_from_surjection(ZX, z, SUM3)
    assert pullback_split(bottom, rightcol) is None


# ---------------------------------------------------------------------------
# structured hom bases
# ---------------------------------------------------------------------------

def test_hom_basis_parts_matches_generic():
    subs = all_subgroups(S3).representatives()
    c2 = [h for h in subs if h.order == 2][0]
    a3 = [h for h in subs if h.order == 3][0]
    for p1 in (c2, a3, J3):
        for p2 in (c2, a3, J3):
            structured = hom_basis_parts(S3, (p1,), (p2,))
            l1 = parts_lattice(S3, (p1,))
            l2 = parts_lattice(S3, (p2,))
            generic = hom_basis(l1, l2)
            assert len(structured) == len(generic)
            for f in structured:
                map_ = EquivariantMap(l1, l2, f)
                assert map_.check()


def test_find_isomorphism_parts_swapped_sum():
    subs = all_subgroups(S3).representatives()
    c2 = [h for h in subs if h.order == 2][0]
    a3 = [h for h in subs if h.order == 3][0]
    hit = find_isomorphism_parts(S3, (c2, a3), (a3, c2))
    assert hit is not None
    _m1, _m2, f = hit
    assert f.matrix.is_unimodular() and f.check()


# ---------------------------------------------------------------------------
# stably-permutation obstruction and the quasi-permutation decision
# ---------------------------------------------------------------------------

def test_obstruction_none_for_feasible():
    fl = flasque_resolution(J3)
    assert stably_permutation_obstruction(fl.cert.right) is None


def test_quasi_permutation_yes_for_s3_lattices():
    for m in (I3, J3):
        res = quasi_permutation_check(m)
        assert res.verdict == "yes"
        if res.targets:
            assert verify_exact(res.closing)
            assert res.iso.matrix.is_unimodular()


def test_quasi_permutation_no_for_biquadratic_norm_one():
    # J of the regular C2xC2-set: the norm-one torus of a biquadratic
    # extension, the classical non-rational example
    x = coset_gset(V4, V4.trivial_subgroup())
    res = quasi_permutation_check(j_lattice(x))
    assert res.verdict == "no"
    w = res.witness
    assert w is not None and w.verify()


def test_obstruction_witness_rejects_tampering():
    x = coset_gset(V4, V4.trivial_subgroup())
    fl = flasque_resolution(j_lattice(x))
    w = stably_permutation_obstruction(fl.cert.right)
    assert w.verify()
    bad = tuple(c * 0 for c in w.infeasibility_proof)
    from glattice.homology import ObstructionWitness
    w2 = ObstructionWitness(w.test_subgroups, w.unknowns, w.equations,
                            w.rhs, w.eq_labels, bad)
    assert not w2.verify()


def test_quasi_permutation_rank_zero():
    zero = GLattice(S3, [IntMat.zeros(0, 0)] * S3.order, check=False)
    assert quasi_permutation_check(zero).verdict == "yes"
