import json

import pytest

from glattice.intlinalg import IntMat
from glattice.catalog import (
    BUILDERS,
    DIM2_CLASS_COUNT,
    DIM2_ROOTS,
    DIM3_CLASS_COUNT,
    DIM3_HEREDITARY_ROOTS,
    DIM3_RATIONAL_COUNT,
    DIM3_ROOTS,
    CatalogError,
    UndecidedPairs,
    UnknownBuilder,
    builtin_catalog,
    census,
    cyclotomic_companion_matrix,
    entry,
    entry_by_gap_id,
    eta_matrix,
    eval_expr,
    load_catalog,
    named_lattice,
    parse_expr,
    perm_from_cycles,
    rho_dual_matrix,
    rho_matrix,
    verify_identifications,
)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def test_perm_from_cycles():
    assert perm_from_cycles(4, [(1, 2)]) == (1, 0, 2, 3)
    assert perm_from_cycles(4, [(1, 2, 3, 4)]) == (1, 2, 3, 0)
    assert perm_from_cycles(5, [(1, 2), (3, 4)]) == (1, 0, 3, 2, 4)


def test_rho_matrix_last_point():
    # the omitted point maps every basis vector through the all -1 row
    m = rho_matrix(perm_from_cycles(3, [(1, 2, 3)]))
    assert m.data == ((0, 1), (-1, -1))
    assert m * m * m == IntMat.identity(2)


def test_rho_is_a_homomorphism():
    a = perm_from_cycles(5, [(1, 2, 3)])
    b = perm_from_cycles(5, [(2, 5)])
    ab = tuple(b[a[i]] for i in range(5))
    assert rho_matrix(a) * rho_matrix(b) == rho_matrix(ab)


def test_rho_dual_is_contragredient():
    p = perm_from_cycles(4, [(1, 2, 3, 4)])
    assert rho_dual_matrix(p) == \
        rho_matrix(p).inverse_unimodular().transpose()


def test_eta_matrix_signs_follow_target():
    assert eta_matrix(2, (1, 2), (0, 1)).data == ((-1, 0), (0, -1))
    assert eta_matrix(2, (2,), (1, 0)).data == ((0, -1), (1, 0))


def test_cyclotomic_companion_orders():
    for m, deg in ((3, 2), (4, 2), (8, 4), (12, 4), (5, 4)):
        c = cyclotomic_companion_matrix(m)
        assert c.rows == deg
        g = named_lattice("cyclotomic_companion", m).group
        assert g.order == m if m % 2 == 0 else 2 * m  # -1 is a power iff even
    assert cyclotomic_companion_matrix(8).charpoly() == (1, 0, 0, 0, 1)


def test_named_lattice_orders():
    assert named_lattice("eta_B", 2).group.order == 8
    assert named_lattice("eta_B", 3).group.order == 48
    assert named_lattice("rho", 4).group.order == 120
    assert named_lattice("rho_sign", 4).group.order == 240
    assert named_lattice("rho_dual", 3).group.order == 24
    # aliases agree with the primary names
    assert named_lattice("weight_A", 3).group.order == \
        named_lattice("rho", 3).group.order


def test_unknown_builder():
    with pytest.raises(UnknownBuilder):
        named_lattice("nope", 3)
    assert "rho" in BUILDERS and "eta_B" in BUILDERS


# ---------------------------------------------------------------------------
# catalog loading and lookup
# ---------------------------------------------------------------------------

def test_builtin_catalog_loads():
    cat = builtin_catalog()
    assert len(cat) >= 30
    names = [e.name for e in cat]
    assert len(set(names)) == len(names)
    for e in cat:
        assert all(g.rows == e.rank for g in e.generators)


def test_entry_lookup():
    e = entry("dade-2-1")
    assert e.group().order == 8
    assert entry_by_gap_id((2, 3, 2, 1)) is e
    with pytest.raises(KeyError):
        entry("no-such-entry")
    with pytest.raises(KeyError):
        entry_by_gap_id((9, 9, 9, 9))


def test_catalog_group_orders():
    expect = {"dade-2-2": 12, "dade-3-2": 48, "dade-4-5": 288,
              "dade-4-8": 384, "dade-4-9": 1152, "z-4-33-2-1": 24,
              "z-4-31-1-3": 20}
    for name, order in expect.items():
        assert entry(name).group().order == order, name


def test_load_catalog_rejects_bad_documents():
    with pytest.raises(CatalogError):
        load_catalog("not json {")
    with pytest.raises(CatalogError):
        load_catalog('{"name": "x"}')  # not a list
    good = {"name": "t", "gap_id": None, "rank": 1,
            "generators": [[[1]]], "expected_lattice": None,
            "expected_verdict": None, "provenance": "test"}
    assert load_catalog(json.dumps([good]))[0].name == "t"
    bad = dict(good); del bad["provenance"]
    with pytest.raises(CatalogError):
        load_catalog(json.dumps([bad]))
    bad = dict(good, generators=[[[2]]])  # det 2
    with pytest.raises(CatalogError):
        load_catalog(json.dumps([bad]))
    bad = dict(good, generators=[[[1, 0]]])
    with pytest.raises(CatalogError):
        load_catalog(json.dumps([bad]))
    bad = dict(good, gap_id=[1, 2, 3])
    with pytest.raises(CatalogError):
        load_catalog(json.dumps([bad]))
    with pytest.raises(CatalogError):
        load_catalog(json.dumps([good, good]))  # duplicate name


# ---------------------------------------------------------------------------
# expected-lattice expressions
# ---------------------------------------------------------------------------

def test_parse_expr_trees():
    assert parse_expr("minus") == ("minus", ())
    head, args = parse_expr("sum(named(eta_B,2),minus)")
    assert head == "sum" and len(args) == 2
    assert args[0] == ("named", (("eta_B", ()), ("2", ())))


def test_parse_expr_errors():
    for bad in ("", "sum(", "sum(a,)", "f(a))", "(a)"):
        with pytest.raises(CatalogError):
            parse_expr(bad)


def test_eval_expr():
    lat = eval_expr(parse_expr("sum(named(eta_B,2),minus)"))
    assert lat.rank == 3 and lat.group.order == 16
    assert eval_expr(parse_expr("minus")).group.order == 2
    d = eval_expr(parse_expr("dual(entry(dade-3-3))"))
    assert d.group.order == 48
    w = eval_expr(parse_expr("wreath2(named(rho_sign_dual,2))"))
    assert w.rank == 4 and w.group.order == 288


# ---------------------------------------------------------------------------
# identification audit
# ---------------------------------------------------------------------------

def test_verify_identifications_all_pass():
    rep = verify_identifications()
    assert rep.ok(), rep.failures()
    statuses = {s for _n, s, _d in rep.results}
    assert "pass" in statuses
    # extension entries are checked structurally, not by conjugation
    detail = dict((n, d) for n, _s, d in rep.results)
    assert "non-split" in detail["z-4-25-7-5"]


def test_maximal_group_word_identities():
    # the seven transcribed rank-4 reflection generators satisfy the
    # defining words of the four simple reflections
    x = [None] + list(entry("dade-4-9").generators)
    inv = lambda m: m.inverse_unimodular()
    sa2 = x[5] * x[3] * inv(x[4]) * x[1]
    assert sa2.data == ((1, 0, 0, 0), (0, 1, 0, 0), (-1, -1, -1, 2),
                        (0, 0, 0, 1))
    sa3 = x[2] * x[1]
    assert sa3.data == ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0),
                        (1, 1, 1, -1))
    sa4 = inv(x[6]) * inv(x[4]) * inv(x[3]) * x[2] * x[1]
    assert sa4.data == ((0, 0, 0, 1), (1, 1, 0, -1), (1, 0, 1, -1),
                        (1, 0, 0, 0))
    for s in (x[1], sa2, sa3, sa4):
        assert s * s == IntMat.identity(4)


# ---------------------------------------------------------------------------
# census
# ---------------------------------------------------------------------------

def test_census_dim2():
    rep = census(DIM2_ROOTS)
    assert rep.count == DIM2_CLASS_COUNT == 13
    labels = rep.labels_by_root()
    assert set(labels) == set(DIM2_ROOTS)
    # every subgroup class got a label and the two roots share classes
    flat = [l for v in labels.values() for _i, l in v]
    assert len(set(flat)) == 13


def test_census_root_order_independent():
    a = census(DIM2_ROOTS)
    b = census(tuple(reversed(DIM2_ROOTS)))
    assert a.labels_by_root() == b.labels_by_root()


def test_census_dim3():
    rep = census(DIM3_ROOTS)
    assert rep.count == DIM3_CLASS_COUNT == 73


def test_census_dim3_rational_union():
    rep = census(DIM3_HEREDITARY_ROOTS)
    assert rep.count == DIM3_RATIONAL_COUNT == 58


def test_census_tiny_budget_raises_undecided():
    with pytest.raises(UndecidedPairs) as exc:
        census(DIM2_ROOTS, budget=1)
    rep = exc.value.report
    assert rep.undecided_pairs
    assert rep.count >= DIM2_CLASS_COUNT  # unmerged pairs only add classes
