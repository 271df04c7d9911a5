"""Command-line surface: ``glat``.

Subcommands wrap the library for interactive use and scripted
pipelines; ``--json`` switches every report to deterministic JSON on
stdout (identical inputs give identical output minus the timing
field).  Exit codes: 0 success, 1 "unknown/undecided" verdict,
2 input error.

This module also owns the lattice-expression surface syntax::

    expr := ident | ident "(" args ")"
    args := arg ("," arg)*
    arg  := expr | integer | subgroup-spec

with heads std, Z, sign(H), perm(H), I(H), J(H), dual(e), sum(e,e),
tensor(e,e), ind(H,e), res(H,e), inflate(N,e), named(builder,n).
Subgroup arguments are either a catalog entry name or
``gens:[word,...]`` with words in the letters a,b,c,... naming the
ambient group's generators in catalog order (e.g. ``gens:[a*b,c^-1]``).
"""

import argparse
import json
import sys
import time

from . import __version__
from .groups import (
    OrderCapExceeded,
    Subgroup,
    all_subgroups,
    closure,
    structure_probe,
)
from .intlinalg import BudgetExhausted, IntMat
from .lattices import (
    aug_ideal,
    coset_gset,
    coset_lattice,
    dual,
    direct_sum,
    induce,
    inflate,
    j_lattice,
    quotient_group,
    restrict,
    sign_lattice,
    std_lattice,
    tate,
    tensor,
    trivial_lattice,
)
from .homology import flasque_resolution
from .rationality import (
    UNKNOWN,
    NormOneSpec,
    UnrecognizedShape,
    classify,
    hereditary_closure,
    norm_one_classify,
)
from . import catalog as _catalog
from .catalog import (
    CatalogError,
    UndecidedPairs,
    UnknownBuilder,
    builtin_catalog,
    census,
    entry,
    load_catalog,
    named_lattice,
)


class ParseError(Exception):
    def __init__(self, message, offset):
        super().__init__("%s (at offset %d)" % (message, offset))
        self.offset = offset


# ---------------------------------------------------------------------------
# lattice expression parser
# ---------------------------------------------------------------------------

EXPR_HEADS = {
    "std": 0, "Z": 0, "sign": 1, "perm": 1, "I": 1, "J": 1,
    "dual": 1, "sum": 2, "tensor": 2, "ind": 2, "res": 2,
    "inflate": 2, "named": 2,
}


def parse_lattice_expr(text):
    """Parse the surface syntax into a tree of (head, args) tuples.

    Subgroup specs appear as ("#subgroup", spec-string) leaves and
    integers as ("#int", value) leaves.
    """
    pos = [0]
    s = text

    def err(msg):
        raise ParseError(msg, pos[0])

    def skip_ws():
        while pos[0] < len(s) and s[pos[0]].isspace():
            pos[0] += 1

    def ident():
        skip_ws()
        start = pos[0]
        while pos[0] < len(s) and (s[pos[0]].isalnum()
                                   or s[pos[0]] in "_-"):
            pos[0] += 1
        if pos[0] == start:
            err("expected identifier")
        return s[start:pos[0]]

    def gens_spec():
        # gens:[word,...] -- consume through the matching bracket
        start = pos[0]
        pos[0] += len("gens:")
        skip_ws()
        if pos[0] >= len(s) or s[pos[0]] != "[":
            err("expected '[' after gens:")
        pos[0] += 1
        depth = 1
        while pos[0] < len(s) and depth:
            if s[pos[0]] == "[":
                depth += 1
            elif s[pos[0]] == "]":
                depth -= 1
            pos[0] += 1
        if depth:
            err("unterminated gens:[...]")
        return ("#subgroup", "".join(s[start:pos[0]].split()))

    def arg():
        skip_ws()
        if s[pos[0]:pos[0] + 5] == "gens:":
            return gens_spec()
        name = ident()
        skip_ws()
        if pos[0] < len(s) and s[pos[0]] == "(":
            return finish_call(name)
        if name.lstrip("-").isdigit():
            return ("#int", int(name))
        if name in EXPR_HEADS and EXPR_HEADS[name] == 0:
            return (name, ())
        # bare identifier in argument position: subgroup label or
        # builder name, resolved by the evaluator
        return ("#subgroup", name)

    def finish_call(name):
        # '(' already seen
        pos[0] += 1
        args = [arg()]
        skip_ws()
        while pos[0] < len(s) and s[pos[0]] == ",":
            pos[0] += 1
            args.append(arg())
            skip_ws()
        if pos[0] >= len(s) or s[pos[0]] != ")":
            err("expected ')'")
        pos[0] += 1
        if name not in EXPR_HEADS:
            err("unknown head %r" % name)
        if EXPR_HEADS[name] != len(args):
            err("%s takes %d argument(s)" % (name, EXPR_HEADS[name]))
        return (name, tuple(args))

    skip_ws()
    if pos[0] >= len(s):
        err("empty expression")
    name = ident()
    skip_ws()
    if pos[0] < len(s) and s[pos[0]] == "(":
        tree = finish_call(name)
    else:
        if name not in EXPR_HEADS or EXPR_HEADS[name] != 0:
            err("unknown or incomplete expression %r" % name)
        tree = (name, ())
    skip_ws()
    if pos[0] != len(s):
        err("trailing input")
    return tree


def print_lattice_expr(tree):
    head, args = tree
    if head == "#int":
        return str(args)
    if head == "#subgroup":
        return args
    if not args:
        return head
    return "%s(%s)" % (head, ",".join(print_lattice_expr(a) for a in args))


# ---------------------------------------------------------------------------
# evaluation against an ambient group
# ---------------------------------------------------------------------------

def _word_to_index(g, word):
    """Evaluate a generator word like 'a*b^-1*c' to an element index."""
    idx = 0  # identity
    gens = g.generator_indices
    for factor in word.split("*"):
        if not factor:
            raise ParseError("empty factor in word %r" % word, 0)
        base, _, exp = factor.partition("^")
        if len(base) != 1 or not ("a" <= base <= "z"):
            raise ParseError("bad generator letter %r" % base, 0)
        k = ord(base) - ord("a")
        if k >= len(gens):
            raise ParseError("group has no generator %r" % base, 0)
        e = int(exp) if exp else 1
        x = gens[k]
        if e < 0:
            x = g.inv[x]
            e = -e
        for _ in range(e):
            idx = g.table[idx][x]
    return idx


def _generated_subgroup(g, indices):
    members = {0}
    frontier = list(indices)
    while frontier:
        x = frontier.pop()
        if x in members:
            continue
        members.add(x)
        for y in list(members):
            for z in (g.table[x][y], g.table[y][x]):
                if z not in members:
                    frontier.append(z)
        frontier.append(g.inv[x])
    # close under products until stable
    changed = True
    while changed:
        changed = False
        mem = list(members)
        for a in mem:
            for b in mem:
                c = g.table[a][b]
                if c not in members:
                    members.add(c)
                    changed = True
    return Subgroup(g, frozenset(members))


def resolve_subgroup(g, spec):
    """Subgroup of g from a spec: 'trivial', 'full', 'gens:[...]' with
    words in letters a,b,c,... (catalog generator order), or a catalog
    entry name whose generators are elements of g."""
    if spec in ("trivial", "1"):
        return g.trivial_subgroup()
    if spec in ("full", "G"):
        return Subgroup(g, frozenset(range(g.order)))
    if spec.startswith("gens:"):
        body = spec[len("gens:"):].strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ParseError("expected gens:[...]", 0)
        words = [w for w in body[1:-1].split(",") if w]
        return _generated_subgroup(
            g, [_word_to_index(g, w) for w in words])
    e = entry(spec)  # raises KeyError for unknown names
    idx = []
    for m in e.generators:
        if m not in g.index:
            raise CatalogError(
                "generators of %r are not elements of the ambient group"
                % spec)
        idx.append(g.index[m])
    return _generated_subgroup(g, idx)


def eval_lattice_expr(tree, g):
    """Evaluate a parsed expression against the ambient group g."""
    head, args = tree

    def sub(a):
        if a[0] != "#subgroup":
            raise ParseError("expected a subgroup argument", 0)
        return resolve_subgroup(g, a[1])

    if head == "std":
        return std_lattice(g)
    if head == "Z":
        return trivial_lattice(g)
    if head == "sign":
        return sign_lattice(g, sub(args[0]))
    if head == "perm":
        return coset_lattice(g, sub(args[0]))
    if head == "I":
        return aug_ideal(coset_gset(g, sub(args[0])))
    if head == "J":
        return j_lattice(coset_gset(g, sub(args[0])))
    if head == "dual":
        return dual(eval_lattice_expr(args[0], g))
    if head == "sum":
        return direct_sum(eval_lattice_expr(args[0], g),
                          eval_lattice_expr(args[1], g))
    if head == "tensor":
        return tensor(eval_lattice_expr(args[0], g),
                      eval_lattice_expr(args[1], g))
    if head == "ind":
        h = sub(args[0])
        inner = eval_lattice_expr(args[1], h.as_group())
        return induce(h, inner)
    if head == "res":
        h = sub(args[0])
        return restrict(eval_lattice_expr(args[1], g), h)
    if head == "inflate":
        n = sub(args[0])
        q, proj = quotient_group(g, n)
        return inflate(g, proj, eval_lattice_expr(args[1], q))
    if head == "named":
        if args[0][0] != "#subgroup":
            raise ParseError("expected a builder name", 0)
        if args[1][0] != "#int":
            raise ParseError("expected an integer size", 0)
        return named_lattice(args[0][1], args[1][1])
    raise ParseError("unknown head %r" % head, 0)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _invariants(inv):
    return list(inv.factors) if hasattr(inv, "factors") else inv


def _verdict_dict(v):
    return {"level": v.level,
            "certificate": [s.kind for s in v.certificate],
            "note": getattr(v, "note", None)}


class Reporter:
    def __init__(self, argv, as_json, out=None):
        self.report = {"command": list(argv), "version": __version__,
                       "inputs": {}, "results": {}}
        self.as_json = as_json
        self.out = out if out is not None else sys.stdout
        self.t0 = time.time()

    def line(self, text):
        if not self.as_json:
            print(text, file=self.out)

    def emit(self):
        self.report["timing"] = round(time.time() - self.t0, 3)
        if self.as_json:
            print(json.dumps(self.report, sort_keys=True, indent=1,
                             default=str), file=self.out)


def _ambient(name):
    return entry(name).group()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_group(args, rep):
    g = _ambient(args.name)
    if args.action == "show":
        probe = structure_probe(g)
        rep.report["results"] = {
            "name": args.name, "order": probe.order, "rank": g.rank,
            "is_cyclic": probe.is_cyclic, "is_abelian": probe.is_abelian,
            "sylows_all_cyclic": probe.sylows_all_cyclic,
            "center_order": probe.center.order,
            "normal_subgroup_orders":
                sorted(h.order for h in probe.normal_subgroups)}
        for k, v in sorted(rep.report["results"].items()):
            rep.line("%s: %s" % (k, v))
        return 0
    # subgroups
    classes = all_subgroups(g).classes
    out = []
    for i, cls in enumerate(classes):
        out.append({"index": i, "order": cls.representative.order,
                    "class_size": cls.size})
        rep.line("class %d: order %d, %d conjugate(s)"
                 % (i, cls.representative.order, cls.size))
    rep.report["results"] = {"name": args.name, "classes": out,
                             "count": len(out)}
    rep.line("total: %d subgroup classes" % len(out))
    return 0


def cmd_cohomology(args, rep):
    g = _ambient(args.group)
    lat = eval_lattice_expr(parse_lattice_expr(args.lattice), g)
    h = resolve_subgroup(g, args.subgroup) if args.subgroup else \
        Subgroup(g, frozenset(range(g.order)))
    inv = tate(lat, h, args.degree)
    rep.report["inputs"] = {"group": args.group, "lattice": args.lattice,
                            "subgroup": args.subgroup, "degree": args.degree}
    rep.report["results"] = {"invariants": _invariants(inv)}
    rep.line("H^%d = %s" % (args.degree,
                            _invariants(inv) or "0"))
    return 0


def cmd_flasque(args, rep):
    g = _ambient(args.group)
    lat = eval_lattice_expr(parse_lattice_expr(args.lattice), g)
    fl = flasque_resolution(lat)
    cert = fl.cert
    rep.report["inputs"] = {"group": args.group, "lattice": args.lattice}
    rep.report["results"] = {
        "left_rank": cert.left.rank, "mid_rank": cert.mid.rank,
        "flasque_rank": cert.right.rank,
        "mid_parts": [h.order for h in (cert.mid_parts or ())],
        "flasque_checks": [[o, _invariants(i)] for o, i in fl.checks]}
    rep.line("0 -> M(%d) -> P(%d) -> F(%d) -> 0"
             % (cert.left.rank, cert.mid.rank, cert.right.rank))
    rep.line("flasque condition verified on %d subgroup classes"
             % len(fl.checks))
    return 0


def cmd_classify(args, rep):
    g = _ambient(args.group)
    lat = eval_lattice_expr(parse_lattice_expr(args.lattice), g) \
        if args.lattice else entry(args.group).lattice()
    rep.report["inputs"] = {"group": args.group, "lattice": args.lattice,
                            "hereditary": args.hereditary}
    if args.hereditary:
        hr = hereditary_closure(lat)
        rep.report["results"] = {
            "verdict": _verdict_dict(hr.top),
            "subgroups": [[h.order, v.level] for h, v in hr.entries]}
        rep.line("verdict: %s" % hr.top.level)
        v = hr.top
    else:
        v = classify(lat)
        rep.report["results"] = {"verdict": _verdict_dict(v)}
        rep.line("verdict: %s" % v.level)
        for s in v.certificate:
            rep.line("  via %s" % s.kind)
    return 1 if v.level == UNKNOWN else 0


def cmd_norm_one(args, rep):
    g = _ambient(args.group)
    h = resolve_subgroup(g, args.stabilizer)
    rep.report["inputs"] = {"group": args.group,
                            "stabilizer": args.stabilizer}
    spec = NormOneSpec(g, h)
    try:
        v = norm_one_classify(spec)
        rep.report["results"] = {"verdict": _verdict_dict(v),
                                 "fallback": False}
    except UnrecognizedShape as exc:
        rep.line("no structural branch (%s); classifying the character "
                 "lattice directly" % exc)
        v = classify(spec.lattice())
        rep.report["results"] = {"verdict": _verdict_dict(v),
                                 "fallback": True}
    rep.line("verdict: %s" % v.level)
    return 1 if v.level == UNKNOWN else 0


DIM_ROOTS = {2: _catalog.DIM2_ROOTS, 3: _catalog.DIM3_ROOTS,
             4: _catalog.DIM4_ROOTS}


def cmd_census(args, rep):
    roots = tuple(args.roots.split(",")) if args.roots \
        else DIM_ROOTS[args.dim]
    rep.report["inputs"] = {"dim": args.dim, "roots": list(roots),
                            "budget": args.budget, "jobs": args.jobs}
    try:
        out = census(roots, budget=args.budget, jobs=args.jobs)
    except UndecidedPairs as exc:
        out = exc.report
        rep.report["results"] = {
            "count": out.count, "accepted": False,
            "undecided": [[list(a), list(b)]
                          for (a, b), _fp in out.undecided_pairs]}
        rep.line("census UNDECIDED: %d pair(s) exhausted the budget; "
                 "%d classes so far" % (len(out.undecided_pairs), out.count))
        return 1
    rep.report["results"] = {
        "count": out.count, "accepted": True,
        "classes": [{"label": c.label, "order": c.representative.order,
                     "members": [list(m) for m in c.members]}
                    for c in out.classes]}
    rep.line("census: %d Z-classes from %d root(s)"
             % (out.count, len(roots)))
    return 0


def cmd_catalog(args, rep):
    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    entries = load_catalog(text)
    rep.report["results"] = {"entries": len(entries), "valid": True}
    rep.line("%s: %d entries, all valid" % (args.file, len(entries)))
    return 0


# --- verify: golden result driver ----------------------------------------

def _case_census2(rep):
    out = census(_catalog.DIM2_ROOTS)
    ok = out.count == _catalog.DIM2_CLASS_COUNT
    rep.line("dim-2 census: %d classes (want %d)"
             % (out.count, _catalog.DIM2_CLASS_COUNT))
    return ok, {"count": out.count}


def _case_census3(rep):
    out = census(_catalog.DIM3_ROOTS)
    hered = census(_catalog.DIM3_HEREDITARY_ROOTS)
    ok = out.count == _catalog.DIM3_CLASS_COUNT and \
        hered.count == _catalog.DIM3_RATIONAL_COUNT
    rep.line("dim-3 census: %d classes, %d rational"
             % (out.count, hered.count))
    return ok, {"count": out.count, "rational": hered.count}


def _case_4_33_2_1(rep):
    from .homology import stably_permutation_obstruction
    e = entry("z-4-33-2-1")
    g = e.group()
    lat = e.lattice()
    probe = structure_probe(g)
    center = probe.center
    center_cyclic = 4 in {g.element_orders[i] for i in center.members}
    vals = {"order": g.order, "center_order": center.order,
            "center_cyclic": center_cyclic}
    classes = all_subgroups(g).classes
    h3 = next(c.representative for c in classes
              if c.representative.order == 3)
    c8_classes = [c for c in classes
                  if c.representative.order == 8
                  and any(g.element_orders[i] == 8
                          for i in c.representative.members)]
    vals["c8_classes"] = [c.size for c in c8_classes]
    h8 = c8_classes[0].representative
    vals["H1_H3"] = _invariants(tate(lat, h3, 1))
    vals["H1_H8"] = _invariants(tate(lat, h8, 1))
    vals["H1_G"] = _invariants(tate(lat, g.full_subgroup(), 1))
    fl = flasque_resolution(lat)
    w = stably_permutation_obstruction(fl.cert.right)
    vals["obstruction"] = w is not None
    v = classify(lat)
    vals["verdict"] = v.level
    ok = (g.order == 24 and center.order == 4 and center_cyclic
          and vals["c8_classes"] == [3]
          and vals["H1_H3"] == [3, 3] and vals["H1_H8"] == [2]
          and vals["H1_G"] == []
          and w is not None and v.level == "RetractRational")
    rep.line("[4,33,2,1]: retract yes, stably no (obstruction witness %s)"
             % ("found" if w is not None else "missing"))
    return ok, vals


def _case_retract_seven(rep):
    ok = True
    vals = {}
    for name in _catalog.RETRACT_ONLY_NAMES:
        v = classify(entry(name).lattice())
        vals[name] = v.level
        good = v.level == "RetractRational"
        ok = ok and good
        rep.line("%s: %s" % (name, v.level))
    return ok, vals


VERIFY_CASES = {
    "census-2": _case_census2,
    "census-3": _case_census3,
    "4-33-2-1": _case_4_33_2_1,
    "retract-seven": _case_retract_seven,
}


def cmd_verify(args, rep):
    cases = [args.case] if args.case else ["census-2", "census-3",
                                           "4-33-2-1"]
    results = {}
    all_ok = True
    for cid in cases:
        if cid not in VERIFY_CASES:
            raise CatalogError("unknown case %r (have: %s)"
                               % (cid, ", ".join(sorted(VERIFY_CASES))))
        ok, vals = VERIFY_CASES[cid](rep)
        results[cid] = {"ok": ok, "values": vals}
        rep.line("case %s: %s" % (cid, "ok" if ok else "FAILED"))
        all_ok = all_ok and ok
    rep.report["results"] = results
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _build_parser():
    p = argparse.ArgumentParser(prog="glat",
                                description="integral lattice toolkit")
    p.add_argument("--json", action="store_true",
                   help="emit a JSON report on stdout")
    subs = p.add_subparsers(dest="cmd", required=True)

    gp = subs.add_parser("group", help="inspect a catalog group")
    gp.add_argument("action", choices=("show", "subgroups"))
    gp.add_argument("name")
    gp.set_defaults(fn=cmd_group)

    cp = subs.add_parser("cohomology", help="Tate cohomology")
    cp.add_argument("--group", required=True)
    cp.add_argument("--lattice", required=True)
    cp.add_argument("--subgroup")
    cp.add_argument("--degree", type=int, required=True,
                    choices=(-1, 0, 1))
    cp.set_defaults(fn=cmd_cohomology)

    fp = subs.add_parser("flasque", help="flasque resolution")
    fp.add_argument("--group", required=True)
    fp.add_argument("--lattice", required=True)
    fp.set_defaults(fn=cmd_flasque)

    kp = subs.add_parser("classify", help="rationality classification")
    kp.add_argument("--group", required=True)
    kp.add_argument("--lattice")
    kp.add_argument("--hereditary", action="store_true")
    kp.set_defaults(fn=cmd_classify)

    np = subs.add_parser("norm-one", help="norm-one torus decision table")
    np.add_argument("--group", required=True)
    np.add_argument("--stabilizer", required=True)
    np.set_defaults(fn=cmd_norm_one)

    sp = subs.add_parser("census", help="Z-class census")
    sp.add_argument("--dim", type=int, choices=(2, 3, 4))
    sp.add_argument("--roots")
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--budget", type=int, default=60000)
    sp.set_defaults(fn=cmd_census)

    vp = subs.add_parser("verify-paper",
                         help="re-run the recorded golden results")
    vp.add_argument("--case")
    vp.set_defaults(fn=cmd_verify)

    tp = subs.add_parser("catalog", help="catalog file tools")
    tp.add_argument("action", choices=("validate",))
    tp.add_argument("file")
    tp.set_defaults(fn=cmd_catalog)
    return p


def run(argv):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    rep = Reporter(argv, args.json)
    try:
        code = args.fn(args, rep)
    except (ParseError, CatalogError, UnknownBuilder, KeyError,
            OrderCapExceeded, OSError, ValueError) as exc:
        rep.report["error"] = str(exc)
        rep.line("error: %s" % exc)
        rep.emit()
        return 2
    except BudgetExhausted as exc:
        rep.report["error"] = "budget exhausted: %s" % exc
        rep.line("undecided: %s" % exc)
        rep.emit()
        return 1
    rep.emit()
    return code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
