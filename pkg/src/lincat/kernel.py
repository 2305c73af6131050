"""Canonical whiskered-cell traces and the congruence engine.

A morphism term is flattened to a sequence of cells, each an atomic
generator under a context path of tensor/par/bang frames.  The category
and functor axioms become list concatenation; the bifunctor interchange
becomes commutation of independent cells, normalized by the
lexicographically-least word of the induced trace monoid.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .syntax import (
    Object, Atom, UnitTensor, UnitPar, Tensor, Par, Dual, Bang, ONE, BOT,
    MorphTerm, Gen, Seq, TensorM, ParM, BangM,
    Generator, generator_type, infer_type, pretty_object,
    STRUCTURAL_KINDS, INVERSE_OF, TypeError_,
)

# path tokens
TL, TR, PL, PR, BB = "tl", "tr", "pl", "pr", "b"
_TOKEN_ORD = {TL: "0", PL: "1", TR: "2", PR: "3", BB: "4"}


@dataclass(frozen=True)
class Cell:
    kind: str
    path: tuple
    subs: tuple = ()

    def __repr__(self):
        return dump_cell(self)


def dump_cell(c: Cell) -> str:
    from .syntax import gen_name
    p = ".".join(c.path) if c.path else "-"
    return f"{gen_name(c.kind, c.subs)} @ {p}"


def path_key(path: tuple) -> str:
    return "".join(_TOKEN_ORD[t] for t in path)


_KEY_CACHE = {}


def cell_key(c: Cell):
    k = _KEY_CACHE.get(c)
    if k is None:
        k = (path_key(c.path), c.kind,
             ",".join(pretty_object(s) for s in c.subs))
        if len(_KEY_CACHE) > 200_000:
            _KEY_CACHE.clear()
        _KEY_CACHE[c] = k
    return k


def independent(c1: Cell, c2: Cell) -> bool:
    """Cells acting on disjoint subtrees (paths diverge at a binary node)."""
    p, q = c1.path, c2.path
    for a, b in zip(p, q):
        if a != b:
            return True
    return False  # one is a prefix of the other: they interfere


# ---------------------------------------------------------------------------
# Object surgery


def subtree_at(obj: Object, path: tuple) -> Object:
    for t in path:
        if t == TL or t == TR:
            if not isinstance(obj, Tensor):
                raise TypeError_(f"no tensor at {path}")
            obj = obj.left if t == TL else obj.right
        elif t == PL or t == PR:
            if not isinstance(obj, Par):
                raise TypeError_(f"no par at {path}")
            obj = obj.left if t == PL else obj.right
        else:
            if not isinstance(obj, Bang):
                raise TypeError_(f"no bang at {path}")
            obj = obj.inner
    return obj


def replace_at(obj: Object, path: tuple, new: Object) -> Object:
    if not path:
        return new
    t = path[0]
    if t == TL:
        return Tensor(replace_at(obj.left, path[1:], new), obj.right)
    if t == TR:
        return Tensor(obj.left, replace_at(obj.right, path[1:], new))
    if t == PL:
        return Par(replace_at(obj.left, path[1:], new), obj.right)
    if t == PR:
        return Par(obj.left, replace_at(obj.right, path[1:], new))
    return Bang(replace_at(obj.inner, path[1:], new))


def derive_subs(kind: str, active: Object, stored: tuple) -> tuple:
    """Subscripts of a generator from its active (domain) subtree.

    Everything except tau is determined by its domain; tau keeps the
    stored subscript (its codomain is free).
    """
    k = kind
    if k == "tau":
        if not isinstance(active, UnitTensor):
            raise TypeError_("tau needs domain 1")
        return stored
    if k == "phi0":
        if not isinstance(active, UnitTensor):
            raise TypeError_("phi0 needs domain 1")
        return ()
    if k in ("id", "lam~", "rho~", "blam~", "brho~"):
        return (active,)
    if k in ("delta", "eps", "dup", "drop"):
        if not isinstance(active, Bang):
            raise TypeError_(f"{k} needs a bang, got {pretty_object(active)}")
        return (active.inner,)
    if k == "gamma":
        if (not isinstance(active, Tensor) or not isinstance(active.left, Dual)
                or active.left.inner != active.right):
            raise TypeError_(f"gamma needs A^*A, got {pretty_object(active)}")
        return (active.right,)
    if k == "phi":
        if (not isinstance(active, Tensor) or not isinstance(active.left, Bang)
                or not isinstance(active.right, Bang)):
            raise TypeError_(f"phi needs !A*!B, got {pretty_object(active)}")
        return (active.left.inner, active.right.inner)
    if k == "alpha":
        if not (isinstance(active, Tensor) and isinstance(active.left, Tensor)):
            raise TypeError_("alpha shape")
        return (active.left.left, active.left.right, active.right)
    if k == "alpha~":
        if not (isinstance(active, Tensor) and isinstance(active.right, Tensor)):
            raise TypeError_("alpha~ shape")
        return (active.left, active.right.left, active.right.right)
    if k == "balpha":
        if not (isinstance(active, Par) and isinstance(active.left, Par)):
            raise TypeError_("balpha shape")
        return (active.left.left, active.left.right, active.right)
    if k == "balpha~":
        if not (isinstance(active, Par) and isinstance(active.right, Par)):
            raise TypeError_("balpha~ shape")
        return (active.left, active.right.left, active.right.right)
    if k == "lam":
        if not (isinstance(active, Tensor) and isinstance(active.left, UnitTensor)):
            raise TypeError_("lam shape")
        return (active.right,)
    if k == "rho":
        if not (isinstance(active, Tensor) and isinstance(active.right, UnitTensor)):
            raise TypeError_("rho shape")
        return (active.left,)
    if k == "blam":
        if not (isinstance(active, Par) and isinstance(active.left, UnitPar)):
            raise TypeError_("blam shape")
        return (active.right,)
    if k == "brho":
        if not (isinstance(active, Par) and isinstance(active.right, UnitPar)):
            raise TypeError_("brho shape")
        return (active.left,)
    if k == "sig":
        if not isinstance(active, Tensor):
            raise TypeError_("sig shape")
        return (active.left, active.right)
    if k == "sig~":
        if not isinstance(active, Tensor):
            raise TypeError_("sig~ shape")
        return (active.right, active.left)
    if k == "bsig":
        if not isinstance(active, Par):
            raise TypeError_("bsig shape")
        return (active.left, active.right)
    if k == "bsig~":
        if not isinstance(active, Par):
            raise TypeError_("bsig~ shape")
        return (active.right, active.left)
    if k == "dist":
        if not (isinstance(active, Tensor) and isinstance(active.right, Par)):
            raise TypeError_("dist shape")
        return (active.left, active.right.left, active.right.right)
    if k == "dist'":
        if not (isinstance(active, Tensor) and isinstance(active.left, Par)):
            raise TypeError_("dist' shape")
        return (active.left.left, active.left.right, active.right)
    raise TypeError_(f"unknown kind {k}")


def retype(domain: Object, cells) -> tuple:
    """Replay cells from domain: derive subscripts, return (cells', codomain)."""
    obj = domain
    out = []
    for c in cells:
        active = subtree_at(obj, c.path)
        subs = derive_subs(c.kind, active, c.subs)
        dom, cod = generator_type(c.kind, subs)
        if dom != active:
            raise TypeError_(
                f"cell {c.kind} at {c.path}: domain {pretty_object(dom)} "
                f"!= subtree {pretty_object(active)}")
        out.append(Cell(c.kind, c.path, subs))
        obj = replace_at(obj, c.path, cod)
    return out, obj


# ---------------------------------------------------------------------------
# Canonical form


@dataclass(frozen=True)
class CanonicalForm:
    domain: Object
    codomain: Object
    cells: tuple

    def dump(self) -> str:
        lines = [f"dom {pretty_object(self.domain)}",
                 f"cod {pretty_object(self.codomain)}"]
        lines += [dump_cell(c) for c in self.cells]
        return "\n".join(lines)


def _flatten(m: MorphTerm):
    """Cells of m, identities dropped, bifunctors sequenced left-first."""
    if isinstance(m, Gen):
        if m.gen.kind == "id":
            return []
        return [Cell(m.gen.kind, (), m.gen.subs)]
    if isinstance(m, Seq):
        return _flatten(m.first) + _flatten(m.second)
    if isinstance(m, TensorM):
        return ([Cell(c.kind, (TL,) + c.path, c.subs) for c in _flatten(m.left)]
                + [Cell(c.kind, (TR,) + c.path, c.subs) for c in _flatten(m.right)])
    if isinstance(m, ParM):
        return ([Cell(c.kind, (PL,) + c.path, c.subs) for c in _flatten(m.left)]
                + [Cell(c.kind, (PR,) + c.path, c.subs) for c in _flatten(m.right)])
    if isinstance(m, BangM):
        return [Cell(c.kind, (BB,) + c.path, c.subs) for c in _flatten(m.inner)]
    raise TypeError(m)


def sort_cells(cells) -> list:
    """Lexicographically least word of the trace-equivalence class."""
    rem = list(cells)
    n = len(rem)
    if n <= 1:
        return rem
    keys = [cell_key(c) for c in rem]
    indep = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            indep[i][j] = indep[j][i] = independent(rem[i], rem[j])
    order = list(range(n))
    out = []
    while order:
        best = 0
        best_key = keys[order[0]]
        for pos in range(1, len(order)):
            i = order[pos]
            if all(indep[j][i] for j in order[:pos]):
                if keys[i] < best_key:
                    best, best_key = pos, keys[i]
        out.append(rem[order.pop(best)])
    return out


def canonicalize(m: MorphTerm) -> CanonicalForm:
    """Flatten modulo category/functor axioms and sort the trace."""
    dom, cod = infer_type(m)
    cells, cod2 = retype(dom, _flatten(m))
    assert cod2 == cod
    cells, _ = retype(dom, sort_cells(cells))
    return CanonicalForm(dom, cod, tuple(cells))


def make_form(domain: Object, cells) -> CanonicalForm:
    cells, cod = retype(domain, sort_cells(list(cells)))
    return CanonicalForm(domain, cod, tuple(cells))


def cancel_inverses(c: CanonicalForm) -> CanonicalForm:
    """Delete g;g~ pairs with equal paths, commuting independents aside."""
    cells = list(c.cells)
    changed = True
    while changed:
        changed = False
        for i in range(len(cells)):
            ci = cells[i]
            inv = INVERSE_OF.get(ci.kind)
            if inv is None:
                continue
            for j in range(i + 1, len(cells)):
                cj = cells[j]
                if independent(ci, cj):
                    continue
                if cj.kind == inv and cj.path == ci.path:
                    del cells[j]
                    del cells[i]
                    changed = True
                break
            if changed:
                break
    return make_form(c.domain, cells)


# ---------------------------------------------------------------------------
# Labelled trees: occurrence semantics of structural morphisms

# ltree: ("leaf", Object, id|None) | ("t", l, r) | ("p", l, r)
#        | ("bang", id, inner)


def label_tree(obj: Object, counter=None):
    if counter is None:
        counter = [0]
    if isinstance(obj, (Atom, Dual)):
        counter[0] += 1
        return ("leaf", obj, counter[0])
    if isinstance(obj, (UnitTensor, UnitPar)):
        return ("leaf", obj, None)
    if isinstance(obj, Tensor):
        return ("t", label_tree(obj.left, counter), label_tree(obj.right, counter))
    if isinstance(obj, Par):
        return ("p", label_tree(obj.left, counter), label_tree(obj.right, counter))
    if isinstance(obj, Bang):
        counter[0] += 1
        n = counter[0]
        return ("bang", n, label_tree(obj.inner, counter))
    raise TypeError(obj)


def unlabel(t) -> Object:
    if t[0] == "leaf":
        return t[1]
    if t[0] == "t":
        return Tensor(unlabel(t[1]), unlabel(t[2]))
    if t[0] == "p":
        return Par(unlabel(t[1]), unlabel(t[2]))
    return Bang(unlabel(t[2]))


def ltree_ids(t) -> frozenset:
    if t[0] == "leaf":
        return frozenset() if t[2] is None else frozenset([t[2]])
    if t[0] == "bang":
        return ltree_ids(t[2]) | frozenset([t[1]])
    return ltree_ids(t[1]) | ltree_ids(t[2])


def lsub_at(t, path):
    for tok in path:
        if tok == TL or tok == PL:
            t = t[1]
        elif tok == TR or tok == PR:
            t = t[2]
        else:
            t = t[2]
    return t


def lreplace_at(t, path, new):
    if not path:
        return new
    tok = path[0]
    if tok == BB:
        return ("bang", t[1], lreplace_at(t[2], path[1:], new))
    if tok in (TL, PL):
        return (t[0], lreplace_at(t[1], path[1:], new), t[2])
    return (t[0], t[1], lreplace_at(t[2], path[1:], new))


_UNIT_LEAF_T = ("leaf", ONE, None)
_UNIT_LEAF_P = ("leaf", BOT, None)


def apply_structural_l(t, cell: Cell):
    """Apply a structural cell to a labelled tree (labels ride along)."""
    sub = lsub_at(t, cell.path)
    k = cell.kind
    if k == "id":
        new = sub
    elif k == "alpha":
        new = (sub[0], sub[1][1], ("t", sub[1][2], sub[2]))
    elif k == "alpha~":
        new = (sub[0], ("t", sub[1], sub[2][1]), sub[2][2])
    elif k == "balpha":
        new = (sub[0], sub[1][1], ("p", sub[1][2], sub[2]))
    elif k == "balpha~":
        new = (sub[0], ("p", sub[1], sub[2][1]), sub[2][2])
    elif k == "lam":
        new = sub[2]
    elif k == "lam~":
        new = ("t", _UNIT_LEAF_T, sub)
    elif k == "rho":
        new = sub[1]
    elif k == "rho~":
        new = ("t", sub, _UNIT_LEAF_T)
    elif k == "blam":
        new = sub[2]
    elif k == "blam~":
        new = ("p", _UNIT_LEAF_P, sub)
    elif k == "brho":
        new = sub[1]
    elif k == "brho~":
        new = ("p", sub, _UNIT_LEAF_P)
    elif k in ("sig", "sig~"):
        new = ("t", sub[2], sub[1])
    elif k in ("bsig", "bsig~"):
        new = ("p", sub[2], sub[1])
    else:
        raise ValueError(f"not structural: {k}")
    return lreplace_at(t, cell.path, new)


class NotStructural(Exception):
    pass


def occurrence_tree(c: CanonicalForm):
    """Labelled codomain tree of a structural-only trace.

    Non-unit leaves of the domain get occurrence ids (bang boxes too,
    recursively); units stay anonymous.  Two parallel structural traces
    are congruent iff the results are equal.  Raises NotStructural when a
    non-structural cell (or any dist/dist') occurs.
    """
    t = label_tree(c.domain)
    for cell in c.cells:
        if cell.kind not in STRUCTURAL_KINDS:
            raise NotStructural(cell.kind)
        t = apply_structural_l(t, cell)
    return t


def _collect_leaf_paths(t, path, acc):
    if t[0] == "leaf":
        if t[2] is not None:
            acc[t[2]] = path
    elif t[0] == "bang":
        acc[t[1]] = path
        _collect_leaf_paths(t[2], path + (BB,), acc)
    else:
        tok_l = TL if t[0] == "t" else PL
        tok_r = TR if t[0] == "t" else PR
        _collect_leaf_paths(t[1], path + (tok_l,), acc)
        _collect_leaf_paths(t[2], path + (tok_r,), acc)
    return acc


def structural_semantics(c: CanonicalForm) -> dict:
    """Bijection of non-unit leaves, domain path -> codomain path.

    Raises NotStructural when any cell is not a structural isomorphism.
    """
    src = label_tree(c.domain)
    dst = occurrence_tree(c)
    by_id_src = _collect_leaf_paths(src, (), {})
    by_id_dst = _collect_leaf_paths(dst, (), {})
    return {by_id_src[i]: by_id_dst[i] for i in by_id_src}


# ---------------------------------------------------------------------------
# Structural router: canonical synthesis of a structural run


class RouteError(Exception):
    pass


def _invert_cells(cells):
    return [Cell(INVERSE_OF[c.kind], c.path, c.subs) for c in reversed(cells)]


def _elim_units(t, path):
    """Remove all lam/rho/blam/brho-removable unit leaves, innermost first."""
    cells = []
    changed = True
    while changed:
        changed = False

        def scan(tt, p):
            nonlocal changed
            if tt[0] == "t":
                if tt[1] == _UNIT_LEAF_T:
                    return [Cell("lam", p)], tt[2]
                if tt[2] == _UNIT_LEAF_T:
                    return [Cell("rho", p)], tt[1]
                cs, l2 = scan(tt[1], p + (TL,))
                if cs:
                    return cs, ("t", l2, tt[2])
                cs, r2 = scan(tt[2], p + (TR,))
                if cs:
                    return cs, ("t", tt[1], r2)
                return [], tt
            if tt[0] == "p":
                if tt[1] == _UNIT_LEAF_P:
                    return [Cell("blam", p)], tt[2]
                if tt[2] == _UNIT_LEAF_P:
                    return [Cell("brho", p)], tt[1]
                cs, l2 = scan(tt[1], p + (PL,))
                if cs:
                    return cs, ("p", l2, tt[2])
                cs, r2 = scan(tt[2], p + (PR,))
                if cs:
                    return cs, ("p", tt[1], r2)
                return [], tt
            if tt[0] == "bang":
                cs, i2 = scan(tt[2], p + (BB,))
                if cs:
                    return cs, ("bang", tt[1], i2)
                return [], tt
            return [], tt

        cs, t = scan(t, path)
        if cs:
            cells += cs
            changed = True
    return cells, t


def _spine(t, conn):
    """Blocks of the maximal top spine of connective conn ('t' or 'p')."""
    if t[0] == conn:
        return _spine(t[1], conn) + _spine(t[2], conn)
    return [t]


def _comb_right(t, path, conn):
    """Right-associate the top conn-spine; returns (cells, new tree)."""
    cells = []
    changed = True
    while changed:
        changed = False

        def scan(tt, p):
            nonlocal changed
            if tt[0] == conn and tt[1][0] == conn:
                kind = "alpha" if conn == "t" else "balpha"
                return [Cell(kind, p)], (conn, tt[1][1], (conn, tt[1][2], tt[2]))
            if tt[0] == conn:
                cs, r2 = scan(tt[2], p + (TR if conn == "t" else PR,))
                if cs:
                    return cs, (conn, tt[1], r2)
            return [], tt

        cs, t = scan(t, path)
        if cs:
            cells += cs
            changed = True
    return cells, t


def _comb_pos(path, conn, i, n):
    """Path of block i in a right-combed spine of n blocks."""
    step = TR if conn == "t" else PR
    first = TL if conn == "t" else PL
    if i == n - 1:
        return path + (step,) * (n - 1)
    return path + (step,) * i + (first,)


def _swap_blocks(t, path, conn, j, n):
    """Swap comb blocks j, j+1 in subtree t; cells emitted under path."""
    step = TR if conn == "t" else PR
    rel = (step,) * j
    p = path + rel
    node = lsub_at(t, rel)
    # node = (a_j ? rest)
    if j == n - 2:
        kind = "sig" if conn == "t" else "bsig"
        cells = [Cell(kind, p)]
        new = (conn, node[2], node[1])
    else:
        a, rest = node[1], node[2]
        b, r2 = rest[1], rest[2]
        kind_a = "alpha~" if conn == "t" else "balpha~"
        kind_s = "sig" if conn == "t" else "bsig"
        kind_c = "alpha" if conn == "t" else "balpha"
        cells = [Cell(kind_a, p), Cell(kind_s, p + (TL if conn == "t" else PL,)),
                 Cell(kind_c, p)]
        new = (conn, b, (conn, a, r2))
    return cells, lreplace_at(t, rel, new)


def _route_core(cur, dst, path):
    """Route unit-eliminated labelled trees; may recurse into bangs."""
    if cur == dst:
        return []
    if cur[0] == "leaf" and dst[0] == "leaf":
        if cur == dst:
            return []
        raise RouteError("leaf mismatch")
    if cur[0] == "bang" and dst[0] == "bang":
        if cur[1] != dst[1]:
            raise RouteError("bang id mismatch")
        return _route_lab(cur[2], dst[2], path + (BB,))
    if cur[0] != dst[0] or cur[0] not in ("t", "p"):
        raise RouteError("shape mismatch")
    conn = cur[0]
    c1, cur = _comb_right(cur, path, conn)
    c2, dst_c = _comb_right(dst, path, conn)
    bc = _spine(cur, conn)
    bd = _spine(dst_c, conn)
    if len(bc) != len(bd):
        raise RouteError("block count mismatch")
    n = len(bc)
    # assign each cur block its destination index
    dst_sets = [ltree_ids(b) for b in bd]
    used = [False] * n
    target = [None] * n
    for i, b in enumerate(bc):
        ids = ltree_ids(b)
        if ids:
            for j, s in enumerate(dst_sets):
                if not used[j] and s == ids:
                    target[i] = j
                    used[j] = True
                    break
            if target[i] is None:
                raise RouteError("no block with matching ids")
    empties = [j for j in range(n) if not used[j]]
    k = 0
    for i in range(n):
        if target[i] is None:
            target[i] = empties[k]
            k += 1
    # bubble sort blocks into target order
    order = list(range(n))
    cells = list(c1)
    changed = True
    while changed:
        changed = False
        for j in range(n - 1):
            if target[order[j]] > target[order[j + 1]]:
                cs, cur = _swap_blocks(cur, path, conn, j, n)
                cells += cs
                order[j], order[j + 1] = order[j + 1], order[j]
                changed = True
    bc = _spine(cur, conn)
    for i in range(n):
        cells += _route_core(bc[i], bd[i], _comb_pos(path, conn, i, n))
        # keep cur in sync for positions: blocks are independent, fine
    return cells + _invert_cells(c2)


def _route_lab(cur, dst, path):
    e1, cur2 = _elim_units(cur, path)
    e2, dst2 = _elim_units(dst, path)
    mid = _route_core(cur2, dst2, path)
    return e1 + mid + _invert_cells(e2)


def route_structural(src: Object, run_cells, path=()) -> list:
    """Canonical replacement for a structural run, same leaf semantics.

    Returns None when the run cannot be routed (kept verbatim then).
    """
    t = label_tree(src)
    cur = t
    try:
        for c in run_cells:
            cur = apply_structural_l(cur, c)
        # route from t to cur
        cells = _route_lab(t, cur, path)
        cells, cod = retype(src, cells)
        if cod != unlabel(cur):
            return None
        return cells
    except (RouteError, NotStructural, TypeError_, AttributeError, IndexError):
        return None


# ---------------------------------------------------------------------------
# Normal states: trace NF + inverse cancellation + routed structural runs


# phi is deliberately not a saturation host: pulling box-interior cells
# through a phi merge renames redexes (a delta;eps pair becomes
# delta;!eps); the congruence search still transports across phi.
PLUMBING_KINDS = STRUCTURAL_KINDS | {"dist", "dist'"}
TRANSPORT_HOSTS = STRUCTURAL_KINDS | {"dist", "dist'", "phi"}


def saturate_left(cells, cap: int = 400, hosts=None) -> list:
    """Transport non-structural cells backward across plumbing, to fixpoint.

    Surfaces redexes hidden behind structural naturality.  Deterministic
    scan; sound: every move is a congruence.
    """
    hosts = PLUMBING_KINDS if hosts is None else hosts
    cells = list(cells)
    moves = 0
    changed = True
    while changed and moves < cap:
        changed = False
        for j in range(len(cells)):
            cj = cells[j]
            # tau/gamma are the bend anchors of rules 22/23: leave them
            # where the assembly search puts them
            if cj.kind in STRUCTURAL_KINDS or cj.kind in ("tau", "gamma"):
                continue
            i = j - 1
            ok = True
            while i >= 0:
                ci = cells[i]
                if not independent(ci, cj):
                    break
                i -= 1
            else:
                ok = False
            if not ok or i < 0:
                continue
            ci = cells[i]
            if ci.kind not in hosts:
                continue
            # cells between host and mover are independent of the mover,
            # so the mover commutes up to the host first
            between = cells[i + 1:j]
            newp = transport_across(ci, cj, forward=False)
            if newp is None:
                continue
            cells = (cells[:i] + [Cell(cj.kind, newp, cj.subs), ci]
                     + between + cells[j + 1:])
            moves += 1
            changed = True
            break
    return cells


def runs_of(cells):
    """Split a cell list into maximal structural/non-structural runs."""
    out = []
    cur = []
    cur_struct = None
    for c in cells:
        s = c.kind in STRUCTURAL_KINDS
        if cur_struct is None or s == cur_struct:
            cur.append(c)
            cur_struct = s
        else:
            out.append((cur_struct, cur))
            cur = [c]
            cur_struct = s
    if cur:
        out.append((cur_struct, cur))
    return out


# unit triangles in the dist-eliminating direction, used as cleanup
_CLEANUPS = [
    ([("dist", ()), ("lam", (PL,))], [("lam", ())]),
    ([("brho~", (TR,)), ("dist", ())], [("brho~", ())]),
    ([("dist'", ()), ("rho", (PR,))], [("rho", ())]),
    ([("blam~", (TL,)), ("dist'", ())], [("blam~", ())]),
]


def _cleanup_triangles(cells):
    changed = True
    while changed:
        changed = False
        for lhs, rhs in _CLEANUPS:
            for q, m in _eq_candidates(cells, lhs):
                cells = apply_eq(cells, m, q, rhs, [cells[i] for i in m[0]])
                changed = True
                break
            if changed:
                break
    return cells


def normal_state(domain: Object, cells) -> CanonicalForm:
    """Saturate, sort, cancel inverses, re-route structural runs."""
    cells, _ = retype(domain, cells)
    for _ in range(3):
        before = cells
        cells = saturate_left(cells)
        form = cancel_inverses(make_form(domain, cells))
        obj = form.domain
        out = []
        for is_struct, run in runs_of(form.cells):
            if is_struct:
                routed = route_structural(obj, run)
                out += routed if routed is not None else run
            else:
                out += run
            _, obj = retype(obj, run)
        cells = _cleanup_triangles(out)
        form = cancel_inverses(make_form(domain, cells))
        cells = list(form.cells)
        if cells == before:
            break
    return form


def state_key(form: CanonicalForm) -> str:
    return form.dump()


# ---------------------------------------------------------------------------
# Instance-tracked replay: every leaf (units included) and every bang box
# carries a wire id; plumbing permutes ids, generators consume/create.


class _Fresh:
    def __init__(self):
        self.n = 0

    def __call__(self):
        self.n += 1
        return self.n


def ilabel(obj, fresh):
    if isinstance(obj, Tensor):
        return ("t", ilabel(obj.left, fresh), ilabel(obj.right, fresh))
    if isinstance(obj, Par):
        return ("p", ilabel(obj.left, fresh), ilabel(obj.right, fresh))
    if isinstance(obj, Bang):
        return ("bang", fresh(), ilabel(obj.inner, fresh))
    return ("leaf", obj, fresh())


def _isub(t, path):
    for tok in path:
        t = t[1] if tok in (TL, PL) else t[2]
    return t


def _irepl(t, path, new):
    if not path:
        return new
    tok = path[0]
    if tok == BB:
        return ("bang", t[1], _irepl(t[2], path[1:], new))
    if tok in (TL, PL):
        return (t[0], _irepl(t[1], path[1:], new), t[2])
    return (t[0], t[1], _irepl(t[2], path[1:], new))


def iunlabel(t):
    if t[0] == "leaf":
        return t[1]
    if t[0] == "bang":
        return Bang(iunlabel(t[2]))
    if t[0] == "t":
        return Tensor(iunlabel(t[1]), iunlabel(t[2]))
    return Par(iunlabel(t[1]), iunlabel(t[2]))


def _relabel(t, fresh):
    if t[0] == "leaf":
        return ("leaf", t[1], fresh())
    if t[0] == "bang":
        return ("bang", fresh(), _relabel(t[2], fresh))
    return (t[0], _relabel(t[1], fresh), _relabel(t[2], fresh))


def iapply(t, cell, fresh, events=None):
    """Apply a cell to an instance-labelled tree.

    When `events` is a list, non-structural cells append
    (index-in-list, kind, input subtree, output subtree) and their
    outputs are re-versioned, so every wire id has a unique creator.
    """
    sub = _isub(t, cell.path)
    k = cell.kind
    structural = True
    if k in ("sig", "sig~"):
        new = ("t", sub[2], sub[1])
    elif k in ("bsig", "bsig~"):
        new = ("p", sub[2], sub[1])
    elif k == "alpha":
        new = ("t", sub[1][1], ("t", sub[1][2], sub[2]))
    elif k == "alpha~":
        new = ("t", ("t", sub[1], sub[2][1]), sub[2][2])
    elif k == "balpha":
        new = ("p", sub[1][1], ("p", sub[1][2], sub[2]))
    elif k == "balpha~":
        new = ("p", ("p", sub[1], sub[2][1]), sub[2][2])
    elif k in ("lam", "blam"):
        new = sub[2]
    elif k in ("rho", "brho"):
        new = sub[1]
    elif k == "lam~":
        new = ("t", ("leaf", ONE, fresh()), sub)
    elif k == "rho~":
        new = ("t", sub, ("leaf", ONE, fresh()))
    elif k == "blam~":
        new = ("p", ("leaf", BOT, fresh()), sub)
    elif k == "brho~":
        new = ("p", sub, ("leaf", BOT, fresh()))
    elif k == "id":
        new = sub
    else:
        structural = False
        if k == "dist":
            new = ("p", ("t", sub[1], sub[2][1]), sub[2][2])
        elif k == "dist'":
            new = ("p", sub[1][1], ("t", sub[1][2], sub[2]))
        elif k == "delta":
            new = ("bang", fresh(), ("bang", fresh(), sub[2]))
        elif k == "eps":
            new = sub[2]
        elif k == "dup":
            new = ("t", ilabel(iunlabel(sub), fresh),
                   ilabel(iunlabel(sub), fresh))
        elif k == "drop":
            new = ("leaf", ONE, fresh())
        elif k == "phi":
            new = ("bang", fresh(), ("t", sub[1][2], sub[2][2]))
        elif k == "phi0":
            new = ("bang", fresh(), ("leaf", ONE, fresh()))
        elif k == "tau":
            a = cell.subs[0]
            new = ("p", ilabel(a, fresh), ("leaf", Dual(a), fresh()))
        elif k == "gamma":
            new = ("leaf", BOT, fresh())
        else:
            raise ValueError(k)
    if events is not None and not structural:
        # phi passes its contents through un-reversioned so that fused
        # merge chains keep canonical content ids
        if k != "phi":
            new = _relabel(new, fresh)
        events.append((len(events), k, sub, new))
    return _irepl(t, cell.path, new)


def find_bends(form: CanonicalForm):
    """(tau index, gamma index, rule) pairs connected by a pristine wire."""
    fresh = _Fresh()
    t = ilabel(form.domain, fresh)
    taus, gammas = [], []
    for i, c in enumerate(form.cells):
        if c.kind == "tau":
            a = c.subs[0]
            sub = _isub(t, c.path)
            left = ilabel(a, fresh)
            dual = ("leaf", Dual(a), fresh())
            taus.append((i, left, dual[2]))
            t = _irepl(t, c.path, ("p", left, dual))
        elif c.kind == "gamma":
            sub = _isub(t, c.path)
            gammas.append((i, sub[1][2], sub[2]))
            t = _irepl(t, c.path, ("leaf", BOT, fresh()))
        else:
            t = iapply(t, c, fresh)
    out = []
    for gi, dual_id, right in gammas:
        for ti, left, dual in taus:
            if ti < gi and dual == dual_id:
                out.append((ti, gi, 22))
            elif ti < gi and left == right:
                out.append((ti, gi, 23))
    return out


def _ids_of(t, units=False):
    if t[0] == "leaf":
        if t[2] is None:
            return []
        if not units and isinstance(t[1], (UnitTensor, UnitPar)):
            return []
        return [t[2]]
    if t[0] == "bang":
        return [t[1]] + _ids_of(t[2], units)
    return _ids_of(t[1], units) + _ids_of(t[2], units)


def _translate(t, trans, fresh_canon):
    """Canonical-id image of a labelled subtree; units get fresh ids."""
    if t[0] == "leaf":
        if t[2] is None:
            return ("leaf", t[1], None)
        if isinstance(t[1], (UnitTensor, UnitPar)):
            return ("leaf", t[1], None)
        if t[2] not in trans:
            return None
        return ("leaf", t[1], trans[t[2]])
    if t[0] == "bang":
        if t[1] not in trans:
            return None
        inner = _translate(t[2], trans, fresh_canon)
        if inner is None:
            return None
        return ("bang", trans[t[1]], inner)
    l = _translate(t[1], trans, fresh_canon)
    r = _translate(t[2], trans, fresh_canon)
    if l is None or r is None:
        return None
    return (t[0], l, r)


def _boxes_of(t):
    """Top-level bang subtrees of a labelled tree."""
    if t[0] == "bang":
        return [t]
    if t[0] == "leaf":
        return []
    return _boxes_of(t[1]) + _boxes_of(t[2])


def _fuse_phi_chains(events):
    """Collapse phi merge trees into one n-ary merge each.

    Monoidal-functor coherence makes the association and order of box
    merges irrelevant; a fused event carries the multiset of leaf boxes.
    """
    by_out_box = {}
    for ev in events:
        idx, k, sub, new = ev
        if k == "phi":
            by_out_box[new[1]] = idx
    events = {ev[0]: list(ev) for ev in events}
    changed = True
    while changed:
        changed = False
        for idx, ev in list(events.items()):
            if ev[1] != "phi":
                continue
            boxes = ev[2][1] if ev[2][0] == "multi" else _boxes_of(ev[2])
            for b in boxes:
                src = by_out_box.get(b[1])
                if src is not None and src in events and src != idx:
                    sub_ev = events.pop(src)
                    inner_boxes = _boxes_of(sub_ev[2])
                    rest = [x for x in boxes if x[1] != b[1]]
                    ev[2] = ("multi", inner_boxes + rest)
                    boxes = inner_boxes + rest
                    by_out_box[ev[3][1]] = idx
                    changed = True
                    break
            else:
                continue
            break
    out = []
    for idx in sorted(events):
        ev = events[idx]
        if ev[1] == "phi":
            boxes = ev[2][1] if ev[2][0] == "multi" else _boxes_of(ev[2])
            out.append((idx, "phi*", ("multi", boxes), ev[3]))
        else:
            out.append(tuple(ev))
    return out


def _tensor_blocks(t):
    if t[0] == "t":
        return _tensor_blocks(t[1]) + _tensor_blocks(t[2])
    return [t]


def _ids_of_ev_input(sub):
    if sub[0] == "multi":
        ids = []
        for b in sub[1]:
            ids += _ids_of(b)
        return ids
    return _ids_of(sub)


def _translate_ev_input(sub, trans, canon):
    if sub[0] == "multi":
        keys = []
        for b in sub[1]:
            tb = _translate(b, trans, canon)
            if tb is None:
                return None
            keys.append(_tree_key(tb))
        return ("multi", tuple(sorted(keys)))
    t = _translate(sub, trans, canon)
    return None if t is None else _tree_key(t)


def _dag_sequence(form, t0, t, events, flips):
    trans = {}
    canon = _Fresh()
    for i in _ids_of(t0):
        trans[i] = canon()
    pending = list(events)
    out = []
    while pending:
        ready = []
        for ev in pending:
            idx, k, sub, new = ev
            if not all(i in trans for i in _ids_of_ev_input(sub)):
                continue
            key_in = _translate_ev_input(sub, trans, canon)
            if key_in is None:
                return None
            ready.append((k, key_in, idx, ev))
        if not ready:
            return None
        ready.sort(key=lambda x: (x[0], x[1], x[2]))
        k, key_in, idx, ev = ready[0]
        _, _, sub, new = ev
        if k == "dup" and idx in flips:
            new = ("t", new[2], new[1])
        for i in _ids_of(new):
            if i not in trans:
                trans[i] = canon()
        if k == "phi*":
            blocks = _tensor_blocks(new[2])
            keys = []
            for b in blocks:
                tb = _translate(b, trans, canon)
                if tb is None:
                    return None
                keys.append(_tree_key(tb))
            key_out = ("bang*", trans[new[1]], tuple(sorted(keys)))
        else:
            t_out = _translate(new, trans, canon)
            if t_out is None:
                return None
            key_out = _tree_key(t_out)
        out.append((k, key_in, key_out))
        pending = [ev2 for ev2 in pending if ev2[0] != idx]
    final = _translate(t, trans, canon)
    if final is None:
        return None
    return (pretty_object(form.domain), pretty_object(form.codomain),
            tuple(out), _tree_key(final))


def dag_key(form: CanonicalForm):
    """Canonical dataflow key: non-structural cells over canonical wires.

    Structural plumbing and unit wires are quotiented away, and dup
    copies are unordered (cocommutativity); two traces with equal keys
    are congruent.  Returns None when the dataflow cannot be
    canonicalized.
    """
    fresh = _Fresh()
    t0 = ilabel(form.domain, fresh)
    events = []
    t = t0
    try:
        for c in form.cells:
            t = iapply(t, c, fresh, events)
    except Exception:
        return None
    events = _fuse_phi_chains(events)
    dups = [ev[0] for ev in events if ev[1] == "dup"]
    if len(dups) > 8:
        dups = dups[:8]
    best = None
    from itertools import combinations, chain as _chain
    subsets = _chain.from_iterable(combinations(dups, r)
                                   for r in range(len(dups) + 1))
    for flip in subsets:
        key = _dag_sequence(form, t0, t, events, frozenset(flip))
        if key is not None and (best is None or key < best):
            best = key
    return best


def _tree_key(t):
    if t[0] == "leaf":
        return ("l", pretty_object(t[1]), t[2])
    if t[0] == "bang":
        return ("b", t[1], _tree_key(t[2]))
    return (t[0], _tree_key(t[1]), _tree_key(t[2]))


# ---------------------------------------------------------------------------
# Congruence moves

# transport tables: plumbing kind -> list of (before-, after-) relative paths
TRANSPORT = {
    "alpha": [((TL, TL), (TL,)), ((TL, TR), (TR, TL)), ((TR,), (TR, TR))],
    "alpha~": [((TL,), (TL, TL)), ((TR, TL), (TL, TR)), ((TR, TR), (TR,))],
    "balpha": [((PL, PL), (PL,)), ((PL, PR), (PR, PL)), ((PR,), (PR, PR))],
    "balpha~": [((PL,), (PL, PL)), ((PR, PL), (PL, PR)), ((PR, PR), (PR,))],
    "lam": [((TR,), ())],
    "lam~": [((), (TR,))],
    "rho": [((TL,), ())],
    "rho~": [((), (TL,))],
    "blam": [((PR,), ())],
    "blam~": [((), (PR,))],
    "brho": [((PL,), ())],
    "brho~": [((), (PL,))],
    "sig": [((TL,), (TR,)), ((TR,), (TL,))],
    "sig~": [((TL,), (TR,)), ((TR,), (TL,))],
    "bsig": [((PL,), (PR,)), ((PR,), (PL,))],
    "bsig~": [((PL,), (PR,)), ((PR,), (PL,))],
    "dist": [((TL,), (PL, TL)), ((TR, PL), (PL, TR)), ((TR, PR), (PR,))],
    "dist'": [((TL, PL), (PL,)), ((TL, PR), (PR, TL)), ((TR,), (PR, TR))],
    "phi": [((TL, BB), (BB, TL)), ((TR, BB), (BB, TR))],
}


def transport_across(plumb: Cell, cell: Cell, forward: bool):
    """New path for `cell` moved across `plumb`; None if not transportable.

    forward=True: cell before plumb -> cell after plumb.
    """
    table = TRANSPORT.get(plumb.kind)
    if table is None:
        return None
    q = plumb.path
    p = cell.path
    if p[:len(q)] != q:
        return None
    rel = p[len(q):]
    for before, after in table:
        src, dst = (before, after) if forward else (after, before)
        if rel[:len(src)] == src:
            return q + dst + rel[len(src):]
    return None


def neighbors_transport(form: CanonicalForm):
    """Traces from one naturality transport of a gatherable dependent pair."""
    cells = list(form.cells)
    n = len(cells)
    for i in range(n - 1):
        a = cells[i]
        for j in range(i + 1, n):
            b = cells[j]
            if independent(a, b):
                continue
            between = cells[i + 1:j]
            # b commutes backward up to a when between is independent of b
            if all(independent(x, b) for x in between):
                newp = transport_across(a, b, forward=False)
                if newp is not None:
                    yield (cells[:i] + [Cell(b.kind, newp, b.subs), a]
                           + between + cells[j + 1:])
            # a commutes forward down to b when between is independent of a
            if all(independent(x, a) for x in between):
                newp = transport_across(b, a, forward=True)
                if newp is not None:
                    yield (cells[:i] + between
                           + [b, Cell(a.kind, newp, a.subs)] + cells[j + 1:])
            break


# local unoriented equations: pairs of cell-list patterns sharing a base q.
# Relative paths; both sides are rewritten into each other.
_EQS = [
    # linear distribution pentagons, with solved-for variants
    ([("balpha~", (TR,)), ("dist", ()), ("dist", (PL,))],
     [("dist", ()), ("balpha~", ())]),
    ([("dist", ()), ("dist", (PL,))],
     [("balpha", (TR,)), ("dist", ()), ("balpha~", ())]),
    ([("dist'", ()), ("dist", (PR,))],
     [("dist", ()), ("dist'", (PL,)), ("balpha", ())]),
    ([("dist", ()), ("dist'", (PL,))],
     [("dist'", ()), ("dist", (PR,)), ("balpha~", ())]),
    ([("dist", (TR,)), ("dist", ()), ("alpha~", (PL,))],
     [("alpha~", ()), ("dist", ())]),
    ([("dist", (TR,)), ("dist", ())],
     [("alpha~", ()), ("dist", ()), ("alpha", (PL,))]),
    ([("dist'", (TR,)), ("dist", ())],
     [("alpha~", ()), ("dist", (TL,)), ("dist'", ())]),
    ([("dist", (TL,)), ("dist'", ())],
     [("alpha", ()), ("dist'", (TR,)), ("dist", ())]),
    # unit triangles, with solved-for variants
    ([("dist", ()), ("lam", (PL,))], [("lam", ())]),
    ([("brho~", (TR,)), ("dist", ())], [("brho~", ())]),
    ([("dist'", ()), ("rho", (PR,))], [("rho", ())]),
    ([("blam~", (TL,)), ("dist'", ())], [("blam~", ())]),
    ([("dist", ())], [("lam", ()), ("lam~", (PL,))]),
    ([("dist", ())], [("brho", (TR,)), ("brho~", ())]),
    ([("dist'", ())], [("rho", ()), ("rho~", (PR,))]),
    ([("dist'", ())], [("blam", (TL,)), ("blam~", ())]),
    # dist' definition (sigma sandwich of dist) and its solved form
    ([("dist'", ())],
     [("sig", ()), ("bsig", (TR,)), ("dist", ()), ("bsig", ()), ("sig", (PR,))]),
    ([("dist", ())],
     [("bsig", (TR,)), ("sig", ()), ("dist'", ()), ("sig", (PR,)), ("bsig", ())]),
    # monoidal functor coherences of phi (and inverse-iso companions)
    ([("phi", (TL,)), ("phi", ()), ("alpha", (BB,))],
     [("alpha", ()), ("phi", (TR,)), ("phi", ())]),
    ([("phi", (TR,)), ("phi", ()), ("alpha~", (BB,))],
     [("alpha~", ()), ("phi", (TL,)), ("phi", ())]),
    ([("phi", ()), ("sig", (BB,))], [("sig", ()), ("phi", ())]),
    ([("phi", ()), ("sig~", (BB,))], [("sig~", ()), ("phi", ())]),
    # comonoid coassociativity and cocommutativity
    ([("dup", ()), ("dup", (TL,)), ("alpha", ())],
     [("dup", ()), ("dup", (TR,))]),
    ([("dup", ()), ("sig", ())], [("dup", ())]),
    # tau / gamma unit re-anchoring (coherence + sigma naturality)
    ([("rho~", ()), ("tau", (TR,))],
     [("lam~", ()), ("tau", (TL,)), ("sig", ())]),
    ([("lam~", ()), ("tau", (TL,))],
     [("rho~", ()), ("tau", (TR,)), ("sig~", ())]),
    ([("gamma", (PL,)), ("blam", ())],
     [("bsig", ()), ("gamma", (PR,)), ("brho", ())]),
    ([("gamma", (PR,)), ("brho", ())],
     [("bsig~", ()), ("gamma", (PL,)), ("blam", ())]),
]


def gather_match(cells, pattern, start, q):
    """Match pattern (kind, relpath) list at base q from index start.

    Cells in between must either be independent of every pattern cell or
    transport out across the pattern's plumbing cells.  Returns
    (indices, left_exits, right_exits) or None; exits carry remapped paths.
    """
    idx = []
    want = 0
    pat = [Cell(k, q + rel) for k, rel in pattern]
    pending_between = []  # (index, cell) seen since last pattern cell
    left_exits, right_exits = [], []
    for i in range(start, len(cells)):
        c = cells[i]
        if want < len(pat) and c.kind == pat[want].kind and c.path == pat[want].path:
            idx.append(i)
            want += 1
            if want == len(pat):
                # classify everything between first and last pattern cell
                for k, cc in pending_between:
                    exit_ = _exit_between(cc, k, idx, pat)
                    if exit_ is None:
                        return None
                    side, moved = exit_
                    (left_exits if side == "l" else right_exits).append(moved)
                return idx, left_exits, right_exits
        elif idx:
            pending_between.append((i, c))
    return None


def _exit_between(c, pos, idx, pat):
    """Move a between-cell out of the pattern window, left or right."""
    crossed_l = [pat[j] for j in range(len(idx)) if idx[j] < pos]
    crossed_r = [pat[j] for j in range(len(idx)) if idx[j] > pos]
    # try exiting left: transport backward across crossed_l (reversed)
    p = c
    ok = True
    for pc in reversed(crossed_l):
        if independent(p, pc):
            continue
        newp = transport_across(pc, p, forward=False)
        if newp is None:
            ok = False
            break
        p = Cell(p.kind, newp, p.subs)
    if ok:
        return "l", p
    p = c
    for pc in crossed_r:
        if independent(p, pc):
            continue
        newp = transport_across(pc, p, forward=True)
        if newp is None:
            return None
        p = Cell(p.kind, newp, p.subs)
    return "r", p


def _eq_candidates(cells, pattern):
    """(base q, match) for each occurrence of pattern."""
    k0, rel0 = pattern[0]
    for i, c in enumerate(cells):
        if c.kind != k0:
            continue
        if rel0:
            if len(c.path) < len(rel0) or c.path[-len(rel0):] != tuple(rel0):
                continue
            q = c.path[:len(c.path) - len(rel0)]
        else:
            q = c.path
        m = gather_match(cells, pattern, i, q)
        if m and m[0][0] == i:
            yield q, m


def apply_eq(cells, match, q, rhs, lhs_cells):
    """Replace the matched lhs cells by rhs at base q."""
    idx, left_exits, right_exits = match
    tau_subs = next((c.subs for c in lhs_cells if c.kind == "tau"), None)
    new = []
    for k, rel in rhs:
        subs = tau_subs if k == "tau" else ()
        new.append(Cell(k, q + rel, subs))
    return (cells[:idx[0]] + left_exits + new + right_exits
            + cells[idx[-1] + 1:])


def neighbors_eqs(form: CanonicalForm):
    cells = list(form.cells)
    for lhs, rhs in _EQS:
        for a, b in ((lhs, rhs), (rhs, lhs)):
            for q, m in _eq_candidates(cells, a):
                yield apply_eq(cells, m, q, b, [cells[i] for i in m[0]])


def neighbors(form: CanonicalForm):
    for cells in neighbors_transport(form):
        yield cells
    for cells in neighbors_eqs(form):
        yield cells


def _nonstructural_spine(form: CanonicalForm):
    return tuple((c.kind, c.path) for c in form.cells
                 if c.kind not in STRUCTURAL_KINDS)


def _core_multiset(form: CanonicalForm):
    keep = ("tau", "gamma", "delta", "eps", "dup", "drop", "phi", "phi0")
    ms = {}
    for c in form.cells:
        if c.kind in keep:
            ms[c.kind] = ms.get(c.kind, 0) + 1
    return ms


def congruent(a: MorphTerm, b: MorphTerm, budget: int = 10_000) -> str:
    """Decide congruence of two terms: 'yes', 'no' or 'unknown'."""
    try:
        ta, tb = infer_type(a), infer_type(b)
    except TypeError_:
        raise
    if ta != tb:
        return "no"
    fa = normal_state(ta[0], canonicalize(a).cells)
    fb = normal_state(tb[0], canonicalize(b).cells)
    return congruent_forms(fa, fb, budget)


def congruent_forms(fa: CanonicalForm, fb: CanonicalForm,
                    budget: int = 10_000) -> str:
    if (fa.domain, fa.codomain) != (fb.domain, fb.codomain):
        return "no"
    fa = normal_state(fa.domain, fa.cells)
    fb = normal_state(fb.domain, fb.cells)
    if state_key(fa) == state_key(fb):
        return "yes"
    # fully structural: decidable by occurrence semantics
    try:
        sa = occurrence_tree(fa)
        sb = occurrence_tree(fb)
        return "yes" if sa == sb else "no"
    except NotStructural:
        pass
    if _core_multiset(fa) != _core_multiset(fb):
        return "no"
    ka = dag_key(fa)
    if ka is not None and ka == dag_key(fb):
        return "yes"
    # bidirectional best-first search over congruence moves, guided by
    # cell-multiset dissimilarity between the two sides
    import heapq as _hq
    import itertools as _it

    def dissim(f, g):
        ma = {}
        for c in f.cells:
            ma[(c.kind, c.path)] = ma.get((c.kind, c.path), 0) + 1
        for c in g.cells:
            ma[(c.kind, c.path)] = ma.get((c.kind, c.path), 0) - 1
        return sum(abs(v) for v in ma.values())

    counter = _it.count()
    seen_a = {state_key(fa): fa}
    seen_b = {state_key(fb): fb}
    pq_a = [(dissim(fa, fb), 0, next(counter), fa)]
    pq_b = [(dissim(fb, fa), 0, next(counter), fb)]
    steps = 0
    while (pq_a or pq_b) and steps < budget:
        for seen_x, seen_y, pq, other in ((seen_a, seen_b, pq_a, fb),
                                          (seen_b, seen_a, pq_b, fa)):
            if not pq:
                continue
            _, cost, _, form = _hq.heappop(pq)
            for cells in neighbors(form):
                steps += 1
                if steps >= budget:
                    return "unknown"
                try:
                    nf = normal_state(form.domain, cells)
                except TypeError_:
                    continue
                k = state_key(nf)
                if k in seen_y:
                    return "yes"
                if k not in seen_x:
                    seen_x[k] = nf
                    _hq.heappush(pq, (dissim(nf, other) + cost // 4,
                                      cost + 1, next(counter), nf))
    return "unknown"
