"""The termination measure: occurrence weights and label back-propagation.

Strict composite algebraic morphisms get arbitrary-precision natural
labels on distinguished-atom occurrences of the codomain; the measure
propagates them backward through the trace and strictly decreases under
algebraic and restricted-naturality reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (Object, Atom, UnitTensor, UnitPar, Tensor, Par, Dual,
                     Bang, MorphTerm, infer_type, pretty_object)
from .kernel import (TL, TR, PL, PR, BB, Cell, CanonicalForm, canonicalize,
                     subtree_at)
from .rules import Redex

STRICT_KINDS = frozenset({
    "id", "phi", "delta", "eps", "dup", "drop",
    "alpha", "alpha~", "sig", "sig~",
})
COMPOSITE_KINDS = STRICT_KINDS | frozenset(
    {"phi0", "lam", "lam~", "rho", "rho~"})

STRICT = "strict"
COMPOSITE = "composite"
OTHER = "other"


def _class_a(obj: Object) -> bool:
    # atoms, tensor, bang; no units, par or dual
    if isinstance(obj, Atom):
        return True
    if isinstance(obj, Tensor):
        return _class_a(obj.left) and _class_a(obj.right)
    if isinstance(obj, Bang):
        return _class_a(obj.inner)
    return False


def _class_b(obj: Object) -> bool:
    if isinstance(obj, (Atom, UnitTensor)):
        return True
    if isinstance(obj, Tensor):
        return _class_b(obj.left) and _class_b(obj.right)
    if isinstance(obj, Bang):
        return _class_b(obj.inner)
    return False


def classify(m: MorphTerm) -> str:
    """strict / composite / other, per the generating sets of each class.

    Strict morphisms use only id, phi, delta, eps, dup, drop, alpha, sig
    (and inverses) with class-A subscripts (atoms, tensor, bang); the
    target 1 of drop is the licensed exception.  Composite also admits
    phi0, lam, rho over class-B subscripts (adds the tensor unit).
    """
    form = canonicalize(m)
    cells = form.cells
    if all(c.kind in STRICT_KINDS for c in cells) \
            and all(_class_a(s) for c in cells for s in c.subs) \
            and _class_b(form.domain):
        return STRICT
    if all(c.kind in COMPOSITE_KINDS for c in cells) \
            and all(_class_b(s) for c in cells for s in c.subs) \
            and _class_b(form.domain):
        return COMPOSITE
    return OTHER


def occurrences(obj: Object, atoms=None) -> list:
    """Paths of distinguished-atom occurrences, in tree order."""
    out = []

    def walk(o, path):
        if isinstance(o, Atom):
            if atoms is None or o.name in atoms:
                out.append(path)
        elif isinstance(o, Tensor):
            walk(o.left, path + (TL,))
            walk(o.right, path + (TR,))
        elif isinstance(o, Par):
            walk(o.left, path + (PL,))
            walk(o.right, path + (PR,))
        elif isinstance(o, Bang):
            walk(o.inner, path + (BB,))

    walk(obj, ())
    return out


def _occ_count(obj: Object, atoms=None) -> int:
    return len(occurrences(obj, atoms))


class MeasureError(Exception):
    pass


class DepthGuard(MeasureError):
    """An intermediate value would exceed the configured bit bound."""


def theta(a: Object, occ: tuple, x: int, atoms=None, max_bits: int = 2 ** 64):
    """Occurrence weight theta_A at occurrence `occ`, evaluated at x.

    theta_X(x) = x; theta_{!A} = 2 theta_A; theta_{A (x) A'} adds the
    occurrence count of the other factor.
    """
    if not occ:
        if not isinstance(a, Atom):
            raise MeasureError(f"occurrence is not an atom: {pretty_object(a)}")
        return x
    t = occ[0]
    if t == BB:
        v = theta(a.inner, occ[1:], x, atoms, max_bits)
        if v.bit_length() + 1 > max_bits:
            raise DepthGuard("theta exceeds bit bound")
        return 2 * v
    if t in (TL, TR):
        here, other = (a.left, a.right) if t == TL else (a.right, a.left)
        return _occ_count(other, atoms) + theta(here, occ[1:], x, atoms, max_bits)
    raise MeasureError("occurrence descends through par or dual")


@dataclass
class Labeling:
    """Values per occurrence path of an object."""
    obj: Object
    labels: dict

    def total(self) -> int:
        return sum(self.labels.values())


def _pow2(e: int, max_bits: int) -> int:
    if e > max_bits:
        raise DepthGuard(f"2^{e} exceeds {max_bits} bits")
    return 1 << e


def _back_cell(obj_before: Object, cell: Cell, labels_after: dict,
               atoms, max_bits) -> dict:
    """Labels on obj_before given labels after firing cell."""
    sub = subtree_at(obj_before, cell.path)
    p = cell.path
    n = len(p)
    # occurrences outside the active subtree keep their label; a path is
    # outside iff it does not extend the cell path in the codomain
    out = {}
    inner_after = {}
    for occ, v in labels_after.items():
        if occ[:n] == p:
            inner_after[occ[n:]] = v
        else:
            out[occ] = v
    k = cell.kind
    dom = sub
    if k in ("id",):
        inner_dom = inner_after
    elif k in ("alpha", "alpha~", "sig", "sig~", "lam", "lam~", "rho", "rho~"):
        inner_dom = _structural_back(k, inner_after)
    elif k == "phi":
        # !A * !B -> !(A*B): occurrence relabel only
        inner_dom = {}
        for occ, v in inner_after.items():
            assert occ and occ[0] == BB
            rest = occ[1:]
            inner_dom[(TL, BB) + rest[1:] if rest and rest[0] == TL
                      else (TR, BB) + rest[1:]] = v
    elif k == "phi0":
        inner_dom = {}
    elif k == "delta":
        a = dom.inner
        inner_dom = {}
        for occ, v in inner_after.items():
            assert occ[:2] == (BB, BB)
            rest = occ[2:]
            inner_dom[(BB,) + rest] = _pow2(
                theta(a, rest, v, atoms, max_bits), max_bits)
    elif k == "eps":
        a = dom.inner
        inner_dom = {}
        for occ, v in inner_after.items():
            inner_dom[(BB,) + occ] = theta(a, occ, v, atoms, max_bits)
    elif k == "dup":
        a = dom.inner
        inner_dom = {}
        for occ, v in inner_after.items():
            assert occ[:2] in ((TL, BB), (TR, BB))
            rest = occ[2:]
            key = (BB,) + rest
            t = theta(a, rest, v, atoms, max_bits)
            inner_dom[key] = inner_dom.get(key, 0) + t
    elif k == "drop":
        a = dom.inner
        inner_dom = {(BB,) + occ: theta(a, occ, 2, atoms, max_bits)
                     for occ in occurrences(a, atoms)}
    else:
        raise MeasureError(f"measure undefined for {k}")
    for occ, v in inner_dom.items():
        out[p + occ] = v
    return out


def _structural_back(kind: str, inner_after: dict) -> dict:
    table = {
        "alpha": lambda o: ((TL, TL) + o[1:] if o[0] == TL
                            else (TL, TR) + o[2:] if o[:2] == (TR, TL)
                            else (TR,) + o[2:]),
        "alpha~": lambda o: ((TL,) + o[2:] if o[:2] == (TL, TL)
                             else (TR, TL) + o[2:] if o[:2] == (TL, TR)
                             else (TR, TR) + o[1:]),
        "sig": lambda o: ((TR,) + o[1:] if o[0] == TL else (TL,) + o[1:]),
        "sig~": lambda o: ((TR,) + o[1:] if o[0] == TL else (TL,) + o[1:]),
        "lam": lambda o: (TR,) + o,
        "lam~": lambda o: o[1:],
        "rho": lambda o: (TL,) + o,
        "rho~": lambda o: o[1:],
    }[kind]
    return {table(occ): v for occ, v in inner_after.items()}


def measure(m, codomain_labels: dict = None, atoms=None,
            max_bits: int = 2 ** 64) -> Labeling:
    """Back-propagate codomain occurrence labels to the domain.

    `m` is a term or canonical form of class strict or composite; labels
    default to 2 on every codomain occurrence.
    """
    if isinstance(m, CanonicalForm):
        form = m
    else:
        if classify(m) == OTHER:
            raise MeasureError("measure needs a (strict) composite "
                               "algebraic morphism")
        form = canonicalize(m)
    occs = occurrences(form.codomain, atoms)
    labels = dict(codomain_labels) if codomain_labels else {o: 2 for o in occs}
    for o, v in labels.items():
        if v < 2:
            raise MeasureError("labels must be >= 2")
    # replay forward to collect intermediate objects
    from .kernel import replace_at
    from .syntax import generator_type
    objs = [form.domain]
    for c in form.cells:
        dom, cod = generator_type(c.kind, c.subs)
        objs.append(replace_at(objs[-1], c.path, cod))
    for i in range(len(form.cells) - 1, -1, -1):
        labels = _back_cell(objs[i], form.cells[i], labels, atoms, max_bits)
    return Labeling(form.domain, labels)


def is_restricted_naturality(r: Redex) -> bool:
    """Naturality redex whose boxed metavariable has only delta and phi."""
    if r.rule not in (18, 19, 20, 21):
        return False
    return all(c.kind in ("delta", "phi") for c in r.f_cells)


DECREASED = "decreased"
UNCHANGED = "unchanged"
VIOLATION = "violation"


def check_decrease(before, after, redex: Redex = None,
                   codomain_labels: dict = None, atoms=None,
                   max_bits: int = 2 ** 64) -> str:
    """Compare domain label sums across a reduction step.

    `before` and `after` are parallel strict (or composite) morphisms or
    canonical forms; the paper's decrease lemmas promise a strict drop
    for algebraic and restricted-naturality steps, with phi0-type steps
    on composite morphisms allowed to keep the sum.
    """
    la = measure(before, codomain_labels, atoms, max_bits)
    lb = measure(after, codomain_labels, atoms, max_bits)
    if la.obj != lb.obj:
        raise MeasureError("not parallel")
    sa, sb = la.total(), lb.total()
    if sb < sa:
        return DECREASED
    if sb == sa:
        return UNCHANGED
    return VIOLATION
