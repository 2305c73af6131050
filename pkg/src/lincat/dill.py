"""Modified dual intuitionistic linear logic: checker, elaborator, simulator.

Environments carry a sharp/linear flag per variable instead of Barber's
two-zone split; lifting moves a variable from the linear to the sharp
part.  Derivations, not bare terms, elaborate to morphisms; each term
reduction is simulated by specific categorical rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from .syntax import (Object, Atom, UnitTensor, Tensor, Par, Dual, Bang, ONE,
                     MorphTerm, Gen, Seq, TensorM, ParM, BangM, Generator,
                     infer_type, pretty, pretty_object, lollipop, expand_abs,
                     expand_ev, g, seq)
from .kernel import (TL, TR, PL, PR, BB, Cell, canonicalize, normal_state,
                     congruent_forms, retype, label_tree, _route_lab,
                     RouteError)
from .rewrite import normalize, find_redexes, pick_redex, step, equal


# ---------------------------------------------------------------------------
# Types and terms


class DillType:
    def __repr__(self):
        return dill_type_str(self)


@dataclass(frozen=True, repr=False)
class DAtom(DillType):
    name: str


@dataclass(frozen=True, repr=False)
class DUnit(DillType):
    pass


@dataclass(frozen=True, repr=False)
class DTensor(DillType):
    left: DillType
    right: DillType


@dataclass(frozen=True, repr=False)
class DLolli(DillType):
    arg: DillType
    res: DillType


@dataclass(frozen=True, repr=False)
class DBang(DillType):
    inner: DillType


def dill_type_str(t) -> str:
    if isinstance(t, DAtom):
        return t.name
    if isinstance(t, DUnit):
        return "I"
    if isinstance(t, DTensor):
        return f"({dill_type_str(t.left)} (x) {dill_type_str(t.right)})"
    if isinstance(t, DLolli):
        return f"({dill_type_str(t.arg)} -o {dill_type_str(t.res)})"
    return f"!{dill_type_str(t.inner)}"


def interp(t: DillType) -> Object:
    if isinstance(t, DAtom):
        return Atom(t.name)
    if isinstance(t, DUnit):
        return ONE
    if isinstance(t, DTensor):
        return Tensor(interp(t.left), interp(t.right))
    if isinstance(t, DLolli):
        return lollipop(interp(t.arg), interp(t.res))
    if isinstance(t, DBang):
        return Bang(interp(t.inner))
    raise TypeError(t)


# terms, used for re-checking judgments
class Term:
    def __repr__(self):
        return term_str(self)


@dataclass(frozen=True, repr=False)
class Var(Term):
    name: str


@dataclass(frozen=True, repr=False)
class Star(Term):
    pass


@dataclass(frozen=True, repr=False)
class SharpT(Term):
    body: Term


@dataclass(frozen=True, repr=False)
class LetSharpT(Term):
    body: Term
    var: str
    arg: Term


@dataclass(frozen=True, repr=False)
class Lam(Term):
    var: str
    body: Term


@dataclass(frozen=True, repr=False)
class App(Term):
    fun: Term
    arg: Term


def term_str(m) -> str:
    if isinstance(m, Var):
        return m.name
    if isinstance(m, Star):
        return "*"
    if isinstance(m, SharpT):
        return f"#{term_str(m.body)}"
    if isinstance(m, LetSharpT):
        return f"{term_str(m.body)}{{#{m.var} -> {term_str(m.arg)}}}"
    if isinstance(m, Lam):
        return f"\\{m.var}. {term_str(m.body)}"
    if isinstance(m, App):
        return f"({term_str(m.fun)} {term_str(m.arg)})"
    raise TypeError(m)


def rename(m: Term, old: str, new: str) -> Term:
    if isinstance(m, Var):
        return Var(new) if m.name == old else m
    if isinstance(m, Star):
        return m
    if isinstance(m, SharpT):
        return SharpT(rename(m.body, old, new))
    if isinstance(m, LetSharpT):
        return LetSharpT(rename(m.body, old, new) if m.var != old else m.body,
                         m.var, rename(m.arg, old, new))
    if isinstance(m, Lam):
        return m if m.var == old else Lam(m.var, rename(m.body, old, new))
    if isinstance(m, App):
        return App(rename(m.fun, old, new), rename(m.arg, old, new))
    raise TypeError(m)


def subst(m: Term, var: str, val: Term) -> Term:
    if isinstance(m, Var):
        return val if m.name == var else m
    if isinstance(m, Star):
        return m
    if isinstance(m, SharpT):
        return SharpT(subst(m.body, var, val))
    if isinstance(m, LetSharpT):
        return LetSharpT(subst(m.body, var, val) if m.var != var else m.body,
                         m.var, subst(m.arg, var, val))
    if isinstance(m, Lam):
        return m if m.var == var else Lam(m.var, subst(m.body, var, val))
    if isinstance(m, App):
        return App(subst(m.fun, var, val), subst(m.arg, var, val))
    raise TypeError(m)


LIN = "lin"
SHARP = "sharp"

# environment: tuple of (var name, DillType, modality)


@dataclass(frozen=True)
class Judgment:
    env: tuple
    term: Term
    type: DillType

    def __repr__(self):
        parts = [("#" if m == SHARP else "") + f"{x}:{dill_type_str(t)}"
                 for x, t, m in self.env]
        return f"{', '.join(parts)} |- {term_str(self.term)} : " \
               f"{dill_type_str(self.type)}"


@dataclass(frozen=True)
class Derivation:
    rule: str
    premises: tuple
    judgment: Judgment
    at: int = -1  # position for exchange/lifting

    def pretty(self, depth=0) -> str:
        lines = ["  " * depth + f"[{self.rule}] {self.judgment!r}"]
        for p in self.premises:
            lines.append(p.pretty(depth + 1))
        return "\n".join(lines)


class DillError(Exception):
    pass


# constructors

def axiom(x: str, t: DillType) -> Derivation:
    return Derivation("axiom", (), Judgment(((x, t, LIN),), Var(x), t))


def unit_intro() -> Derivation:
    return Derivation("unit", (), Judgment((), Star(), DUnit()))


def lifting(d: Derivation, at: int = None) -> Derivation:
    env = list(d.judgment.env)
    if at is None:
        at = max(i for i, (_, _, m) in enumerate(env) if m == LIN)
    x, t, m = env[at]
    env[at] = (x, t, SHARP)
    return Derivation("lifting", (d,),
                      Judgment(tuple(env), d.judgment.term, d.judgment.type),
                      at)


def weakening(d: Derivation, x: str, t: DillType) -> Derivation:
    env = d.judgment.env + ((x, t, SHARP),)
    return Derivation("weakening", (d,),
                      Judgment(env, d.judgment.term, d.judgment.type))


def contraction(d: Derivation, x: str) -> Derivation:
    env = d.judgment.env
    (x1, t1, m1), (x2, t2, m2) = env[-2], env[-1]
    term = subst(subst(d.judgment.term, x1, Var(x)), x2, Var(x))
    return Derivation("contraction", (d,),
                      Judgment(env[:-2] + ((x, t1, SHARP),), term,
                               d.judgment.type))


def exchange(d: Derivation, at: int) -> Derivation:
    env = list(d.judgment.env)
    env[at], env[at + 1] = env[at + 1], env[at]
    return Derivation("exchange", (d,),
                      Judgment(tuple(env), d.judgment.term, d.judgment.type),
                      at)


def sharp_intro(d: Derivation) -> Derivation:
    return Derivation("sharp", (d,),
                      Judgment(d.judgment.env, SharpT(d.judgment.term),
                               DBang(d.judgment.type)))


def let_sharp(body: Derivation, arg: Derivation) -> Derivation:
    env1 = body.judgment.env
    x = env1[-1][0]
    env = env1[:-1] + arg.judgment.env
    term = LetSharpT(body.judgment.term, x, arg.judgment.term)
    return Derivation("let", (body, arg),
                      Judgment(env, term, body.judgment.type))


def lolli_intro(d: Derivation) -> Derivation:
    env = d.judgment.env
    x, t, _ = env[-1]
    return Derivation("abs", (d,),
                      Judgment(env[:-1], Lam(x, d.judgment.term),
                               DLolli(t, d.judgment.type)))


def lolli_elim(fun: Derivation, arg: Derivation) -> Derivation:
    env = fun.judgment.env + arg.judgment.env
    return Derivation("app", (fun, arg),
                      Judgment(env, App(fun.judgment.term, arg.judgment.term),
                               fun.judgment.type.res))


# ---------------------------------------------------------------------------
# Checking


def check_derivation(d: Derivation) -> None:
    """Re-check every node against its rule schema; raises DillError."""
    for p in d.premises:
        check_derivation(p)
    j = d.judgment
    r = d.rule
    if r == "axiom":
        if len(j.env) != 1 or j.env[0][2] != LIN or j.term != Var(j.env[0][0]) \
                or j.type != j.env[0][1]:
            raise DillError(f"bad axiom: {j!r}")
    elif r == "unit":
        if j.env or not isinstance(j.term, Star) or not isinstance(j.type, DUnit):
            raise DillError(f"bad unit intro: {j!r}")
    elif r == "lifting":
        (p,) = d.premises
        env = list(p.judgment.env)
        x, t, m = env[d.at]
        if m != LIN:
            raise DillError("lifting needs a linear variable")
        env[d.at] = (x, t, SHARP)
        if tuple(env) != j.env or j.term != p.judgment.term \
                or j.type != p.judgment.type:
            raise DillError(f"bad lifting: {j!r}")
    elif r == "weakening":
        (p,) = d.premises
        if j.env[:-1] != p.judgment.env or j.env[-1][2] != SHARP \
                or j.term != p.judgment.term or j.type != p.judgment.type:
            raise DillError(f"bad weakening: {j!r}")
    elif r == "contraction":
        (p,) = d.premises
        env = p.judgment.env
        (x1, t1, m1), (x2, t2, m2) = env[-2], env[-1]
        if t1 != t2 or m1 != SHARP or m2 != SHARP:
            raise DillError("contraction needs two sharp vars of one type")
        x = j.env[-1][0]
        want = subst(subst(p.judgment.term, x1, Var(x)), x2, Var(x))
        if j.env != env[:-2] + ((x, t1, SHARP),) or j.term != want:
            raise DillError(f"bad contraction: {j!r}")
    elif r == "exchange":
        (p,) = d.premises
        env = list(p.judgment.env)
        env[d.at], env[d.at + 1] = env[d.at + 1], env[d.at]
        if tuple(env) != j.env:
            raise DillError(f"bad exchange: {j!r}")
    elif r == "sharp":
        (p,) = d.premises
        if any(m != SHARP for _, _, m in p.judgment.env):
            raise DillError("sharp intro needs an all-sharp environment")
        if j.term != SharpT(p.judgment.term) or j.type != DBang(p.judgment.type):
            raise DillError(f"bad sharp intro: {j!r}")
    elif r == "let":
        body, arg = d.premises
        x, t, m = body.judgment.env[-1]
        if m != SHARP:
            raise DillError("let binds a sharp variable")
        if arg.judgment.type != DBang(t):
            raise DillError("let argument must have the banged type")
        if j.env != body.judgment.env[:-1] + arg.judgment.env:
            raise DillError(f"bad let env: {j!r}")
    elif r == "abs":
        (p,) = d.premises
        x, t, m = p.judgment.env[-1]
        if m != LIN:
            raise DillError("abstraction binds a linear variable")
        if j.type != DLolli(t, p.judgment.type) or j.env != p.judgment.env[:-1]:
            raise DillError(f"bad abstraction: {j!r}")
    elif r == "app":
        fun, arg = d.premises
        ft = fun.judgment.type
        if not isinstance(ft, DLolli) or ft.arg != arg.judgment.type:
            raise DillError("application type mismatch")
        if j.env != fun.judgment.env + arg.judgment.env or j.type != ft.res:
            raise DillError(f"bad application: {j!r}")
    else:
        raise DillError(f"unknown rule {r!r}")


# ---------------------------------------------------------------------------
# Elaboration


def env_object(env, i) -> Object:
    x, t, m = env[i]
    o = interp(t)
    return Bang(o) if m == SHARP else o


def fold_env(env) -> Object:
    if not env:
        return ONE
    objs = [env_object(env, i) for i in range(len(env))]
    return reduce(Tensor, objs)


def var_path(env, i) -> tuple:
    n = len(env)
    if n == 1:
        return ()
    if i == 0:
        return (TL,) * (n - 1)
    return (TL,) * (n - 1 - i) + (TR,)


def whisker(domain: Object, path: tuple, inner: MorphTerm) -> MorphTerm:
    """Place `inner` at `path` of `domain`, identities elsewhere."""
    if not path:
        return inner
    t = path[0]
    if t == TL:
        return TensorM(whisker(domain.left, path[1:], inner),
                       g("id", domain.right))
    if t == TR:
        return TensorM(g("id", domain.left),
                       whisker(domain.right, path[1:], inner))
    if t == PL:
        return ParM(whisker(domain.left, path[1:], inner),
                    g("id", domain.right))
    if t == PR:
        return ParM(g("id", domain.left),
                    whisker(domain.right, path[1:], inner))
    return BangM(whisker(domain.inner, path[1:], inner))


def cells_to_term(domain: Object, cells) -> MorphTerm:
    cells, _ = retype(domain, cells)
    obj = domain
    out = None
    from .kernel import replace_at
    from .syntax import generator_type
    for c in cells:
        dom, cod = generator_type(c.kind, c.subs)
        piece = whisker(obj, c.path, Gen(Generator(c.kind, c.subs)))
        out = piece if out is None else Seq(out, piece)
        obj = replace_at(obj, c.path, cod)
    return out if out is not None else g("id", domain)


def _ltree_with_ids(env, order) -> object:
    # leaves labelled by the variable's position in `order`
    def leaf(i):
        o = env_object(env, i)
        return _label_obj(o, order.index(env[i][0]) * 1000)

    def _label_obj(o, base):
        # one distinct id block per variable; inner structure labelled
        # deterministically so equal variables map pointwise
        counter = [base]

        def go(obj):
            if isinstance(obj, (Atom, Dual)):
                counter[0] += 1
                return ("leaf", obj, counter[0])
            if isinstance(obj, UnitTensor):
                return ("leaf", obj, None)
            if isinstance(obj, Tensor):
                return ("t", go(obj.left), go(obj.right))
            if isinstance(obj, Par):
                return ("p", go(obj.left), go(obj.right))
            if isinstance(obj, Bang):
                counter[0] += 1
                n = counter[0]
                return ("bang", n, go(obj.inner))
            from .syntax import UnitPar
            if isinstance(obj, UnitPar):
                return ("leaf", obj, None)
            raise TypeError(obj)

        return go(o)

    if not env:
        return ("leaf", ONE, None)
    trees = [leaf(i) for i in range(len(env))]
    out = trees[0]
    for t in trees[1:]:
        out = ("t", out, t)
    return out


def env_iso(src_env, dst_env) -> MorphTerm:
    """Structural isomorphism fold(src) -> fold(dst), matching variables."""
    order = [x for x, _, _ in src_env]
    t_src = _ltree_with_ids(src_env, order)
    t_dst = _ltree_with_ids(dst_env, order)
    cells = _route_lab(t_src, t_dst, ())
    return cells_to_term(fold_env(src_env), cells)


def _split_iso(env, k) -> MorphTerm:
    """fold(env) -> fold(env[:k]) (x) fold(env[k:])."""
    src = fold_env(env)
    dst = Tensor(fold_env(env[:k]), fold_env(env[k:]))
    order = [x for x, _, _ in env]
    t_src = _ltree_with_ids(env, order)
    left = _ltree_with_ids(env[:k], order)
    right = _ltree_with_ids(env[k:], order)
    cells = _route_lab(t_src, ("t", left, right), ())
    return cells_to_term(src, cells)


def elaborate(d: Derivation) -> MorphTerm:
    """Morphism denoted by a derivation, from fold(env) to the type."""
    j = d.judgment
    env = j.env
    dom = fold_env(env)
    r = d.rule
    if r == "axiom":
        return g("id", dom)
    if r == "unit":
        return g("id", ONE)
    if r == "lifting":
        (p,) = d.premises
        inner = elaborate(p)
        x, t, _ = env[d.at]
        path = var_path(env, d.at)
        return Seq(whisker(dom, path, g("eps", interp(t))), inner)
    if r == "weakening":
        (p,) = d.premises
        inner = elaborate(p)
        x, t, _ = env[-1]
        drop = whisker(dom, var_path(env, len(env) - 1), g("drop", interp(t)))
        if len(env) == 1:
            return Seq(drop, inner)
        return seq(drop, g("rho", fold_env(env[:-1])), inner)
    if r == "contraction":
        (p,) = d.premises
        inner = elaborate(p)
        x, t, _ = env[-1]
        a = Bang(interp(t))
        dup = whisker(dom, var_path(env, len(env) - 1), g("dup", interp(t)))
        if len(env) == 1:
            return Seq(dup, inner)
        gam = fold_env(env[:-1])
        return seq(dup, g("alpha~", gam, a, a), inner)
    if r == "exchange":
        (p,) = d.premises
        return Seq(env_iso(env, p.judgment.env), elaborate(p))
    if r == "sharp":
        (p,) = d.premises
        inner = elaborate(p)
        n = len(env)
        if n == 0:
            return Seq(g("phi0"), BangM(inner))
        cells = [Cell("delta", var_path(env, i)) for i in range(n)]
        cells += [Cell("phi", (TL,) * (k - 1)) for k in range(n - 1, 0, -1)]
        return Seq(cells_to_term(dom, cells), BangM(inner))
    if r == "let":
        body, arg = d.premises
        f1 = elaborate(body)
        f2 = elaborate(arg)
        k = len(body.judgment.env) - 1
        if k == 0:
            return Seq(f2, f1)
        split = _split_iso(env, k)
        return seq(split, TensorM(g("id", fold_env(env[:k])), f2), f1)
    if r == "abs":
        (p,) = d.premises
        f = elaborate(p)
        x, t, _ = p.judgment.env[-1]
        a = interp(t)
        if len(p.judgment.env) == 1:
            f = Seq(g("lam", a), f)
        b = interp(p.judgment.type)
        return seq(expand_abs(dom, a), ParM(f, g("id", Dual(a))))
    if r == "app":
        fun, arg = d.premises
        f1 = elaborate(fun)
        f2 = elaborate(arg)
        k = len(fun.judgment.env)
        split = _split_iso(env, k)
        ft = fun.judgment.type
        b, a = interp(ft.res), interp(ft.arg)
        return seq(split, TensorM(f1, f2), expand_ev(b, a))
    raise DillError(f"cannot elaborate {r!r}")


# ---------------------------------------------------------------------------
# Simulation


# ---------------------------------------------------------------------------
# The reduction schemata bridged from the type theory.  Each builder
# returns (redex derivation, contractum derivation) pairs; names follow
# the last rule consuming the substituted variable.


def schema_beta_lifting(delta_count: int = 2):
    """beta for sharp where the variable was lifted."""
    A, B, C2 = DAtom("A"), DAtom("B"), DAtom("C2")
    if delta_count == 2:
        AB, C2A = DLolli(A, B), DLolli(C2, A)
        pi1 = lifting(lolli_elim(axiom("y", AB), axiom("x", A)))
        pi2 = lolli_elim(lifting(axiom("z1", C2A)), lifting(axiom("z2", C2)))
        redex = let_sharp(pi1, sharp_intro(pi2))
        contractum = lolli_elim(axiom("y", AB), pi2)
        return redex, contractum
    # empty Delta: the argument is the closed unit term
    IB = DLolli(DUnit(), B)
    pi1 = lifting(lolli_elim(axiom("y", IB), axiom("x", DUnit())))
    pi2 = unit_intro()
    redex = let_sharp(pi1, sharp_intro(pi2))
    contractum = lolli_elim(axiom("y", IB), unit_intro())
    return redex, contractum


def schema_beta_contraction(delta_count: int = 2):
    """beta for sharp where the variable was contracted."""
    A, B, C2 = DAtom("A"), DAtom("B"), DAtom("C2")
    if delta_count == 2:
        AAB, C2A = DLolli(A, DLolli(A, B)), DLolli(C2, A)
        rho1 = lolli_elim(lolli_elim(axiom("y", AAB),
                                     lifting(axiom("x1", A))),
                          lifting(axiom("x2", A)))
        pi1 = contraction(rho1, "x")
        pi2 = lolli_elim(lifting(axiom("z1", C2A)), lifting(axiom("z2", C2)))
        redex = let_sharp(pi1, sharp_intro(pi2))
        # substitute a copy of #K at each of x1, x2, then contract Delta
        pi2b = lolli_elim(lifting(axiom("w1", C2A)), lifting(axiom("w2", C2)))
        once = let_sharp(rho1, sharp_intro(pi2b))
        # env: y, #x1, #w1, #w2; bring x1 last and substitute again
        once = exchange(exchange(once, 1), 2)
        twice = let_sharp(once, sharp_intro(pi2))
        # env: y, #w1:C2A, #w2:C2, #z1:C2A, #z2:C2
        t = exchange(twice, 2)        # y, #w1, #z1, #w2, #z2
        t = contraction(t, "z2c")     # y, #w1, #z1, #z2c
        t = exchange(t, 2)            # y, #w1, #z2c, #z1
        t = exchange(t, 1)            # y, #z2c, #w1, #z1
        t = contraction(t, "z1c")     # y, #z2c, #z1c
        contractum = exchange(t, 1)   # y, #z1c, #z2c
        return redex, contractum
    # empty Delta: contract two unit-typed sharp variables
    IIB = DLolli(DUnit(), DLolli(DUnit(), B))
    rho1 = lolli_elim(lolli_elim(axiom("y", IIB),
                                 lifting(axiom("x1", DUnit()))),
                      lifting(axiom("x2", DUnit())))
    pi1 = contraction(rho1, "x")
    redex = let_sharp(pi1, sharp_intro(unit_intro()))
    once = let_sharp(rho1, sharp_intro(unit_intro()))
    contractum = let_sharp(once, sharp_intro(unit_intro()))
    return redex, contractum


def schema_beta_weakening(delta_count: int = 2):
    """beta for sharp where the variable was weakened away."""
    A, B, C2 = DAtom("A"), DAtom("B"), DAtom("C2")
    if delta_count == 2:
        C2A = DLolli(C2, A)
        rho1 = lifting(axiom("y", B))
        pi1 = weakening(rho1, "x", A)
        pi2 = lolli_elim(lifting(axiom("z1", C2A)), lifting(axiom("z2", C2)))
        redex = let_sharp(pi1, sharp_intro(pi2))
        contractum = weakening(weakening(rho1, "z1", C2A), "z2", C2)
        return redex, contractum
    rho1 = lifting(axiom("y", B))
    pi1 = weakening(rho1, "x", DUnit())
    redex = let_sharp(pi1, sharp_intro(unit_intro()))
    contractum = rho1
    return redex, contractum


def schema_beta_sharp_intro(delta_count: int = 2):
    """beta for sharp where the variable enters a sharp box."""
    A, B, C2 = DAtom("A"), DAtom("B"), DAtom("C2")
    if delta_count == 2:
        AB, C2A = DLolli(A, B), DLolli(C2, A)
        rho1 = lolli_elim(lifting(axiom("w", AB)), lifting(axiom("x", A)))
        pi1 = sharp_intro(rho1)
        pi2 = lolli_elim(lifting(axiom("z1", C2A)), lifting(axiom("z2", C2)))
        redex = let_sharp(pi1, sharp_intro(pi2))
        contractum = sharp_intro(let_sharp(rho1, sharp_intro(pi2)))
        return redex, contractum
    IB = DLolli(DUnit(), B)
    rho1 = lolli_elim(lifting(axiom("w", IB)), lifting(axiom("x", DUnit())))
    pi1 = sharp_intro(rho1)
    redex = let_sharp(pi1, sharp_intro(unit_intro()))
    contractum = sharp_intro(let_sharp(rho1, sharp_intro(unit_intro())))
    return redex, contractum


def schema_eta_sharp():
    """eta for sharp: #x{#x -> K} reduces to K."""
    A = DAtom("A")
    body = sharp_intro(lifting(axiom("x", A)))
    redex = let_sharp(body, axiom("v", DBang(A)))
    contractum = axiom("v", DBang(A))
    return redex, contractum


def schema_weakening_contraction():
    """weakened variable deleted by contraction: both are superfluous."""
    A, B = DAtom("A"), DAtom("B")
    AB = DLolli(A, B)
    pi = lolli_elim(axiom("y", AB), lifting(axiom("x1", A)))
    redex = contraction(weakening(pi, "x2", A), "x")
    contractum = lolli_elim(axiom("y", AB), lifting(axiom("x", A)))
    return redex, contractum


def schema_interchange_contraction():
    """sharp intro pushed past contraction (rule 5)."""
    A, B = DAtom("A"), DAtom("B")
    AAB = DLolli(A, DLolli(A, B))
    rho = lolli_elim(lolli_elim(lifting(axiom("w", AAB)),
                                lifting(axiom("x1", A))),
                     lifting(axiom("x2", A)))
    redex = sharp_intro(contraction(rho, "x"))
    contractum = contraction(sharp_intro(rho), "x")
    return redex, contractum


def schema_interchange_weakening():
    """sharp intro pushed past weakening (rules 7 and 17)."""
    A, B = DAtom("A"), DAtom("B")
    rho = lifting(axiom("w", B))
    redex = sharp_intro(weakening(rho, "x", A))
    contractum = weakening(sharp_intro(rho), "x", A)
    return redex, contractum


def schema_beta_abstraction():
    """(\\x. M) N reduces to M[N/x] (rule 22)."""
    A, B = DAtom("A"), DAtom("B")
    AB = DLolli(A, B)
    pi1 = lolli_elim(axiom("y", AB), axiom("x", A))
    redex = lolli_elim(lolli_intro(pi1), axiom("v", A))
    contractum = lolli_elim(axiom("y", AB), axiom("v", A))
    return redex, contractum


def schema_eta_abstraction():
    """\\x. M x reduces to M (rule 23)."""
    A, B = DAtom("A"), DAtom("B")
    AB = DLolli(A, B)
    redex = lolli_intro(lolli_elim(axiom("v", AB), axiom("x", A)))
    contractum = axiom("v", AB)
    return redex, contractum


SCHEMATA = {
    "beta-lifting": lambda: [schema_beta_lifting(2), schema_beta_lifting(0)],
    "beta-contraction": lambda: [schema_beta_contraction(2),
                                 schema_beta_contraction(0)],
    "beta-weakening": lambda: [schema_beta_weakening(2),
                               schema_beta_weakening(0)],
    "beta-sharp-intro": lambda: [schema_beta_sharp_intro(2),
                                 schema_beta_sharp_intro(0)],
    "eta-sharp": lambda: [schema_eta_sharp()],
    "weakening-contraction": lambda: [schema_weakening_contraction()],
    "interchange-contraction": lambda: [schema_interchange_contraction()],
    "interchange-weakening": lambda: [schema_interchange_weakening()],
    "beta-abstraction": lambda: [schema_beta_abstraction()],
    "eta-abstraction": lambda: [schema_eta_abstraction()],
}

# the paper's per-case rule lists
PAPER_RULES = {
    "beta-lifting": {2, 10, 19, 14},
    "beta-contraction": {4, 11, 15, 20},
    "beta-weakening": {6, 12, 16, 21},
    "beta-sharp-intro": {1, 9, 13, 18, 17},
    "eta-sharp": {3},
    "weakening-contraction": {8},
    "interchange-contraction": {5},
    "interchange-weakening": {7, 17},
    "beta-abstraction": {22},
    "eta-abstraction": {23},
}


@dataclass
class SimulationReport:
    verdict: str
    fired: set
    steps: int

    def __repr__(self):
        return (f"simulate: {self.verdict}, rules fired "
                f"{sorted(self.fired)} in {self.steps} steps")


def simulate(redex: Derivation, contractum: Derivation,
             max_depth: int = 8, budget: int = 4000) -> SimulationReport:
    """Reduce the redex-side elaboration onto the contractum's denotation.

    Breadth-first over reduction choices: the shortest firing sequence
    after which the trace is congruent to the contractum's elaboration is
    the simulation; its rule set is the footprint.
    """
    check_derivation(redex)
    check_derivation(contractum)
    e1 = elaborate(redex)
    e2 = elaborate(contractum)
    c1 = canonicalize(e1)
    c2 = canonicalize(e2)
    start = normal_state(c1.domain, c1.cells)
    goal = normal_state(c2.domain, c2.cells)
    from .kernel import state_key
    frontier = [(start, ())]
    seen = {state_key(start)}
    for depth in range(max_depth + 1):
        nxt = []
        for form, fired in frontier:
            if congruent_forms(form, goal, budget) == "yes":
                return SimulationReport("equal", set(fired), depth)
        for form, fired in frontier:
            rs = [r for r in find_redexes(form) if not r.reversible]
            # expand along the paper's strategy first: beta, naturality,
            # then rightmost algebraic
            rank = {**{i: 1 for i in range(1, 18)},
                    **{i: 0 for i in range(18, 24)}}
            rs.sort(key=lambda r: (rank[r.rule], -r.start, r.rule))
            for r in rs:
                try:
                    nf = step(form, r)
                except Exception:
                    continue
                k = state_key(nf)
                if k in seen:
                    continue
                seen.add(k)
                nxt.append((nf, fired + (r.rule,)))
        if not nxt:
            break
        frontier = nxt
    verdict, tr1, _ = equal(e1, e2)
    fired = {s.rule for s in tr1.steps} if tr1 else set()
    return SimulationReport(verdict, fired, max_depth)
