"""Concrete and abstract syntax for objects and morphism terms.

Objects are finite trees over atoms, the two units, tensor, par, dual and
bang.  Morphism terms are trees of atomic generators closed under
composition, tensor, par and bang.  Structural equality is syntactic:
A^^ is a different object from A.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache


# ---------------------------------------------------------------------------
# Objects


class Object:
    __slots__ = ()

    def __repr__(self):
        return pretty_object(self)


@dataclass(frozen=True, repr=False)
class Atom(Object):
    name: str


@dataclass(frozen=True, repr=False)
class UnitTensor(Object):
    pass


@dataclass(frozen=True, repr=False)
class UnitPar(Object):
    pass


@dataclass(frozen=True, repr=False)
class Tensor(Object):
    left: Object
    right: Object


@dataclass(frozen=True, repr=False)
class Par(Object):
    left: Object
    right: Object


@dataclass(frozen=True, repr=False)
class Dual(Object):
    inner: Object


@dataclass(frozen=True, repr=False)
class Bang(Object):
    inner: Object


ONE = UnitTensor()
BOT = UnitPar()


def pretty_object(a: Object, prec: int = 0) -> str:
    # precedence: 0 par, 1 tensor, 2 prefix/postfix
    if isinstance(a, Atom):
        return a.name
    if isinstance(a, UnitTensor):
        return "1"
    if isinstance(a, UnitPar):
        return "bot"
    if isinstance(a, Dual):
        return pretty_object(a.inner, 2) + "^"
    if isinstance(a, Bang):
        return "!" + pretty_object(a.inner, 2)
    if isinstance(a, Tensor):
        s = pretty_object(a.left, 1) + " * " + pretty_object(a.right, 2)
        return "(" + s + ")" if prec > 1 else s
    if isinstance(a, Par):
        s = pretty_object(a.left, 0) + " % " + pretty_object(a.right, 1)
        return "(" + s + ")" if prec > 0 else s
    raise TypeError(a)


# ---------------------------------------------------------------------------
# Generators

# kind -> subscript arity
GENERATOR_ARITY = {
    "id": 1,
    "alpha": 3, "alpha~": 3, "lam": 1, "lam~": 1, "rho": 1, "rho~": 1,
    "sig": 2, "sig~": 2,
    "balpha": 3, "balpha~": 3, "blam": 1, "blam~": 1, "brho": 1, "brho~": 1,
    "bsig": 2, "bsig~": 2,
    "dist": 3, "dist'": 3,
    "tau": 1, "gamma": 1,
    "phi": 2, "phi0": 0,
    "delta": 1, "eps": 1, "dup": 1, "drop": 1,
}

STRUCTURAL_KINDS = frozenset({
    "id", "alpha", "alpha~", "lam", "lam~", "rho", "rho~", "sig", "sig~",
    "balpha", "balpha~", "blam", "blam~", "brho", "brho~", "bsig", "bsig~",
})

ALGEBRAIC_KINDS = frozenset({"phi", "phi0", "delta", "eps", "dup", "drop"})

INVERSE_OF = {
    "alpha": "alpha~", "alpha~": "alpha", "lam": "lam~", "lam~": "lam",
    "rho": "rho~", "rho~": "rho", "sig": "sig~", "sig~": "sig",
    "balpha": "balpha~", "balpha~": "balpha", "blam": "blam~", "blam~": "blam",
    "brho": "brho~", "brho~": "brho", "bsig": "bsig~", "bsig~": "bsig",
}


@dataclass(frozen=True)
class Generator:
    kind: str
    subs: tuple  # tuple[Object, ...]

    def __post_init__(self):
        if self.kind not in GENERATOR_ARITY:
            raise ParseError(f"unknown generator {self.kind!r}")
        if len(self.subs) != GENERATOR_ARITY[self.kind]:
            raise ParseError(
                f"{self.kind} takes {GENERATOR_ARITY[self.kind]} subscripts, "
                f"got {len(self.subs)}")

    def __repr__(self):
        return gen_name(self.kind, self.subs)


def gen_name(kind: str, subs: tuple) -> str:
    if not subs:
        return kind
    return kind + "{" + ",".join(pretty_object(s) for s in subs) + "}"


def generator_type(kind: str, subs: tuple) -> tuple:
    """Domain and codomain of an atomic generator."""
    if kind == "id":
        (a,) = subs
        return a, a
    if kind == "alpha":
        a, b, c = subs
        return Tensor(Tensor(a, b), c), Tensor(a, Tensor(b, c))
    if kind == "alpha~":
        a, b, c = subs
        return Tensor(a, Tensor(b, c)), Tensor(Tensor(a, b), c)
    if kind == "lam":
        (a,) = subs
        return Tensor(ONE, a), a
    if kind == "lam~":
        (a,) = subs
        return a, Tensor(ONE, a)
    if kind == "rho":
        (a,) = subs
        return Tensor(a, ONE), a
    if kind == "rho~":
        (a,) = subs
        return a, Tensor(a, ONE)
    if kind == "sig":
        a, b = subs
        return Tensor(a, b), Tensor(b, a)
    if kind == "sig~":
        a, b = subs
        return Tensor(b, a), Tensor(a, b)
    if kind == "balpha":
        a, b, c = subs
        return Par(Par(a, b), c), Par(a, Par(b, c))
    if kind == "balpha~":
        a, b, c = subs
        return Par(a, Par(b, c)), Par(Par(a, b), c)
    if kind == "blam":
        (a,) = subs
        return Par(BOT, a), a
    if kind == "blam~":
        (a,) = subs
        return a, Par(BOT, a)
    if kind == "brho":
        (a,) = subs
        return Par(a, BOT), a
    if kind == "brho~":
        (a,) = subs
        return a, Par(a, BOT)
    if kind == "bsig":
        a, b = subs
        return Par(a, b), Par(b, a)
    if kind == "bsig~":
        a, b = subs
        return Par(b, a), Par(a, b)
    if kind == "dist":
        a, b, c = subs
        return Tensor(a, Par(b, c)), Par(Tensor(a, b), c)
    if kind == "dist'":
        a, b, c = subs
        return Tensor(Par(a, b), c), Par(a, Tensor(b, c))
    if kind == "tau":
        (a,) = subs
        return ONE, Par(a, Dual(a))
    if kind == "gamma":
        (a,) = subs
        return Tensor(Dual(a), a), BOT
    if kind == "phi":
        a, b = subs
        return Tensor(Bang(a), Bang(b)), Bang(Tensor(a, b))
    if kind == "phi0":
        return ONE, Bang(ONE)
    if kind == "delta":
        (a,) = subs
        return Bang(a), Bang(Bang(a))
    if kind == "eps":
        (a,) = subs
        return Bang(a), a
    if kind == "dup":
        (a,) = subs
        return Bang(a), Tensor(Bang(a), Bang(a))
    if kind == "drop":
        (a,) = subs
        return Bang(a), ONE
    raise ParseError(f"unknown generator {kind!r}")


# ---------------------------------------------------------------------------
# Morphism terms


class MorphTerm:
    __slots__ = ()

    def __repr__(self):
        return pretty(self)


@dataclass(frozen=True, repr=False)
class Gen(MorphTerm):
    gen: Generator


@dataclass(frozen=True, repr=False)
class Seq(MorphTerm):
    first: MorphTerm
    second: MorphTerm


@dataclass(frozen=True, repr=False)
class TensorM(MorphTerm):
    left: MorphTerm
    right: MorphTerm


@dataclass(frozen=True, repr=False)
class ParM(MorphTerm):
    left: MorphTerm
    right: MorphTerm


@dataclass(frozen=True, repr=False)
class BangM(MorphTerm):
    inner: MorphTerm


# sugar nodes; removed by expand_sugar
@dataclass(frozen=True, repr=False)
class Dualize(MorphTerm):
    inner: MorphTerm


@dataclass(frozen=True, repr=False)
class AbsS(MorphTerm):
    a: Object
    b: Object


@dataclass(frozen=True, repr=False)
class EvS(MorphTerm):
    a: Object
    b: Object


class TypeError_(Exception):
    """Composition mismatch or bad generator application."""


def infer_type(m: MorphTerm) -> tuple:
    """(domain, codomain) of a well-typed term; raises TypeError_ otherwise."""
    if isinstance(m, (Dualize, AbsS, EvS)):
        return infer_type(expand_sugar(m))
    if isinstance(m, Gen):
        return generator_type(m.gen.kind, m.gen.subs)
    if isinstance(m, Seq):
        d1, c1 = infer_type(m.first)
        d2, c2 = infer_type(m.second)
        if c1 != d2:
            raise TypeError_(
                f"composition mismatch at {pretty(m.first)} ; {pretty(m.second)}: "
                f"{pretty_object(c1)} vs {pretty_object(d2)}")
        return d1, c2
    if isinstance(m, TensorM):
        d1, c1 = infer_type(m.left)
        d2, c2 = infer_type(m.right)
        return Tensor(d1, d2), Tensor(c1, c2)
    if isinstance(m, ParM):
        d1, c1 = infer_type(m.left)
        d2, c2 = infer_type(m.right)
        return Par(d1, d2), Par(c1, c2)
    if isinstance(m, BangM):
        d, c = infer_type(m.inner)
        return Bang(d), Bang(c)
    raise TypeError(m)


def seq(*ms: MorphTerm) -> MorphTerm:
    out = ms[0]
    for m in ms[1:]:
        out = Seq(out, m)
    return out


def g(kind: str, *subs: Object) -> MorphTerm:
    return Gen(Generator(kind, tuple(subs)))


def pretty(m: MorphTerm, prec: int = 0) -> str:
    # precedence: 0 seq, 1 par, 2 tensor, 3 bang/atom
    if isinstance(m, Dualize):
        inner = pretty(m.inner, 3)
        if not isinstance(m.inner, (Gen, Dualize, AbsS, EvS)):
            inner = "(" + pretty(m.inner, 0) + ")"
        return inner + "^"
    if isinstance(m, AbsS):
        return f"abs{{{pretty_object(m.a)},{pretty_object(m.b)}}}"
    if isinstance(m, EvS):
        return f"ev{{{pretty_object(m.a)},{pretty_object(m.b)}}}"
    if isinstance(m, Gen):
        return repr(m.gen)
    if isinstance(m, Seq):
        s = pretty(m.first, 0) + " ; " + pretty(m.second, 1)
        return "(" + s + ")" if prec > 0 else s
    if isinstance(m, ParM):
        s = pretty(m.left, 1) + " % " + pretty(m.right, 2)
        return "(" + s + ")" if prec > 1 else s
    if isinstance(m, TensorM):
        s = pretty(m.left, 2) + " * " + pretty(m.right, 3)
        return "(" + s + ")" if prec > 2 else s
    if isinstance(m, BangM):
        inner = pretty(m.inner, 3)
        if not isinstance(m.inner, (Gen, BangM)):
            inner = "(" + pretty(m.inner, 0) + ")"
        return "!" + inner
    raise TypeError(m)


# ---------------------------------------------------------------------------
# Sugar


def expand_sugar(m: MorphTerm) -> MorphTerm:
    """Replace sugar nodes by their core expansions, bottom-up."""
    if isinstance(m, Dualize):
        return expand_dual(expand_sugar(m.inner))
    if isinstance(m, AbsS):
        return expand_abs(m.a, m.b)
    if isinstance(m, EvS):
        return expand_ev(m.a, m.b)
    if isinstance(m, Seq):
        return Seq(expand_sugar(m.first), expand_sugar(m.second))
    if isinstance(m, TensorM):
        return TensorM(expand_sugar(m.left), expand_sugar(m.right))
    if isinstance(m, ParM):
        return ParM(expand_sugar(m.left), expand_sugar(m.right))
    if isinstance(m, BangM):
        return BangM(expand_sugar(m.inner))
    return m


def expand_dual(f: MorphTerm) -> MorphTerm:
    """f^ for f: A -> B, read wire-by-wire from the bent-wire picture."""
    a, b = infer_type(f)
    return seq(
        g("rho~", Dual(b)),
        TensorM(g("id", Dual(b)), g("tau", a)),
        TensorM(g("id", Dual(b)), ParM(f, g("id", Dual(a)))),
        g("dist", Dual(b), b, Dual(a)),
        ParM(g("gamma", b), g("id", Dual(a))),
        g("blam", Dual(a)),
    )


def expand_abs(a: Object, b: Object) -> MorphTerm:
    """abs{A,B}: A -> (A*B) % B^."""
    return seq(
        g("rho~", a),
        TensorM(g("id", a), g("tau", b)),
        g("dist", a, b, Dual(b)),
    )


def expand_ev(a: Object, b: Object) -> MorphTerm:
    """ev{A,B}: (A % B^) * B -> A."""
    return seq(
        g("dist'", a, Dual(b), b),
        ParM(g("id", a), g("gamma", b)),
        g("brho", a),
    )


def lollipop(a: Object, b: Object) -> Object:
    """A -o B := B % A^."""
    return Par(b, Dual(a))


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    def __init__(self, msg, pos=None):
        self.pos = pos
        super().__init__(msg if pos is None else f"{msg} (at offset {pos})")


_PUNCT = ("-o", "{", "}", "(", ")", "*", "%", ";", "!", "^", ",", "=", ":")


def _tokenize(text: str):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isspace():
            i += 1
            continue
        matched = False
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append((p, i))
                i += len(p)
                matched = True
                break
        if matched:
            continue
        if c.isalnum() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'~"):
                j += 1
            toks.append((text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    toks.append((None, n))
    return toks


class _Parser:
    def __init__(self, text, bindings=None, expand=True):
        self.toks = _tokenize(text)
        self.k = 0
        self.bindings = bindings or {}
        self.expand = expand

    def peek(self):
        return self.toks[self.k][0]

    def pos(self):
        return self.toks[self.k][1]

    def next(self):
        t = self.toks[self.k]
        self.k += 1
        return t[0]

    def expect(self, tok):
        if self.peek() != tok:
            raise ParseError(f"expected {tok!r}, found {self.peek()!r}", self.pos())
        return self.next()

    # objects: -o < % < * < postfix ^ / prefix !
    def object_(self) -> Object:
        a = self.obj_par()
        while self.peek() == "-o":
            self.next()
            b = self.obj_par()
            a = lollipop(a, b)
        return a

    def obj_par(self) -> Object:
        a = self.obj_tensor()
        while self.peek() == "%":
            self.next()
            a = Par(a, self.obj_tensor())
        return a

    def obj_tensor(self) -> Object:
        a = self.obj_unary()
        while self.peek() == "*":
            self.next()
            a = Tensor(a, self.obj_unary())
        return a

    def obj_unary(self) -> Object:
        if self.peek() == "!":
            self.next()
            return Bang(self.obj_unary())
        a = self.obj_atom()
        while self.peek() == "^":
            self.next()
            a = Dual(a)
        return a

    def obj_atom(self) -> Object:
        t = self.peek()
        if t == "(":
            self.next()
            a = self.object_()
            self.expect(")")
            while self.peek() == "^":
                self.next()
                a = Dual(a)
            return a
        if t == "1":
            self.next()
            return ONE
        if t == "bot":
            self.next()
            return BOT
        if t is not None and t[:1].isalpha():
            self.next()
            if t in self.bindings and isinstance(self.bindings[t], Object):
                return self.bindings[t]
            if not t[0].isupper():
                raise ParseError(f"atom names start uppercase: {t!r}", self.pos())
            return Atom(t)
        raise ParseError(f"expected object, found {t!r}", self.pos())

    # morphisms: ; < % < * < ! / postfix ^
    def morphism(self) -> MorphTerm:
        m = self.m_par()
        while self.peek() == ";":
            self.next()
            m = Seq(m, self.m_par())
        return m

    def m_par(self) -> MorphTerm:
        m = self.m_tensor()
        while self.peek() == "%":
            self.next()
            m = ParM(m, self.m_tensor())
        return m

    def m_tensor(self) -> MorphTerm:
        m = self.m_unary()
        while self.peek() == "*":
            self.next()
            m = TensorM(m, self.m_unary())
        return m

    def m_unary(self) -> MorphTerm:
        if self.peek() == "!":
            self.next()
            return BangM(self.m_unary())
        m = self.m_atom()
        while self.peek() == "^":
            self.next()
            m = Dualize(m)
        return m

    def m_atom(self) -> MorphTerm:
        t = self.peek()
        if t == "(":
            self.next()
            m = self.morphism()
            self.expect(")")
            return m
        if t is None:
            raise ParseError("unexpected end of input", self.pos())
        p = self.pos()
        if t in GENERATOR_ARITY or t in ("abs", "ev"):
            self.next()
            subs = []
            if self.peek() == "{":
                self.next()
                subs.append(self.object_())
                while self.peek() == ",":
                    self.next()
                    subs.append(self.object_())
                self.expect("}")
            if t == "abs":
                if len(subs) != 2:
                    raise ParseError("abs takes 2 subscripts", p)
                return AbsS(*subs)
            if t == "ev":
                if len(subs) != 2:
                    raise ParseError("ev takes 2 subscripts", p)
                return EvS(*subs)
            return Gen(Generator(t, tuple(subs)))
        if t in self.bindings and isinstance(self.bindings[t], MorphTerm):
            self.next()
            return self.bindings[t]
        raise ParseError(f"unknown generator or binding {t!r}", p)


def parse_object(text: str, bindings=None) -> Object:
    p = _Parser(text, bindings)
    a = p.object_()
    if p.peek() is not None:
        raise ParseError(f"trailing input {p.peek()!r}", p.pos())
    return a


def parse_morphism(text: str, bindings=None, expand: bool = True) -> MorphTerm:
    p = _Parser(text, bindings, expand)
    m = p.morphism()
    if p.peek() is not None:
        raise ParseError(f"trailing input {p.peek()!r}", p.pos())
    return expand_sugar(m) if expand else m
