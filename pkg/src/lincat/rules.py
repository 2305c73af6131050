"""The 23 directed rules: patterns, contracta, classification.

Patterns are anchor cells (kind, relative path) at a shared base; the
structural padding the paper writes as ~ appears only in contracta,
synthesized concretely per instance.  Redexes 18-21 carry a morphism
metavariable: a maximal run of cells inside one bang frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import TL, TR, PL, PR, BB, Cell
from .syntax import STRUCTURAL_KINDS

ALGEBRAIC = "algebraic"
NATURALITY = "naturality"
BETA = "beta"
ETA = "eta"

RULE_CLASS = {**{i: ALGEBRAIC for i in range(1, 18)},
              **{i: NATURALITY for i in range(18, 22)},
              22: BETA, 23: ETA}

RULE_NAME = {
    1: "(delta;delta)-type", 2: "(delta;eps)-type", 3: "(delta;!eps)-type",
    4: "(delta;dup)-type", 5: "(delta;!dup)-type", 6: "(delta;drop)-type",
    7: "(delta;!drop)-type", 8: "(dup;drop)-type", 9: "(phi;delta)-type",
    10: "(phi;eps)-type", 11: "(phi;dup)-type", 12: "(phi;drop)-type",
    13: "(phi0;delta)-type", 14: "(phi0;eps)-type", 15: "(phi0;dup)-type",
    16: "(phi0;drop)-type", 17: "(phi0;phi)-type",
    18: "(!f;delta)-type", 19: "(!f;eps)-type", 20: "(!f;dup)-type",
    21: "(!f;drop)-type", 22: "beta", 23: "eta",
}

# mid-four interchange (!A*!A)*(!B*!B) -> (!A*!B)*(!A*!B), spelled out
_MID4 = [("alpha", ()), ("alpha~", (TR,)), ("sig", (TR, TL)),
         ("alpha", (TR,)), ("alpha~", ())]

# rule id -> (pattern, contractum); both lists of (kind, relpath).
# A second entry gives the sigma-mirrored pattern of the same rule.
ALGEBRAIC_RULES = {
    1: [(([("delta", ()), ("delta", ())]),
         [("delta", ()), ("delta", (BB,))])],
    2: [(([("delta", ()), ("eps", ())]), [])],
    3: [(([("delta", ()), ("eps", (BB,))]), [])],
    4: [(([("delta", ()), ("dup", ())]),
         [("dup", ()), ("delta", (TL,)), ("delta", (TR,))])],
    5: [(([("delta", ()), ("dup", (BB,))]),
         [("dup", ()), ("delta", (TL,)), ("delta", (TR,)), ("phi", ())])],
    6: [(([("delta", ()), ("drop", ())]), [("drop", ())])],
    7: [(([("delta", ()), ("drop", (BB,))]), [("drop", ()), ("phi0", ())])],
    8: [(([("dup", ()), ("drop", (TL,))]), [("lam~", ())]),
        (([("dup", ()), ("drop", (TR,))]), [("rho~", ())])],
    9: [(([("phi", ()), ("delta", ())]),
         [("delta", (TL,)), ("delta", (TR,)), ("phi", ()), ("phi", (BB,))])],
    10: [(([("phi", ()), ("eps", ())]), [("eps", (TL,)), ("eps", (TR,))])],
    11: [(([("phi", ()), ("dup", ())]),
          [("dup", (TL,)), ("dup", (TR,))] + _MID4
          + [("phi", (TL,)), ("phi", (TR,))])],
    12: [(([("phi", ()), ("drop", ())]),
          [("drop", (TL,)), ("drop", (TR,)), ("lam", ())])],
    13: [(([("phi0", ()), ("delta", ())]), [("phi0", ()), ("phi0", (BB,))])],
    14: [(([("phi0", ()), ("eps", ())]), [])],
    15: [(([("phi0", ()), ("dup", ())]),
          [("lam~", ()), ("phi0", (TL,)), ("phi0", (TR,))])],
    16: [(([("phi0", ()), ("drop", ())]), [])],
    17: [(([("phi0", (TL,)), ("phi", ())]), [("lam", ()), ("lam~", (BB,))]),
         (([("phi0", (TR,)), ("phi", ())]), [("rho", ()), ("rho~", (BB,))])],
    22: [(([("tau", (TL,)), ("dist'", ()), ("gamma", (PR,))]),
          [("lam", ()), ("brho~", ())])],
    23: [(([("tau", (TR,)), ("dist", ()), ("gamma", (PL,))]),
          [("rho", ()), ("blam~", ())])],
}

# the algebraic cell closing a naturality redex !f;u
NATURALITY_HEADS = {"delta": 18, "eps": 19, "dup": 20, "drop": 21}


@dataclass
class Redex:
    rule: int
    start: int
    end: int            # inclusive index range in the (assembled) form
    reversible: bool
    base: tuple = ()
    indices: tuple = ()          # matched anchor cell indices
    f_cells: tuple = ()          # naturality metavariable cells
    form: object = None          # form the indices refer to (may be assembled)
    assembled: bool = False
    variant: int = 0             # pattern variant (mirrored forms)
    left_exits: tuple = ()       # gathered cells leaving the window left
    right_exits: tuple = ()      # ... and right, with transported paths

    @property
    def klass(self) -> str:
        return RULE_CLASS[self.rule]

    def __repr__(self):
        tag = " (assembled)" if self.assembled else ""
        return (f"rule {self.rule} [{RULE_NAME[self.rule]}] at "
                f"{self.start}..{self.end} reversible={self.reversible}{tag}")


def rule_table():
    """(rule id, name, class, redex pattern, contractum pattern) rows."""
    rows = []
    for rid in range(1, 24):
        if rid in ALGEBRAIC_RULES:
            pat, con = ALGEBRAIC_RULES[rid][0]
            rows.append((rid, RULE_NAME[rid], RULE_CLASS[rid], pat, con))
        else:
            u = {18: "delta", 19: "eps", 20: "dup", 21: "drop"}[rid]
            pat = [("!f", (BB, "*")), (u, ())]
            con = {
                18: [(u, ()), ("!!f", (BB, BB, "*"))],
                19: [(u, ()), ("f", ("*",))],
                20: [(u, ()), ("!f", (TL, BB, "*")), ("!f", (TR, BB, "*"))],
                21: [(u, ())],
            }[rid]
            rows.append((rid, RULE_NAME[rid], RULE_CLASS[rid], pat, con))
    return rows


def naturality_contractum(rule: int, q: tuple, f_cells) -> list:
    u = {18: "delta", 19: "eps", 20: "dup", 21: "drop"}[rule]
    bb = len(q) + 1  # strip the q + (BB,) prefix from f cells
    out = [Cell(u, q)]
    if rule == 18:
        out += [Cell(c.kind, q + (BB, BB) + c.path[bb:], c.subs) for c in f_cells]
    elif rule == 19:
        out = [Cell(u, q)] + [Cell(c.kind, q + c.path[bb:], c.subs)
                              for c in f_cells]
    elif rule == 20:
        out += [Cell(c.kind, q + (TL, BB) + c.path[bb:], c.subs) for c in f_cells]
        out += [Cell(c.kind, q + (TR, BB) + c.path[bb:], c.subs) for c in f_cells]
    return out


def structural_f(f_cells) -> bool:
    return all(c.kind in STRUCTURAL_KINDS for c in f_cells)
