"""Redex search modulo congruence, the reduction strategy, and traces."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from .syntax import (Object, Atom, UnitTensor, UnitPar, Tensor, Par, Dual,
                     Bang, ONE, BOT, MorphTerm, infer_type, pretty_object,
                     STRUCTURAL_KINDS, TypeError_)
from .kernel import (TL, TR, PL, PR, BB, Cell, CanonicalForm, canonicalize,
                     normal_state, make_form, independent, gather_match,
                     neighbors, state_key, retype, congruent_forms,
                     find_bends)
from .rules import (ALGEBRAIC_RULES, NATURALITY_HEADS, RULE_CLASS, RULE_NAME,
                    Redex, naturality_contractum, structural_f, BETA, ETA,
                    NATURALITY)


# ---------------------------------------------------------------------------
# Redex search


def _literal_redexes(form: CanonicalForm):
    cells = list(form.cells)
    out = []
    for rid, variants in ALGEBRAIC_RULES.items():
        for vi, (pattern, _) in enumerate(variants):
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
                    idx, lx, rx = m
                    out.append(Redex(rule=rid, start=idx[0], end=idx[-1],
                                     reversible=False, base=q,
                                     indices=tuple(idx), form=form,
                                     variant=vi, left_exits=tuple(lx),
                                     right_exits=tuple(rx)))
    return out


def _naturality_redexes(form: CanonicalForm):
    cells = list(form.cells)
    out = []
    for k, u in enumerate(cells):
        rid = NATURALITY_HEADS.get(u.kind)
        if rid is None:
            continue
        q = u.path
        box = q + (BB,)
        f_idx = []
        i = k - 1
        while i >= 0:
            c = cells[i]
            if c.path[:len(box)] == box:
                f_idx.append(i)
            elif all(independent(c, cells[j]) for j in f_idx) and independent(c, u):
                pass
            else:
                break
            i -= 1
        if f_idx:
            f_idx.reverse()
            fc = tuple(cells[j] for j in f_idx)
            out.append(Redex(rule=rid, start=f_idx[0], end=k,
                             reversible=structural_f(fc), base=q,
                             indices=tuple(f_idx) + (k,), f_cells=fc,
                             form=form))
    return out


# two adjacent dual gadgets g^;f^ fuse to (f;g)^ by one beta step; the
# anchors of the composite redex, inner runs live at base+(TR,PL)
_GADGET = [("rho~", ()), ("tau", (TR,)), ("dist", ()), ("gamma", (PL,)),
           ("blam", ())]


def _gadget_fusion_redexes(form: CanonicalForm):
    cells = list(form.cells)
    anchors = _GADGET + _GADGET
    out = []
    for i, c in enumerate(cells):
        if c.kind != "rho~":
            continue
        q = c.path
        idx = []
        runs = {2: [], 7: []}  # run indices after tau anchors
        want = 0
        inner = q + (TR, PL)
        j = i
        ok = True
        while j < len(cells) and want < len(anchors):
            cj = cells[j]
            k, rel = anchors[want]
            if cj.kind == k and cj.path == q + rel:
                idx.append(j)
                want += 1
            elif want in (2, 7) and cj.path[:len(inner)] == inner:
                runs[want].append(j)
            elif idx and all(independent(cj, Cell(k2, q + r2))
                             for k2, r2 in anchors):
                pass
            elif idx:
                ok = False
                break
            j += 1
        if ok and want == len(anchors):
            out.append(Redex(rule=22, start=idx[0], end=idx[-1],
                             reversible=False, base=q,
                             indices=tuple(idx), form=form,
                             f_cells=(tuple(runs[2]), tuple(runs[7])),
                             variant=-1))
    return out


def _fire_fusion(f: CanonicalForm, redex: Redex) -> CanonicalForm:
    cells = list(f.cells)
    q = redex.base
    run_g, run_f = redex.f_cells
    used = set(redex.indices) | set(run_g) | set(run_f)
    lo, hi = redex.indices[0], redex.indices[-1]
    # cells gathered out of the window keep their place in front
    between = [cells[i] for i in range(lo, hi + 1) if i not in used]
    tau_f = cells[redex.indices[6]]
    new = ([Cell("rho~", q), Cell("tau", q + (TR,), tau_f.subs)]
           + [cells[i] for i in run_f]
           + [cells[i] for i in run_g]
           + [Cell("dist", q), Cell("gamma", q + (PL,)), Cell("blam", q)])
    out = cells[:lo] + between + new + cells[hi + 1:]
    return normal_state(f.domain, out)


def _scan_irreversible(f: CanonicalForm):
    for r in _literal_redexes(f) + _naturality_redexes(f):
        if not r.reversible:
            return r
    return None


def _assemble(form: CanonicalForm, bends_only: bool, budget: int,
              rules=(22, 23)):
    """Best-first search for a congruent trace with a fireable redex."""
    def goal(f):
        if bends_only:
            for r in _literal_redexes(f):
                if r.rule in rules:
                    return r
            return None
        return _scan_irreversible(f)

    def h(f):
        if not bends_only:
            return 0
        bends = [b for b in find_bends(f) if b[2] in rules]
        if not bends:
            return None
        return min(gi - ti for ti, gi, _ in bends)

    h0 = h(form)
    if h0 is None:
        return None
    seen = {state_key(form)}
    counter = itertools.count(1)
    pq = [(h0, 0, 0, form)]
    steps = 0
    while pq and steps < budget:
        _, cost, _, f = heapq.heappop(pq)
        for cells in neighbors(f):
            steps += 1
            if steps >= budget:
                break
            try:
                nf = normal_state(f.domain, cells)
            except TypeError_:
                continue
            k = state_key(nf)
            if k in seen:
                continue
            seen.add(k)
            r = goal(nf)
            if r is not None:
                r.assembled = True
                return r
            hn = h(nf)
            if hn is None:
                continue
            heapq.heappush(pq, (cost + 1 + 2 * hn, cost + 1, next(counter), nf))
    return None


ASSEMBLY_BUDGET_BENDS = 4000
ASSEMBLY_BUDGET_GENERAL = 250


def find_redexes(form: CanonicalForm, assemble: bool = True):
    """All redexes of the congruence class, best effort.

    Literal and naturality redexes are found by scanning modulo
    commutation; scattered redexes are surfaced by a bounded congruence
    search when `assemble` is set.  A redex that cannot be assembled
    within budget is not reported.
    """
    out = (_literal_redexes(form) + _naturality_redexes(form)
           + _gadget_fusion_redexes(form))
    if assemble:
        if not any(r.rule in (22, 23) for r in out):
            bend_rules = {rule for _, _, rule in find_bends(form)}
            for rule in sorted(bend_rules):
                r = _assemble(form, bends_only=True,
                              budget=ASSEMBLY_BUDGET_BENDS, rules=(rule,))
                if r is not None:
                    out.append(r)
        if not any(not r.reversible for r in out):
            r = _phi_pull_redex(form)
            if r is None:
                r = _assemble(form, bends_only=False,
                              budget=ASSEMBLY_BUDGET_GENERAL)
            if r is not None:
                out.append(r)
    out.sort(key=lambda r: (r.start, r.rule))
    return out


def _phi_pull_redex(form: CanonicalForm):
    """Surface a redex by pulling box-interior cells through phi merges.

    Deterministic and cheap; the pulled arrangement is congruent, so a
    redex found there is a redex of the class.
    """
    from .kernel import saturate_left, TRANSPORT_HOSTS, make_form
    cells = saturate_left(list(form.cells), hosts=TRANSPORT_HOSTS)
    try:
        f2 = make_form(form.domain, cells)
    except TypeError_:
        return None
    if f2.cells == form.cells:
        return None
    r = _scan_irreversible(f2)
    if r is not None:
        r.assembled = True
    return r


class StaleRedex(Exception):
    pass


def step(form: CanonicalForm, redex: Redex) -> CanonicalForm:
    """Fire a redex; returns the re-canonicalized contractum trace."""
    f = redex.form if redex.form is not None else form
    cells = list(f.cells)
    for i in redex.indices:
        if i >= len(cells):
            raise StaleRedex(str(redex))
    if redex.variant == -1:
        return _fire_fusion(f, redex)
    q = redex.base
    if redex.rule in ALGEBRAIC_RULES:
        pattern, contract = ALGEBRAIC_RULES[redex.rule][redex.variant]
        ok = all(cells[i].kind == pattern[j][0]
                 and cells[i].path == q + pattern[j][1]
                 for j, i in enumerate(redex.indices))
        if not ok:
            raise StaleRedex(str(redex))
        new = [Cell(k, q + rel) for k, rel in contract]
        lo, hi = redex.indices[0], redex.indices[-1]
        out = (cells[:lo] + list(redex.left_exits) + new
               + list(redex.right_exits) + cells[hi + 1:])
    else:
        new = naturality_contractum(redex.rule, q, redex.f_cells)
        idx = set(redex.indices)
        lo, hi = redex.indices[0], redex.indices[-1]
        between = [cells[i] for i in range(lo, hi + 1) if i not in idx]
        out = cells[:lo] + between + new + cells[hi + 1:]
    return normal_state(f.domain, out)


# ---------------------------------------------------------------------------
# Normalization


@dataclass
class TraceStep:
    rule: int
    klass: str
    start: int
    end: int
    reversible: bool
    before: CanonicalForm
    after: CanonicalForm


@dataclass
class Trace:
    input: MorphTerm
    steps: list = field(default_factory=list)
    result: CanonicalForm = None
    skipped_reversible: int = 0
    fuel_exhausted: bool = False

    def fired_rules(self):
        return sorted({s.rule for s in self.steps})

    def text(self) -> str:
        lines = []
        for n, s in enumerate(self.steps):
            lines.append(f"step {n}: rule={s.rule} class={s.klass} "
                         f"pos={s.start}..{s.end} reversible=false")
            lines.append("  before:")
            lines += ["    " + l for l in s.before.dump().splitlines()]
            lines.append("  after:")
            lines += ["    " + l for l in s.after.dump().splitlines()]
        lines.append(f"normal form ({len(self.steps)} steps, "
                     f"{self.skipped_reversible} reversible redexes skipped):")
        if self.result is not None:
            lines += ["  " + l for l in self.result.dump().splitlines()]
        return "\n".join(lines)


def pick_redex(redexes, strategy: str = "default"):
    """Paper strategy: beta first, then naturality, then rightmost."""
    irr = [r for r in redexes if not r.reversible]
    if not irr:
        return None
    if strategy != "default":
        raise ValueError(f"unknown strategy {strategy!r}")
    beta = [r for r in irr if RULE_CLASS[r.rule] in (BETA, ETA)]
    if beta:
        return min(beta, key=lambda r: (r.start, r.rule))
    nat = [r for r in irr if RULE_CLASS[r.rule] == NATURALITY]
    if nat:
        return min(nat, key=lambda r: (r.start, r.rule))
    return max(irr, key=lambda r: (r.start, -r.rule))


def normalize(m: MorphTerm, strategy: str = "default",
              fuel: int = 100_000) -> tuple:
    """Reduce to normal form; returns (CanonicalForm, Trace)."""
    form = normal_state(*_start(m))
    trace = Trace(input=m)
    while fuel > 0:
        redexes = find_redexes(form)
        r = pick_redex(redexes, strategy)
        if r is None:
            trace.skipped_reversible = sum(1 for x in redexes if x.reversible)
            break
        before = r.form if r.form is not None else form
        after = step(form, r)
        trace.steps.append(TraceStep(r.rule, RULE_CLASS[r.rule], r.start,
                                     r.end, False, before, after))
        form = after
        fuel -= 1
    else:
        trace.fuel_exhausted = True
    trace.result = form
    return form, trace


def _start(m: MorphTerm):
    c = canonicalize(m)
    return c.domain, c.cells


def equal(a: MorphTerm, b: MorphTerm, budget: int = 10_000,
          fuel: int = 100_000) -> tuple:
    """Normalize both sides and compare modulo congruence.

    Returns (verdict, trace_a, trace_b) with verdict in
    'equal' | 'distinct' | 'unknown'.
    """
    try:
        ta, tb = infer_type(a), infer_type(b)
    except TypeError_ as e:
        raise
    if ta != tb:
        return "distinct", None, None
    fa, tra = normalize(a, fuel=fuel)
    fb, trb = normalize(b, fuel=fuel)
    verdict = congruent_forms(fa, fb, budget)
    if verdict == "no" and (find_bends(fa) or find_bends(fb)):
        # an unfired duality bend survived: the sides may still join
        verdict = "unknown"
    return {"yes": "equal", "no": "distinct", "unknown": "unknown"}[verdict], tra, trb
