"""Local session types: well-formedness, subtyping, the type-level LTS and
the decidable safety / deadlock-freedom checks on local contexts.

Subtyping follows the coinductive rules: output choices may grow on the
right, input choices may shrink, mixed choices are split into maximal
per-(participant, polarity) blocks that are related block-by-block, and
recursive types are handled by unfolding with memoised goals (pending pairs
assumed true, i.e. a greatest fixpoint).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class End:
    pass


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TRec:
    var: str
    body: "LocalType"


@dataclass(frozen=True)
class TBranch:
    target: str
    polarity: str  # '!' or '?'
    label: str
    payload: str  # 'nat' or 'bool'
    cont: "LocalType"


@dataclass(frozen=True)
class TChoice:
    branches: tuple[TBranch, ...]

    def __post_init__(self):
        assert self.branches


LocalType = End | TVar | TRec | TChoice


@dataclass(frozen=True)
class LocalContext:
    entries: tuple[tuple[str, LocalType], ...]

    def __post_init__(self):
        names = [p for p, _ in self.entries]
        assert len(names) == len(set(names))

    def type_of(self, name: str) -> LocalType:
        for p, t in self.entries:
            if p == name:
                return t
        raise KeyError(name)

    def domain(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.entries)

    def with_entry(self, name: str, t: LocalType) -> "LocalContext":
        return LocalContext(tuple((p, t if p == name else u) for p, u in self.entries))


@dataclass(frozen=True)
class TypeAction:
    kind: str  # 'out', 'in' or 'ctx'
    subject: str  # acting participant ('ctx': the sender)
    peer: str
    label: str
    payload: str


# ---------------------------------------------------------------------------
# auxiliary functions


def pt(t: LocalType) -> set[str]:
    match t:
        case End() | TVar():
            return set()
        case TRec(_, body):
            return pt(body)
        case TChoice(branches):
            out = {b.target for b in branches}
            for b in branches:
                out |= pt(b.cont)
            return out
    raise TypeError(t)


def prefix_set(t: LocalType) -> frozenset[tuple[str, str]]:
    """Prefixes of the top choice layer only."""
    match t:
        case End() | TVar():
            return frozenset()
        case TRec(_, body):
            return prefix_set(body)
        case TChoice(branches):
            return frozenset((b.target, b.polarity) for b in branches)
    raise TypeError(t)


def ftv(t: LocalType) -> set[str]:
    match t:
        case End():
            return set()
        case TVar(name):
            return {name}
        case TRec(x, body):
            return ftv(body) - {x}
        case TChoice(branches):
            out: set[str] = set()
            for b in branches:
                out |= ftv(b.cont)
            return out
    raise TypeError(t)


def _guards(var: str, t: LocalType) -> bool:
    match t:
        case End() | TChoice():
            return True
        case TVar(name):
            return name != var
        case TRec(x, body):
            return x != var and _guards(var, body)
    raise TypeError(t)


def guarded(t: LocalType) -> bool:
    match t:
        case End() | TVar():
            return True
        case TRec(x, body):
            return _guards(x, body) and guarded(body)
        case TChoice(branches):
            return all(guarded(b.cont) for b in branches)
    raise TypeError(t)


def closed(t: LocalType) -> bool:
    return not ftv(t)


def well_formed(t: LocalType) -> bool:
    """Every choice has pairwise distinct labels per (participant, polarity)."""
    match t:
        case End() | TVar():
            return True
        case TRec(_, body):
            return well_formed(body)
        case TChoice(branches):
            seen = set()
            for b in branches:
                key = (b.target, b.polarity, b.label)
                if key in seen:
                    return False
                seen.add(key)
            return all(well_formed(b.cont) for b in branches)
    raise TypeError(t)


def tsubst(t: LocalType, repl: LocalType, var: str) -> LocalType:
    match t:
        case TVar(name) if name == var:
            return repl
        case TRec(x, body):
            if x == var:
                return t
            return TRec(x, tsubst(body, repl, var))
        case TChoice(branches):
            return TChoice(
                tuple(TBranch(b.target, b.polarity, b.label, b.payload, tsubst(b.cont, repl, var)) for b in branches)
            )
        case _:
            return t


def unfold(t: LocalType) -> LocalType:
    if isinstance(t, TRec):
        return tsubst(t.body, t, t.var)
    return t


def head(t: LocalType) -> LocalType:
    """Unfold outermost recursions down to end, a variable or a choice."""
    steps = 0
    while isinstance(t, TRec):
        t = unfold(t)
        steps += 1
        if steps > 64:
            raise ValueError("unguarded recursive type")
    return t


# ---------------------------------------------------------------------------
# subtyping


def _blocks(branches: tuple[TBranch, ...]) -> dict[tuple[str, str], dict[str, TBranch]]:
    out: dict[tuple[str, str], dict[str, TBranch]] = {}
    for b in branches:
        out.setdefault((b.target, b.polarity), {})[b.label] = b
    return out


def subtype(t1: LocalType, t2: LocalType) -> bool:
    if not (well_formed(t1) and well_formed(t2)):
        raise ValueError("subtype requires well-formed types")
    return _subtype(t1, t2, set())


def _subtype(a: LocalType, b: LocalType, assumed: set) -> bool:
    key = (a, b)
    if key in assumed:
        return True
    assumed.add(key)
    if isinstance(a, TRec):
        return _subtype(unfold(a), b, assumed)
    if isinstance(b, TRec):
        return _subtype(a, unfold(b), assumed)
    if isinstance(a, End) and isinstance(b, End):
        return True
    if isinstance(a, TVar) or isinstance(b, TVar):
        return a == b
    if isinstance(a, TChoice) and isinstance(b, TChoice):
        left = _blocks(a.branches)
        right = _blocks(b.branches)
        if set(left) != set(right):
            return False
        for (target, pol), la in left.items():
            lb = right[(target, pol)]
            if pol == "!":
                small, big = la, lb  # outputs may grow on the right
            else:
                small, big = lb, la  # inputs may shrink on the right
            if not set(small) <= set(big):
                return False
            for label in small:
                if la[label].payload != lb[label].payload:
                    return False
                if not _subtype(la[label].cont, lb[label].cont, assumed):
                    return False
        return True
    return False


def types_equal(t1: LocalType, t2: LocalType) -> bool:
    """Equality of the infinite unfoldings (both-way block-exact relation)."""
    return _tequal(t1, t2, set())


def _tequal(a: LocalType, b: LocalType, assumed: set) -> bool:
    key = (a, b)
    if key in assumed:
        return True
    assumed.add(key)
    if isinstance(a, TRec):
        return _tequal(unfold(a), b, assumed)
    if isinstance(b, TRec):
        return _tequal(a, unfold(b), assumed)
    if isinstance(a, End) and isinstance(b, End):
        return True
    if isinstance(a, TVar) or isinstance(b, TVar):
        return a == b
    if isinstance(a, TChoice) and isinstance(b, TChoice):
        ka = {(x.target, x.polarity, x.label, x.payload) for x in a.branches}
        kb = {(x.target, x.polarity, x.label, x.payload) for x in b.branches}
        if ka != kb:
            return False
        bb = {(x.target, x.polarity, x.label): x for x in b.branches}
        return all(_tequal(x.cont, bb[(x.target, x.polarity, x.label)].cont, assumed) for x in a.branches)
    return False


def context_subtype(d1: LocalContext, d2: LocalContext) -> bool:
    dom1, dom2 = set(d1.domain()), set(d2.domain())
    for p in dom1 & dom2:
        if not subtype(d1.type_of(p), d2.type_of(p)):
            return False
    for p in dom1 - dom2:
        if not isinstance(head(d1.type_of(p)), End):
            return False
    for q in dom2 - dom1:
        if not isinstance(head(d2.type_of(q)), End):
            return False
    return True


# ---------------------------------------------------------------------------
# LTS of types and contexts


def type_transitions(participant: str, t: LocalType) -> list[tuple[TypeAction, LocalType]]:
    h = head(t)
    if not isinstance(h, TChoice):
        return []
    out = []
    for b in h.branches:
        kind = "out" if b.polarity == "!" else "in"
        out.append((TypeAction(kind, participant, b.target, b.label, b.payload), b.cont))
    return out


def context_steps(delta: LocalContext) -> list[tuple[TypeAction, LocalContext]]:
    """All synchronisations: p may send (p!q:l(U)) and q may receive the same
    label with the same payload type from p."""
    trans = {p: type_transitions(p, t) for p, t in delta.entries}
    out = []
    for p, _ in delta.entries:
        for act_p, cont_p in trans[p]:
            if act_p.kind != "out":
                continue
            q = act_p.peer
            if q == p or q not in trans:
                continue
            for act_q, cont_q in trans[q]:
                if act_q.kind != "in" or act_q.peer != p:
                    continue
                if act_q.label != act_p.label or act_q.payload != act_p.payload:
                    continue
                step = TypeAction("ctx", p, q, act_p.label, act_p.payload)
                succ = delta.with_entry(p, cont_p).with_entry(q, cont_q)
                out.append((step, succ))
    return out


def _canon_type(t: LocalType, env: tuple = ()) -> tuple:
    match t:
        case End():
            return ("end",)
        case TVar(name):
            for n, i in reversed(env):
                if n == name:
                    return ("b", i)
            return ("f", name)
        case TRec(x, body):
            return ("rec", _canon_type(body, env + ((x, len(env)),)))
        case TChoice(branches):
            return (
                "sum",
                tuple(
                    sorted((b.target, b.polarity, b.label, b.payload, _canon_type(b.cont, env)) for b in branches)
                ),
            )
    raise TypeError(t)


def canon_context(delta: LocalContext) -> tuple:
    return tuple(sorted((p, _canon_type(t)) for p, t in delta.entries))


@dataclass
class ContextGraph:
    contexts: list[LocalContext]
    edges: list[tuple[int, TypeAction, int]]
    root: int

    def successors(self, i: int) -> list[tuple[TypeAction, int]]:
        return [(a, d) for s, a, d in self.edges if s == i]

    def to_json(self) -> str:
        import json

        data = {
            "root": self.root,
            "contexts": [
                {"id": i, "entries": {p: render_type(t) for p, t in d.entries}}
                for i, d in enumerate(self.contexts)
            ],
            "edges": [{"from": s, "action": _act_json(a), "to": d} for s, a, d in self.edges],
        }
        return json.dumps(data, sort_keys=True, indent=2)


def explore_contexts(delta: LocalContext) -> ContextGraph:
    for _, t in delta.entries:
        if not (closed(t) and guarded(t) and well_formed(t)):
            raise ValueError("context entries must be closed, guarded and well-formed")
    index: dict[tuple, int] = {}
    contexts: list[LocalContext] = []
    edges: list[tuple[int, TypeAction, int]] = []

    def visit(d: LocalContext) -> int:
        key = canon_context(d)
        if key in index:
            return index[key]
        i = len(contexts)
        index[key] = i
        contexts.append(d)
        return i

    root = visit(delta)
    todo = [root]
    seen_edges = set()
    while todo:
        i = todo.pop()
        before = len(contexts)
        for act, succ in context_steps(contexts[i]):
            j = visit(succ)
            e = (i, act, j)
            if e not in seen_edges:
                seen_edges.add(e)
                edges.append(e)
            if j >= before:
                todo.append(j)
                before = len(contexts)
    return ContextGraph(contexts, edges, root)


def is_safe(delta: LocalContext):
    """Whenever some p has an output toward a q that is listening to p at all,
    the exact (label, payload) of the output must be able to fire; closed
    under reachability.  Returns (ok, counterexample path or None)."""
    graph = explore_contexts(delta)
    paths: dict[int, list[TypeAction]] = {graph.root: []}
    order = [graph.root]
    for s, act, d in graph.edges:
        if d not in paths:
            paths[d] = paths[s] + [act]
            order.append(d)
    for i in sorted(paths):
        d = graph.contexts[i]
        trans = {p: type_transitions(p, t) for p, t in d.entries}
        enabled = {(a.subject, a.peer, a.label, a.payload) for a, _ in context_steps(d)}
        for p, _ in d.entries:
            for act, _ in trans[p]:
                if act.kind != "out":
                    continue
                q = act.peer
                if q == p or q not in trans:
                    continue
                q_listens = any(a.kind == "in" and a.peer == p for a, _ in trans[q])
                if q_listens and (p, q, act.label, act.payload) not in enabled:
                    return False, {
                        "path": [_act_json(a) for a in paths[i]],
                        "offending": _act_json(act),
                    }
    return True, None


def is_deadlock_free(delta: LocalContext):
    """Every reachable stuck context is all-end.  Returns (ok, evidence)."""
    graph = explore_contexts(delta)
    paths: dict[int, list[TypeAction]] = {graph.root: []}
    for s, act, d in graph.edges:
        if d not in paths:
            paths[d] = paths[s] + [act]
    for i in sorted(paths):
        d = graph.contexts[i]
        if context_steps(d):
            continue
        bad = [p for p, t in d.entries if not isinstance(head(t), End)]
        if bad:
            return False, {"path": [_act_json(a) for a in paths[i]], "stuck": bad}
    return True, None


def _act_json(a: TypeAction) -> dict:
    return {"kind": a.kind, "subject": a.subject, "peer": a.peer, "label": a.label, "payload": a.payload}


# ---------------------------------------------------------------------------
# rendering


def render_type(t: LocalType) -> str:
    match t:
        case End():
            return "end"
        case TVar(name):
            return name
        case TRec(x, body):
            return f"rec {x}.{_render_tcont(body)}"
        case TChoice(branches):
            parts = []
            for b in branches:
                head_txt = f"{b.target}{b.polarity}{b.label}({b.payload})"
                parts.append(f"{head_txt}.{_render_tcont(b.cont)}")
            return " + ".join(parts)
    raise TypeError(t)


def _render_tcont(t: LocalType) -> str:
    if isinstance(t, TChoice) and len(t.branches) > 1:
        return f"({render_type(t)})"
    if isinstance(t, TRec):
        return f"({render_type(t)})"
    return render_type(t)
