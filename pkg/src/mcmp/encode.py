"""The seven in-family encodings between subcalculi, their type
translations, the per-participant total order they rely on, and a bounded
executable harness for the good-encoding criteria.

The reserved labels enc_o, enc_i and reset never occur in source terms (the
parser rejects them), which keeps every encoding injective on labels.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from . import ltypes, semantics, syntax
from .ltypes import End, LocalContext, LocalType, TBranch, TChoice, TRec, TVar
from .semantics import StateGraph, TruncatedError, explore, explore_many, weak_bisim_classes
from .syntax import (
    TT,
    Branch,
    Choice,
    Cond,
    McmpError,
    Nil,
    Prefix,
    Process,
    ProcVar,
    Rec,
    Session,
    Success,
    classify,
    free_value_vars,
    is_reserved_label,
    refresh_caps,
    session_participants,
)


@dataclass(frozen=True)
class EncodingId:
    name: str
    source: str
    target: str
    style: str  # 'o' | 'i' | 'oi' | 'per-peer' | 'lcmv'
    order_free: bool
    step_bound: int


ENCODINGS: dict[str, EncodingId] = {
    e.name: e
    for e in [
        EncodingId("scbs-bs", "SCBS", "BS", "o", True, 2),
        EncodingId("mcbs-scbs", "MCBS", "SCBS", "i", False, 3),
        EncodingId("mcbs-bs", "MCBS", "BS", "oi", False, 4),
        EncodingId("smp-mp", "SMP", "MP", "o", True, 2),
        EncodingId("dmp-smp", "DMP", "SMP", "i", False, 3),
        EncodingId("dmp-mp", "DMP", "MP", "oi", False, 4),
        EncodingId("mcmp-msmp", "MCMP", "MSMP", "per-peer", False, 3),
        EncodingId("lcmv-mcbs", "LCMV+", "MCBS", "lcmv", True, 2),
    ]
}


def encoding(name: str) -> EncodingId:
    if name not in ENCODINGS:
        raise McmpError(f"unknown encoding {name!r}; choose one of {sorted(ENCODINGS)}")
    return ENCODINGS[name]


# ---------------------------------------------------------------------------
# total order on participants


def _lu(rel: frozenset, f: set[str]) -> frozenset:
    a = {(p, q) for (p, q) in rel if p in f}
    names = {x for pair in a for x in pair}
    b = {(p, q) for (p, q) in rel if q in f and p not in names}
    return frozenset(a | b)


def _ru(rel: frozenset, f: set[str]) -> frozenset:
    a = {(p, q) for (p, q) in rel if q in f}
    names = {x for pair in a for x in pair}
    b = {(p, q) for (p, q) in rel if p in f and q not in names}
    return frozenset(a | b)


def _order_slices(names_in_order: tuple[str, ...], all_names: set[str]) -> dict[str, frozenset]:
    """Walk the left-nested parallel tree, seeding the root with the full
    irreflexive relation and filtering with lu on left branches, ru on right
    branches; each leaf keeps the pairs relevant for its own encoding."""
    full = frozenset((p, q) for p in sorted(all_names) for q in sorted(all_names) if p != q)
    slices: dict[str, frozenset] = {}
    if len(names_in_order) == 1:
        slices[names_in_order[0]] = frozenset()
        return slices

    def leaf_roles(node) -> set[str]:
        if isinstance(node, str):
            return {node}
        return leaf_roles(node[0]) | leaf_roles(node[1])

    tree = names_in_order[0]
    for name in names_in_order[1:]:
        tree = (tree, name)

    def assign(node, mark: str, rel: frozenset):
        filt = _lu if mark == "l" else _ru
        if isinstance(node, str):
            slices[node] = filt(rel, {node})
            return
        rel2 = filt(rel, leaf_roles(node))
        assign(node[0], "l", rel2)
        assign(node[1], "r", rel2)

    assign(tree[0], "l", full)
    assign(tree[1], "r", full)
    return slices


def build_order(m: Session) -> dict[str, frozenset]:
    """Per-participant slice of the synthesized strict order; the parallel
    tree is the left-nested parse order of the roles."""
    return _order_slices(m.participants(), session_participants(m))


def order_of_context(delta: LocalContext) -> dict[str, frozenset]:
    mentioned = set(delta.domain())
    for _, t in delta.entries:
        mentioned |= ltypes.pt(t)
    return _order_slices(delta.domain(), mentioned)


class _OrderView:
    def __init__(self, me: str, pairs: frozenset):
        self.me = me
        self.pairs = pairs

    def less_than(self, peer: str) -> bool:
        if (self.me, peer) in self.pairs:
            return True
        if (peer, self.me) in self.pairs:
            return False
        raise McmpError(f"participants {self.me} and {peer} are unordered")


# ---------------------------------------------------------------------------
# process translation


class _Encoder:
    def __init__(self, style: str):
        self.style = style
        self._dummy = itertools.count()

    def fresh_var(self, *avoid_in: Process) -> str:
        avoid = set()
        for p in avoid_in:
            avoid |= free_value_vars(p)
        while True:
            name = f"w{next(self._dummy)}"
            if name not in avoid:
                return name

    def proc(self, p: Process, view: _OrderView) -> Process:
        match p:
            case Nil() | Success() | ProcVar():
                return p
            case Rec(x, body):
                return Rec(x, self.proc(body, view))
            case Cond(g, t, e, _):
                return Cond(g, self.proc(t, view), self.proc(e, view))
            case Choice():
                return self.choice(p, view)
        raise TypeError(p)

    def choice(self, c: Choice, view: _OrderView) -> Process:
        if self.style == "per-peer":
            groups: dict[str, list[Branch]] = {}
            for b in c.branches:
                groups.setdefault(b.prefix.target, []).append(b)
            summands: list[Branch] = []
            for q in groups:
                translated = self.split_choice(groups[q], q, view, style="i")
                assert isinstance(translated, Choice)
                summands.extend(translated.branches)
            return Choice(tuple(summands))
        targets = {b.prefix.target for b in c.branches}
        if len(targets) != 1:
            raise McmpError("source choice addresses several participants; not in the source fragment")
        (q,) = targets
        return self.split_choice(list(c.branches), q, view, style=self.style)

    def split_choice(self, branches: list[Branch], q: str, view: _OrderView, style: str) -> Process:
        outs = [b for b in branches if b.prefix.polarity == "!"]
        ins = [b for b in branches if b.prefix.polarity == "?"]

        def t_out(bs) -> list[Branch]:
            return [
                Branch(Prefix(q, "!", b.prefix.label, payload=b.prefix.payload), self.proc(b.cont, view))
                for b in bs
            ]

        def t_in(bs) -> list[Branch]:
            return [
                Branch(Prefix(q, "?", b.prefix.label, var=b.prefix.var), self.proc(b.cont, view))
                for b in bs
            ]

        def recv(label: str, cont: Process) -> Branch:
            return Branch(Prefix(q, "?", label, var=self.fresh_var(cont)), cont)

        def send(label: str, cont: Process) -> Branch:
            return Branch(Prefix(q, "!", label, payload=TT), cont)

        def again(bs: list[Branch]) -> Choice:
            # duplicated continuation copies need fresh capability ids
            return Choice(tuple(Branch(b.prefix, refresh_caps(b.cont)) for b in bs))

        if style == "o":
            if outs and ins:
                raise McmpError("separate-choice source required, found a mixed choice")
            if outs:
                return Choice(
                    tuple(recv("enc_o", Choice((b,))) for b in t_out(outs))
                )
            return Choice((send("enc_o", Choice(tuple(t_in(ins)))),))

        if style == "i":
            less = view.less_than(q)
            if outs and ins:
                if less:
                    inner = Choice(tuple(t_in(ins)) + (recv("reset", again(t_out(outs))),))
                    return Choice(tuple(t_out(outs)) + (send("enc_i", inner),))
                return Choice(tuple(t_in(ins)) + (recv("enc_i", Choice(tuple(t_out(outs)))),))
            if outs:
                if less:
                    return Choice(tuple(t_out(outs)))
                return Choice((recv("enc_i", Choice(tuple(t_out(outs)))),))
            if less:
                return Choice((send("enc_i", Choice(tuple(t_in(ins)))),))
            return Choice(tuple(t_in(ins)) + (recv("enc_i", Choice((send("reset", again(t_in(ins))),))),))

        assert style == "oi"
        less = view.less_than(q)
        if outs and ins:
            if less:
                inner = Choice(tuple(t_in(ins)) + (recv("reset", again(t_out(outs))),))
                guarded_outs = tuple(recv("enc_o", Choice((b,))) for b in t_out(outs))
                return Choice(guarded_outs + (recv("enc_o", Choice((send("enc_i", inner),))),))
            inner = Choice(tuple(t_in(ins)) + (recv("enc_i", Choice(tuple(t_out(outs)))),))
            return Choice((send("enc_o", inner),))
        if outs:
            if less:
                return Choice(tuple(recv("enc_o", Choice((b,))) for b in t_out(outs)))
            return Choice((send("enc_o", Choice((recv("enc_i", Choice(tuple(t_out(outs)))),))),))
        if less:
            return Choice((recv("enc_o", Choice((send("enc_i", Choice(tuple(t_in(ins)))),))),))
        inner = Choice(tuple(t_in(ins)) + (recv("enc_i", Choice((send("reset", again(t_in(ins))),))),))
        return Choice((send("enc_o", inner),))


def _check_no_reserved(m: Session) -> None:
    def walk(p: Process):
        match p:
            case Choice(branches):
                for b in branches:
                    if is_reserved_label(b.prefix.label):
                        raise McmpError(f"label {b.prefix.label!r} is reserved for encodings")
                    walk(b.cont)
            case Cond(_, t, e):
                walk(t)
                walk(e)
            case Rec(_, body):
                walk(body)
            case _:
                pass

    for _, proc in m.parts:
        walk(proc)


def encode(m: Session, enc_id: str | EncodingId, order: dict[str, frozenset] | None = None) -> Session:
    """Translate a session by the named encoding; homomorphic on everything
    but choices, which follow the translation table of the encoding."""
    e = encoding(enc_id) if isinstance(enc_id, str) else enc_id
    if e.style == "lcmv":
        raise McmpError("lcmv-mcbs encodes CmvProcess programs; use mcmp.lcmv.encode_lcmv_to_mcbs")
    if e.source not in classify(m):
        raise McmpError(f"session is not in the source fragment {e.source}")
    _check_no_reserved(m)
    slices = order if order is not None else build_order(m)
    encoder = _Encoder(e.style)
    parts = tuple(
        (p, encoder.proc(proc, _OrderView(p, slices.get(p, frozenset())))) for p, proc in m.parts
    )
    return Session(parts)


def encode_process(proc: Process, participant: str, pairs: frozenset, enc_id: str | EncodingId) -> Process:
    e = encoding(enc_id) if isinstance(enc_id, str) else enc_id
    return _Encoder(e.style).proc(proc, _OrderView(participant, pairs))


# ---------------------------------------------------------------------------
# type translation


def _tchoice_target(branches: tuple[TBranch, ...]) -> str:
    targets = {b.target for b in branches}
    if len(targets) != 1:
        raise McmpError("type choice addresses several participants; no translation given")
    return next(iter(targets))


def _enc_type_o(t: LocalType) -> LocalType:
    match t:
        case End() | TVar():
            return t
        case TRec(x, body):
            return TRec(x, _enc_type_o(body))
        case TChoice(branches):
            q = _tchoice_target(branches)
            pols = {b.polarity for b in branches}
            if pols == {"!"}:
                inner = TChoice(tuple(TBranch(q, "!", b.label, b.payload, _enc_type_o(b.cont)) for b in branches))
                return TChoice((TBranch(q, "?", "enc_o", "bool", inner),))
            if pols == {"?"}:
                inner = TChoice(tuple(TBranch(q, "?", b.label, b.payload, _enc_type_o(b.cont)) for b in branches))
                return TChoice((TBranch(q, "!", "enc_o", "bool", inner),))
            raise McmpError("mixed choice type has no separate-choice translation")
    raise TypeError(t)


def _enc_type_i(t: LocalType, view: _OrderView) -> LocalType:
    match t:
        case End() | TVar():
            return t
        case TRec(x, body):
            return TRec(x, _enc_type_i(body, view))
        case TChoice(branches):
            q = _tchoice_target(branches)
            outs = tuple(TBranch(q, "!", b.label, b.payload, _enc_type_i(b.cont, view)) for b in branches if b.polarity == "!")
            ins = tuple(TBranch(q, "?", b.label, b.payload, _enc_type_i(b.cont, view)) for b in branches if b.polarity == "?")
            less = view.less_than(q)
            if outs and ins:
                if less:
                    inner = TChoice(ins + (TBranch(q, "?", "reset", "bool", TChoice(outs)),))
                    return TChoice(outs + (TBranch(q, "!", "enc_i", "bool", inner),))
                return TChoice(ins + (TBranch(q, "?", "enc_i", "bool", TChoice(outs)),))
            if outs:
                if less:
                    return TChoice(outs)
                return TChoice((TBranch(q, "?", "enc_i", "bool", TChoice(outs)),))
            if less:
                return TChoice((TBranch(q, "!", "enc_i", "bool", TChoice(ins)),))
            inner = TChoice((TBranch(q, "!", "reset", "bool", TChoice(ins)),))
            return TChoice(ins + (TBranch(q, "?", "enc_i", "bool", inner),))
    raise TypeError(t)


def _enc_type_per_peer(t: LocalType, view: _OrderView) -> LocalType:
    match t:
        case End() | TVar():
            return t
        case TRec(x, body):
            return TRec(x, _enc_type_per_peer(body, view))
        case TChoice(branches):
            groups: dict[str, list[TBranch]] = {}
            for b in branches:
                groups.setdefault(b.target, []).append(b)
            out: list[TBranch] = []
            for q, group in groups.items():
                out.extend(_shallow_i(tuple(group), q, view))
            return TChoice(tuple(out))
    raise TypeError(t)


def _shallow_i(group: tuple[TBranch, ...], q: str, view: _OrderView) -> tuple[TBranch, ...]:
    outs = tuple(TBranch(q, "!", b.label, b.payload, _enc_type_per_peer(b.cont, view)) for b in group if b.polarity == "!")
    ins = tuple(TBranch(q, "?", b.label, b.payload, _enc_type_per_peer(b.cont, view)) for b in group if b.polarity == "?")
    less = view.less_than(q)
    if outs and ins:
        if less:
            inner = TChoice(ins + (TBranch(q, "?", "reset", "bool", TChoice(outs)),))
            return outs + (TBranch(q, "!", "enc_i", "bool", inner),)
        return ins + (TBranch(q, "?", "enc_i", "bool", TChoice(outs)),)
    if outs:
        if less:
            return outs
        return (TBranch(q, "?", "enc_i", "bool", TChoice(outs)),)
    if less:
        return (TBranch(q, "!", "enc_i", "bool", TChoice(ins)),)
    inner = TChoice((TBranch(q, "!", "reset", "bool", TChoice(ins)),))
    return ins + (TBranch(q, "?", "enc_i", "bool", inner),)


def encode_types(delta: LocalContext, enc_id: str | EncodingId, order: dict[str, frozenset] | None = None) -> LocalContext:
    e = encoding(enc_id) if isinstance(enc_id, str) else enc_id
    if e.style == "lcmv":
        raise McmpError("no type translation is defined for lcmv-mcbs")
    slices = order if order is not None else order_of_context(delta)
    entries = []
    for p, t in delta.entries:
        view = _OrderView(p, slices.get(p, frozenset()))
        if e.style == "o":
            entries.append((p, _enc_type_o(t)))
        elif e.style == "i":
            entries.append((p, _enc_type_i(t, view)))
        elif e.style == "per-peer":
            entries.append((p, _enc_type_per_peer(t, view)))
        else:
            assert e.style == "oi"
            entries.append((p, _enc_type_o(_enc_type_i(t, view))))
    return LocalContext(tuple(entries))


# ---------------------------------------------------------------------------
# good-encoding verification harness


@dataclass
class CorrespondenceReport:
    encoding: str
    completeness: bool
    soundness: bool
    success_sensitive: bool
    divergence_reflected_to_bound: bool
    distributability_preserved: bool
    max_emulation_factor: int
    step_bound: int
    failures: list[dict] = field(default_factory=list)

    def passed(self) -> bool:
        return (
            self.completeness
            and self.soundness
            and self.success_sensitive
            and self.divergence_reflected_to_bound
            and self.distributability_preserved
            and self.max_emulation_factor <= self.step_bound
        )

    def to_json(self) -> str:
        data = {
            "encoding": self.encoding,
            "completeness": self.completeness,
            "soundness": self.soundness,
            "success_sensitive": self.success_sensitive,
            "divergence_reflected_to_bound": self.divergence_reflected_to_bound,
            "distributability_preserved": self.distributability_preserved,
            "max_emulation_factor": self.max_emulation_factor,
            "step_bound": self.step_bound,
            "passed": self.passed(),
            "failures": self.failures,
        }
        return json.dumps(data, sort_keys=True, indent=2)


def _has_cycle_from(graph: StateGraph, root: int) -> bool:
    color: dict[int, int] = {}  # 1 on stack, 2 done
    stack: list[tuple[int, int]] = [(root, 0)]
    color[root] = 1
    while stack:
        node, idx = stack.pop()
        succs = [d for _, d in graph.successors(node)]
        if idx < len(succs):
            stack.append((node, idx + 1))
            d = succs[idx]
            if color.get(d) == 1:
                return True
            if color.get(d, 0) == 0:
                color[d] = 1
                stack.append((d, 0))
        else:
            color[node] = 2
    return False


def verify_correspondence(
    m: Session,
    enc_id: str | EncodingId,
    max_states: int = semantics.DEFAULT_MAX_STATES,
    max_depth: int = semantics.DEFAULT_MAX_DEPTH,
) -> CorrespondenceReport:
    """Bounded executable check of operational correspondence, success
    sensitiveness, divergence reflection and distributability preservation
    for one source session."""
    e = encoding(enc_id) if isinstance(enc_id, str) else enc_id
    source = explore(m, max_states=max_states, max_depth=max_depth)
    if source.truncated:
        raise TruncatedError("source exploration truncated")
    slices = build_order(m)
    encoded = [encode(s, e, order=slices) for s in source.states]
    joint = explore_many(encoded, max_states=max_states, max_depth=max_depth)
    if joint.truncated:
        raise TruncatedError("target exploration truncated")
    classes = weak_bisim_classes(joint, frozenset({"success"}))
    root_class = {i: classes[joint.roots[i]] for i in range(len(encoded))}
    canon = [syntax.canon_session(s) for s in joint.states]

    failures: list[dict] = []

    # completeness: every source edge has a target emulation path; the
    # emulation length is the distance to the literal translation of the
    # derivative when reachable, else to a bisimilar state
    max_factor = 0
    completeness = True
    for i in range(len(source.states)):
        for step, j in source.successors(i):
            dist = _bfs_distance(joint, joint.roots[i], lambda n: canon[n] == canon[joint.roots[j]])
            if dist is None:
                want = root_class[j]
                dist = _bfs_distance(joint, joint.roots[i], lambda n: classes[n] == want)
            if dist is None:
                completeness = False
                failures.append({"criterion": "completeness", "source_step": step.describe(), "from_state": i})
            else:
                max_factor = max(max_factor, dist)

    # soundness: every target derivative can complete to the encoding of a
    # source derivative
    done_classes = set(root_class.values())
    soundness = True
    for n in joint.reachable_from(joint.roots[source.root]):
        if not any(classes[k] in done_classes for k in joint.reachable_from(n)):
            soundness = False
            failures.append({"criterion": "soundness", "stranded_target_state": n})
            break

    # success sensitiveness on the roots
    src_succ = semantics.may_succeed(source, source.root)
    tgt_succ = semantics.may_succeed(joint, joint.roots[source.root])
    success_sensitive = src_succ == tgt_succ
    if not success_sensitive:
        failures.append({"criterion": "success", "source": src_succ, "target": tgt_succ})

    # divergence reflection: a target cycle implies a source cycle
    tgt_diverges = _has_cycle_from(joint, joint.roots[source.root])
    src_diverges = _has_cycle_from(source, source.root)
    divergence_ok = (not tgt_diverges) or src_diverges
    if not divergence_ok:
        failures.append({"criterion": "divergence"})

    # distributability: each participant component of the target is the
    # translation of the matching source component (same order slices)
    distributability = True
    target_root = encoded[source.root]
    for p, proc in m.parts:
        translated = encode_process(proc, p, slices.get(p, frozenset()), e)
        actual = target_root.process_of(p)
        if not syntax.alpha_equal(translated, actual):
            distributability = False
            failures.append({"criterion": "distributability", "participant": p})

    return CorrespondenceReport(
        encoding=e.name,
        completeness=completeness,
        soundness=soundness,
        success_sensitive=success_sensitive,
        divergence_reflected_to_bound=divergence_ok,
        distributability_preserved=distributability,
        max_emulation_factor=max_factor,
        step_bound=e.step_bound,
        failures=failures,
    )


def _bfs_distance(graph: StateGraph, root: int, accept) -> int | None:
    from collections import deque

    dist = {root: 0}
    queue = deque([root])
    while queue:
        n = queue.popleft()
        if accept(n):
            return dist[n]
        for _, d in graph.successors(n):
            if d not in dist:
                dist[d] = dist[n] + 1
                queue.append(d)
    return None


def verify_name_invariance(m: Session, enc_id: str | EncodingId, sigma: dict[str, str],
                           max_states: int = semantics.DEFAULT_MAX_STATES,
                           max_depth: int = semantics.DEFAULT_MAX_DEPTH) -> bool:
    """encode(M sigma) against encode(M) sigma: syntactic (alpha) equality for
    the order-free encodings, weak bisimilarity otherwise."""
    e = encoding(enc_id) if isinstance(enc_id, str) else enc_id
    renamed = syntax.apply_rename(m, sigma)
    enc_renamed = encode(renamed, e)
    renamed_enc = syntax.apply_rename(encode(m, e), sigma)
    if e.order_free:
        return syntax.canon_session(enc_renamed) == syntax.canon_session(renamed_enc)
    joint = explore_many([enc_renamed, renamed_enc], max_states=max_states, max_depth=max_depth)
    if joint.truncated:
        raise TruncatedError("name-invariance exploration truncated")
    return semantics.weak_bisimilar(joint, joint.roots[0], joint.roots[1])
