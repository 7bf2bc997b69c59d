"""Reduction semantics over sessions: step enumeration with capability-based
identity, bounded exploration, success/barb observables, conflict analysis
and a weak reduction bisimulation checker on finite graphs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .syntax import (
    BoolVal,
    Branch,
    Choice,
    Cond,
    McmpError,
    Nil,
    Prefix,
    Process,
    Rec,
    Session,
    Success,
    Value,
    canon_process,
    canon_session,
    head_normal,
    render_process,
    render_value,
    substitute_value,
)


@dataclass(frozen=True)
class Step:
    """A reduction step identified by the capability ids it consumes.

    kind is 'comm', 'if-tt' or 'if-ff'.  For communications the branch
    indices select the summands (the same pair of capabilities can be reduced
    by several alternative steps picking different summands).
    """

    kind: str
    consumed: frozenset[int]
    sender: str | None = None
    receiver: str | None = None
    label: str | None = None
    payload: Value | None = None
    participant: str | None = None
    sender_branch: int = -1
    receiver_branch: int = -1

    def sort_key(self):
        payload = render_value(self.payload) if self.payload is not None else ""
        return (
            self.kind,
            self.sender or "",
            self.receiver or "",
            self.participant or "",
            self.label or "",
            payload,
            self.sender_branch,
            self.receiver_branch,
        )

    def describe(self) -> str:
        if self.kind == "comm":
            return f"{self.sender}->{self.receiver}:{self.label}({render_value(self.payload)})"
        return f"{self.participant}:{self.kind}"


@dataclass(frozen=True)
class Barb:
    kind: str  # 'out' or 'in'
    participant: str
    peer: str
    label: str
    payload: Value | None = None

    def describe(self) -> str:
        if self.kind == "out":
            return f"{self.participant}!{self.peer}:{self.label}({render_value(self.payload)})"
        return f"{self.participant}?{self.peer}:{self.label}"


# Resolution: the session with every top-level recursion unfolded once, so a
# mu never blocks matching.  Cached by value so equal sessions share the same
# fresh capability ids.
_resolve_cache: dict[Session, Session] = {}


def resolve(m: Session) -> Session:
    cached = _resolve_cache.get(m)
    if cached is not None:
        return cached
    parts = tuple((name, head_normal(proc)) for name, proc in m.parts)
    resolved = Session(parts)
    _resolve_cache[m] = resolved
    if len(_resolve_cache) > 200000:
        _resolve_cache.clear()
    return resolved


def enabled_steps(m: Session) -> list[Step]:
    """All enabled steps, deduplicated modulo structural congruence of the
    picked continuations (steps consuming the same capabilities with
    alpha-equal continuations are the same step)."""
    r = resolve(m)
    steps: list[Step] = []
    seen = set()
    for p, proc in r.parts:
        if isinstance(proc, Cond):
            guard = proc.guard
            if isinstance(guard, BoolVal):
                kind = "if-tt" if guard.value else "if-ff"
                step = Step(kind=kind, consumed=frozenset({proc.cap}), participant=p)
                key = (kind, step.consumed)
                if key not in seen:
                    seen.add(key)
                    steps.append(step)
    for p, pproc in r.parts:
        if not isinstance(pproc, Choice):
            continue
        for q, qproc in r.parts:
            if p == q or not isinstance(qproc, Choice):
                continue
            for i, bp in enumerate(pproc.branches):
                if bp.prefix.polarity != "!" or bp.prefix.target != q:
                    continue
                for j, bq in enumerate(qproc.branches):
                    if bq.prefix.polarity != "?" or bq.prefix.target != p:
                        continue
                    if bq.prefix.label != bp.prefix.label:
                        continue
                    step = Step(
                        kind="comm",
                        consumed=frozenset({pproc.cap, qproc.cap}),
                        sender=p,
                        receiver=q,
                        label=bp.prefix.label,
                        payload=bp.prefix.payload,
                        sender_branch=i,
                        receiver_branch=j,
                    )
                    key = (
                        "comm",
                        step.consumed,
                        p,
                        q,
                        bp.prefix.label,
                        canon_process(bp.cont),
                        canon_process(substitute_value(bq.cont, bp.prefix.payload, bq.prefix.var)),
                    )
                    if key not in seen:
                        seen.add(key)
                        steps.append(step)
    steps.sort(key=Step.sort_key)
    return steps


def apply_step(m: Session, step: Step) -> Session:
    r = resolve(m)
    if step.kind in ("if-tt", "if-ff"):
        proc = r.process_of(step.participant)
        if not (isinstance(proc, Cond) and proc.cap in step.consumed):
            raise McmpError("step is not enabled")
        want = step.kind == "if-tt"
        if not (isinstance(proc.guard, BoolVal) and proc.guard.value == want):
            raise McmpError("step is not enabled")
        return r.with_part(step.participant, proc.then if want else proc.els)
    pproc = r.process_of(step.sender)
    qproc = r.process_of(step.receiver)
    if not (isinstance(pproc, Choice) and isinstance(qproc, Choice)):
        raise McmpError("step is not enabled")
    if not {pproc.cap, qproc.cap} == set(step.consumed):
        raise McmpError("step is not enabled")
    bp = pproc.branches[step.sender_branch]
    bq = qproc.branches[step.receiver_branch]
    if (
        bp.prefix.polarity != "!"
        or bq.prefix.polarity != "?"
        or bp.prefix.target != step.receiver
        or bq.prefix.target != step.sender
        or bp.prefix.label != step.label
        or bq.prefix.label != step.label
    ):
        raise McmpError("step is not enabled")
    receiver_cont = substitute_value(bq.cont, bp.prefix.payload, bq.prefix.var)
    return r.with_part(step.sender, bp.cont).with_part(step.receiver, receiver_cont)


# ---------------------------------------------------------------------------
# observables


def has_success(m: Session) -> bool:
    """Some participant has a top-level unguarded success marker."""

    def unguarded_success(p: Process) -> bool:
        match p:
            case Success():
                return True
            case Rec(_, body):
                return unguarded_success(body)
            case _:
                return False

    return any(unguarded_success(proc) for _, proc in m.parts)


def barbs(m: Session) -> set[Barb]:
    out: set[Barb] = set()
    for p, proc in resolve(m).parts:
        if not isinstance(proc, Choice):
            continue
        for b in proc.branches:
            pre = b.prefix
            if pre.polarity == "!":
                out.add(Barb("out", p, pre.target, pre.label, pre.payload))
            else:
                out.add(Barb("in", p, pre.target, pre.label))
    return out


def in_conflict(s1: Step, s2: Step) -> bool:
    return bool(s1.consumed & s2.consumed)


def distributable(s1: Step, s2: Step) -> bool:
    return s1 != s2 and not in_conflict(s1, s2)


def distributable_components(m: Session) -> list[Session]:
    """Finest decomposition: one component per participant."""
    return [Session(((name, proc),)) for name, proc in m.parts]


# ---------------------------------------------------------------------------
# exploration


class TruncatedError(McmpError):
    pass


@dataclass
class StateGraph:
    states: list[Session]
    edges: list[tuple[int, Step, int]]
    roots: list[int]
    truncated: bool
    max_states: int
    max_depth: int
    _succ: list[list[tuple[Step, int]]] = field(default_factory=list)

    @property
    def root(self) -> int:
        return self.roots[0]

    def successors(self, i: int) -> list[tuple[Step, int]]:
        return self._succ[i]

    def reachable_from(self, i: int) -> set[int]:
        seen = {i}
        todo = [i]
        while todo:
            s = todo.pop()
            for _, d in self._succ[s]:
                if d not in seen:
                    seen.add(d)
                    todo.append(d)
        return seen

    def to_dot(self, state_label=None) -> str:
        lines = ["digraph states {"]
        for i, s in enumerate(self.states):
            label = state_label(s) if state_label else " | ".join(
                f"{n}<{render_process(p)}>" for n, p in s.parts if not isinstance(p, Nil)
            ) or "done"
            shape = "doublecircle" if i in self.roots else "ellipse"
            lines.append(f'  s{i} [label="{_dot_escape(label)}", shape={shape}];')
        for s, step, d in self.edges:
            lines.append(f'  s{s} -> s{d} [label="{_dot_escape(step.describe())}"];')
        lines.append("}")
        return "\n".join(lines)

    def to_json(self) -> str:
        data = {
            "roots": self.roots,
            "truncated": self.truncated,
            "states": [
                {"id": i, "session": {n: render_process(p) for n, p in s.parts}}
                for i, s in enumerate(self.states)
            ],
            "edges": [
                {"from": s, "step": step.describe(), "consumed": sorted(step.consumed), "to": d}
                for s, step, d in self.edges
            ],
        }
        return json.dumps(data, sort_keys=True, indent=2)


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


DEFAULT_MAX_STATES = 10000
DEFAULT_MAX_DEPTH = 256


def explore(m: Session, max_states: int = DEFAULT_MAX_STATES, max_depth: int = DEFAULT_MAX_DEPTH) -> StateGraph:
    return explore_many([m], max_states=max_states, max_depth=max_depth)


def explore_many(ms: list[Session], max_states: int = DEFAULT_MAX_STATES, max_depth: int = DEFAULT_MAX_DEPTH) -> StateGraph:
    """Deterministic BFS over canonical states from one or more roots."""
    if max_states <= 0 or max_depth <= 0:
        raise ValueError("exploration limits must be positive")
    index: dict[tuple, int] = {}
    states: list[Session] = []
    edges: list[tuple[int, Step, int]] = []
    succ: list[list[tuple[Step, int]]] = []
    truncated = False

    def intern(s: Session) -> int | None:
        nonlocal truncated
        key = canon_session(s)
        if key in index:
            return index[key]
        if len(states) >= max_states:
            truncated = True
            return None
        i = len(states)
        index[key] = i
        states.append(resolve(s))
        succ.append([])
        return i

    roots = []
    for m in ms:
        i = intern(m)
        if i is None:
            raise TruncatedError("state budget exhausted while interning roots")
        roots.append(i)
    frontier = list(dict.fromkeys(roots))
    expanded = set(frontier)
    depth = 0
    while frontier:
        if depth >= max_depth:
            truncated = True
            break
        nxt = []
        for i in frontier:
            for step in enabled_steps(states[i]):
                j = intern(apply_step(states[i], step))
                if j is None:
                    continue
                edges.append((i, step, j))
                succ[i].append((step, j))
                if j not in expanded:
                    expanded.add(j)
                    nxt.append(j)
        frontier = nxt
        depth += 1
    return StateGraph(states, edges, roots, truncated, max_states, max_depth, succ)


def is_convergent(graph: StateGraph) -> bool:
    """True iff the graph is acyclic (states are canonical, so any cycle is a
    real divergence)."""
    if graph.truncated:
        raise TruncatedError("cannot decide convergence on a truncated graph")
    color = [0] * len(graph.states)  # 0 unseen, 1 on stack, 2 done

    def dfs(i: int) -> bool:
        color[i] = 1
        for _, j in graph.successors(i):
            if color[j] == 1:
                return False
            if color[j] == 0 and not dfs(j):
                return False
        color[i] = 2
        return True

    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, len(graph.states) * 2 + 100))
    try:
        return all(dfs(i) for i in range(len(graph.states)) if color[i] == 0)
    finally:
        sys.setrecursionlimit(old)


def may_succeed(graph: StateGraph, i: int) -> bool:
    return any(has_success(graph.states[j]) for j in graph.reachable_from(i))


def must_succeed(graph: StateGraph, i: int) -> bool:
    """Every maximal path from i passes a success state."""
    if graph.truncated:
        raise TruncatedError("must-succeed needs a complete graph")
    memo: dict[int, bool] = {}
    on_stack: set[int] = set()

    def good(j: int) -> bool:
        if j in memo:
            return memo[j]
        if has_success(graph.states[j]):
            memo[j] = True
            return True
        if j in on_stack:
            raise McmpError("must-succeed requires a convergent subgraph")
        succs = graph.successors(j)
        if not succs:
            memo[j] = False
            return False
        on_stack.add(j)
        try:
            result = all(good(d) for _, d in succs)
        finally:
            on_stack.discard(j)
        memo[j] = result
        return result

    return good(i)


def maximal_executions(m: Session, max_states: int = DEFAULT_MAX_STATES, max_depth: int = DEFAULT_MAX_DEPTH):
    """Number of maximal paths in the canonical graph and the terminal
    states; requires a finite convergent graph."""
    graph = explore(m, max_states=max_states, max_depth=max_depth)
    if graph.truncated:
        raise TruncatedError("exploration truncated")
    if not is_convergent(graph):
        raise McmpError("maximal executions undefined on divergent sessions")
    counts: dict[int, int] = {}

    def count(i: int) -> int:
        if i in counts:
            return counts[i]
        succs = graph.successors(i)
        result = 1 if not succs else sum(count(j) for _, j in succs)
        counts[i] = result
        return result

    total = count(graph.root)
    terminals = sorted(
        j for j in graph.reachable_from(graph.root) if not graph.successors(j)
    )
    return total, [graph.states[j] for j in terminals]


# ---------------------------------------------------------------------------
# weak reduction bisimulation


def weak_bisimilar(graph: StateGraph, i: int, j: int, observables: frozenset[str] = frozenset({"success"})) -> bool:
    classes = weak_bisim_classes(graph, observables)
    return classes[i] == classes[j]


def weak_bisim_classes(graph: StateGraph, observables: frozenset[str] = frozenset({"success"})) -> list[int]:
    """Greatest success-(and optionally barb-)respecting weak reduction
    bisimulation, via partition refinement over reachability sets."""
    if graph.truncated:
        raise TruncatedError("bisimulation needs a complete graph")
    n = len(graph.states)
    reach = [sorted(graph.reachable_from(i)) for i in range(n)]

    def observable_key(i: int):
        key = []
        if "success" in observables:
            key.append(any(has_success(graph.states[k]) for k in reach[i]))
        if "barbs" in observables:
            weak = set()
            for k in reach[i]:
                weak |= barbs(graph.states[k])
            key.append(tuple(sorted(b.describe() for b in weak)))
        return tuple(key)

    keys = {i: observable_key(i) for i in range(n)}
    distinct = sorted(set(keys.values()))
    classes = [distinct.index(keys[i]) for i in range(n)]
    while True:
        signature = [tuple(sorted({classes[k] for k in reach[i]} | {classes[i]})) for i in range(n)]
        combined = [(classes[i], signature[i]) for i in range(n)]
        distinct2 = sorted(set(combined))
        refined = [distinct2.index(combined[i]) for i in range(n)]
        if refined == classes:
            return classes
        classes = refined
