"""Fixture corpus: the protocols that exercise the workbench end to end.

Sources are kept as parseable text so they double as CLI inputs; names are
stable and referenced from the test suite.
"""

from __future__ import annotations

from . import syntax


def _election_role(k: int) -> str:
    ring = "abcde"

    def rot(name: str) -> str:
        return ring[(ring.index(name) + k) % 5]

    a, b, c, d, e = (rot(x) for x in "abcde")
    return (
        f"role {a} = {e}!leader(tt).0"
        f" + {b}?leader(x).({c}!leader(tt).0 + {d}?leader(x).station!elect(tt).0)"
        f" + station?del(x).0"
    )


def _election_type(k: int) -> str:
    ring = "abcde"

    def rot(name: str) -> str:
        return ring[(ring.index(name) + k) % 5]

    a, b, c, d, e = (rot(x) for x in "abcde")
    return (
        f"  {a}: {e}!leader(bool).end"
        f" + {b}?leader(bool).({c}!leader(bool).end + {d}?leader(bool).station!elect(bool).end)"
        f" + station?del(bool).end"
    )


_STATION_PROC = "role station = " + " + ".join(
    f"{i}?elect(x).({' + '.join(f'{j}!del(tt).0' for j in 'abcde')})" for i in "abcde"
)

_STATION_TYPE = "  station: " + " + ".join(
    f"{i}?elect(bool).({' + '.join(f'{j}!del(bool).end' for j in 'abcde')})" for i in "abcde"
)

ELECTION5 = "\n".join(_election_role(k) for k in range(5)) + "\ntypes {\n" + "\n".join(
    _election_type(k) for k in range(5)
) + "\n}\n"

ELECTION6 = (
    "\n".join(_election_role(k) for k in range(5))
    + "\n"
    + _STATION_PROC
    + "\ntypes {\n"
    + "\n".join(_election_type(k) for k in range(5))
    + "\n"
    + _STATION_TYPE
    + "\n}\n"
)

ELECTION_SIGMA = {"a": "b", "b": "c", "c": "d", "d": "e", "e": "a"}


M_SCMP = """\
role a = b!l(tt).d!l(tt).0 + d!lp(tt).0
role b = a?l(x).0 + c?l(x).0
role c = b!l(tt).0 + d!l(tt).0
role d = c?l(x).a?l(x).ok + a?lp(x).0
types {
  a: b!l(bool).d!l(bool).end + d!lp(bool).end
  b: a?l(bool).end + c?l(bool).end
  c: b!l(bool).end + d!l(bool).end
  d: c?l(bool).a?l(bool).end + a?lp(bool).end
}
"""

M_MP = """\
role a = b!l(tt).ok + b!l(tt).0
role b = a?l(x).0
role c = d!l(tt).ok + d!l(tt).0
role d = c?l(x).0
role e = f!l(tt).ok + f!l(tt).0
role f = e?l(x).0
types {
  a: b!l(bool).end
  b: a?l(bool).end
  c: d!l(bool).end
  d: c?l(bool).end
  e: f!l(bool).end
  f: e?l(bool).end
}
"""

M_MCBS = """\
role p = q!l1(tt).0 + q?l2(x).ok
role q = p?l1(x).0 + p?l3(x).ok
types {
  p: q!l1(bool).end + q?l2(bool).end
  q: p?l1(bool).end + p?l3(bool).end
}
"""

STAR_MSMP = """\
role a = e!l(tt).0 + b?l(x).ok + gc?del(x).0
role b = a!l(tt).0 + c?l(x).0 + gc?del(x).0
role c = b!l(tt).0 + d?l(x).0 + gc?del(x).0
role d = c!l(tt).0 + e?l(x).0 + gc?del(x).0
role e = d!l(tt).0 + a?l(x).0 + gc?del(x).0
role gc = a!del(tt).0 + b!del(tt).0 + c!del(tt).0 + d!del(tt).0 + e!del(tt).0
types {
  a: e!l(bool).end + b?l(bool).end + gc?del(bool).end
  b: a!l(bool).end + c?l(bool).end + gc?del(bool).end
  c: b!l(bool).end + d?l(bool).end + gc?del(bool).end
  d: c!l(bool).end + e?l(bool).end + gc?del(bool).end
  e: d!l(bool).end + a?l(bool).end + gc?del(bool).end
  gc: a!del(bool).end + b!del(bool).end + c!del(bool).end + d!del(bool).end + e!del(bool).end
}
"""

MIXED2 = """\
role p = q?l1(x).ok + q!l2(tt).0
role q = p!l1(tt).0 + p?l2(y).ok
types {
  p: q?l1(bool).end + q!l2(bool).end
  q: p!l1(bool).end + p?l2(bool).end
}
"""

PING = """\
role p = q!l(tt).ok
role q = p?l(x).0
types {
  p: q!l(bool).end
  q: p?l(bool).end
}
"""

OUT2 = """\
role p = q!l1(tt).0 + q!l2(tt).ok
role q = p?l1(x).ok + p?l2(x).0
types {
  p: q!l1(bool).end + q!l2(bool).end
  q: p?l1(bool).end + p?l2(bool).end
}
"""

PINGPONG_REC = """\
role p = rec X.(q!l(tt).q?r(x).X)
role q = rec Y.(p?l(y).p!r(tt).Y)
types {
  p: rec t.(q!l(bool).q?r(bool).t)
  q: rec t.(p?l(bool).p!r(bool).t)
}
"""

COND_DEMO = """\
role p = if tt then q!l(tt).0 else q!r(tt).0
role q = p?l(x).0 + p?r(x).0
types {
  p: q!l(bool).end + q!r(bool).end
  q: p?l(bool).end + p?r(bool).end
}
"""

EX_TYPED1 = """\
role p = q!l1(tt).q!lp(5).0 + q!l1(tt).q!lp(105).0 + q?l2(x).0 + r?l2(y).0
role q = p?l1(y).p?lp(z).0 + p!l2(tt).0
role r = p!l2(tt).0
types {
  p: q!l1(bool).q!lp(nat).end + q?l2(bool).end + r?l2(bool).end
  q: p?l1(bool).p?lp(nat).end + p!l2(bool).end
  r: p!l2(bool).end
}
"""

EX_TYPED2 = """\
role p = a?l(x).a!l1(5).0 + a?l(x).a!l2(tt).0
role a = p!l(tt).(p?l1(w).0 + p?l2(w).0)
types {
  p: a?l(bool).(a!l1(nat).end + a!l2(bool).end)
  a: p!l(bool).(p?l1(nat).end + p?l2(bool).end)
}
"""

DMP3 = """\
role a = b!l1(tt).0 + b?l2(x).ok
role b = a?l1(x).c!m(tt).0 + a!l2(tt).c!m(tt).0
role c = b?m(x).0
types {
  a: b!l1(bool).end + b?l2(bool).end
  b: a?l1(bool).c!m(bool).end + a!l2(bool).c!m(bool).end
  c: b?m(bool).end
}
"""

# the family of single-role classification fixtures (peers a, b, c)
FAMILY = {
    "p1": "role p = a!l(tt).b?l(x).0 + b!l(tt).c!l(tt).0 + a?l(x).a?l(x).0",
    "p2": "role p = a?l(x).b!l(tt).0 + b!l(tt).c?l(x).0 + c?l(x).a!l(tt).0",
    "p3": "role p = a?l(x).b!l(tt).0 + b?l(x).c?l(x).0 + c?l(x).a?l(x).0",
    "p4": "role p = a!l1(tt).b!l(tt).0 + a!l2(tt).c?l(x).0 + a?l(x).a?l(x).0",
    "p5": "role p = a!l1(tt).b!l(tt).0 + a!l2(tt).c?l(x).0 + a!l3(tt).a?l(x).0",
    "p6": "role p = a?l1(x).b!l(tt).0 + a?l2(x).c?l(x).0 + a?l3(x).a!l(tt).0",
    "p7": "role p = a?l1(x).b!l1(tt).0 + a?l2(x).b?l2(x).0",
    "p8": "role p = a?l1(x).a!l1(tt).0 + a!l2(tt).a?l3(x).0",
    "p9": "role p = a!l1(tt).a!l1(tt).0 + a!l2(tt).a?l2(x).0",
    "p10": "role p = rec X.(a?l1(x).a!l1(tt).0 + a?l1(x).a!l2(tt).0 + a?l2(x).a?l2(x).X)",
    "p11": "role p = rec X.(a?l1(x).a?l1(x).0 + a?l1(x).a?l2(x).0 + a?l2(x).a?l2(x).X)",
}

# per-row memberships asserted by the table: (in, definitely-not-in)
FAMILY_TABLE = {
    "p1": ({"MCMP"}, {"MSMP", "SCMP", "DMP", "SMP", "MP", "MCBS", "SCBS", "BS"}),
    "p2": ({"MCMP", "MSMP"}, {"SCMP", "DMP", "SMP", "MP", "MCBS", "SCBS", "BS"}),
    "p3": ({"MCMP", "MSMP", "SCMP"}, {"DMP", "SMP", "MP", "MCBS", "SCBS", "BS"}),
    "p4": ({"MCMP", "MSMP", "DMP"}, {"SCMP", "SMP", "MP", "MCBS", "SCBS", "BS"}),
    "p5": ({"MCMP", "MSMP", "SCMP", "DMP", "SMP"}, {"MP", "MCBS", "SCBS", "BS"}),
    "p6": ({"MCMP", "MSMP", "SCMP", "DMP", "SMP", "MP"}, {"MCBS", "SCBS", "BS"}),
    "p7": ({"MCMP", "MSMP", "SCMP", "DMP", "SMP", "MP"}, {"MCBS", "SCBS", "BS"}),
    "p8": ({"MCMP", "MSMP", "DMP", "MCBS"}, {"SCMP", "SMP", "MP", "SCBS", "BS"}),
    "p9": ({"MCMP", "MSMP", "SCMP", "DMP", "SMP", "MCBS", "SCBS"}, {"MP", "BS"}),
    "p10": (set(syntax.SUBCALCULI), set()),
    "p11": (set(syntax.SUBCALCULI), set()),
}

# hand-declared local types for the typability table
FAMILY_TYPES = {
    "p1": "a!l(bool).b?l(bool).end + b!l(bool).c!l(bool).end + a?l(bool).a?l(bool).end",
    "p2": "a?l(bool).b!l(bool).end + b!l(bool).c?l(bool).end + c?l(bool).a!l(bool).end",
    "p3": "a?l(bool).b!l(bool).end + b?l(bool).c?l(bool).end + c?l(bool).a?l(bool).end",
    "p4": "a!l1(bool).b!l(bool).end + a!l2(bool).c?l(bool).end + a?l(bool).a?l(bool).end",
    "p5": "a!l1(bool).b!l(bool).end + a!l2(bool).c?l(bool).end + a!l3(bool).a?l(bool).end",
    "p6": "a?l1(bool).b!l(bool).end + a?l2(bool).c?l(bool).end + a?l3(bool).a!l(bool).end",
    "p7": "a?l1(bool).b!l1(bool).end + a?l2(bool).b?l2(bool).end",
    "p8": "a?l1(bool).a!l1(bool).end + a!l2(bool).a?l3(bool).end",
    "p9": "a!l1(bool).a!l1(bool).end + a!l2(bool).a?l2(bool).end",
    "p10": "rec t.(a?l1(bool).(a!l1(bool).end + a!l2(bool).end) + a?l2(bool).a?l2(bool).t)",
}

LABEL_ERROR = """\
role p = q!l1(tt).0 + r?l2(x).0
role q = p?l2(x).0
role r = p!l2(tt).0
"""

LABEL_OK = """\
role p = q?l1(x).0 + q?l2(x).0
role q = p!l2(tt).0
"""

# lcmv fixtures
CMV_PING = "(new x y)(lin x (l!tt.0) | lin y (l?z.0))"
CMV_CHAIN = "(new x y)(lin x (a!tt. lin x (b?w. ok)) | lin y (a?z. lin y (b!ff. 0)))"
CMV_MIXED = "(new x y)(lin x (l1!tt.0 + l2?z.0) | lin y (l1?w.0 + l2!ff.0))"
CMV_DEADLOCKED = "(new x y)(lin x (l!tt. lin y (l?z.0)))"
CMV_M_WITNESS = (
    "(new x y)(lin x (l!tt.0) | lin y (l?z.if z then 0 else 0)"
    " | lin x (l!ff.0) | lin y (l?z.if z then 0 else ok))"
)
CMV_UNTYPABLE = "(new x y)(lin x (l1!tt.0 + l2?z.ok) | lin y (l1?z.0 + l3?z.ok))"


SESSIONS: dict[str, str] = {
    "election5": ELECTION5,
    "election6": ELECTION6,
    "m_scmp": M_SCMP,
    "m_mp": M_MP,
    "m_mcbs": M_MCBS,
    "star_msmp": STAR_MSMP,
    "mixed2": MIXED2,
    "ping": PING,
    "out2": OUT2,
    "pingpong_rec": PINGPONG_REC,
    "cond_demo": COND_DEMO,
    "ex_typed1": EX_TYPED1,
    "ex_typed2": EX_TYPED2,
    "dmp3": DMP3,
}

for _name, _src in FAMILY.items():
    if _name in FAMILY_TYPES:
        SESSIONS[_name] = _src + "\ntypes {\n  p: " + FAMILY_TYPES[_name] + "\n}\n"
    else:
        SESSIONS[_name] = _src + "\n"

# p11 is declared with the type that works for p10; checking it fails, which
# is the point of the fixture
SESSIONS["p11"] = FAMILY["p11"] + "\ntypes {\n  p: " + FAMILY_TYPES["p10"] + "\n}\n"

UNTYPED: dict[str, str] = {
    "label_error": LABEL_ERROR,
    "label_ok": LABEL_OK,
}

CMV: dict[str, str] = {
    "cmv_ping": CMV_PING,
    "cmv_chain": CMV_CHAIN,
    "cmv_mixed": CMV_MIXED,
    "cmv_deadlocked": CMV_DEADLOCKED,
    "cmv_m_witness": CMV_M_WITNESS,
    "cmv_untypable": CMV_UNTYPABLE,
}

# fixtures per encoding: in-fragment, convergent sources for the harness
ENCODING_FIXTURES: dict[str, list[str]] = {
    "scbs-bs": ["ping", "out2", "p9"],
    "mcbs-scbs": ["m_mcbs", "mixed2", "ping"],
    "mcbs-bs": ["m_mcbs", "mixed2", "ping"],
    "smp-mp": ["ping", "m_mp", "smp_pair"],
    "dmp-smp": ["mixed2", "dmp3", "m_mcbs"],
    "dmp-mp": ["mixed2", "dmp3"],
    "mcmp-msmp": ["m_scmp", "star_msmp", "election5", "mixed2", "cond_demo"],
    "lcmv-mcbs": ["cmv_ping", "cmv_chain", "cmv_mixed", "cmv_deadlocked"],
}

SESSIONS["smp_pair"] = """\
role a = b!l1(tt).ok + b!l2(tt).0
role b = a?l1(x).0 + a?l2(x).ok
types {
  a: b!l1(bool).end + b!l2(bool).end
  b: a?l1(bool).end + a?l2(bool).end
}
"""

# declared-context status, frozen from exhaustive context exploration
SAFE_DF = [
    "cond_demo",
    "dmp3",
    "election6",
    "ex_typed2",
    "m_mcbs",
    "m_mp",
    "mixed2",
    "out2",
    "ping",
    "pingpong_rec",
    "smp_pair",
]
SAFE_NOT_DF = [
    "election5",
    "ex_typed1",
    "star_msmp",
    "p1",
    "p2",
    "p3",
    "p4",
    "p5",
    "p6",
    "p7",
    "p8",
    "p9",
    "p10",
]
# m_scmp's context is deadlock-free but not safe: after its a-b step the
# witness exposes an output toward a participant listening on another label.
DF_NOT_SAFE = ["m_scmp"]


def load(name: str):
    """Parse a session fixture, returning (session, declared context)."""
    return syntax.parse_source(SESSIONS[name])


def write_fixtures(directory) -> list[str]:
    """Dump every fixture to .mcmp / .cmv files for CLI use."""
    import pathlib

    root = pathlib.Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in sorted({**SESSIONS, **UNTYPED}.items()):
        path = root / f"{name}.mcmp"
        path.write_text(text if text.endswith("\n") else text + "\n")
        written.append(str(path))
    for name, text in sorted(CMV.items()):
        path = root / f"{name}.cmv"
        path.write_text(text + "\n")
        written.append(str(path))
    return written
