import pytest

from mcmp import corpus, lcmv, semantics, syntax
from mcmp.cli import lcmv_correspondence
from mcmp.lcmv import (
    CChoice,
    CmvTypeError,
    CRes,
    check_cmv,
    cmv_canon,
    cmv_enabled,
    cmv_has_success,
    encode_lcmv_to_mcbs,
    explore_cmv,
    parse_cmv,
    reduce_cmv,
    render_cmv,
)


def test_parse_two_choice_session():
    p = parse_cmv(corpus.CMV_PING)
    assert isinstance(p, CRes)
    comps = lcmv._components(p.body)
    assert len(comps) == 2 and all(isinstance(c, CChoice) for c in comps)


def test_parse_m_witness():
    p = parse_cmv(corpus.CMV_M_WITNESS)
    assert isinstance(p, CRes)
    assert len(lcmv._components(p.body)) == 4


def test_un_qualifier_rejected():
    with pytest.raises(syntax.ParseError):
        parse_cmv("(new x y)(un x (l!tt.0) | lin y (l?z.0))")


def test_inner_restriction_rejected():
    with pytest.raises(syntax.ParseError):
        parse_cmv("(new x y)(lin x (l!tt. (new u v)(0)) | lin y (l?z.0))")


def test_roundtrip():
    for name, text in sorted(corpus.CMV.items()):
        p = parse_cmv(text)
        again = parse_cmv(render_cmv(p))
        assert cmv_canon(p) == cmv_canon(again), name


def test_reduce_ping():
    p = parse_cmv(corpus.CMV_PING)
    succs = reduce_cmv(p)
    assert len(succs) == 1
    assert cmv_canon(succs[0]) == cmv_canon(parse_cmv("(new x y)(0)"))


def test_reduce_inact_empty():
    assert reduce_cmv(parse_cmv("(new x y)(0)")) == []


def test_reduce_conditional():
    p = parse_cmv("(new x y)(if tt then ok else 0)")
    (succ,) = reduce_cmv(p)
    assert cmv_has_success(succ)


def test_m_witness_has_three_plus_steps_and_conflicts():
    p = parse_cmv(corpus.CMV_M_WITNESS)
    steps = cmv_enabled(p)
    # two senders x two receivers: four communication steps at the root
    assert len(steps) == 4
    from mcmp.patterns import detect_m

    witness = detect_m(p)
    assert witness is not None and witness.kind == "m"


def test_check_classifies_ping():
    p = parse_cmv(corpus.CMV_PING)
    classes = check_cmv(p)
    comps = lcmv._components(p.body)
    x_choice = next(c for c in comps if c.endpoint == "x")
    y_choice = next(c for c in comps if c.endpoint == "y")
    # the solver prefers the first endpoint internal
    assert classes[x_choice.cap] == "internal"
    assert classes[y_choice.cap] == "external"


def test_check_rejects_unmatched_inputs_both_sides():
    with pytest.raises(CmvTypeError):
        check_cmv(parse_cmv(corpus.CMV_UNTYPABLE))


def test_check_rejects_parallel_endpoint_reuse():
    with pytest.raises(CmvTypeError):
        check_cmv(parse_cmv("(new x y)(lin x (l!tt.0) | lin x (l!tt.0) | lin y (l?z.0))"))


def test_check_accepts_deadlocked_component():
    p = parse_cmv(corpus.CMV_DEADLOCKED)
    classes = check_cmv(p)
    assert classes


def test_check_inact_trivial():
    assert check_cmv(parse_cmv("(new x y)(0)")) == {}


def test_encode_internal_output_clause():
    p = parse_cmv(corpus.CMV_PING)
    enc = encode_lcmv_to_mcbs(p)
    assert syntax.render_process(enc.process_of("x")) == "y!l.o(tt).0"
    assert syntax.render_process(enc.process_of("y")) == "x?l.o(z).0"


def test_encode_internal_input_announces():
    p = parse_cmv("(new x y)(lin x (l?z.0) | lin y (l!tt.0))")
    enc = encode_lcmv_to_mcbs(p)
    x = syntax.render_process(enc.process_of("x"))
    assert x.startswith("y!l.i(tt).y?l(z).0")
    y = syntax.render_process(enc.process_of("y"))
    assert "x?l.i(" in y and "x!l(tt).0" in y


def test_encode_deadlocked_is_nil():
    p = parse_cmv(corpus.CMV_DEADLOCKED)
    enc = encode_lcmv_to_mcbs(p)
    assert len(enc.parts) == 1
    assert isinstance(enc.parts[0][1], syntax.Nil)


def test_encode_target_in_mcbs():
    for name in corpus.ENCODING_FIXTURES["lcmv-mcbs"]:
        p = parse_cmv(corpus.CMV[name])
        enc = encode_lcmv_to_mcbs(p)
        assert "MCBS" in syntax.classify(enc), name


def test_encode_success_sensitive_fixtures():
    for name in corpus.ENCODING_FIXTURES["lcmv-mcbs"]:
        p = parse_cmv(corpus.CMV[name])
        src = explore_cmv(p)
        src_succ = any(cmv_has_success(s) for s in src.states)
        enc = encode_lcmv_to_mcbs(p)
        g = semantics.explore(enc)
        assert src_succ == semantics.may_succeed(g, g.root), name


def test_correspondence_on_lcmv_fixtures():
    for name in corpus.ENCODING_FIXTURES["lcmv-mcbs"]:
        p = parse_cmv(corpus.CMV[name])
        report = lcmv_correspondence(p, max_states=5000, max_depth=128)
        assert report.passed(), (name, report.to_json())
        assert report.max_emulation_factor <= 2, name


def test_explore_cmv_canonical_merges_congruent():
    p = parse_cmv("(new x y)(0 | 0 | lin x (l!tt.0) | lin y (l?z.0))")
    q = parse_cmv("(new x y)(lin y (l?z.0) | lin x (l!tt.0))")
    assert cmv_canon(p) == cmv_canon(q)
