import pytest

from mcmp import corpus, encode, ltypes, semantics, syntax
from mcmp.encode import (
    ENCODINGS,
    build_order,
    encode as run_encode,
    encode_types,
    verify_correspondence,
    verify_name_invariance,
)
from mcmp.syntax import McmpError, parse_ltype, parse_session, render_process, render_session


def test_build_order_worked_example():
    m = parse_session("role a = b!l(tt).0 role b = a?l(x).0 role c = 0")
    slices = build_order(m)
    assert slices["a"] == frozenset({("a", "b"), ("a", "c")})
    assert slices["b"] == frozenset({("a", "b"), ("b", "c")})
    assert slices["c"] == frozenset({("a", "c"), ("b", "c")})


def test_build_order_singleton_empty():
    m = parse_session("role p = 0")
    assert build_order(m) == {"p": frozenset()}


def test_build_order_depends_on_parse_tree():
    ab = parse_session("role a = b!l(tt).0 role b = a?l(x).0")
    ba = parse_session("role b = a?l(x).0 role a = b!l(tt).0")
    assert build_order(ab)["a"] != build_order(ba)["a"]


def test_order_slices_agree_pairwise_on_corpus():
    for name in sorted(corpus.SESSIONS):
        m, _ = corpus.load(name)
        slices = build_order(m)
        roles = m.participants()
        for p in roles:
            for q in roles:
                if p == q:
                    continue
                sp, sq = slices[p], slices[q]
                shared = {(p, q), (q, p)}
                mine = shared & sp
                theirs = shared & sq
                if mine and theirs:
                    assert mine == theirs, (name, p, q)


# ---------------------------------------------------------------------------
# golden clauses from the translation tables


def test_scbs_bs_output_choice_clause():
    m = parse_session("role p = q!l1(tt).0 + q!l2(tt).0 role q = p?l1(x).0 + p?l2(x).0")
    enc = run_encode(m, "scbs-bs")
    assert render_process(enc.process_of("p")) == "q?enc_o(w0).q!l1(tt).0 + q?enc_o(w1).q!l2(tt).0"
    assert render_process(enc.process_of("q")) == "p!enc_o(tt).(p?l1(x).0 + p?l2(x).0)"


def test_encode_nil_homomorphic():
    m = parse_session("role p = 0 role q = 0")
    for enc_id in ("scbs-bs", "mcbs-scbs", "mcbs-bs", "smp-mp", "dmp-smp", "dmp-mp", "mcmp-msmp"):
        enc = run_encode(m, enc_id)
        assert all(isinstance(proc, syntax.Nil) for _, proc in enc.parts)


def test_mcbs_scbs_mixed_lower_participant():
    # mixed choice at the lower participant: outputs stay, inputs guarded by
    # an enc_i announcement with a reset escape
    m, _ = corpus.load("mixed2")
    enc = run_encode(m, "mcbs-scbs")
    p = render_process(enc.process_of("p"))
    assert p.startswith("q!l2(tt).0 + q!enc_i(tt).(q?l1(x).ok + q?reset(")
    q = render_process(enc.process_of("q"))
    assert q.startswith("p?l2(y).ok + p?enc_i(")


def test_mcbs_scbs_inputs_only_higher_participant():
    m, _ = corpus.load("m_mcbs")
    enc = run_encode(m, "mcbs-scbs")
    q = render_process(enc.process_of("q"))
    assert "p!reset(tt)" in q and q.startswith("p?l1(x).0 + p?l3(x).ok + p?enc_i(")


def test_mcbs_bs_all_summands_enc_o_guarded():
    m, _ = corpus.load("mixed2")
    enc = run_encode(m, "mcbs-bs")
    p = enc.process_of("p")
    assert all(b.prefix.label == "enc_o" and b.prefix.polarity == "?" for b in p.branches)
    q = enc.process_of("q")
    assert len(q.branches) == 1 and q.branches[0].prefix.label == "enc_o"


def test_mcmp_msmp_splits_per_participant():
    m, _ = corpus.load("m_scmp")
    enc = run_encode(m, "mcmp-msmp")
    assert "MSMP" in syntax.classify(enc)
    # per-participant blocks in d's translated choice are single-polarity
    d = enc.process_of("d")
    pols = {}
    for b in d.branches:
        pols.setdefault(b.prefix.target, set()).add(b.prefix.polarity)
    assert all(len(v) == 1 for v in pols.values())


def test_encode_rejects_out_of_fragment():
    m, _ = corpus.load("m_scmp")  # SCMP, not DMP
    with pytest.raises(McmpError):
        run_encode(m, "dmp-smp")


def test_encode_rejects_reserved_labels():
    m = parse_session("role p = q!enc_o(tt).0", allow_reserved=True)
    with pytest.raises(McmpError):
        run_encode(m, "mcmp-msmp")


@pytest.mark.parametrize("enc_id", sorted(set(ENCODINGS) - {"lcmv-mcbs"}))
def test_target_membership(enc_id):
    e = ENCODINGS[enc_id]
    for name in corpus.ENCODING_FIXTURES[enc_id]:
        m, _ = corpus.load(name)
        enc = run_encode(m, enc_id)
        assert e.target in syntax.classify(enc), (name, render_session(enc))


def test_encoded_sessions_have_unique_capability_ids():
    # duplicated reset continuations must carry fresh ids
    for enc_id in sorted(set(ENCODINGS) - {"lcmv-mcbs"}):
        for name in corpus.ENCODING_FIXTURES[enc_id]:
            m, _ = corpus.load(name)
            caps = syntax.session_capability_ids(run_encode(m, enc_id))
            assert len(caps) == len(set(caps)), (enc_id, name)


def test_encoding_injective_on_fixture_corpus():
    for enc_id in sorted(set(ENCODINGS) - {"lcmv-mcbs"}):
        seen = {}
        for name in corpus.ENCODING_FIXTURES[enc_id]:
            m, _ = corpus.load(name)
            key = syntax.canon_session(run_encode(m, enc_id))
            assert key not in seen, (enc_id, name, seen[key])
            seen[key] = name


def test_success_position_preserved():
    for enc_id in sorted(set(ENCODINGS) - {"lcmv-mcbs"}):
        for name in corpus.ENCODING_FIXTURES[enc_id]:
            m, _ = corpus.load(name)
            enc = run_encode(m, enc_id)
            assert semantics.has_success(m) == semantics.has_success(enc)


def test_compositionality_per_participant():
    for enc_id in sorted(set(ENCODINGS) - {"lcmv-mcbs"}):
        for name in corpus.ENCODING_FIXTURES[enc_id]:
            m, _ = corpus.load(name)
            slices = build_order(m)
            enc = run_encode(m, enc_id, order=slices)
            for p, proc in m.parts:
                alone = encode.encode_process(proc, p, slices[p], enc_id)
                assert syntax.alpha_equal(alone, enc.process_of(p))


def _replace_cont(proc, index, repl):
    branches = list(proc.branches)
    b = branches[index]
    branches[index] = syntax.Branch(b.prefix, repl)
    return syntax.Choice(tuple(branches), proc.cap)


def test_compositionality_splice_subterms():
    # encoding a choice with a hole, then splicing the encoded subterm into
    # the hole, equals encoding the choice with the subterm in place
    import random

    from genutil import gen_process
    from mcmp.syntax import ProcVar, substitute_proc

    rng = random.Random(1234)
    shapes = {"mcbs-scbs": "dmp", "mcbs-bs": "dmp", "dmp-smp": "dmp", "dmp-mp": "dmp",
              "mcmp-msmp": "mcmp", "scbs-bs": "scmp", "smp-mp": "smp"}
    checked = 0
    for enc_id, shape in shapes.items():
        for name in corpus.ENCODING_FIXTURES[enc_id]:
            m, _ = corpus.load(name)
            slices = build_order(m)
            for p, proc in m.parts:
                if not isinstance(proc, syntax.Choice):
                    continue
                peers = sorted({b.prefix.target for b in proc.branches})
                for index in range(len(proc.branches)):
                    repl = gen_process(rng, peers, ["l1", "l2"], 1, shape)
                    with_hole = _replace_cont(proc, index, ProcVar("ZHOLE"))
                    with_repl = _replace_cont(proc, index, repl)
                    enc_hole = encode.encode_process(with_hole, p, slices[p], enc_id)
                    enc_repl = encode.encode_process(with_repl, p, slices[p], enc_id)
                    enc_sub = encode.encode_process(repl, p, slices[p], enc_id)
                    spliced = substitute_proc(enc_hole, enc_sub, "ZHOLE")
                    assert syntax.alpha_equal(spliced, enc_repl), (enc_id, name, p, index)
                    checked += 1
    assert checked > 40


# ---------------------------------------------------------------------------
# type translation


def test_type_translation_end_identity():
    delta = ltypes.LocalContext((("p", ltypes.End()),))
    for enc_id in sorted(set(ENCODINGS) - {"lcmv-mcbs"}):
        assert encode_types(delta, enc_id).type_of("p") == ltypes.End()


def test_scbs_bs_type_clauses():
    t = parse_ltype("q!l1(bool).end + q!l2(nat).end")
    out = encode._enc_type_o(t)
    assert ltypes.render_type(out) == "q?enc_o(bool).(q!l1(bool).end + q!l2(nat).end)"
    t2 = parse_ltype("q?l1(bool).end")
    assert ltypes.render_type(encode._enc_type_o(t2)) == "q!enc_o(bool).q?l1(bool).end"


def test_type_translation_rejects_mixed_for_o_style():
    delta = ltypes.LocalContext((("p", parse_ltype("q!l1(bool).end + q?l2(bool).end")),))
    with pytest.raises(McmpError):
        encode_types(delta, "scbs-bs")


@pytest.mark.parametrize(
    "enc_id,name",
    [
        ("scbs-bs", "ping"),
        ("scbs-bs", "out2"),
        ("smp-mp", "smp_pair"),
        ("smp-mp", "m_mp"),
        ("mcbs-scbs", "mixed2"),
        ("mcbs-scbs", "m_mcbs"),
        ("dmp-smp", "dmp3"),
        ("mcbs-bs", "mixed2"),
        ("mcmp-msmp", "mixed2"),
    ],
)
def test_type_translation_preserves_safe_and_df(enc_id, name):
    m, delta = corpus.load(name)
    assert ltypes.is_safe(delta)[0] and ltypes.is_deadlock_free(delta)[0]
    order = build_order(m)
    out = encode_types(delta, enc_id, order=order)
    assert ltypes.is_safe(out)[0], ltypes.render_type(out.entries[0][1])
    assert ltypes.is_deadlock_free(out)[0]


def test_translated_context_types_translated_session():
    # for the three encodings with a paper-given type table, the translation
    # of a well-typed session checks against the translated context
    from mcmp import typecheck

    for enc_id, name in [("scbs-bs", "ping"), ("scbs-bs", "out2"), ("smp-mp", "smp_pair"), ("mcbs-scbs", "mixed2"), ("mcbs-scbs", "m_mcbs")]:
        m, delta = corpus.load(name)
        order = build_order(m)
        enc_m = run_encode(m, enc_id, order=order)
        enc_d = encode_types(delta, enc_id, order=order)
        assert typecheck.check_session(enc_m, enc_d) == [], (enc_id, name)


# ---------------------------------------------------------------------------
# the good-encoding harness


@pytest.mark.parametrize("enc_id", sorted(set(ENCODINGS) - {"lcmv-mcbs"}))
def test_correspondence_on_fixtures(enc_id):
    bound = ENCODINGS[enc_id].step_bound
    for name in corpus.ENCODING_FIXTURES[enc_id]:
        m, _ = corpus.load(name)
        report = verify_correspondence(m, enc_id)
        assert report.passed(), (name, report.to_json())
        assert report.max_emulation_factor <= bound


def test_correspondence_trivial_on_nil():
    m = parse_session("role p = 0")
    for enc_id in sorted(set(ENCODINGS) - {"lcmv-mcbs"}):
        report = verify_correspondence(m, enc_id)
        assert report.passed() and report.max_emulation_factor == 0, enc_id


def test_name_invariance_syntactic_for_order_free():
    m, _ = corpus.load("ping")
    assert verify_name_invariance(m, "scbs-bs", {"p": "a", "q": "b"})
    assert verify_name_invariance(m, "scbs-bs", {"p": "q", "q": "p"})
    m2, _ = corpus.load("smp_pair")
    assert verify_name_invariance(m2, "smp-mp", {"a": "b", "b": "a"})


def test_name_invariance_bisimulation_for_order_dependent():
    m, _ = corpus.load("mixed2")
    assert verify_name_invariance(m, "mcbs-scbs", {"p": "q", "q": "p"})
    assert verify_name_invariance(m, "mcbs-bs", {"p": "q", "q": "p"})
    m2, _ = corpus.load("m_scmp")
    assert verify_name_invariance(m2, "mcmp-msmp", {"a": "c", "c": "a"})


def test_name_invariance_identity_all():
    for enc_id in sorted(set(ENCODINGS) - {"lcmv-mcbs"}):
        for name in corpus.ENCODING_FIXTURES[enc_id]:
            m, _ = corpus.load(name)
            ident = {p: p for p in m.participants()}
            assert verify_name_invariance(m, enc_id, ident)


def test_report_json_shape():
    m, _ = corpus.load("ping")
    report = verify_correspondence(m, "scbs-bs")
    import json

    data = json.loads(report.to_json())
    for key in (
        "completeness",
        "soundness",
        "success_sensitive",
        "divergence_reflected_to_bound",
        "distributability_preserved",
        "max_emulation_factor",
    ):
        assert key in data
