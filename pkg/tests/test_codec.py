import pytest
from hypothesis import given, settings, strategies as st

from crossarg.codec import (
    EXACT,
    NEAREST,
    UNRESOLVED,
    Argument,
    CodecError,
    EventInstance,
    Span,
    decode_target,
    encode_target,
    resolve_offsets,
)
from crossarg.templates import get_template, render_empty

from strategies import instances, life_die, make_instance

PASSAGE = "The coalition fired a missile, which killed civilians and a woman in their houses."


def example():
    return make_instance(
        PASSAGE,
        "killed",
        [("coalition", "Agent"), ("civilians", "Victim"), ("woman", "Victim"), ("missile", "Instrument"), ("houses", "Place")],
    )


def test_encode_full_example():
    t = get_template(life_die(), "Life:Die")
    assert encode_target(example(), t) == (
        "<Agent> coalition </Agent> <Victim> civilians [and] woman </Victim> "
        "<Instrument> missile </Instrument> <Place> houses </Place>"
    )


def test_encode_victim_only():
    t = get_template(life_die(), "Life:Die")
    inst = make_instance(PASSAGE, "killed", [("civilians", "Victim"), ("woman", "Victim")])
    out = encode_target(inst, t)
    assert "<Victim> civilians [and] woman </Victim>" in out


def test_encode_no_arguments_is_empty_template():
    t = get_template(life_die(), "Life:Die")
    assert encode_target(make_instance(PASSAGE, "killed", []), t) == render_empty(t)


def test_decode_full_example():
    t = get_template(life_die(), "Life:Die")
    assert decode_target(encode_target(example(), t), t) == {
        "Agent": ["coalition"], "Victim": ["civilians", "woman"], "Instrument": ["missile"], "Place": ["houses"],
    }


def test_decode_empty_template():
    t = get_template(life_die(), "Life:Die")
    assert decode_target(render_empty(t), t) == {r: [] for r in t.roles}


def test_decode_missing_close_tag():
    t = get_template(life_die(), "Life:Die")
    out = decode_target("<Agent> coalition </Agent> <Place> houses", t)
    assert out == {"Agent": ["coalition"], "Victim": [], "Instrument": [], "Place": []}


def test_decode_english_style():
    t = get_template(life_die(), "Life:Die", style="english_tokens")
    enc = encode_target(example(), t)
    assert enc.startswith("Agent: coalition <SEP> Victim: civilians [and] woman <SEP>")
    assert decode_target(enc, t)["Victim"] == ["civilians", "woman"]


def test_encode_rejects_reserved_and_unknown():
    t = get_template(life_die(), "Life:Die")
    with pytest.raises(CodecError):
        encode_target(make_instance("a [None] b killed", "killed", [("[None]", "Agent")]), t)
    with pytest.raises(CodecError):
        encode_target(make_instance(PASSAGE, "killed", [("houses", "Giver")]), t)


@settings(max_examples=300, deadline=None)
@given(instances())
def test_roundtrip_property(pair):
    inst, onto = pair
    for style in ("special_tokens", "english_tokens"):
        t = get_template(onto, "E", style=style)
        gold = inst.role_strings()
        assert decode_target(encode_target(inst, t), t) == {r: gold.get(r, []) for r in t.roles}


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(list("<>/[]:ab ") + ["<Agent>", "</Agent>", "[None]", "[and]", "<SEP>", "Agent:"]), max_size=30).map("".join))
def test_decode_never_raises_and_only_emits_template_roles(noise):
    for style in ("special_tokens", "english_tokens"):
        t = get_template(life_die(), "Life:Die", style=style)
        out = decode_target(noise, t)
        assert set(out) == set(t.roles)
        for pieces in out.values():
            assert all(p and p == p.strip() and "[None]" not in p and "[and]" not in p for p in pieces)


def test_resolve_unique():
    inst = example()
    (p,) = resolve_offsets({"Instrument": ["missile"]}, inst)
    assert p.resolution == EXACT and PASSAGE[p.span[0]:p.span[1]] == "missile"


def test_resolve_nearest_to_trigger():
    text = "x" * 10 + "abc" + "y" * 72 + "TRIG" + "z" + "abc" + "w" * 5
    assert text.index("TRIG") == 85 and text.index("abc", 20) == 90
    inst = EventInstance(text=text, trigger=Span(85, 89, "TRIG"), event_type="Life:Die")
    (p,) = resolve_offsets({"Agent": ["abc"]}, inst)
    assert p.span == (90, 93) and p.resolution == NEAREST


def test_resolve_repeated_string_takes_next_occurrence():
    text = "dog bit dog near dog"
    inst = EventInstance(text=text, trigger=Span(4, 7, "bit"), event_type="E")
    preds = resolve_offsets({"R": ["dog", "dog", "dog", "dog"]}, inst)
    assert [p.span for p in preds[:3]] == [(0, 3), (8, 11), (17, 20)]
    assert preds[3].span is None and preds[3].resolution == UNRESOLVED


def test_resolve_not_in_passage():
    inst = make_instance("They went to the studio yesterday", "went", [])
    (p,) = resolve_offsets({"Place": ["studios"]}, inst)
    assert p.span is None and p.resolution == UNRESOLVED


def test_instance_bounds_checked():
    with pytest.raises(CodecError):
        EventInstance(text="abc", trigger=Span(0, 1, "a"), arguments=[Argument(1, 9, "bc", "R")])
