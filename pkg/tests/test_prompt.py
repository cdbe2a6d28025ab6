import pytest

from crossarg.prompt import PromptConfig, PromptError, build_input, load_translation_table
from crossarg.templates import EventOntology, get_template, render_empty

from strategies import life_die, make_instance

PASSAGE = "The coalition fired a missile, which killed civilians in their houses."


def test_mode_none_layout():
    t = get_template(life_die(), "Life:Die")
    inp = build_input(make_instance(PASSAGE, "killed", []), t)
    assert inp.text == f"{PASSAGE} <SEP> killed <SEP> {render_empty(t)}"
    assert inp.passage_char_base == 0
    assert inp.text[: len(PASSAGE)] == PASSAGE


def test_special_event_type_token():
    onto = EventOntology.from_dict({"Attack": ["Attacker", "Target"]})
    t = get_template(onto, "Attack")
    inst = make_instance("They attacked the base", "attacked", [], event_type="Attack")
    inp = build_input(inst, t, PromptConfig("special_tokens"))
    assert "<SEP> attacked <SEP> <--attack--> <SEP> <Attacker>" in inp.text


def test_english_event_type_ignores_language():
    onto = EventOntology.from_dict({"Attack": ["Attacker"]})
    t = get_template(onto, "Attack")
    inst = make_instance("他们袭击了基地", "袭击", [], event_type="Attack", language="zh")
    inp = build_input(inst, t, PromptConfig("english_tokens"))
    assert "<SEP> 袭击 <SEP> Attack <SEP>" in inp.text


def test_translated_tokens(tmp_path):
    p = tmp_path / "table.tsv"
    p.write_text("Attack\tzh\t袭击事件\n")
    table = load_translation_table(p)
    onto = EventOntology.from_dict({"Attack": ["Attacker"]})
    t = get_template(onto, "Attack")
    inst = make_instance("他们袭击了基地", "袭击", [], event_type="Attack", language="zh")
    assert "<SEP> 袭击事件 <SEP>" in build_input(inst, t, PromptConfig("translated_tokens", table)).text
    inst.language = "ar"
    with pytest.raises(PromptError):
        build_input(inst, t, PromptConfig("translated_tokens", table))


def test_config_validation():
    with pytest.raises(PromptError):
        PromptConfig("translated_tokens")
    with pytest.raises(PromptError):
        PromptConfig("sideways")


def test_missing_trigger_rejected():
    from crossarg.codec import EventInstance

    t = get_template(life_die(), "Life:Die")
    with pytest.raises(PromptError):
        build_input(EventInstance(text="no event here"), t)
