import pytest

from crossarg.templates import (
    AND_TOKEN,
    EOS_TOKEN,
    NONE_TOKEN,
    SEP_TOKEN,
    EventOntology,
    OntologyError,
    TemplateRegistry,
    get_template,
    load_ontology,
    render_empty,
    special_token_inventory,
    write_ontology,
)

from strategies import life_die


def test_load_keeps_file_order(tmp_path):
    p = tmp_path / "onto.tsv"
    p.write_text("# comment\nLife:Die\tAgent,Victim,Instrument,Place\n\nConflict:Attack\tAttacker\n")
    onto = load_ontology(p)
    assert onto.event_types["Life:Die"] == ("Agent", "Victim", "Instrument", "Place")
    assert len(onto) == 2


def test_minimal_ontology(tmp_path):
    p = tmp_path / "onto.tsv"
    p.write_text("E\tR\n")
    assert len(load_ontology(p)) == 1


@pytest.mark.parametrize("body", [
    "Life:Die\tAgent,Victim,Victim\n",
    "Life:Die\t\n",
    "Life:Die\tAgent\nLife:Die\tVictim\n",
    "no tab here\n",
])
def test_malformed_ontology_rejected(tmp_path, body):
    p = tmp_path / "onto.tsv"
    p.write_text(body)
    with pytest.raises(OntologyError):
        load_ontology(p)


def test_write_then_load(tmp_path):
    onto = EventOntology.from_dict({"A": ["x", "y"], "B": ["z"]})
    write_ontology(onto, tmp_path / "o.tsv")
    assert load_ontology(tmp_path / "o.tsv").event_types == onto.event_types


def test_special_template_slots():
    t = get_template(life_die(), "Life:Die")
    assert [(s.role, s.open, s.close) for s in t.slots] == [
        ("Agent", "<Agent>", "</Agent>"),
        ("Victim", "<Victim>", "</Victim>"),
        ("Instrument", "<Instrument>", "</Instrument>"),
        ("Place", "<Place>", "</Place>"),
    ]


def test_render_empty_special():
    t = get_template(life_die(), "Life:Die")
    assert render_empty(t) == (
        "<Agent> [None] </Agent> <Victim> [None] </Victim> "
        "<Instrument> [None] </Instrument> <Place> [None] </Place>"
    )


def test_render_empty_english():
    t = get_template(life_die(), "Life:Die", style="english_tokens")
    assert render_empty(t) == "Agent: [None] <SEP> Victim: [None] <SEP> Instrument: [None] <SEP> Place: [None]"


def test_single_role_template():
    onto = EventOntology.from_dict({"E": ["R"]})
    assert render_empty(get_template(onto, "E")) == "<R> [None] </R>"


def test_seeded_order_is_deterministic_and_a_permutation():
    onto = life_die()
    a = get_template(onto, "Life:Die", role_order_seed=7)
    b = get_template(onto, "Life:Die", role_order_seed=7)
    assert a == b
    assert sorted(a.roles) == sorted(onto.event_types["Life:Die"])
    orders = {tuple(get_template(onto, "Life:Die", role_order_seed=s).roles) for s in range(10)}
    assert len(orders) > 1


def test_unknown_event_type_and_style():
    with pytest.raises(KeyError):
        get_template(life_die(), "Nope")
    with pytest.raises(ValueError):
        get_template(life_die(), "Life:Die", style="fancy")


def test_inventory_size_22_roles():
    roles = [f"R{i}" for i in range(22)]
    onto = EventOntology.from_dict({"A": roles[:12], "B": roles[10:]})
    inv = special_token_inventory(onto)
    assert len(inv) == 2 + 44 + 1
    assert {NONE_TOKEN, AND_TOKEN, EOS_TOKEN} <= inv


def test_inventory_single_role():
    assert len(special_token_inventory(EventOntology.from_dict({"E": ["R"]}))) == 5


def test_inventory_disjoint_from_passage_words():
    inv = special_token_inventory(life_die())
    passage = "the coalition fired a missile at houses killing civilians".split()
    assert not inv & set(passage)


def test_english_inventory_has_separator():
    assert SEP_TOKEN in special_token_inventory(life_die(), "english_tokens")


def test_registry_caches():
    reg = TemplateRegistry(life_die())
    assert reg["Life:Die"] is reg["Life:Die"]
    assert reg.inventory() == special_token_inventory(life_die())
