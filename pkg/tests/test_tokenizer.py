from hypothesis import given, settings, strategies as st

from crossarg.tokenizer import SubwordTokenizer

RESERVED = ["<Agent>", "</Agent>", "[None]", "[and]", "<SEP>"]
CORPUS = [
    "the coalition fired a missile",
    "the missile killed civilians",
    "ruga by gimegu .",
    "рука тела .",
]


def tok():
    return SubwordTokenizer.train(CORPUS, reserved=RESERVED, num_merges=50)


def test_reserved_tokens_are_atomic():
    t = tok()
    pieces = t.tokenize("<Agent> coalition </Agent>[None]")
    assert pieces[0] == "<Agent>" and "</Agent>" in pieces and "[None]" in pieces


def test_roundtrip_known_text():
    t = tok()
    text = "<Agent> the coalition [and] missile </Agent>"
    assert t.decode(t.encode(text)) == text


def test_unknown_characters_map_to_unk():
    t = tok()
    assert t.unk_id in t.encode("日本")


def test_reserved_ids_precede_natural_ones():
    t = tok()
    assert max(t.reserved_ids()) < min(t.token_to_id[p] for p in t.natural_vocabulary())
    assert not t.natural_vocabulary() & set(RESERVED)


def test_training_is_deterministic():
    assert tok().to_dict() == tok().to_dict()


def test_serialization_roundtrip():
    t = tok()
    u = SubwordTokenizer.from_dict(t.to_dict())
    assert u.id_to_token == t.id_to_token
    assert u.encode("the missile <SEP> ruga") == t.encode("the missile <SEP> ruga")


def test_eos_appended():
    t = tok()
    assert t.encode("the", add_eos=True)[-1] == t.eos_id


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["the", "missile", "gimegu", "рука", "<Agent>", "[and]", "."]), min_size=1, max_size=12))
def test_roundtrip_property(words):
    t = tok()
    text = " ".join(words)
    assert t.decode(t.encode(text)) == text
