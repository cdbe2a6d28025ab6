import pytest
import torch

from crossarg.decoding import AllowedSet, BeamState, allowed_token_set, beam_search, constrained_step, greedy_decode
from crossarg.model import CopySeq2Seq, ToyTransformer
from crossarg.tokenizer import SubwordTokenizer
from crossarg.training import TrainConfig, make_example, train_model


def test_allowed_union():
    s = allowed_token_set([10, 11], {1, 2, 3, 4, 5}, eos_id=5)
    assert s.ids == frozenset({1, 2, 3, 4, 5, 10, 11}) and len(s) == 7


def test_allowed_absorption():
    assert allowed_token_set([1, 2], {1, 2, 3}, eos_id=3).ids == frozenset({1, 2, 3})


def test_allowed_rejects_bad_config():
    with pytest.raises(ValueError):
        allowed_token_set([1], set(), eos_id=0)
    with pytest.raises(ValueError):
        allowed_token_set([1], {2}, eos_id=0)
    with pytest.raises(ValueError):
        allowed_token_set([], {0}, eos_id=0)
    with pytest.raises(ValueError):
        AllowedSet(frozenset({1}), eos_id=0)


def test_mask_moves_argmax():
    logits = torch.tensor([0.0, 10.0, 1.0, 2.0])
    out = constrained_step(logits, AllowedSet(frozenset({0, 2, 3}), eos_id=0))
    assert int(out.argmax()) == 3 and out[1] == float("-inf")


def test_full_vocabulary_is_identity():
    logits = torch.randn(6)
    assert torch.equal(constrained_step(logits, AllowedSet(frozenset(range(6)), 0)), logits)


def test_equal_logits_equal_probability():
    logits = torch.tensor([3.0, 3.0, 9.0])
    p = torch.softmax(constrained_step(logits, AllowedSet(frozenset({0, 1}), 0)), -1)
    assert float(p[0]) == float(p[1]) == 0.5


def test_beam_width_validated():
    with pytest.raises(ValueError):
        BeamState(0)


def test_beam_one_equals_greedy(small_model, small_corpus):
    est = small_model
    for inst in small_corpus[3].instances[:5]:
        _, g = est.decode_ids(inst, beam_width=1)
        src = est.tokenizer_.encode(est.build_input(inst).text, add_eos=True)
        b = beam_search(
            est.model_, src, width=1, start_id=est.tokenizer_.pad_id, eos_id=est.tokenizer_.eos_id,
            max_len=est.max_len, banned=est.banned_ids(),
        )
        assert b.ids == g.ids


def test_truncation_flagged(small_model, small_corpus):
    inst = small_corpus[2].instances[0]
    _, r = small_model.decode_ids(inst, max_len=2)
    assert len(r.ids) == 2 and not r.finished
    _, r = small_model.decode_ids(inst, beam_width=3, max_len=2)
    assert not r.finished


def test_wide_beam_finishes(small_model, small_corpus):
    inst = small_corpus[2].instances[0]
    _, r = small_model.decode_ids(inst, beam_width=4)
    assert r.finished and r.ids[-1] == small_model.tokenizer_.eos_id


@pytest.fixture(scope="module")
def hallucinating_model():
    """Overfit to write a word that is absent from its input."""
    tok = SubwordTokenizer.train(["alpha beta zulu"], reserved=["<Agent>", "</Agent>", "[None]", "[and]"], num_merges=30)
    torch.manual_seed(0)
    model = CopySeq2Seq(ToyTransformer(tok.vocab_size, d_model=32, num_heads=2, ff_dim=64))
    ex = make_example("alpha beta", "<Agent> zulu </Agent>", tok, tok.pad_id, 64)
    train_model(model, [ex], TrainConfig(learning_rate=3e-3, epochs=150, batch_size=1), tok.pad_id)
    return tok, model, ex


def test_constraint_removes_hallucination(hallucinating_model):
    tok, model, ex = hallucinating_model
    specials = {tok.token_to_id[t] for t in ("<Agent>", "</Agent>", "[None]", "[and]")} | {tok.eos_id}
    free = greedy_decode(model, ex.src, start_id=tok.pad_id, eos_id=tok.eos_id, max_len=10, banned={tok.pad_id})
    assert "zulu" in tok.decode(free.ids)
    allowed = allowed_token_set(ex.src, specials, tok.eos_id)
    assert set(free.ids) - allowed.ids
    for width in (1, 3):
        kw = dict(start_id=tok.pad_id, eos_id=tok.eos_id, max_len=10, banned={tok.pad_id}, constraint=allowed)
        res = greedy_decode(model, ex.src, **kw) if width == 1 else beam_search(model, ex.src, width=width, **kw)
        assert set(res.ids) <= allowed.ids
