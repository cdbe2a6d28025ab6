import sys
from pathlib import Path

import pytest
import torch

sys.path.insert(0, str(Path(__file__).parent))

from crossarg import ArgumentExtractor  # noqa: E402
from crossarg.synthetic import SyntheticConfig, generate_corpus, synthetic_ontology  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True, scope="session")
def _threads():
    torch.set_num_threads(1)


@pytest.fixture(scope="session")
def small_corpus():
    cfg = SyntheticConfig(num_instances=50, num_test=20)
    train, test = generate_corpus(cfg)
    return cfg, synthetic_ontology(cfg)[0], train, test


@pytest.fixture(scope="session")
def small_model(small_corpus):
    """Toy model overfit on 50 synthetic instances (about 12 s)."""
    _, onto, train, test = small_corpus
    return ArgumentExtractor(ontology=onto, learning_rate=1e-3, epochs=60).fit(
        train, vocab_texts=[i.text for i in test.instances]
    )


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        name, status, detail = results[num]
        terminalreporter.write_line(f"criterion {num:>2} {status}: {name}" + (f" [{detail}]" if detail else ""))
