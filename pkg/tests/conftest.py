import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from slufst import Alphabet, build_model, parse_dialog_spec  # noqa: E402
from slufst.tokens import build_token_fst  # noqa: E402
from slufst.wfst import SymbolTable, Wfst  # noqa: E402

ANIMAL_SPEC = """{
  "intents": {
    "get-looks": [
      "(is a|are) [---](animal) cute"
    ]
  },
  "lookups": {
    "animal": [
      "whitemargin stargazer",
      "atlantic stargazer",
      "aye aye",
      "(hairy frogfish)->striated frogfish"
    ]
  }
}"""

ENGLISH = Alphabet(tuple(" abcdefghijklmnopqrstuvwxyz'") + ("<blank>",))
TOY = Alphabet((" ", "a", "b", "-"), blank="-")


def word_acceptor(sentences, symbols=None):
    """Union of sentence chains built by hand (no slufst.ops involved)."""
    words = sorted({w for s in sentences for w in s})
    symbols = symbols or SymbolTable(words)
    f = Wfst(symbols)
    start = f.add_state()
    f.set_start(start)
    for s in sentences:
        q = start
        for w in s:
            n = f.add_state()
            f.add_arc(q, symbols.id(w), symbols.id(w), 0.0, n)
            q = n
        f.set_final(q)
    return f


@pytest.fixture(scope="session")
def animal_spec():
    return parse_dialog_spec(ANIMAL_SPEC)


@pytest.fixture(scope="session")
def animal_model(animal_spec):
    return build_model(animal_spec, ENGLISH, "fixed")


@pytest.fixture(scope="session")
def toy_tokens():
    return build_token_fst(TOY)
