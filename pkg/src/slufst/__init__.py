"""Training-free spoken language understanding with weighted finite-state transducers."""

__version__ = "0.1.0"

from .decoder import DecodeParams, NoMatch, ParseResult, decode, parse_output_labels  # noqa: E402
from .dialog import DialogSpec, load_dialog_spec, parse_dialog_spec  # noqa: E402
from .logits import LogitMatrix  # noqa: E402
from .model import ModelBundle, build_model  # noqa: E402
from .text import TextEncodeParams, text_to_logits  # noqa: E402
from .tokens import Alphabet  # noqa: E402
from .wfst import SymbolTable, Wfst  # noqa: E402

__all__ = [
    "Alphabet", "DecodeParams", "DialogSpec", "LogitMatrix", "ModelBundle", "NoMatch", "ParseResult",
    "SymbolTable", "TextEncodeParams", "Wfst", "build_model", "decode", "load_dialog_spec",
    "parse_dialog_spec", "parse_output_labels", "text_to_logits",
]
