"""Question bank: the ordered list of questionnaire items.

A bank file is a JSON document: either a top-level list of item entries or
an object ``{"items": [...], "option_labels": [...]}``. Each entry carries
``index`` (1-based integer), ``text``, ``competence`` (one of the four
category names) and ``polarity`` ("direct" | "reverse"). The bank digest is
computed over the canonical ordered stream of those four fields, so the
same logical bank always hashes the same regardless of file formatting.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Union

from .errors import IndexOutOfRange, ParseError, ValidationError


class Competence(enum.Enum):
    """The four assessed competence dimensions."""

    SCIENTIFIC = "scientific"
    PSYCHO_PEDAGOGICAL = "psycho_pedagogical"
    PSYCHOSOCIAL = "psychosocial"
    MANAGERIAL = "managerial"


class Polarity(enum.Enum):
    """Scoring direction of an item.

    Direct items score as answered; reverse items score 6 minus the answer.
    """

    DIRECT = "direct"
    REVERSE = "reverse"


#: Presentation labels for raw response values 1..5, in presentation order.
#: The same intensity scale is shown for both polarities; the results view
#: pairs the post-reversal score with the label of the raw answer.
DEFAULT_OPTION_LABELS = (
    "foarte puțin sau deloc",
    "puțin",
    "mediu",
    "mult",
    "foarte mult",
)


@dataclass(frozen=True)
class QuestionItem:
    index: int
    text: str
    competence: Competence
    polarity: Polarity


@dataclass(frozen=True)
class QuestionBank:
    items: tuple[QuestionItem, ...]
    digest: str
    option_labels: tuple[str, ...] = field(default=DEFAULT_OPTION_LABELS)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def size(self) -> int:
        return len(self.items)

    def items_for(self, competence: Competence) -> tuple[QuestionItem, ...]:
        return tuple(it for it in self.items if it.competence is competence)


def compute_digest(items: Iterable[QuestionItem]) -> str:
    """Hex digest over the canonical (index, text, competence, polarity) stream."""
    h = hashlib.sha256()
    for it in items:
        record = json.dumps(
            [it.index, it.text, it.competence.value, it.polarity.value],
            ensure_ascii=False,
            separators=(",", ":"),
        )
        h.update(record.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def _parse_item(raw: object, position: int) -> QuestionItem:
    if not isinstance(raw, dict):
        raise ParseError(f"entry {position}: expected an object, got {type(raw).__name__}")
    try:
        index = raw["index"]
        text = raw["text"]
        competence = raw["competence"]
        polarity = raw["polarity"]
    except KeyError as exc:
        raise ParseError(f"entry {position}: missing field {exc.args[0]!r}") from None
    if not isinstance(index, int) or isinstance(index, bool):
        raise ParseError(f"entry {position}: index must be an integer")
    if not isinstance(text, str):
        raise ParseError(f"entry {position}: text must be a string")
    try:
        comp = Competence(competence)
    except ValueError:
        raise ParseError(f"entry {position}: unknown competence {competence!r}") from None
    try:
        pol = Polarity(polarity)
    except ValueError:
        raise ParseError(f"entry {position}: unknown polarity {polarity!r}") from None
    return QuestionItem(index=index, text=text, competence=comp, polarity=pol)


def build_bank(items: Iterable[QuestionItem], option_labels: Iterable[str] | None = None) -> QuestionBank:
    """Validate items and assemble a bank with its digest."""
    ordered = tuple(sorted(items, key=lambda it: it.index))
    if not ordered:
        raise ValidationError("bank has no items")
    indices = [it.index for it in ordered]
    if indices != list(range(1, len(ordered) + 1)):
        raise ValidationError(
            f"item indices must be exactly 1..{len(ordered)} contiguous, got {indices}"
        )
    for it in ordered:
        if not it.text.strip():
            raise ValidationError(f"item {it.index}: text is empty")
    present = {it.competence for it in ordered}
    missing = [c.value for c in Competence if c not in present]
    if missing:
        raise ValidationError(f"no items for competence(s): {', '.join(missing)}")
    labels = tuple(option_labels) if option_labels is not None else DEFAULT_OPTION_LABELS
    if len(labels) != 5 or any(not isinstance(s, str) or not s.strip() for s in labels):
        raise ValidationError("option_labels must be five non-empty strings")
    return QuestionBank(items=ordered, digest=compute_digest(ordered), option_labels=labels)


def parse_bank(document: Union[str, bytes, list, dict]) -> QuestionBank:
    """Parse and validate a bank document (JSON text or already-decoded data)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bank document is not valid JSON: {exc}") from None
    option_labels = None
    if isinstance(document, dict):
        entries = document.get("items")
        option_labels = document.get("option_labels")
        if entries is None:
            raise ParseError('bank object must carry an "items" list')
    else:
        entries = document
    if not isinstance(entries, list):
        raise ParseError("bank document must be a list of entries")
    items = [_parse_item(raw, pos) for pos, raw in enumerate(entries, start=1)]
    return build_bank(items, option_labels)


def load_bank(path: Union[str, Path]) -> QuestionBank:
    """Load and validate a bank file."""
    return parse_bank(Path(path).read_text(encoding="utf-8"))


def default_bank() -> QuestionBank:
    """The shipped 58-item default bank."""
    data = resources.files("teacheval").joinpath("data/default_bank.json").read_text("utf-8")
    return parse_bank(data)


def item_at(bank: QuestionBank, index: int) -> QuestionItem:
    """Return the item at a 1-based position."""
    if not isinstance(index, int) or isinstance(index, bool) or not 1 <= index <= len(bank.items):
        raise IndexOutOfRange(f"index {index!r} outside 1..{len(bank.items)}")
    item = bank.items[index - 1]
    assert item.index == index
    return item
